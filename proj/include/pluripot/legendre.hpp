// Discrete Legendre transforms on slope grids restricted to the positive
// orthant; dropping negative slopes is what enforces the componentwise
// nondecreasing constraint exactly.
#pragma once

#include "pluripot/grid_function.hpp"

namespace pluripot {

struct SlopeGrid {
    int dim = 0;
    int nodes_per_axis = 0;
    double p_max = 0.0;

    double spacing() const { return p_max / std::max(1, nodes_per_axis - 1); }
    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(nodes_per_axis);
        return s;
    }
    std::vector<double> slope(std::size_t f) const {
        std::vector<double> p(dim);
        for (int a = dim - 1; a >= 0; --a) {
            p[a] = spacing() * static_cast<double>(f % nodes_per_axis);
            f /= nodes_per_axis;
        }
        return p;
    }
};

struct LegendreTransform {
    SlopeGrid slopes;
    std::vector<double> values;          // u*(p) per slope node
    double clipped_gradient_fraction = 0.0;  // coverage diagnostic
};

// Largest per-axis forward difference quotient, the gradient scale u* must cover.
inline double max_discrete_gradient(const GridFunction& u) {
    const Grid& g = u.grid();
    double mx = 0.0;
    std::vector<int> idx;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!u.in_domain(k) || u.is_floor(k)) continue;
        idx = g.unflat(k);
        for (int a = 0; a < g.dim(); ++a) {
            auto nb = idx;
            nb[a] += 1;
            if (!g.in_bounds(nb)) continue;
            const std::size_t kn = g.flat(nb);
            if (!u.in_domain(kn) || u.is_floor(kn)) continue;
            mx = std::max(mx, (u[kn] - u[k]) / g.spacing()[a]);
        }
    }
    return mx;
}

// When mark_unbounded is set, slopes whose supremum is attained only on a
// truncation face are recorded as +infinity: on the untruncated domain the
// supremum keeps growing there, so those slopes lie outside the true dual
// domain.  This is what carries a singularity's tail through duality.
inline LegendreTransform legendre(const GridFunction& u, const SlopeGrid& slopes,
                                  bool mark_unbounded = false) {
    require(slopes.dim == u.grid().dim(), "legendre: slope grid rank mismatch");
    LegendreTransform L;
    L.slopes = slopes;
    L.values.assign(slopes.size(), -std::numeric_limits<double>::infinity());

    const double grad = max_discrete_gradient(u);
    if (grad > slopes.p_max) L.clipped_gradient_fraction = (grad - slopes.p_max) / grad;

    const Grid& g = u.grid();
    const int n = g.dim();
    std::vector<std::vector<double>> coords;
    std::vector<double> vals;
    std::vector<std::uint8_t> deep;  // sample lies on a truncation face
    std::vector<int> idx;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!u.in_domain(k) || u.is_floor(k)) continue;
        idx = g.unflat(k);
        const auto x = g.coords(idx);
        coords.push_back(x);
        vals.push_back(u[k]);
        bool on_face = false;
        for (int a = 0; a < n; ++a)
            if (idx[a] == 0 && u.domain().axis_downward_closed(a)) on_face = true;
        deep.push_back(on_face ? 1 : 0);

        // Virtual samples at the shallow domain edge: the half-open grid stops
        // one cell short of it, which would bias the supremum by O(h |p|).
        for (int a = 0; a < n; ++a) {
            auto nb = idx;
            nb[a] += 1;
            if (g.in_bounds(nb) && u.in_domain(g.flat(nb))) continue;
            std::vector<double> xe = x;
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 40; ++it) {
                const double mid = 0.5 * (lo + hi);
                xe[a] = x[a] + mid * g.spacing()[a];
                (u.domain().member(xe) ? lo : hi) = mid;
            }
            xe[a] = x[a] + lo * g.spacing()[a];
            double slope = 0.0;
            auto pb = idx;
            pb[a] -= 1;
            if (g.in_bounds(pb) && u.in_domain(g.flat(pb)) && !u.is_floor(g.flat(pb)))
                slope = std::max(0.0, (u[k] - u[g.flat(pb)]) / g.spacing()[a]);
            coords.push_back(xe);
            vals.push_back(std::min(0.0, u[k] + slope * lo * g.spacing()[a]));
            deep.push_back(0);
        }
    }
    for (std::size_t pf = 0; pf < slopes.size(); ++pf) {
        const auto p = slopes.slope(pf);
        double best = -std::numeric_limits<double>::infinity();
        double best_shallow = best;
        for (std::size_t i = 0; i < coords.size(); ++i) {
            double dot = 0.0;
            for (int a = 0; a < n; ++a) dot += p[a] * coords[i][a];
            const double v = dot - vals[i];
            best = std::max(best, v);
            if (!deep[i]) best_shallow = std::max(best_shallow, v);
        }
        if (mark_unbounded && best > best_shallow + 1e-12)
            L.values[pf] = std::numeric_limits<double>::infinity();
        else
            L.values[pf] = best;
    }
    return L;
}

inline GridFunction legendre_inverse(const LegendreTransform& L, const Grid& grid,
                                     const Domain& domain, double floor = kDefaultFloor) {
    GridFunction u(grid, domain, floor);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.in_domain(k)) continue;
        const auto t = grid.coords(grid.unflat(k));
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t pf = 0; pf < L.slopes.size(); ++pf) {
            if (!std::isfinite(L.values[pf])) continue;
            const auto p = L.slopes.slope(pf);
            double dot = 0.0;
            for (int a = 0; a < L.slopes.dim; ++a) dot += p[a] * t[a];
            best = std::max(best, dot - L.values[pf]);
        }
        u[k] = std::max(best, floor);
    }
    return u;
}

// Slope grid sized from the function's own gradient range plus headroom.
inline SlopeGrid auto_slope_grid(const GridFunction& u, int nodes_per_axis = 129) {
    SlopeGrid s;
    s.dim = u.grid().dim();
    s.nodes_per_axis = nodes_per_axis;
    s.p_max = 1.25 * max_discrete_gradient(u) + 0.5;
    return s;
}

} // namespace pluripot
