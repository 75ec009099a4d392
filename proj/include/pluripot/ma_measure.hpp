// Discrete Monge-Ampere (Alexandrov) measures of convex nondecreasing grid
// functions in log coordinates, n <= 2.
//
// The mass at a node is n! times the Lebesgue volume of its subgradient cell
// {p >= 0 : <p, s-t> <= u(s)-u(t) for grid nodes s}.  Truncation-face nodes
// keep their fan cells, which is where the mass of a pole sitting at
// log-radius -infinity lands; the normalization makes t1 (= log|z1|) carry
// zero mass and t1+t2 (= log|z1 z2|) carry its classical mass 2.
#pragma once

#include "pluripot/envelope.hpp"
#include "pluripot/legendre.hpp"

namespace pluripot {

struct DiscreteMeasure {
    std::vector<std::size_t> support;  // nodes with positive mass
    std::vector<double> mass;
    double total = 0.0;

    double mass_on(const std::vector<std::uint8_t>& node_mask) const {
        double s = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i)
            if (node_mask[support[i]]) s += mass[i];
        return s;
    }

    DiscreteMeasure restrict_to(const std::vector<std::uint8_t>& node_mask) const {
        DiscreteMeasure r;
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (!node_mask[support[i]]) continue;
            r.support.push_back(support[i]);
            r.mass.push_back(mass[i]);
            r.total += mass[i];
        }
        return r;
    }
};

namespace detail {

// Clip a convex polygon by <n,p> <= c (Sutherland-Hodgman).
inline void clip_polygon(std::vector<double>& xs, std::vector<double>& ys, double nx, double ny,
                         double c) {
    static thread_local std::vector<double> ox, oy;
    ox.clear();
    oy.clear();
    const std::size_t m = xs.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = (i + 1) % m;
        const double di = nx * xs[i] + ny * ys[i] - c;
        const double dj = nx * xs[j] + ny * ys[j] - c;
        if (di <= 0) {
            ox.push_back(xs[i]);
            oy.push_back(ys[i]);
        }
        if ((di < 0 && dj > 0) || (di > 0 && dj < 0)) {
            const double w = di / (di - dj);
            ox.push_back(xs[i] + w * (xs[j] - xs[i]));
            oy.push_back(ys[i] + w * (ys[j] - ys[i]));
        }
    }
    xs = ox;
    ys = oy;
}

inline double polygon_area(const std::vector<double>& xs, const std::vector<double>& ys) {
    double a = 0.0;
    const std::size_t m = xs.size();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = (i + 1) % m;
        a += xs[i] * ys[j] - xs[j] * ys[i];
    }
    return 0.5 * std::abs(a);
}

} // namespace detail

struct MaOptions {
    double eps_convexity = -1.0;  // <0: derive from grid tolerance
    int stencil_radius = 0;       // 0: constraints from every node (exact)
};

inline DiscreteMeasure ma_measure(const GridFunction& u, const MaOptions& opt = {}) {
    const Grid& g = u.grid();
    const int n = g.dim();
    require(u.domain().is_log_domain(), "ma_measure: toric (log-domain) functions only");
    require(n <= 2, "ma_measure: implemented for n <= 2");
    const double eps = opt.eps_convexity >= 0 ? opt.eps_convexity : grid_tolerance(u);
    if (midpoint_convexity_defect(u) > eps)
        throw contract_error("ma_measure: input fails the midpoint convexity test");

    const double pcap = max_discrete_gradient(u) + 1.0;
    DiscreteMeasure out;

    std::vector<std::size_t> active;
    std::vector<std::vector<double>> coords;
    std::vector<std::uint8_t> carries(g.size(), 0);
    std::vector<int> idx;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!u.in_domain(k) || u.is_floor(k)) continue;
        active.push_back(k);
        coords.push_back(g.coords(g.unflat(k)));
        // Nodes on the shallow boundary have upward-unbounded cells; their
        // mass belongs to the boundary data, not the residual measure.
        idx = g.unflat(k);
        bool fwd = true;
        for (int a = 0; a < n && fwd; ++a) {
            auto nb = idx;
            nb[a] += 1;
            if (!g.in_bounds(nb) || !u.in_domain(g.flat(nb)) || u.is_floor(g.flat(nb))) fwd = false;
        }
        carries[k] = fwd ? 1 : 0;
    }

    std::vector<double> xs, ys;
    for (std::size_t ii = 0; ii < active.size(); ++ii) {
        const std::size_t k = active[ii];
        if (!carries[k]) continue;
        const auto& t = coords[ii];
        double cell = 0.0;
        if (n == 1) {
            double lo = 0.0, hi = pcap;
            for (std::size_t jj = 0; jj < active.size(); ++jj) {
                if (jj == ii) continue;
                const double dx = coords[jj][0] - t[0];
                if (opt.stencil_radius > 0 &&
                    std::abs(dx) > opt.stencil_radius * g.spacing()[0] * 1.001)
                    continue;
                const double dv = u[active[jj]] - u[k];
                if (dx > 0) hi = std::min(hi, dv / dx);
                else lo = std::max(lo, dv / dx);
            }
            cell = std::max(0.0, hi - lo);
        } else {
            xs = {0.0, pcap, pcap, 0.0};
            ys = {0.0, 0.0, pcap, pcap};
            for (std::size_t jj = 0; jj < active.size() && !xs.empty(); ++jj) {
                if (jj == ii) continue;
                const double dx = coords[jj][0] - t[0];
                const double dy = coords[jj][1] - t[1];
                if (opt.stencil_radius > 0 &&
                    std::max(std::abs(dx), std::abs(dy)) >
                        opt.stencil_radius * g.max_spacing() * 1.001)
                    continue;
                detail::clip_polygon(xs, ys, dx, dy, u[active[jj]] - u[k]);
            }
            cell = xs.size() >= 3 ? 2.0 * detail::polygon_area(xs, ys) : 0.0;  // n! = 2
        }
        if (cell > 0.0) {
            out.support.push_back(k);
            out.mass.push_back(cell);
            out.total += cell;
        }
    }
    return out;
}

} // namespace pluripot
