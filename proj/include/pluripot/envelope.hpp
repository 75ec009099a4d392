// Constrained convex envelopes on log-domain grids.
//
// envelope(h) returns the largest componentwise-nondecreasing convex grid
// function below h.  The iteration alternates lower-convex-hull passes along
// every axis-aligned and diagonal grid line with a monotonization pass
// (suffix minima along each axis), both of which only lower values and fix
// every admissible function.
//
// In ladder mode (face_asymptotics) the truncation faces carry slope clamps:
// the outgoing slope of the envelope at a cut face must reach the asymptotic
// slope of the obstacle along that line, which is what the constraint between
// the box and log-radius -infinity degenerates to for convex functions.
#pragma once

#include <cstdint>

#include "pluripot/grid_function.hpp"

namespace pluripot {

struct EnvelopeOptions {
    double tol = 1e-8;          // sweep fixed-point tolerance (sup-change)
    int max_sweeps = 1200;
    bool face_asymptotics = false;
    int stencil_radius = 1;  // sweep directions with components up to this size
    std::vector<std::uint8_t> monotone_axes;  // empty: every axis nondecreasing
    const GridFunction* warm_start = nullptr; // must dominate the result
    // optional replacement for the fitted face slope of a clamped line,
    // keyed by direction and the line's deep-end node
    const std::function<double(const std::vector<int>&, std::size_t, double)>* sigma_override =
        nullptr;
};

struct EnvelopeResult {
    GridFunction u;
    bool degenerate = false;  // all-floor input
    int sweeps = 0;
    double final_change = 0.0;
};

namespace detail {

struct SweepLine {
    std::vector<std::uint32_t> nodes;  // flat indices, backward end first
    double step = 1.0;                 // arc length between consecutive nodes
    bool clamp = false;                // backward end is a truncation cut
    double sigma = 0.0;                // asymptotic obstacle slope along the line
    double edge_dist = 0.0;            // arc from the last node to the domain edge
    double edge_val = 0.0;             // obstacle limit at that edge
};

struct SweepPlan {
    std::vector<std::vector<int>> directions;
    std::vector<std::vector<SweepLine>> lines;  // per direction
    // per direction, per node: corrected tail slope of the line through the
    // node (only filled in ladder mode; NaN where no line exists)
    std::vector<std::vector<float>> sigma;
};

// Primitive directions with components in [-radius, radius], first nonzero
// component positive.
inline std::vector<std::vector<int>> sweep_directions(int dim, int radius = 1) {
    std::vector<std::vector<int>> dirs;
    std::vector<int> d(dim, 0);
    std::function<void(int, bool)> rec = [&](int axis, bool started) {
        if (axis == dim) {
            if (!started) return;
            int g = 0;
            for (int c : d) g = std::gcd(g, std::abs(c));
            if (g == 1) dirs.push_back(d);
            return;
        }
        for (int v = 0; v <= radius; ++v) {
            for (int sgn : {1, -1}) {
                if (v == 0 && sgn < 0) continue;
                if (!started && sgn < 0) continue;
                d[axis] = sgn * v;
                rec(axis + 1, started || v != 0);
            }
        }
        d[axis] = 0;
    };
    rec(0, false);
    return dirs;
}

// Fit v(x) ~ sigma*x + a + b*sqrt(|x|) through three deep samples and return
// sigma; exact for affine tails and for the square-root corrections used by
// the built-in singularities.
inline double tail_slope(const std::vector<double>& v, const std::vector<double>& x, double floor) {
    const std::size_t m = v.size();
    std::size_t lo = 0;
    while (lo < m && v[lo] <= floor) ++lo;
    const std::size_t n = m - lo;
    if (n < 2) return 0.0;
    const double end_slope = (v[lo + 1] - v[lo]) / (x[lo + 1] - x[lo]);
    if (n < 5) return std::max(0.0, end_slope);

    const std::size_t i0 = lo, i1 = lo + (n - 1) / 4, i2 = lo + (n - 1) / 2;
    const double xs[3] = {x[i0] - x[m - 1], x[i1] - x[m - 1], x[i2] - x[m - 1]};
    const double vs[3] = {v[i0], v[i1], v[i2]};
    // rows: [x, 1, sqrt(|x|)]
    double A[3][4];
    for (int r = 0; r < 3; ++r) {
        A[r][0] = xs[r];
        A[r][1] = 1.0;
        A[r][2] = std::sqrt(std::abs(xs[r]));
        A[r][3] = vs[r];
    }
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        if (std::abs(A[piv][c]) < 1e-13) return std::max(0.0, end_slope);
        std::swap(A[c], A[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double f = A[r][c] / A[c][c];
            for (int cc = c; cc < 4; ++cc) A[r][cc] -= f * A[c][cc];
        }
    }
    const double sigma = A[0][3] / A[0][0];
    return std::min(std::max(sigma, 0.0), std::max(0.0, end_slope));
}

inline SweepPlan build_plan(const GridFunction& h, bool face_asymptotics,
                            const std::function<double(const std::vector<int>&, std::size_t,
                                                       double)>* sigma_override = nullptr,
                            int stencil_radius = 1) {
    const Grid& g = h.grid();
    const int n = g.dim();
    SweepPlan plan;
    plan.directions = sweep_directions(n, stencil_radius);
    plan.lines.resize(plan.directions.size());
    if (face_asymptotics)
        plan.sigma.assign(plan.directions.size(),
                          std::vector<float>(g.size(), std::numeric_limits<float>::quiet_NaN()));

    // Per-node fitted tail slope of the axis lines and the all-ones diagonal,
    // used to correct per-line fits whose kink structure hides below the box.
    std::vector<std::vector<float>> axis_fit;
    std::vector<float> diag_fit;
    const float kNoFit = std::numeric_limits<float>::quiet_NaN();
    if (face_asymptotics) {
        axis_fit.assign(n, std::vector<float>(g.size(), kNoFit));
        diag_fit.assign(g.size(), kNoFit);
    }

    std::vector<int> idx, pos;
    std::vector<double> vals, xs;
    for (int phase = face_asymptotics ? 0 : 1; phase < 2; ++phase) {
        for (std::size_t di = 0; di < plan.directions.size(); ++di) {
            const auto& d = plan.directions[di];
            double step2 = 0.0;
            int support = 0, axis = -1;
            bool nonneg = true, closed = true;
            for (int a = 0; a < n; ++a) {
                step2 += d[a] * d[a] * g.spacing()[a] * g.spacing()[a];
                if (d[a] != 0) {
                    ++support;
                    axis = a;
                }
                if (d[a] < 0) nonneg = false;
                if (d[a] != 0 && !h.domain().axis_downward_closed(a)) closed = false;
            }
            const double step = std::sqrt(step2);
            const bool is_axis = (support == 1 && d[axis] == 1);
            bool all_ones = true;
            for (int a = 0; a < n; ++a)
                if (d[a] != 1) all_ones = false;
            const bool is_full_diag = all_ones;
            const bool fit_phase = (phase == 0);
            if (fit_phase && !(is_axis || is_full_diag)) continue;

            for (std::size_t k = 0; k < g.size(); ++k) {
                if (!h.in_domain(k)) continue;
                idx = g.unflat(k);
                pos = idx;
                for (int a = 0; a < n; ++a) pos[a] -= d[a];
                if (g.in_bounds(pos) && h.in_domain(g.flat(pos))) continue;  // not a line start

                SweepLine line;
                line.step = step;
                pos = idx;
                while (g.in_bounds(pos)) {
                    const std::size_t f = g.flat(pos);
                    if (!h.in_domain(f)) break;  // convex domains: one run per ray
                    line.nodes.push_back(static_cast<std::uint32_t>(f));
                    for (int a = 0; a < n; ++a) pos[a] += d[a];
                }
                if (line.nodes.size() < 2) continue;

                if (face_asymptotics && nonneg && closed) {
                    vals.resize(line.nodes.size());
                    xs.resize(line.nodes.size());
                    for (std::size_t i = 0; i < line.nodes.size(); ++i) {
                        vals[i] = h[line.nodes[i]];
                        xs[i] = step * static_cast<double>(i);
                    }
                    double fit = tail_slope(vals, xs, h.floor());
                    if (fit_phase) {
                        for (auto node : line.nodes) {
                            if (is_axis) axis_fit[axis][node] = static_cast<float>(fit);
                            else diag_fit[node] = static_cast<float>(fit);
                        }
                        continue;
                    }

                    // Kinks crossing below the deep corner show up as strict
                    // subadditivity of the diagonal fit: lower sigma to what the
                    // diagonal guarantees after the transverse tails are spent.
                    // Without diagonal evidence the per-line fit stands.
                    bool unit_comps = true;
                    for (int a = 0; a < n; ++a)
                        if (d[a] < 0 || d[a] > 1) unit_comps = false;
                    const std::size_t k0 = line.nodes[0];
                    if (n > 1 && support < n && unit_comps && !std::isnan(diag_fit[k0])) {
                        double budget = std::sqrt(double(n)) * diag_fit[k0];
                        bool usable = true;
                        for (int b = 0; b < n; ++b) {
                            if (d[b] != 0) continue;
                            if (std::isnan(axis_fit[b][k0])) usable = false;
                            else budget -= axis_fit[b][k0];
                        }
                        if (usable)
                            fit = std::min(fit, std::max(0.0, budget / std::sqrt(double(support))));
                    }
                    if (sigma_override) fit = (*sigma_override)(d, k0, fit);
                    line.clamp = true;
                    line.sigma = fit;
                    for (auto node : line.nodes) plan.sigma[di][node] = static_cast<float>(fit);

                    // Where does the domain actually end along +d past the last node?
                    const std::size_t m = line.nodes.size();
                    const auto x0 = g.coords(g.unflat(line.nodes[m - 1]));
                    std::vector<double> delta(n), xq(n);
                    for (int a = 0; a < n; ++a) delta[a] = d[a] * g.spacing()[a];
                    double lo_t = 0.0, hi_t = 1.0;
                    for (int it = 0; it < 48; ++it) {
                        const double mid = 0.5 * (lo_t + hi_t);
                        for (int a = 0; a < n; ++a) xq[a] = x0[a] + mid * delta[a];
                        (h.domain().member(xq) ? lo_t : hi_t) = mid;
                    }
                    line.edge_dist = lo_t * step;
                    const double fwd =
                        std::max(0.0, (h[line.nodes[m - 1]] - h[line.nodes[m - 2]]) / step);
                    line.edge_val = std::min(0.0, h[line.nodes[m - 1]] + fwd * line.edge_dist);
                }
                if (phase == 1) plan.lines[di].push_back(std::move(line));
            }
        }
    }
    return plan;
}

// Lower convex hull along one line; collinear points are kept so the pass is
// exactly idempotent on already-convex data.
class HullScratch {
public:
    double pass(const SweepLine& line, std::vector<double>& u) {
        const std::size_t m = line.nodes.size();
        xs_.resize(m);
        ys_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            xs_[i] = line.step * static_cast<double>(i);
            ys_[i] = u[line.nodes[i]];
        }
        hull_.clear();
        for (std::size_t i = 0; i < m; ++i) {
            while (hull_.size() >= 2) {
                const std::size_t p = hull_[hull_.size() - 1];
                const std::size_t q = hull_[hull_.size() - 2];
                // pop p if strictly above chord (q, i)
                const double lhs = (ys_[p] - ys_[q]) * (xs_[i] - xs_[q]);
                const double rhs = (ys_[i] - ys_[q]) * (xs_[p] - xs_[q]);
                if (lhs > rhs) hull_.pop_back();
                else break;
            }
            hull_.push_back(i);
        }
        double change = 0.0;
        std::size_t seg = 0;
        for (std::size_t i = 0; i < m; ++i) {
            while (seg + 1 < hull_.size() && hull_[seg + 1] < i) ++seg;
            double v;
            if (hull_[seg] == i) {
                v = ys_[i];
            } else {
                const std::size_t a = hull_[seg], b = hull_[seg + 1];
                const double w = (xs_[i] - xs_[a]) / (xs_[b] - xs_[a]);
                v = ys_[a] + w * (ys_[b] - ys_[a]);
            }
            if (v < u[line.nodes[i]]) {
                change = std::max(change, u[line.nodes[i]] - v);
                u[line.nodes[i]] = v;
            }
        }
        if (line.clamp) {
            const double cap = u[line.nodes[1]] - line.sigma * line.step;
            if (cap < u[line.nodes[0]]) {
                change = std::max(change, u[line.nodes[0]] - cap);
                u[line.nodes[0]] = cap;
            }
            const double ecap = line.edge_val - line.sigma * line.edge_dist;
            if (ecap < u[line.nodes[m - 1]]) {
                change = std::max(change, u[line.nodes[m - 1]] - ecap);
                u[line.nodes[m - 1]] = ecap;
            }
        }
        return change;
    }

private:
    std::vector<double> xs_, ys_;
    std::vector<std::size_t> hull_;
};

// u(t) <- min over in-domain s >= t of u(s), realized as per-axis suffix minima.
inline double monotonize(const SweepPlan& plan, const Grid& g,
                         const std::vector<std::uint8_t>& monotone_axes, std::vector<double>& u) {
    double change = 0.0;
    for (std::size_t di = 0; di < plan.directions.size(); ++di) {
        const auto& d = plan.directions[di];
        int axis = -1, nz = 0;
        for (int a = 0; a < g.dim(); ++a)
            if (d[a] != 0) {
                ++nz;
                axis = a;
            }
        if (nz != 1 || d[axis] != 1) continue;
        if (!monotone_axes.empty() && !monotone_axes[axis]) continue;
        for (const auto& line : plan.lines[di]) {
            for (std::size_t i = line.nodes.size() - 1; i-- > 0;) {
                const double cap = u[line.nodes[i + 1]];
                if (cap < u[line.nodes[i]]) {
                    change = std::max(change, u[line.nodes[i]] - cap);
                    u[line.nodes[i]] = cap;
                }
            }
        }
    }
    return change;
}

// Valid upper bound implied by convexity plus the face slope clamp:
// u(x_i) <= min_{j>=i} (h(x_j) - sigma*(x_j - x_i)).
inline void ray_bound_init(const SweepPlan& plan, std::vector<double>& u) {
    for (std::size_t di = 0; di < plan.directions.size(); ++di) {
        for (const auto& line : plan.lines[di]) {
            if (!line.clamp || line.sigma <= 0.0) continue;
            const double x_edge = line.step * static_cast<double>(line.nodes.size() - 1) +
                                  line.edge_dist;
            double suffix = line.edge_val - line.sigma * x_edge;
            for (std::size_t i = line.nodes.size(); i-- > 0;) {
                const double x = line.step * static_cast<double>(i);
                suffix = std::min(suffix, u[line.nodes[i]] - line.sigma * x);
                const double cap = suffix + line.sigma * x;
                if (cap < u[line.nodes[i]]) u[line.nodes[i]] = cap;
            }
        }
    }
}

} // namespace detail

inline EnvelopeResult envelope_ex(const GridFunction& h, const EnvelopeOptions& opt = {}) {
    for (std::size_t k = 0; k < h.size(); ++k)
        if (h.in_domain(k) && h[k] > 1e-12)
            throw contract_error("envelope: input must be <= 0 on its domain");

    EnvelopeResult res{h, false, 0, 0.0};
    bool all_floor = true;
    for (std::size_t k = 0; k < h.size() && all_floor; ++k)
        if (h.in_domain(k) && !h.is_floor(k)) all_floor = false;
    if (all_floor) {
        res.degenerate = true;
        return res;
    }

    const auto plan = detail::build_plan(h, opt.face_asymptotics, opt.sigma_override,
                                        opt.stencil_radius);
    auto& u = res.u.values();
    if (opt.face_asymptotics) detail::ray_bound_init(plan, u);
    if (opt.warm_start) {
        require(opt.warm_start->grid() == h.grid(), "envelope: warm start grid mismatch");
        for (std::size_t k = 0; k < u.size(); ++k)
            if (h.in_domain(k)) u[k] = std::min(u[k], (*opt.warm_start)[k]);
    }

    detail::HullScratch scratch;
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        double change = 0.0;
        for (std::size_t di = 0; di < plan.directions.size(); ++di)
            for (const auto& line : plan.lines[di])
                change = std::max(change, scratch.pass(line, u));
        change = std::max(change, detail::monotonize(plan, h.grid(), opt.monotone_axes, u));
        res.sweeps = sweep + 1;
        res.final_change = change;
        if (change < opt.tol) break;
    }
    return res;
}

inline GridFunction envelope(const GridFunction& h, const EnvelopeOptions& opt = {}) {
    return envelope_ex(h, opt).u;
}

// Largest admissible minorant of min(u, v).
inline GridFunction rooftop(const GridFunction& u, const GridFunction& v,
                            const EnvelopeOptions& opt = {}) {
    require(u.grid() == v.grid(), "rooftop: grid mismatch");
    return envelope(pointwise_min(u, v), opt);
}

// Worst violation of discrete midpoint convexity along the sweep directions.
inline double midpoint_convexity_defect(const GridFunction& u) {
    const Grid& g = u.grid();
    const auto dirs = detail::sweep_directions(g.dim());
    double worst = 0.0;
    std::vector<int> idx, lo, hi;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!u.in_domain(k) || u.is_floor(k)) continue;
        idx = g.unflat(k);
        for (const auto& d : dirs) {
            lo = idx;
            hi = idx;
            for (int a = 0; a < g.dim(); ++a) {
                lo[a] -= d[a];
                hi[a] += d[a];
            }
            if (!g.in_bounds(lo) || !g.in_bounds(hi)) continue;
            const std::size_t kl = g.flat(lo), kh = g.flat(hi);
            if (!u.in_domain(kl) || !u.in_domain(kh)) continue;
            if (u.is_floor(kl) || u.is_floor(kh)) continue;
            worst = std::max(worst, 2.0 * u[k] - u[kl] - u[kh]);
        }
    }
    return worst;
}

// Worst violation of per-axis monotonicity (nondecreasing).
inline double monotonicity_defect(const GridFunction& u) {
    const Grid& g = u.grid();
    double worst = 0.0;
    std::vector<int> idx;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!u.in_domain(k)) continue;
        idx = g.unflat(k);
        for (int a = 0; a < g.dim(); ++a) {
            auto nb = idx;
            nb[a] += 1;
            if (!g.in_bounds(nb)) continue;
            const std::size_t kn = g.flat(nb);
            if (!u.in_domain(kn)) continue;
            worst = std::max(worst, u[k] - u[kn]);
        }
    }
    return worst;
}

inline void verify_convex(const GridFunction& u, double eps) {
    if (midpoint_convexity_defect(u) > eps)
        throw contract_error("convexity contract violated beyond tolerance");
}

} // namespace pluripot
