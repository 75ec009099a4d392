// Weak geodesics between toric potentials.
//
// The production construction interpolates epigraphs: u_t(x) is the infimum
// of (1-t) u0(y) + t u1(z) over splittings (1-t) y + t z = x, which is the
// grid evaluation of the inverse Legendre transform of the slope-space
// interpolation (1-t) u0* + t u1*.  The Perron oracle solves the envelope
// problem on the product grid directly and is the acceptance gate for the
// construction.
#pragma once

#include "pluripot/envelope.hpp"
#include "pluripot/homogenize.hpp"
#include "pluripot/residual.hpp"

namespace pluripot {

struct GeodesicFamily {
    GridFunction u0, u1;
    std::vector<double> times;
    std::vector<GridFunction> slices;
    std::string construction;
};

// Dual pair of the endpoints on a shared slope grid, with truncation-face
// suprema marked unbounded so tails pass through duality intact.
struct GeodesicDuals {
    LegendreTransform L0, L1;
};

inline GeodesicDuals geodesic_duals(const GridFunction& u0, const GridFunction& u1,
                                    int slope_nodes = 513) {
    SlopeGrid s;
    s.dim = u0.grid().dim();
    s.nodes_per_axis = slope_nodes;
    s.p_max = 1.25 * std::max(max_discrete_gradient(u0), max_discrete_gradient(u1)) + 0.5;
    return {legendre(u0, s, true), legendre(u1, s, true)};
}

inline GridFunction geodesic_slice_from_duals(const GeodesicDuals& d, const GridFunction& u0,
                                              const GridFunction& u1, double t) {
    if (t <= 0.0) return u0;
    if (t >= 1.0) return u1;
    LegendreTransform L;
    L.slopes = d.L0.slopes;
    L.values.resize(d.L0.values.size());
    for (std::size_t i = 0; i < L.values.size(); ++i) {
        if (!std::isfinite(d.L0.values[i]) || !std::isfinite(d.L1.values[i]))
            L.values[i] = std::numeric_limits<double>::infinity();
        else
            L.values[i] = (1.0 - t) * d.L0.values[i] + t * d.L1.values[i];
    }
    GridFunction out = legendre_inverse(L, u0.grid(), u0.domain(), u0.floor());
    // the dual interpolation is a minorant construction; keep it under the chord
    for (std::size_t k = 0; k < out.size(); ++k)
        if (out.in_domain(k))
            out[k] = std::min(out[k], (1.0 - t) * u0[k] + t * u1[k]);
    return out;
}

inline GridFunction geodesic_slice(const GridFunction& u0, const GridFunction& u1, double t) {
    require(u0.grid() == u1.grid(), "geodesic: endpoint grid mismatch");
    return geodesic_slice_from_duals(geodesic_duals(u0, u1), u0, u1, t);
}

inline GeodesicFamily toric_geodesic(const GridFunction& u0, const GridFunction& u1,
                                     const std::vector<double>& times) {
    require(u0.domain().is_log_domain(), "toric_geodesic: log-domain endpoints only");
    require(u0.grid() == u1.grid(), "toric_geodesic: endpoint grid mismatch");
    const auto duals = geodesic_duals(u0, u1);
    GeodesicFamily fam{u0, u1, times, {}, "legendre"};
    for (double t : times) fam.slices.push_back(geodesic_slice_from_duals(duals, u0, u1, t));
    return fam;
}

// Product-domain Perron envelope: the largest function on base x [0,1] that
// is convex along every grid line, nondecreasing in the base axes only, <= 0
// inside, and below the endpoint data on the end slices.  The chord
// (1-s) u0 + s u1 is a valid obstacle at interior slices and carries the
// endpoint tail structure; the truncation-face slopes of the interior slices
// are the sup-convolution of the endpoint tail slopes over nonnegative
// splittings of each direction.
inline GeodesicFamily perron_oracle(const GridFunction& u0, const GridFunction& u1,
                                    int time_slices, std::size_t node_cap = 300000) {
    require(u0.grid() == u1.grid(), "perron_oracle: endpoint grid mismatch");
    require(u0.domain().is_log_domain(), "perron_oracle: log-domain endpoints only");
    require(time_slices >= 3, "perron_oracle: need at least 3 time slices");
    const Grid& base = u0.grid();
    const int n = base.dim();
    require(base.size() * static_cast<std::size_t>(time_slices) <= node_cap,
            "perron_oracle: product grid exceeds the size cap");

    std::vector<int> shape = base.shape();
    shape.push_back(time_slices);
    std::vector<double> origin = base.origin();
    origin.push_back(0.0);
    std::vector<double> spacing = base.spacing();
    spacing.push_back(1.0 / (time_slices - 1));
    Grid pg(shape, origin, spacing);

    Domain base_domain = u0.domain();
    std::vector<bool> closed(n + 1, true);
    closed[n] = false;
    Domain pdom = Domain::custom(
        n + 1,
        [base_domain, n](const std::vector<double>& x) {
            std::vector<double> t(x.begin(), x.begin() + n);
            return base_domain.member(t) && x[n] >= -1e-12 && x[n] <= 1.0 + 1e-12;
        },
        closed);

    GridFunction h(pg, pdom, u0.floor());
    std::vector<int> idx;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!h.in_domain(k)) continue;
        idx = pg.unflat(k);
        const int s = idx[n];
        std::vector<int> bidx(idx.begin(), idx.begin() + n);
        const std::size_t bk = base.flat(bidx);
        if (s == 0) {
            h[k] = u0[bk];
        } else if (s == time_slices - 1) {
            h[k] = u1[bk];
        } else {
            const double w = s * spacing[n];
            if (u0.is_floor(bk) || u1.is_floor(bk)) h[k] = std::min(u0[bk], u1[bk]);
            else h[k] = std::min(0.0, (1.0 - w) * u0[bk] + w * u1[bk]);
        }
    }

    // endpoint tail slopes per base direction
    const auto plan0 = detail::build_plan(u0, true);
    const auto plan1 = detail::build_plan(u1, true);
    const auto base_dirs = detail::sweep_directions(n);
    auto dir_index = [&](const std::vector<int>& d) -> int {
        for (std::size_t i = 0; i < base_dirs.size(); ++i)
            if (base_dirs[i] == d) return static_cast<int>(i);
        return -1;
    };

    // per-step slope of endpoint j along direction e at base node; e is
    // reduced to its primitive vector and rescaled by homogeneity
    auto step_slope = [&](int j, std::vector<int> e, std::size_t bnode) -> double {
        int gcd = 0;
        for (int a = 0; a < n; ++a) gcd = std::gcd(gcd, std::abs(e[a]));
        if (gcd == 0) return 0.0;
        for (int a = 0; a < n; ++a) e[a] /= gcd;
        int support = 0;
        for (int a = 0; a < n; ++a) support += e[a] != 0;
        const int di = dir_index(e);
        if (di < 0) return 0.0;
        const float f = (j == 0 ? plan0 : plan1).sigma[di][bnode];
        if (std::isnan(f)) return 0.0;
        return gcd * f * std::sqrt(static_cast<double>(support));  // arc -> per-step
    };

    std::function<double(const std::vector<int>&, std::size_t, double)> override_fn =
        [&](const std::vector<int>& d, std::size_t node0, double fitted) -> double {
        if (d[n] != 0) return fitted;  // mixed time directions are never clamped
        idx = pg.unflat(node0);
        const int s = idx[n];
        if (s == 0 || s == time_slices - 1) return fitted;  // endpoint slices keep their fits
        std::vector<int> bidx(idx.begin(), idx.begin() + n);
        const std::size_t bk = base.flat(bidx);
        std::vector<int> db(d.begin(), d.begin() + n);
        int support = 0;
        for (int a = 0; a < n; ++a) support += db[a] != 0;
        // sup-convolution over subset splittings of the direction support
        double best = 0.0;
        const int m = 1 << n;
        for (int mask = 0; mask < m; ++mask) {
            std::vector<int> e(n, 0), f(n, 0);
            bool valid = true;
            for (int a = 0; a < n; ++a) {
                if (db[a] == 0) {
                    if (mask & (1 << a)) valid = false;
                    continue;
                }
                if (mask & (1 << a)) e[a] = db[a];
                else f[a] = db[a];
            }
            if (!valid) continue;
            best = std::max(best, step_slope(0, e, bk) + step_slope(1, f, bk));
        }
        double arc2 = 0.0;
        for (int a = 0; a < n; ++a) arc2 += double(db[a]) * db[a];
        return best / std::sqrt(std::max(arc2, 1.0));
    };

    EnvelopeOptions opt;
    opt.face_asymptotics = true;
    opt.stencil_radius = 2;
    opt.monotone_axes.assign(n + 1, 1);
    opt.monotone_axes[n] = 0;
    opt.sigma_override = &override_fn;
    const GridFunction U = envelope(h, opt);

    GeodesicFamily fam{u0, u1, {}, {}, "perron-oracle"};
    for (int s = 0; s < time_slices; ++s) {
        fam.times.push_back(s * spacing[n]);
        GridFunction slice = u0;
        for (std::size_t bk = 0; bk < base.size(); ++bk) {
            if (!slice.in_domain(bk)) continue;
            idx = base.unflat(bk);
            idx.push_back(s);
            slice[bk] = U[pg.flat(idx)];
        }
        fam.slices.push_back(std::move(slice));
    }
    return fam;
}

// Explicit subgeodesic lower bound P(u0, u1 + C) - C t.
inline GridFunction subgeodesic_bound(const GridFunction& u0, const GridFunction& u1, double C,
                                      double t, const EnvelopeOptions& eopt = {}) {
    require(C >= 0.0 && t >= 0.0 && t <= 1.0, "subgeodesic_bound: need C >= 0, t in [0,1]");
    GridFunction h = u0;
    for (std::size_t k = 0; k < h.size(); ++k)
        if (h.in_domain(k)) h[k] = std::min(u0[k], u1.is_floor(k) ? u1[k] : u1[k] + C);
    EnvelopeOptions opt = eopt;
    opt.face_asymptotics = true;
    GridFunction p = (u0.domain().kind() == DomainKind::disk)
                         ? subharmonic_envelope(h)
                         : envelope(h, opt);
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p.in_domain(k) && !p.is_floor(k)) p[k] -= C * t;
    return p;
}

// Lebesgue stand-in for convergence in capacity: the node fraction deviating
// by more than each epsilon level.
struct DeviationMetric {
    std::vector<double> eps_levels;
    std::vector<double> fractions;
};

inline DeviationMetric deviation_metric(const GridFunction& u, const GridFunction& v,
                                        std::vector<double> eps_levels = {1e-3, 1e-2, 5e-2,
                                                                          1e-1}) {
    require(u.grid() == v.grid(), "deviation_metric: grid mismatch");
    DeviationMetric m;
    m.eps_levels = std::move(eps_levels);
    for (double eps : m.eps_levels) {
        std::size_t bad = 0, total = 0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (!u.in_domain(k)) continue;
            ++total;
            if (std::abs(u[k] - v[k]) > eps) ++bad;
        }
        m.fractions.push_back(total ? static_cast<double>(bad) / total : 0.0);
    }
    return m;
}

enum class Connectivity { connectable, not_connectable, inconclusive };

inline std::string to_string(Connectivity c) {
    switch (c) {
        case Connectivity::connectable: return "connectable";
        case Connectivity::not_connectable: return "not-connectable";
        case Connectivity::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct ConnectivityReport {
    Connectivity verdict = Connectivity::inconclusive;
    ResidualReport roof01;     // P[u1](u0)
    ResidualReport roof10;     // P[u0](u1)
    double sup_gap0 = 0.0;     // sup (u0 - P[u1](u0))
    double sup_gap1 = 0.0;
    double frac_gap0 = 0.0;    // node fraction with gap beyond m_minus
    double frac_gap1 = 0.0;
    double m_plus = 0.0, m_minus = 0.0, rho = 0.01;
};

// Geodesic connectivity via the two-sided asymptotic rooftop condition:
// connectable when both rooftops reproduce their targets within margin,
// not-connectable when either falls measurably below on a node set of
// fraction above rho.
inline ConnectivityReport connectivity_test(const GridFunction& u0, const GridFunction& u1,
                                            const LadderConfig& cfg = {}) {
    require(u0.grid() == u1.grid(), "connectivity_test: grid mismatch");
    ConnectivityReport rep;
    const double eps_env = 10.0 * u0.grid().max_spacing() *
                           std::max(u0.lipschitz_estimate(), u1.lipschitz_estimate());
    rep.m_plus = 3.0 * eps_env;
    rep.m_minus = 10.0 * eps_env;

    rep.roof01 = asymptotic_rooftop(u1, u0, cfg);
    rep.roof10 = asymptotic_rooftop(u0, u1, cfg);
    if (!rep.roof01.converged || !rep.roof10.converged) {
        rep.verdict = Connectivity::inconclusive;
        return rep;
    }

    std::size_t total = 0, bad0 = 0, bad1 = 0;
    for (std::size_t k = 0; k < u0.size(); ++k) {
        if (!u0.in_domain(k)) continue;
        ++total;
        const double d0 = u0[k] - rep.roof01.g[k];
        const double d1 = u1[k] - rep.roof10.g[k];
        rep.sup_gap0 = std::max(rep.sup_gap0, d0);
        rep.sup_gap1 = std::max(rep.sup_gap1, d1);
        if (d0 > rep.m_minus) ++bad0;
        if (d1 > rep.m_minus) ++bad1;
    }
    rep.frac_gap0 = total ? static_cast<double>(bad0) / total : 0.0;
    rep.frac_gap1 = total ? static_cast<double>(bad1) / total : 0.0;

    if (rep.sup_gap0 <= rep.m_plus && rep.sup_gap1 <= rep.m_plus)
        rep.verdict = Connectivity::connectable;
    else if (rep.frac_gap0 > rep.rho || rep.frac_gap1 > rep.rho)
        rep.verdict = Connectivity::not_connectable;
    else
        rep.verdict = Connectivity::inconclusive;
    return rep;
}

} // namespace pluripot
