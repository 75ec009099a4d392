// Residual functions of negative (pluri)subharmonic singularities.
//
// The residual g of phi is the monotone limit of the envelopes of
// min(phi + C, 0) over a dyadic shift ladder.  Floor and anchor nodes keep
// their unshifted obstacle at every rung, so genuine poles never dissolve;
// on toric grids the truncation faces carry asymptotic slope clamps instead.
// The ladder stops when two successive rungs agree, and for face-singular
// data it refuses shifts large enough to wash the face values out.
#pragma once

#include "pluripot/disk.hpp"
#include "pluripot/envelope.hpp"
#include "pluripot/ma_measure.hpp"

namespace pluripot {

struct LadderConfig {
    double c0 = 1.0;              // first shift; rungs are c0 * 2^k
    int k_max = 40;
    double eps_ladder = 1e-6;     // stop tolerance before grid inflation
    double saturation_fraction = 0.9;
    EnvelopeOptions envelope;     // toric backend options
    PsorOptions psor;             // disk backend options
    bool check_floor_stability = false;
};

struct ResidualReport {
    GridFunction g;
    bool converged = false;
    int rungs = 0;
    double final_gap = std::numeric_limits<double>::infinity();
    std::vector<double> shifts;
    std::vector<double> gap_trace;
    double stop_tolerance = 0.0;
    bool degenerate = false;
    bool floor_stable = true;  // meaningful when check_floor_stability is set
};

namespace detail {

inline GridFunction envelope_backend(const GridFunction& h, const LadderConfig& cfg,
                                     const GridFunction* warm) {
    if (h.domain().kind() == DomainKind::disk) {
        PsorOptions opt = cfg.psor;
        opt.warm_start = warm;
        return subharmonic_envelope(h, opt);
    }
    EnvelopeOptions opt = cfg.envelope;
    opt.face_asymptotics = true;
    opt.warm_start = warm;
    return envelope(h, opt);
}

// Shifted obstacle min(phi + C, 0); floors and anchors stay unshifted, the
// latter pinned at their singular-part values.
inline GridFunction ladder_obstacle(const GridFunction& phi, double shift) {
    GridFunction h = phi;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!h.in_domain(k)) continue;
        if (phi.is_floor(k)) {
            h[k] = std::min(phi[k], 0.0);
        } else if (phi.anchored(k)) {
            h[k] = std::min(phi.anchor_value(k), 0.0);
        } else {
            h[k] = std::min(phi[k] + shift, 0.0);
        }
    }
    h.set_anchors({});
    return h;
}

inline double effective_ladder_tol(const GridFunction& phi, const LadderConfig& cfg) {
    return std::max(cfg.eps_ladder, 0.25 * phi.grid().max_spacing() * phi.lipschitz_estimate());
}

// Largest admissible shift for toric functions whose singular data runs into
// a truncation face: shifts beyond the face depth erase the only record of
// the singularity.
inline double ladder_shift_cap(const GridFunction& phi, const LadderConfig& cfg) {
    if (!phi.domain().is_log_domain()) return std::numeric_limits<double>::infinity();
    const Grid& g = phi.grid();
    double deepest_face = 0.0;
    double min_value = 0.0;
    std::vector<int> idx;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        if (!phi.in_domain(k) || phi.is_floor(k) || phi.anchored(k)) continue;
        min_value = std::min(min_value, phi[k]);
        idx = g.unflat(k);
        for (int a = 0; a < g.dim(); ++a)
            if (idx[a] == 0 && phi.domain().axis_downward_closed(a))
                deepest_face = std::min(deepest_face, phi[k]);
    }
    double box_depth = 0.0;
    for (int a = 0; a < g.dim(); ++a) box_depth = std::min(box_depth, g.origin()[a]);
    const bool face_singular = deepest_face <= 0.5 * box_depth;
    if (!face_singular) return std::numeric_limits<double>::infinity();
    return std::max(cfg.saturation_fraction * (-min_value) - 1.0, cfg.c0);
}

inline std::vector<std::uint8_t> propagate_anchors(const GridFunction& phi,
                                                   const GridFunction& g, double keep_below) {
    if (!phi.has_anchors()) return {};
    std::vector<std::uint8_t> out(phi.anchors());
    for (std::size_t k = 0; k < out.size(); ++k)
        if (out[k] && g[k] > keep_below) out[k] = 0;
    return out;
}

inline ResidualReport run_ladder(const GridFunction& phi,
                                 const std::function<GridFunction(double, const GridFunction*)>& rung,
                                 const LadderConfig& cfg) {
    ResidualReport rep{phi, false, 0};
    rep.stop_tolerance = effective_ladder_tol(phi, cfg);
    const double cap = ladder_shift_cap(phi, cfg);

    GridFunction prev;
    bool have_prev = false;
    double prev_shift = 0.0;
    for (int k = 0; k <= cfg.k_max; ++k) {
        const double shift = cfg.c0 * std::ldexp(1.0, k);
        if (shift > cap && have_prev) break;
        GridFunction warm;
        const GridFunction* warm_ptr = nullptr;
        if (have_prev) {
            warm = shifted(prev, shift - prev_shift);
            for (std::size_t i = 0; i < warm.size(); ++i)
                if (warm.in_domain(i)) warm[i] = std::min(warm[i], 0.0);
            warm_ptr = &warm;
        }
        GridFunction cur = rung(shift, warm_ptr);
        rep.shifts.push_back(shift);
        rep.rungs = k + 1;
        if (have_prev) {
            const double gap = cur.sup_diff(prev);
            rep.gap_trace.push_back(gap);
            rep.final_gap = gap;
            prev = std::move(cur);
            prev_shift = shift;
            if (gap <= rep.stop_tolerance) {
                rep.converged = true;
                break;
            }
        } else {
            prev = std::move(cur);
            prev_shift = shift;
            have_prev = true;
        }
    }
    rep.g = std::move(prev);
    rep.g.set_anchors(propagate_anchors(phi, rep.g, -rep.stop_tolerance));
    return rep;
}

} // namespace detail

// Green-Poisson residual function: monotone ladder limit of the envelopes of
// min(phi + C, 0).
inline ResidualReport residual(const GridFunction& phi, const LadderConfig& cfg = {}) {
    phi.check_negative();
    bool all_floor = true;
    for (std::size_t k = 0; k < phi.size() && all_floor; ++k)
        if (phi.in_domain(k) && !phi.is_floor(k)) all_floor = false;
    if (all_floor) {
        ResidualReport rep{phi, true, 0};
        rep.degenerate = true;
        rep.final_gap = 0.0;
        return rep;
    }

    auto rep = detail::run_ladder(
        phi,
        [&](double shift, const GridFunction* warm) {
            return detail::envelope_backend(detail::ladder_obstacle(phi, shift), cfg, warm);
        },
        cfg);

    if (cfg.check_floor_stability) {
        GridFunction deep = phi;
        deep.set_floor(2.0 * phi.floor());
        for (std::size_t k = 0; k < deep.size(); ++k)
            if (deep.in_domain(k) && phi.is_floor(k)) deep[k] = 2.0 * phi.floor();
        LadderConfig cfg2 = cfg;
        cfg2.check_floor_stability = false;
        const auto rep2 = residual(deep, cfg2);
        rep.floor_stable = rep.g.sup_diff(rep2.g) <= 10.0 * rep.stop_tolerance;
    }
    return rep;
}

// Residual Green function g^o: the shift is imposed only on a shrinking
// collar around the interior unbounded locus.
inline ResidualReport residual_green(const GridFunction& phi, const SingularMask& mask,
                                     const LadderConfig& cfg = {}, int collar0 = 8) {
    phi.check_negative();
    ResidualReport last;
    bool have = false;
    for (int radius = collar0; radius >= 1; radius /= 2) {
        const auto collar = dilate_mask(phi.grid(), mask.interior, radius);
        GridFunction masked = phi;
        auto anchors = masked.anchors();
        for (std::size_t k = 0; k < masked.size(); ++k)
            if (masked.in_domain(k) && !collar[k]) {
                masked[k] = 0.0;
                if (!anchors.empty()) anchors[k] = 0;
            }
        masked.set_anchors(std::move(anchors));
        auto rep = detail::run_ladder(
            masked,
            [&](double shift, const GridFunction* warm) {
                return detail::envelope_backend(detail::ladder_obstacle(masked, shift), cfg, warm);
            },
            cfg);
        if (have && rep.g.sup_diff(last.g) <= rep.stop_tolerance) {
            last = std::move(rep);
            break;
        }
        last = std::move(rep);
        have = true;
    }
    return last;
}

// Residual Poisson function g^b: the shift is imposed only on a boundary
// collar around the boundary unbounded locus.
inline ResidualReport residual_poisson(const GridFunction& phi, const SingularMask& mask,
                                       const LadderConfig& cfg = {}, int collar0 = 4) {
    phi.check_negative();
    const auto collar = dilate_mask(phi.grid(), mask.boundary, collar0);
    GridFunction masked = phi;
    auto anchors = masked.anchors();
    for (std::size_t k = 0; k < masked.size(); ++k)
        if (masked.in_domain(k) && !collar[k]) {
            masked[k] = 0.0;
            if (!anchors.empty()) anchors[k] = 0;
        }
    masked.set_anchors(std::move(anchors));
    return detail::run_ladder(
        masked,
        [&](double shift, const GridFunction* warm) {
            return detail::envelope_backend(detail::ladder_obstacle(masked, shift), cfg, warm);
        },
        cfg);
}

// Asymptotic rooftop P[phi](psi): ladder limit of the envelopes of
// min(psi, phi + C).
inline ResidualReport asymptotic_rooftop(const GridFunction& phi, const GridFunction& psi,
                                         const LadderConfig& cfg = {}) {
    require(phi.grid() == psi.grid(), "asymptotic_rooftop: grid mismatch");
    phi.check_negative();
    psi.check_negative();
    return detail::run_ladder(
        phi,
        [&](double shift, const GridFunction* warm) {
            GridFunction h = detail::ladder_obstacle(phi, shift);
            for (std::size_t k = 0; k < h.size(); ++k)
                if (h.in_domain(k)) h[k] = std::min(h[k], psi[k]);
            return detail::envelope_backend(h, cfg, warm);
        },
        cfg);
}

// Least maximal majorant: increasing limit of envelopes constrained only
// outside an exhaustion of the domain by inner boxes.
inline GridFunction least_maximal_majorant(const GridFunction& phi, int steps = 5,
                                           const LadderConfig& cfg = {}) {
    phi.check_negative();
    const Grid& g = phi.grid();
    double margin0 = 0.0;
    if (phi.domain().kind() == DomainKind::disk) {
        margin0 = 0.5;
    } else {
        for (int a = 0; a < g.dim(); ++a) margin0 = std::max(margin0, -g.origin()[a]);
        margin0 *= 0.5;
    }
    GridFunction prev = phi;
    bool have = false;
    std::vector<int> idx;
    for (int j = 0; j < steps; ++j) {
        const double margin = margin0 / std::ldexp(1.0, j);
        GridFunction h = phi;
        for (std::size_t k = 0; k < h.size(); ++k) {
            if (!h.in_domain(k)) continue;
            idx = g.unflat(k);
            bool inner = true;
            if (phi.domain().kind() == DomainKind::disk) {
                const auto z = g.coords(idx);
                inner = std::hypot(z[0], z[1]) < 1.0 - margin;
            } else {
                for (int a = 0; a < g.dim() && inner; ++a) {
                    const double c = g.coord(a, idx[a]);
                    inner = (c > g.origin()[a] + margin) && (c < -margin);
                }
            }
            if (inner) h[k] = 0.0;  // unconstrained inside the exhaustion box
        }
        h.set_anchors({});
        GridFunction cur = detail::envelope_backend(h, cfg, nullptr);
        if (have && cur.sup_diff(prev) <= detail::effective_ladder_tol(phi, cfg)) {
            prev = std::move(cur);
            break;
        }
        prev = std::move(cur);
        have = true;
    }
    return prev;
}

struct SecondTermReport {
    GridFunction r;                  // P(phi - g_phi)
    ResidualReport residual_of_r;    // ladder on r, for the open question
    std::vector<std::size_t> flagged_nodes;  // mismatched floor sets
};

inline SecondTermReport residual_second_term(const GridFunction& phi, const ResidualReport& res,
                                             const LadderConfig& cfg = {}) {
    require(phi.grid() == res.g.grid(), "residual_second_term: grid mismatch");
    GridFunction diff = phi;
    SecondTermReport out{phi, {}, {}};
    for (std::size_t k = 0; k < diff.size(); ++k) {
        if (!diff.in_domain(k)) continue;
        const bool f1 = phi.is_floor(k), f2 = res.g.is_floor(k);
        if (f1 && f2) {
            diff[k] = 0.0;  // floor minus floor on the common floor set
        } else if (f1 != f2) {
            diff[k] = std::min(0.0, phi[k] - res.g[k]);
            out.flagged_nodes.push_back(k);
        } else {
            diff[k] = std::min(0.0, phi[k] - res.g[k]);
        }
    }
    diff.set_anchors({});
    out.r = detail::envelope_backend(diff, cfg, nullptr);
    out.residual_of_r = residual(out.r, cfg);
    return out;
}

enum class SingularityClass { model, approximately_model, neither, inconclusive };

inline std::string to_string(SingularityClass c) {
    switch (c) {
        case SingularityClass::model: return "model";
        case SingularityClass::approximately_model: return "approximately_model";
        case SingularityClass::neither: return "neither";
        case SingularityClass::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct ClassificationReport {
    SingularityClass verdict = SingularityClass::inconclusive;
    double model_gap = 0.0;               // sup (g - phi) off floors/anchors
    double model_threshold = 0.0;         // 2 * C_last
    double gap_growth = 1.0;              // deep-decile gap / shallow-decile gap
    std::vector<double> depth_levels;     // dyadic R rungs
    std::vector<double> ratio_trace;      // deepest-decile g/phi per rung
    std::vector<double> gap_trace;        // max (g - phi) below each level
    double extrapolated_ratio = 0.0;
};

// Model singularity: g <= phi + O(1).  On a finite grid "O(1)" is certified
// by the gap staying bounded by the ladder scale and flat across depth
// deciles; a gap that keeps growing with depth signals g - phi -> infinity.
inline ClassificationReport classify_singularity(const GridFunction& phi,
                                                 const ResidualReport& res) {
    ClassificationReport rep;
    const GridFunction& g = res.g;
    const double c_last = res.shifts.empty() ? 1.0 : res.shifts.back();
    rep.model_threshold = 2.0 * c_last;

    double min_phi = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        if (!phi.in_domain(k) || phi.is_floor(k) || phi.anchored(k)) continue;
        rep.model_gap = std::max(rep.model_gap, g[k] - phi[k]);
        min_phi = std::min(min_phi, phi[k]);
    }

    const double r_max = 0.9 * (-min_phi);
    if (r_max <= 1.0) {
        rep.verdict = SingularityClass::inconclusive;
        return rep;
    }
    for (double R = r_max; R >= r_max / 16.0; R /= 2.0) {
        std::vector<double> depths;
        for (std::size_t k = 0; k < phi.size(); ++k)
            if (phi.in_domain(k) && !phi.is_floor(k) && phi[k] < -R) depths.push_back(phi[k]);
        if (depths.size() < 8) continue;
        std::sort(depths.begin(), depths.end());
        const double decile_cut = depths[depths.size() / 10];
        double num = 0.0, den = 0.0, gap = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            if (!phi.in_domain(k) || phi.is_floor(k) || phi[k] > decile_cut) continue;
            num += g[k];
            den += phi[k];
            gap = std::max(gap, g[k] - phi[k]);
        }
        rep.depth_levels.push_back(R);
        rep.ratio_trace.push_back(den != 0.0 ? num / den : 0.0);
        rep.gap_trace.push_back(gap);
    }
    if (rep.ratio_trace.empty()) {
        rep.verdict = SingularityClass::inconclusive;
        return rep;
    }

    const double noise = grid_tolerance(phi);
    const double gap_deep = rep.gap_trace.front();
    const double gap_shallow = rep.gap_trace.back();
    rep.gap_growth = (gap_deep + noise) / (gap_shallow + noise);
    if (rep.gap_growth <= 1.25 && rep.model_gap < rep.model_threshold) {
        rep.verdict = SingularityClass::model;
        return rep;
    }

    // trace runs from the deepest R downward; the limit is at R -> infinity,
    // extrapolate back through the deepest three entries
    std::vector<double> r(rep.ratio_trace.rbegin(), rep.ratio_trace.rend());  // shallow..deep
    double extr = r.back();
    if (r.size() >= 3) extr = aitken(r[r.size() - 3], r[r.size() - 2], r[r.size() - 1]);
    rep.extrapolated_ratio = std::min(extr, 1.0);

    bool monotone = true;
    for (std::size_t i = r.size() >= 3 ? r.size() - 3 : 0; i + 1 < r.size(); ++i)
        if (r[i + 1] < r[i] - 1e-9) monotone = false;

    if (rep.extrapolated_ratio >= 0.95 && monotone)
        rep.verdict = SingularityClass::approximately_model;
    else
        rep.verdict = SingularityClass::neither;
    return rep;
}

// Disk entry point with pole auto-anchoring for functions that carry none.
inline ResidualReport residual_1d(const GridFunction& u, const LadderConfig& cfg = {}) {
    require(u.domain().kind() == DomainKind::disk, "residual_1d: disk grids only");
    if (u.has_anchors()) return residual(u, cfg);
    GridFunction v = u;
    v.set_anchors(auto_disk_anchors(u));
    return residual(v, cfg);
}

} // namespace pluripot
