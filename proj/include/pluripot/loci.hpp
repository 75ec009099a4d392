// Unbounded-locus proxies: interior mask L and boundary mask BL.
#pragma once

#include "pluripot/grid_function.hpp"

namespace pluripot {

struct SingularMask {
    std::vector<std::uint8_t> interior;  // L: nodes with value < tau
    std::vector<std::uint8_t> boundary;  // BL: boundary nodes whose inward neighborhood dips below tau
    double threshold = 0.0;

    std::size_t interior_count() const {
        std::size_t c = 0;
        for (auto b : interior) c += b;
        return c;
    }
    std::size_t boundary_count() const {
        std::size_t c = 0;
        for (auto b : boundary) c += b;
        return c;
    }
};

// Boundary nodes: in-domain nodes with an out-of-domain (or out-of-box through
// an upper face) axis neighbor.  Lower box faces are truncation cuts, not
// boundary; the domain continues toward -infinity there.
inline std::vector<std::uint8_t> boundary_nodes(const GridFunction& u) {
    const Grid& g = u.grid();
    std::vector<std::uint8_t> out(g.size(), 0);
    std::vector<int> idx;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!u.in_domain(k)) continue;
        idx = g.unflat(k);
        bool bdry = false;
        for (int a = 0; a < g.dim() && !bdry; ++a) {
            auto nb = idx;
            nb[a] += 1;
            if (!g.in_bounds(nb) || !u.in_domain(g.flat(nb))) bdry = true;
            if (u.domain().kind() == DomainKind::disk) {
                nb[a] -= 2;
                if (!bdry && (!g.in_bounds(nb) || !u.in_domain(g.flat(nb)))) bdry = true;
            }
        }
        if (bdry) out[k] = 1;
    }
    return out;
}

inline SingularMask detect_loci(const GridFunction& u, double tau) {
    require(tau > u.floor(), "detect_loci: threshold must exceed the floor");
    SingularMask m;
    m.threshold = tau;
    m.interior.assign(u.size(), 0);
    m.boundary.assign(u.size(), 0);
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u.in_domain(k) && u[k] < tau) m.interior[k] = 1;

    const auto bdry = boundary_nodes(u);
    const Grid& g = u.grid();
    std::vector<int> idx;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!bdry[k]) continue;
        double dip = u[k];
        idx = g.unflat(k);
        for (int a = 0; a < g.dim(); ++a) {
            for (int s : {-1, 1}) {
                auto nb = idx;
                nb[a] += s;
                if (g.in_bounds(nb) && u.in_domain(g.flat(nb)))
                    dip = std::min(dip, u[g.flat(nb)]);
            }
        }
        if (dip < tau) m.boundary[k] = 1;
    }
    return m;
}

// Chebyshev-ball dilation of a node mask by radius*spacing.
inline std::vector<std::uint8_t> dilate_mask(const Grid& g, const std::vector<std::uint8_t>& mask,
                                             int radius) {
    std::vector<std::uint8_t> out(mask);
    if (radius <= 0) return out;
    std::vector<int> idx;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!mask[k]) continue;
        idx = g.unflat(k);
        std::vector<int> nb(idx.size());
        std::function<void(int)> rec = [&](int axis) {
            if (axis == g.dim()) {
                out[g.flat(nb)] = 1;
                return;
            }
            for (int d = -radius; d <= radius; ++d) {
                nb[axis] = idx[axis] + d;
                if (nb[axis] < 0 || nb[axis] >= g.shape()[axis]) continue;
                rec(axis + 1);
            }
        };
        rec(0);
    }
    return out;
}

} // namespace pluripot
