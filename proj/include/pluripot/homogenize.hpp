// Positively homogeneous hull of a convex nondecreasing function on the
// polydisk log-domain: the value of u(m t)/m at the largest dilation m
// keeping m*t inside the truncation box.
#pragma once

#include "pluripot/grid_function.hpp"

namespace pluripot {

// Multilinear interpolation; coordinates are clamped to the grid's range.
inline double interpolate(const GridFunction& u, std::vector<double> x) {
    const Grid& g = u.grid();
    const int n = g.dim();
    std::vector<int> base(n);
    std::vector<double> w(n);
    for (int a = 0; a < n; ++a) {
        const double lo = g.origin()[a];
        const double hi = g.coord(a, g.shape()[a] - 1);
        x[a] = std::min(std::max(x[a], lo), hi);
        double f = (x[a] - lo) / g.spacing()[a];
        int i = static_cast<int>(std::floor(f));
        i = std::min(std::max(i, 0), g.shape()[a] - 2 >= 0 ? g.shape()[a] - 2 : 0);
        base[a] = i;
        w[a] = f - i;
    }
    double val = 0.0;
    std::vector<int> idx(n);
    for (int corner = 0; corner < (1 << n); ++corner) {
        double weight = 1.0;
        for (int a = 0; a < n; ++a) {
            const int bit = (corner >> a) & 1;
            idx[a] = std::min(base[a] + bit, g.shape()[a] - 1);
            weight *= bit ? w[a] : 1.0 - w[a];
        }
        if (weight > 0.0) val += weight * u[g.flat(idx)];
    }
    return val;
}

inline GridFunction homogenize(const GridFunction& u) {
    require(u.domain().kind() == DomainKind::polydisk,
            "homogenize: dilation z -> z^m needs a polydisk log-domain");
    const Grid& g = u.grid();
    GridFunction out = u;
    std::vector<int> idx;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.in_domain(k)) continue;
        idx = g.unflat(k);
        double m = std::numeric_limits<double>::infinity();
        std::vector<double> t = g.coords(idx);
        for (int a = 0; a < g.dim(); ++a)
            if (t[a] < 0.0) m = std::min(m, g.origin()[a] / t[a]);
        if (!std::isfinite(m) || m < 1.0) m = 1.0;
        std::vector<double> mt(t);
        for (int a = 0; a < g.dim(); ++a) mt[a] *= m;
        out[k] = std::max(interpolate(u, mt) / m, u.floor());
    }
    return out;
}

} // namespace pluripot
