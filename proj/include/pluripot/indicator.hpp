// Exact polyhedral semiring of indicator singularities: upward-closed convex
// sets Gamma = conv{a_i} + R^n_+ in the positive orthant, with rooftop
// (intersection), max (hull of union) and addition (Minkowski sum) realized
// in exact rational arithmetic.  n <= 3.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <optional>

#include "pluripot/grid_function.hpp"

namespace pluripot {

using Rational = boost::multiprecision::cpp_rational;

inline Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        const Rational num(s.substr(0, slash));
        const Rational den(s.substr(slash + 1));
        if (den == 0) throw parse_error("rational with zero denominator: " + s);
        return num / den;
    }
    const auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        const std::size_t places = s.size() - dot - 1;
        Rational den = 1;
        for (std::size_t i = 0; i < places; ++i) den *= 10;
        return Rational(boost::multiprecision::cpp_int(digits)) / den;
    }
    return Rational(boost::multiprecision::cpp_int(s));
}

using RationalPoint = std::vector<Rational>;

namespace detail {

inline Rational dot(const RationalPoint& a, const RationalPoint& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Exact feasibility of {mu in R^m : G mu <= g}, m <= 3, assuming the feasible
// set is bounded (so nonempty implies it has a vertex).
inline bool bounded_system_feasible(const std::vector<RationalPoint>& G,
                                    const std::vector<Rational>& g, int m) {
    const int rows = static_cast<int>(G.size());
    auto feasible_point = [&](const RationalPoint& mu) {
        for (int r = 0; r < rows; ++r)
            if (detail::dot(G[r], mu) > g[r]) return false;
        return true;
    };
    std::vector<int> pick(m);
    std::function<bool(int, int)> rec = [&](int depth, int from) -> bool {
        if (depth == m) {
            // solve the m x m equality system by Gaussian elimination
            std::vector<RationalPoint> A(m, RationalPoint(m + 1));
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) A[r][c] = G[pick[r]][c];
                A[r][m] = g[pick[r]];
            }
            for (int c = 0; c < m; ++c) {
                int piv = -1;
                for (int r = c; r < m; ++r)
                    if (A[r][c] != 0) {
                        piv = r;
                        break;
                    }
                if (piv < 0) return false;
                std::swap(A[c], A[piv]);
                for (int r = 0; r < m; ++r) {
                    if (r == c || A[r][c] == 0) continue;
                    const Rational f = A[r][c] / A[c][c];
                    for (int cc = c; cc <= m; ++cc) A[r][cc] -= f * A[c][cc];
                }
            }
            RationalPoint mu(m);
            for (int c = 0; c < m; ++c) mu[c] = A[c][m] / A[c][c];
            return feasible_point(mu);
        }
        for (int r = from; r < rows; ++r) {
            pick[depth] = r;
            if (rec(depth + 1, r + 1)) return true;
        }
        return false;
    };
    if (m == 0) return feasible_point({});
    return rec(0, 0);
}

// Is p dominated by conv(points) + R^n_+ ?  Caratheodory: combinations of at
// most n+1 points suffice.
inline bool dominated(const RationalPoint& p, const std::vector<RationalPoint>& points) {
    const int n = static_cast<int>(p.size());
    const int N = static_cast<int>(points.size());
    for (int size = 1; size <= std::min(N, n + 1); ++size) {
        std::vector<int> pick(size);
        std::function<bool(int, int)> rec = [&](int depth, int from) -> bool {
            if (depth == size) {
                // lambda_{size-1} = 1 - sum(mu); mu in R^{size-1}
                const int m = size - 1;
                std::vector<RationalPoint> G;
                std::vector<Rational> g;
                for (int c = 0; c < m; ++c) {  // mu_c >= 0
                    RationalPoint row(m, Rational(0));
                    row[c] = -1;
                    G.push_back(row);
                    g.push_back(Rational(0));
                }
                {
                    RationalPoint row(m, Rational(1));  // sum mu <= 1
                    G.push_back(row);
                    g.push_back(Rational(1));
                }
                const auto& last = points[pick[size - 1]];
                for (int coord = 0; coord < n; ++coord) {
                    RationalPoint row(m);
                    for (int c = 0; c < m; ++c)
                        row[c] = points[pick[c]][coord] - last[coord];
                    G.push_back(row);
                    g.push_back(p[coord] - last[coord]);
                }
                return bounded_system_feasible(G, g, m);
            }
            for (int r = from; r < N; ++r) {
                pick[depth] = r;
                if (rec(depth + 1, r + 1)) return true;
            }
            return false;
        };
        if (rec(0, 0)) return true;
    }
    return false;
}

} // namespace detail

class GammaSet {
public:
    GammaSet() = default;

    explicit GammaSet(std::vector<RationalPoint> generators) : gens_(std::move(generators)) {
        require(!gens_.empty(), "gamma set: at least one generator");
        dim_ = static_cast<int>(gens_[0].size());
        require(dim_ >= 1 && dim_ <= 3, "gamma set: dimension must be 1..3");
        for (const auto& a : gens_) {
            require(static_cast<int>(a.size()) == dim_, "gamma set: mixed dimensions");
            for (const auto& c : a)
                require(c >= 0, "gamma set: generators must lie in the positive orthant");
        }
        prune();
    }

    int dim() const { return dim_; }
    const std::vector<RationalPoint>& generators() const { return gens_; }

    bool operator==(const GammaSet& o) const { return dim_ == o.dim_ && gens_ == o.gens_; }

    // psi_Gamma(t) = max_i <a_i, t> for t <= 0 (the sup over Gamma is attained
    // on generators there).
    Rational support(const RationalPoint& t) const {
        require(static_cast<int>(t.size()) == dim_, "support: dimension mismatch");
        for (const auto& c : t)
            if (c > 0) throw contract_error("support: defined on the negative orthant only");
        Rational best = detail::dot(gens_[0], t);
        for (std::size_t i = 1; i < gens_.size(); ++i)
            best = std::max(best, detail::dot(gens_[i], t));
        return best;
    }

    // Directional singularity weight: -psi(-a) = min_i <a_i, a>, a >= 0.
    Rational lelong(const RationalPoint& a) const {
        require(static_cast<int>(a.size()) == dim_, "lelong: dimension mismatch");
        bool nonzero = false;
        for (const auto& c : a) {
            require(c >= 0, "lelong: direction must be >= 0");
            if (c != 0) nonzero = true;
        }
        require(nonzero, "lelong: zero direction");
        Rational best = detail::dot(gens_[0], a);
        for (std::size_t i = 1; i < gens_.size(); ++i)
            best = std::min(best, detail::dot(gens_[i], a));
        return best;
    }

private:
    void prune() {
        // drop exact duplicates first
        std::sort(gens_.begin(), gens_.end());
        gens_.erase(std::unique(gens_.begin(), gens_.end()), gens_.end());
        for (std::size_t i = 0; i < gens_.size();) {
            std::vector<RationalPoint> others;
            for (std::size_t j = 0; j < gens_.size(); ++j)
                if (j != i) others.push_back(gens_[j]);
            if (!others.empty() && detail::dominated(gens_[i], others))
                gens_.erase(gens_.begin() + static_cast<std::ptrdiff_t>(i));
            else
                ++i;
        }
        std::sort(gens_.begin(), gens_.end());
    }

    int dim_ = 0;
    std::vector<RationalPoint> gens_;
};

inline GammaSet hull_union(const GammaSet& g1, const GammaSet& g2) {
    require(g1.dim() == g2.dim(), "hull_union: dimension mismatch");
    auto gens = g1.generators();
    for (const auto& a : g2.generators()) gens.push_back(a);
    return GammaSet(std::move(gens));
}

inline GammaSet minkowski_sum(const GammaSet& g1, const GammaSet& g2) {
    require(g1.dim() == g2.dim(), "minkowski_sum: dimension mismatch");
    std::vector<RationalPoint> gens;
    for (const auto& a : g1.generators())
        for (const auto& b : g2.generators()) {
            RationalPoint s(a.size());
            for (std::size_t c = 0; c < a.size(); ++c) s[c] = a[c] + b[c];
            gens.push_back(std::move(s));
        }
    return GammaSet(std::move(gens));
}

namespace detail {

// Inner normals (>= 0, exact) of all candidate facets of conv(A) + R^n_+.
inline std::vector<RationalPoint> facet_normals(const std::vector<RationalPoint>& A, int n) {
    std::vector<RationalPoint> out;
    auto push = [&](RationalPoint nu) {
        bool nonneg = true, nonzero = false;
        for (auto& c : nu) {
            if (c < 0) nonneg = false;
            if (c != 0) nonzero = true;
        }
        if (!nonneg || !nonzero) {
            for (auto& c : nu) c = -c;
            nonneg = true;
            nonzero = false;
            for (const auto& c : nu) {
                if (c < 0) nonneg = false;
                if (c != 0) nonzero = true;
            }
        }
        if (!nonneg || !nonzero) return;
        // normalize: divide by the first nonzero entry's absolute value
        Rational scale = 0;
        for (const auto& c : nu)
            if (c != 0) {
                scale = c;
                break;
            }
        for (auto& c : nu) c /= scale;
        out.push_back(std::move(nu));
    };
    for (int b = 0; b < n; ++b) {
        RationalPoint e(n, Rational(0));
        e[b] = 1;
        push(e);
    }
    const int N = static_cast<int>(A.size());
    if (n == 2) {
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j) {
                RationalPoint d{A[i][0] - A[j][0], A[i][1] - A[j][1]};
                push({d[1], -d[0]});
            }
    } else if (n == 3) {
        auto cross = [&](const RationalPoint& u, const RationalPoint& v) {
            return RationalPoint{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
                                 u[0] * v[1] - u[1] * v[0]};
        };
        std::vector<RationalPoint> dirs;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                dirs.push_back({A[i][0] - A[j][0], A[i][1] - A[j][1], A[i][2] - A[j][2]});
        for (int b = 0; b < n; ++b) {
            RationalPoint e(n, Rational(0));
            e[b] = 1;
            dirs.push_back(e);
        }
        for (std::size_t i = 0; i < dirs.size(); ++i)
            for (std::size_t j = i + 1; j < dirs.size(); ++j) push(cross(dirs[i], dirs[j]));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace detail

// Rooftop of indicators: Gamma1 cap Gamma2, via joint halfspace representation
// and exact vertex enumeration (n <= 3).
inline GammaSet intersect(const GammaSet& g1, const GammaSet& g2) {
    require(g1.dim() == g2.dim(), "intersect: dimension mismatch");
    const int n = g1.dim();

    if (n == 1) {
        return GammaSet({{std::max(g1.generators()[0][0], g2.generators()[0][0])}});
    }

    auto normals = detail::facet_normals(g1.generators(), n);
    for (auto& nu : detail::facet_normals(g2.generators(), n)) normals.push_back(nu);
    std::sort(normals.begin(), normals.end());
    normals.erase(std::unique(normals.begin(), normals.end()), normals.end());

    std::vector<Rational> rhs(normals.size());
    for (std::size_t i = 0; i < normals.size(); ++i)
        rhs[i] = std::max(g1.lelong(normals[i]), g2.lelong(normals[i]));

    // vertices: n-subsets of tight constraints, kept if feasible for all
    std::vector<RationalPoint> verts;
    const int M = static_cast<int>(normals.size());
    std::vector<int> pick(n);
    std::function<void(int, int)> rec = [&](int depth, int from) {
        if (depth == n) {
            std::vector<RationalPoint> A(n, RationalPoint(n + 1));
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) A[r][c] = normals[pick[r]][c];
                A[r][n] = rhs[pick[r]];
            }
            for (int c = 0; c < n; ++c) {
                int piv = -1;
                for (int r = c; r < n; ++r)
                    if (A[r][c] != 0) {
                        piv = r;
                        break;
                    }
                if (piv < 0) return;
                std::swap(A[c], A[piv]);
                for (int r = 0; r < n; ++r) {
                    if (r == c || A[r][c] == 0) continue;
                    const Rational f = A[r][c] / A[c][c];
                    for (int cc = c; cc <= n; ++cc) A[r][cc] -= f * A[c][cc];
                }
            }
            RationalPoint x(n);
            for (int c = 0; c < n; ++c) x[c] = A[c][n] / A[c][c];
            for (int r = 0; r < M; ++r)
                if (detail::dot(normals[r], x) < rhs[r]) return;
            verts.push_back(std::move(x));
            return;
        }
        for (int r = from; r < M; ++r) {
            pick[depth] = r;
            rec(depth + 1, r + 1);
        }
    };
    rec(0, 0);
    require(!verts.empty(), "intersect: empty vertex set (unexpected for up-closed sets)");
    return GammaSet(std::move(verts));
}

// Exact sampling of psi_Gamma on a polydisk log-domain grid.
inline GridFunction indicator_to_grid(const GammaSet& gamma, const Grid& grid,
                                      double floor = kDefaultFloor) {
    require(grid.dim() == gamma.dim(), "indicator_to_grid: dimension mismatch");
    Domain dom = Domain::polydisk(gamma.dim());
    GridFunction u(grid, dom, floor);
    std::vector<double> g_as_double;
    std::vector<std::vector<double>> gens;
    for (const auto& a : gamma.generators()) {
        std::vector<double> v(a.size());
        for (std::size_t c = 0; c < a.size(); ++c) v[c] = static_cast<double>(a[c]);
        gens.push_back(std::move(v));
    }
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.in_domain(k)) continue;
        const auto t = grid.coords(grid.unflat(k));
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& a : gens) {
            double dot = 0.0;
            for (std::size_t c = 0; c < a.size(); ++c) dot += a[c] * t[c];
            best = std::max(best, dot);
        }
        u[k] = std::max(best, floor);
    }
    return u;
}

} // namespace pluripot
