// Unit-disk instantiation: Green potentials, Poisson integrals, the PSOR
// obstacle solver for subharmonic envelopes, and the 1-D residual ladder.
//
// Grids are cell-centered Cartesian on [-1,1]^2 so that kernel singularities
// never sit on a node.  Atom potentials are evaluated in closed form with the
// reflected (Mobius) correction, densities by midpoint quadrature.
#pragma once

#include "pluripot/loci.hpp"

namespace pluripot {

inline Grid make_disk_grid(int nodes_per_axis) {
    const double h = 2.0 / nodes_per_axis;
    return Grid({nodes_per_axis, nodes_per_axis}, {-1.0 + 0.5 * h, -1.0 + 0.5 * h}, {h, h});
}

inline GridFunction make_disk_function(int nodes_per_axis, double floor = kDefaultFloor) {
    return GridFunction(make_disk_grid(nodes_per_axis), Domain::disk(), floor);
}

struct RieszData {
    struct Atom {
        double x = 0.0, y = 0.0, mass = 1.0;
    };
    struct BoundaryAtom {
        double angle = 0.0, mass = 1.0;
    };
    std::vector<Atom> atoms;
    std::function<double(double, double)> density;     // a.c. interior part, >= 0
    std::vector<BoundaryAtom> boundary_atoms;
    std::function<double(double)> boundary_density;    // a.c. boundary part, >= 0
};

namespace detail {

inline double green_kernel(double zx, double zy, double ax, double ay) {
    const double dx = zx - ax, dy = zy - ay;
    const double num = dx * dx + dy * dy;
    // |1 - conj(a) z|^2
    const double rx = 1.0 - (ax * zx + ay * zy);
    const double ry = ax * zy - ay * zx;
    const double den = rx * rx + ry * ry;
    return 0.5 * std::log(num / den);
}

// Cell-averaged kernel for midpoint quadrature: the self cell uses the
// equivalent-radius integral of log|.| over a square of side h.
inline double green_kernel_cell(double zx, double zy, double wx, double wy, double h) {
    const double d2 = (zx - wx) * (zx - wx) + (zy - wy) * (zy - wy);
    if (d2 > 0.25 * h * h) return green_kernel(zx, zy, wx, wy);
    const double r_eq = h / std::sqrt(M_PI);
    const double rx = 1.0 - (wx * zx + wy * zy);
    const double ry = wx * zy - wy * zx;
    return (std::log(r_eq) - 0.5) - 0.5 * std::log(rx * rx + ry * ry);
}

inline double poisson_kernel(double zx, double zy, double cx, double cy) {
    const double num = zx * zx + zy * zy - 1.0;
    const double rx = 1.0 - (zx * cx + zy * cy);
    const double ry = -(zx * cy - zy * cx);
    const double den = rx * rx + ry * ry;
    return num / den;  // negative in the disk
}

} // namespace detail

struct PotentialResult {
    GridFunction u;
    std::vector<std::string> warnings;
};

namespace detail {

// Shortley-Weller stencil for the disk: arms that exit the circle are cut at
// the exact intersection, where the Dirichlet value is zero.  For a node with
// arm lengths a_-, a_+ per axis the Laplacian weights are 2/(a(a_-+a_+)).
struct DiskStencil {
    // per node: 4 neighbor weights (xم, x+, y-, y+), center weight, and which
    // arms end on the circle (weight applies to boundary value 0)
    std::vector<std::array<double, 4>> w;
    std::vector<std::array<std::uint8_t, 4>> cut;
    std::vector<double> center;
    std::vector<std::uint8_t> interior;  // updatable nodes
};

inline DiskStencil build_disk_stencil(const GridFunction& u) {
    const Grid& g = u.grid();
    const int n = g.shape()[0];
    const double h = g.spacing()[0];
    DiskStencil st;
    st.w.assign(u.size(), {0, 0, 0, 0});
    st.cut.assign(u.size(), {0, 0, 0, 0});
    st.center.assign(u.size(), 0.0);
    st.interior.assign(u.size(), 0);
    auto arm = [&](double zx, double zy, double dx, double dy) -> double {
        // largest t in (0, h] with |z + t d| < 1, else the circle cut
        const double cx = zx + dx * h, cy = zy + dy * h;
        if (cx * cx + cy * cy < 1.0) return h;
        // solve |z + t d|^2 = 1 for t in (0, h)
        const double b = zx * dx + zy * dy;
        const double c = zx * zx + zy * zy - 1.0;
        const double t = -b + std::sqrt(b * b - c);
        return std::max(t, 0.05 * h);  // keep weights bounded
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * n + j;
            if (!u.in_domain(k)) continue;
            const auto z = g.coords({i, j});
            const double ax[2] = {arm(z[0], z[1], -1, 0), arm(z[0], z[1], 1, 0)};
            const double ay[2] = {arm(z[0], z[1], 0, -1), arm(z[0], z[1], 0, 1)};
            const bool in_box[4] = {i > 0, i + 1 < n, j > 0, j + 1 < n};
            const double arms[4] = {ax[0], ax[1], ay[0], ay[1]};
            double cw = 0.0;
            for (int d = 0; d < 4; ++d) {
                const double other = arms[d ^ 1];
                const double wgt = 2.0 / (arms[d] * (arms[d] + other));
                st.w[k][d] = wgt * h * h;  // scale so interior stencil is O(1)
                cw += wgt * h * h;
                st.cut[k][d] = (arms[d] < h || !in_box[d]) ? 1 : 0;
            }
            st.center[k] = cw;
            st.interior[k] = 1;
        }
    return st;
}

inline std::size_t stencil_neighbor(int n, std::size_t k, int d) {
    switch (d) {
        case 0: return k - static_cast<std::size_t>(n);
        case 1: return k + static_cast<std::size_t>(n);
        case 2: return k - 1;
        default: return k + 1;
    }
}

// Discrete potential of point charges: solve the Shortley-Weller Poisson
// problem with zero circle data.  Used for ladder anchor values, which must
// be exactly discretely harmonic off the poles or the obstacle solver
// redistributes their mass.
inline GridFunction discrete_atom_potential(const std::vector<RieszData::Atom>& atoms,
                                            const Grid& g, double floor) {
    GridFunction u(g, Domain::disk(), floor);
    const int n = g.shape()[0];
    const double h = g.spacing()[0];
    std::vector<double> charge(u.size(), 0.0);  // 2*pi*mass / h^2, bilinearly split
    for (const auto& a : atoms) {
        const double fx = (a.x - g.origin()[0]) / h, fy = (a.y - g.origin()[1]) / h;
        const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
        const double wx = fx - i, wy = fy - j;
        for (int di = 0; di <= 1; ++di)
            for (int dj = 0; dj <= 1; ++dj) {
                const double w = (di ? wx : 1.0 - wx) * (dj ? wy : 1.0 - wy);
                charge[static_cast<std::size_t>(i + di) * n + (j + dj)] +=
                    2.0 * M_PI * a.mass * w;
            }
    }
    const auto st = build_disk_stencil(u);
    const double omega = 2.0 / (1.0 + std::sin(M_PI * h / 2.0));
    for (int sweep = 0; sweep < 120000; ++sweep) {
        double change = 0.0;
        for (int color = 0; color < 2; ++color)
            for (int i = 0; i < n; ++i)
                for (int j = (i + color) % 2; j < n; j += 2) {
                    const std::size_t k = static_cast<std::size_t>(i) * n + j;
                    if (!st.interior[k]) continue;
                    double acc = -charge[k];
                    for (int d = 0; d < 4; ++d)
                        if (!st.cut[k][d]) acc += st.w[k][d] * u[stencil_neighbor(n, k, d)];
                    const double cand = (1.0 - omega) * u[k] + omega * acc / st.center[k];
                    change = std::max(change, std::abs(cand - u[k]));
                    u[k] = cand;
                }
        if (change < 1e-12) break;
    }
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u.in_domain(k)) u[k] = std::max(std::min(u[k], 0.0), floor);
    return u;
}

} // namespace detail

// Green potential of the interior part of mu; atom nodes are marked as
// anchors so the residual ladder keeps them pinned at every shift.
inline PotentialResult green_potential(const RieszData& mu, int nodes_per_axis,
                                       double floor = kDefaultFloor) {
    PotentialResult res{make_disk_function(nodes_per_axis, floor), {}};
    GridFunction& u = res.u;
    const Grid& g = u.grid();
    const double h = g.spacing()[0];

    auto atoms = mu.atoms;
    for (auto& a : atoms) {
        require(a.mass > 0.0, "green_potential: atom masses must be > 0");
        require(a.x * a.x + a.y * a.y < 1.0, "green_potential: atoms must lie inside the disk");
        // cell-centered grids keep nodes off atoms unless the atom sits
        // exactly on a node; shift such atoms to the nearest half-node
        const double fx = (a.x - g.origin()[0]) / h, fy = (a.y - g.origin()[1]) / h;
        if (std::abs(fx - std::round(fx)) < 1e-12 && std::abs(fy - std::round(fy)) < 1e-12) {
            a.x += 0.5 * h;
            res.warnings.push_back("atom on a grid node shifted to the nearest half-node");
        }
    }

    // density cells with nonzero weight, gathered once
    struct Cell {
        double x, y, w;
    };
    std::vector<Cell> cells;
    if (mu.density) {
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (!u.in_domain(j)) continue;
            const auto w = g.coords(g.unflat(j));
            const double rho = mu.density(w[0], w[1]);
            if (rho > 0.0) cells.push_back({w[0], w[1], rho * h * h});
        }
    }

    std::vector<std::uint8_t> anchors(u.size(), 0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.in_domain(k)) continue;
        const auto z = g.coords(g.unflat(k));
        double v = 0.0;
        for (const auto& a : atoms) v += a.mass * detail::green_kernel(z[0], z[1], a.x, a.y);
        for (const auto& c : cells) v += c.w * detail::green_kernel_cell(z[0], z[1], c.x, c.y, h);
        u[k] = std::max(std::min(v, 0.0), floor);
        for (const auto& a : atoms) {
            const double d = std::hypot(z[0] - a.x, z[1] - a.y);
            if (d <= 3.0 * h) anchors[k] = 1;
        }
    }
    u.set_anchors(std::move(anchors));
    if (!atoms.empty())
        u.set_anchor_values(detail::discrete_atom_potential(atoms, g, floor).values());
    return res;
}

// Poisson integral of the boundary part of nu (negative of the harmonic
// extension of nu); boundary atoms strong enough to survive as residual
// singularities are anchored.
inline PotentialResult poisson_integral(const RieszData& nu, int nodes_per_axis,
                                        double floor = kDefaultFloor) {
    PotentialResult res{make_disk_function(nodes_per_axis, floor), {}};
    GridFunction& u = res.u;
    const Grid& g = u.grid();
    const double h = g.spacing()[0];
    const int quad = 8 * nodes_per_axis;

    std::vector<std::uint8_t> anchors(u.size(), 0);
    std::vector<double> anchor_values(u.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.in_domain(k)) continue;
        const auto z = g.coords(g.unflat(k));
        double atom_part = 0.0;
        for (const auto& b : nu.boundary_atoms) {
            require(b.mass >= 0.0, "poisson_integral: boundary masses must be >= 0");
            atom_part +=
                b.mass * detail::poisson_kernel(z[0], z[1], std::cos(b.angle), std::sin(b.angle));
        }
        double v = atom_part;
        if (nu.boundary_density) {
            double acc = 0.0;
            for (int q = 0; q < quad; ++q) {
                const double th = 2.0 * M_PI * (q + 0.5) / quad;
                const double rho = nu.boundary_density(th);
                if (rho == 0.0) continue;
                acc += rho * detail::poisson_kernel(z[0], z[1], std::cos(th), std::sin(th));
            }
            v += acc / quad;
        }
        u[k] = std::max(std::min(v, 0.0), floor);
        anchor_values[k] = std::max(std::min(atom_part, 0.0), floor);
        // Survival criterion for boundary singularities: |u|*(1-|z|) stays
        // bounded away from zero only for Poisson-kernel-type growth.
        const double dist = 1.0 - std::hypot(z[0], z[1]);
        if (atom_part * dist <= -0.25) anchors[k] = 1;
    }
    u.set_anchors(std::move(anchors));
    u.set_anchor_values(std::move(anchor_values));
    return res;
}

struct PsorOptions {
    double omega = 0.0;  // <= 0: optimal SOR factor 2 / (1 + sin(pi h))
    double tol = 1e-10;
    int max_sweeps = 60000;
    const GridFunction* warm_start = nullptr;
};

struct PsorResult {
    GridFunction u;
    int sweeps = 0;
    double final_change = 0.0;
    double complementarity = 0.0;  // max over nodes of min(h-u, -Lap u)
};

// Largest u <= h with five-point Laplacian >= 0 in the interior and u <= 0 on
// the boundary ring, by projected SOR on the obstacle problem.
inline PsorResult subharmonic_envelope_ex(const GridFunction& h, const PsorOptions& optin = {}) {
    require(h.domain().kind() == DomainKind::disk, "subharmonic_envelope: disk grids only");
    PsorOptions opt = optin;
    if (opt.omega <= 0.0) opt.omega = 2.0 / (1.0 + std::sin(M_PI * h.grid().spacing()[0] / 2.0));
    require(opt.omega > 0.0 && opt.omega < 2.0,
            "subharmonic_envelope: relaxation factor must lie in (0,2)");
    for (std::size_t k = 0; k < h.size(); ++k)
        if (h.in_domain(k) && h[k] > 1e-12)
            throw contract_error("subharmonic_envelope: obstacle must be <= 0");

    const Grid& g = h.grid();
    const int n = g.shape()[0];
    const auto st = detail::build_disk_stencil(h);
    PsorResult res{h, 0, 0.0, 0.0};
    GridFunction& u = res.u;
    if (opt.warm_start) {
        require(opt.warm_start->grid() == g, "subharmonic_envelope: warm start grid mismatch");
        for (std::size_t k = 0; k < u.size(); ++k)
            if (u.in_domain(k)) u[k] = std::min((*opt.warm_start)[k], h[k]);
    }

    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        double change = 0.0;
        for (int color = 0; color < 2; ++color) {
            for (int i = 0; i < n; ++i) {
                for (int j = (i + color) % 2; j < n; j += 2) {
                    const std::size_t k = static_cast<std::size_t>(i) * n + j;
                    if (!st.interior[k]) continue;
                    double acc = 0.0;
                    for (int d = 0; d < 4; ++d)
                        if (!st.cut[k][d]) acc += st.w[k][d] * u[detail::stencil_neighbor(n, k, d)];
                    const double cand =
                        std::min(h[k], (1.0 - opt.omega) * u[k] + opt.omega * acc / st.center[k]);
                    change = std::max(change, std::abs(cand - u[k]));
                    u[k] = cand;
                }
            }
        }
        res.sweeps = sweep + 1;
        res.final_change = change;
        if (change < opt.tol) break;
    }

    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!st.interior[k]) continue;
        double lap = -st.center[k] * u[k];
        for (int d = 0; d < 4; ++d)
            if (!st.cut[k][d]) lap += st.w[k][d] * u[detail::stencil_neighbor(n, k, d)];
        res.complementarity = std::max(res.complementarity, std::min(h[k] - u[k], -lap));
    }
    return res;
}

inline GridFunction subharmonic_envelope(const GridFunction& h, const PsorOptions& opt = {}) {
    return subharmonic_envelope_ex(h, opt).u;
}

// Interior five-point Laplacian as a measure, normalized so a unit atom
// carries mass one.
inline double riesz_mass_near(const GridFunction& u, double cx, double cy, double radius) {
    const Grid& g = u.grid();
    const int n = g.shape()[0];
    const double h = g.spacing()[0];
    double total = 0.0;
    for (int i = 1; i + 1 < n; ++i)
        for (int j = 1; j + 1 < n; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * n + j;
            if (!u.in_domain(k)) continue;
            const auto z = g.coords({i, j});
            if (std::hypot(z[0] - cx, z[1] - cy) > radius) continue;
            const std::size_t km = k - static_cast<std::size_t>(n), kp = k + static_cast<std::size_t>(n);
            if (!u.in_domain(km) || !u.in_domain(kp) || !u.in_domain(k - 1) || !u.in_domain(k + 1))
                continue;
            total += (u[km] + u[kp] + u[k - 1] + u[k + 1] - 4.0 * u[k]);
        }
    return total / (2.0 * M_PI);
}

struct DominationReport {
    bool preconditions_ok = true;
    double max_interior_violation = 0.0;
    bool holds = false;
};

// Discrete domination principle check: Lap v <= Lap u nodewise and u <= v on
// the boundary ring off the exceptional set imply u <= v inside, up to grid
// tolerance.  This verifies, never solves.
inline DominationReport domination_check(const GridFunction& u, const GridFunction& v,
                                         const std::vector<std::uint8_t>& exceptional,
                                         double tol) {
    require(u.grid() == v.grid(), "domination_check: grid mismatch");
    const Grid& g = u.grid();
    const int n = g.shape()[0];
    const auto ring = boundary_nodes(u);
    DominationReport rep;
    auto at = [&](int i, int j) -> std::size_t { return static_cast<std::size_t>(i) * n + j; };
    for (int i = 1; i + 1 < n; ++i)
        for (int j = 1; j + 1 < n; ++j) {
            const std::size_t k = at(i, j);
            if (!u.in_domain(k)) continue;
            if (ring[k]) {
                if (!exceptional.empty() && exceptional[k]) continue;
                if (u[k] > v[k] + tol) rep.preconditions_ok = false;
                continue;
            }
            const double lap_u = u[at(i - 1, j)] + u[at(i + 1, j)] + u[at(i, j - 1)] +
                                 u[at(i, j + 1)] - 4.0 * u[k];
            const double lap_v = v[at(i - 1, j)] + v[at(i + 1, j)] + v[at(i, j - 1)] +
                                 v[at(i, j + 1)] - 4.0 * v[k];
            if (lap_v > lap_u + tol) rep.preconditions_ok = false;
            rep.max_interior_violation = std::max(rep.max_interior_violation, u[k] - v[k]);
        }
    rep.holds = rep.preconditions_ok && rep.max_interior_violation <= tol;
    return rep;
}

// Pole-anchor auto-detection for disk functions lacking an anchor mask:
// interior nodes deep on a log scale, and the horn of a surviving boundary
// singularity.  The horn test |u|*(1-|z|) >= c is gated on boundary-collar
// seeds so genuinely bounded functions are never anchored.
inline std::vector<std::uint8_t> auto_disk_anchors(const GridFunction& u) {
    const Grid& g = u.grid();
    const int n = g.shape()[0];
    const double h = g.spacing()[0];
    std::vector<std::uint8_t> anchors(u.size(), 0);
    const double tau_interior = std::log(1.5 * h);
    bool boundary_seed = false;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!u.in_domain(k)) continue;
        const auto z = g.coords(g.unflat(k));
        const double dist = 1.0 - std::hypot(z[0], z[1]);
        if (dist <= 3.0 * h && u[k] * dist <= -0.25) boundary_seed = true;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * n + j;
            if (!u.in_domain(k)) continue;
            const auto z = g.coords({i, j});
            const double dist = 1.0 - std::hypot(z[0], z[1]);
            if (boundary_seed && u[k] * dist <= -0.25) {
                anchors[k] = 1;
            } else if (dist > 3.0 * h && (u[k] <= tau_interior || u.is_floor(k))) {
                anchors[k] = 1;
            }
        }
    return anchors;
}

} // namespace pluripot
