// Sampled negative functions on a grid, with a finite floor standing for
// -infinity and an optional anchor mask marking singular nodes whose
// constraint never dissolves under the shift ladder.
#pragma once

#include <algorithm>
#include <functional>
#include <utility>

#include "pluripot/common.hpp"
#include "pluripot/domain.hpp"
#include "pluripot/grid.hpp"

namespace pluripot {

class GridFunction {
public:
    GridFunction() = default;

    GridFunction(Grid grid, Domain domain, double floor = kDefaultFloor)
        : grid_(std::move(grid)), domain_(std::move(domain)), floor_(floor) {
        require(grid_.dim() == domain_.dim(), "grid function: grid/domain rank mismatch");
        values_.assign(grid_.size(), 0.0);
        build_mask();
    }

    static GridFunction sample(Grid grid, Domain domain,
                               const std::function<double(const std::vector<double>&)>& f,
                               double floor = kDefaultFloor) {
        GridFunction u(std::move(grid), std::move(domain), floor);
        std::vector<int> idx(u.grid_.dim(), 0);
        for (std::size_t k = 0; k < u.size(); ++k) {
            if (u.mask_[k]) {
                const double v = f(u.grid_.coords(u.grid_.unflat(k)));
                u.values_[k] = std::max(v, floor);
            }
        }
        return u;
    }

    const Grid& grid() const { return grid_; }
    const Domain& domain() const { return domain_; }
    double floor() const { return floor_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool in_domain(std::size_t k) const { return mask_[k] != 0; }
    const std::vector<std::uint8_t>& domain_mask() const { return mask_; }
    std::size_t domain_size() const { return domain_count_; }

    bool is_floor(std::size_t k) const { return values_[k] <= floor_; }

    // Anchor mask: singular nodes whose obstacle is exempt from the +C shift.
    // Anchor values, when present, carry the singular part alone so the
    // exempt obstacle does not pin transient contributions.
    bool has_anchors() const { return !anchors_.empty(); }
    const std::vector<std::uint8_t>& anchors() const { return anchors_; }
    void set_anchors(std::vector<std::uint8_t> a) {
        require(a.empty() || a.size() == values_.size(), "grid function: anchor mask size");
        anchors_ = std::move(a);
        if (anchors_.empty()) anchor_values_.clear();
    }
    bool anchored(std::size_t k) const { return !anchors_.empty() && anchors_[k] != 0; }

    void set_anchor_values(std::vector<double> v) {
        require(v.empty() || v.size() == values_.size(), "grid function: anchor value size");
        anchor_values_ = std::move(v);
    }
    const std::vector<double>& anchor_values() const { return anchor_values_; }
    double anchor_value(std::size_t k) const {
        return anchor_values_.empty() ? values_[k] : anchor_values_[k];
    }

    void set_floor(double f) { floor_ = f; }

    // Contract checks: <= 0 and >= floor on the domain.
    void check_negative(double tol = 1e-12) const {
        for (std::size_t k = 0; k < size(); ++k) {
            if (!mask_[k]) continue;
            if (values_[k] > tol) throw contract_error("grid function: positive value");
            if (values_[k] < floor_ - 1e-9 * std::abs(floor_))
                throw contract_error("grid function: value below floor");
        }
    }

    double sup_diff(const GridFunction& other) const {
        require(grid_ == other.grid_, "grid function: grid mismatch");
        double m = 0.0;
        for (std::size_t k = 0; k < size(); ++k)
            if (mask_[k] && other.mask_[k]) m = std::max(m, std::abs(values_[k] - other.values_[k]));
        return m;
    }

    // Sup difference restricted to nodes inside a coordinate box [lo, hi)^n.
    double sup_diff_box(const GridFunction& other, double lo, double hi) const {
        require(grid_ == other.grid_, "grid function: grid mismatch");
        double m = 0.0;
        for (std::size_t k = 0; k < size(); ++k) {
            if (!mask_[k] || !other.mask_[k]) continue;
            const auto idx = grid_.unflat(k);
            bool in = true;
            for (int a = 0; a < grid_.dim() && in; ++a) {
                const double c = grid_.coord(a, idx[a]);
                in = (c >= lo && c < hi);
            }
            if (in) m = std::max(m, std::abs(values_[k] - other.values_[k]));
        }
        return m;
    }

    // Robust Lipschitz scale: a high quantile of per-axis difference quotients.
    double lipschitz_estimate(double quantile = 0.9) const {
        std::vector<double> slopes;
        slopes.reserve(size());
        std::vector<int> idx;
        for (std::size_t k = 0; k < size(); ++k) {
            if (!mask_[k] || is_floor(k)) continue;
            idx = grid_.unflat(k);
            for (int a = 0; a < grid_.dim(); ++a) {
                if (idx[a] + 1 >= grid_.shape()[a]) continue;
                auto nb = idx;
                nb[a] += 1;
                const std::size_t kn = grid_.flat(nb);
                if (!mask_[kn] || is_floor(kn)) continue;
                slopes.push_back(std::abs(values_[kn] - values_[k]) / grid_.spacing()[a]);
            }
        }
        if (slopes.empty()) return 1.0;
        std::size_t q = static_cast<std::size_t>(quantile * (slopes.size() - 1));
        std::nth_element(slopes.begin(), slopes.begin() + q, slopes.end());
        return std::max(slopes[q], 1e-12);
    }

private:
    void build_mask() {
        mask_.assign(grid_.size(), 0);
        domain_count_ = 0;
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            if (domain_.member(grid_.coords(grid_.unflat(k)))) {
                mask_[k] = 1;
                ++domain_count_;
            }
        }
    }

    Grid grid_;
    Domain domain_;
    double floor_ = kDefaultFloor;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
    std::vector<std::uint8_t> anchors_;
    std::vector<double> anchor_values_;
    std::size_t domain_count_ = 0;
};

// Grid-scale tolerance used by the property suites: 10 * h_max * Lipschitz.
inline double grid_tolerance(const GridFunction& u) {
    return 10.0 * u.grid().max_spacing() * u.lipschitz_estimate();
}

inline GridFunction pointwise_min(const GridFunction& u, const GridFunction& v) {
    require(u.grid() == v.grid(), "pointwise_min: grid mismatch");
    GridFunction r = u;
    for (std::size_t k = 0; k < r.size(); ++k)
        if (r.in_domain(k)) r[k] = std::min(u[k], v[k]);
    return r;
}

inline GridFunction shifted(const GridFunction& u, double c) {
    GridFunction r = u;
    for (std::size_t k = 0; k < r.size(); ++k)
        if (r.in_domain(k) && !u.is_floor(k)) r[k] = u[k] + c;
    return r;
}

} // namespace pluripot
