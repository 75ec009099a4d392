// Rectilinear grids in log (or Cartesian) coordinates with row-major storage.
#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>

#include "pluripot/common.hpp"

namespace pluripot {

// Node (i1,...,ik) has coordinate origin[a] + i_a * spacing[a] on axis a.
// Storage is row-major with the last axis fastest, matching the PGF1 payload.
class Grid {
public:
    Grid() = default;

    Grid(std::vector<int> shape, std::vector<double> origin, std::vector<double> spacing)
        : shape_(std::move(shape)), origin_(std::move(origin)), spacing_(std::move(spacing)) {
        require(shape_.size() == origin_.size() && shape_.size() == spacing_.size(),
                "grid: shape/origin/spacing rank mismatch");
        require(!shape_.empty(), "grid: rank must be >= 1");
        for (int n : shape_) require(n >= 1, "grid: axis size must be >= 1");
        for (double h : spacing_) require(h > 0.0, "grid: spacing must be > 0");
        strides_.assign(shape_.size(), 1);
        for (int a = static_cast<int>(shape_.size()) - 2; a >= 0; --a)
            strides_[a] = strides_[a + 1] * static_cast<std::size_t>(shape_[a + 1]);
        size_ = strides_[0] * static_cast<std::size_t>(shape_[0]);
    }

    int dim() const { return static_cast<int>(shape_.size()); }
    std::size_t size() const { return size_; }
    const std::vector<int>& shape() const { return shape_; }
    const std::vector<double>& origin() const { return origin_; }
    const std::vector<double>& spacing() const { return spacing_; }

    double max_spacing() const { return *std::max_element(spacing_.begin(), spacing_.end()); }

    std::size_t flat(const std::vector<int>& idx) const {
        std::size_t f = 0;
        for (int a = 0; a < dim(); ++a) f += strides_[a] * static_cast<std::size_t>(idx[a]);
        return f;
    }

    std::vector<int> unflat(std::size_t f) const {
        std::vector<int> idx(dim());
        for (int a = 0; a < dim(); ++a) {
            idx[a] = static_cast<int>(f / strides_[a]);
            f %= strides_[a];
        }
        return idx;
    }

    bool in_bounds(const std::vector<int>& idx) const {
        for (int a = 0; a < dim(); ++a)
            if (idx[a] < 0 || idx[a] >= shape_[a]) return false;
        return true;
    }

    double coord(int axis, int i) const { return origin_[axis] + spacing_[axis] * i; }

    std::vector<double> coords(const std::vector<int>& idx) const {
        std::vector<double> x(dim());
        for (int a = 0; a < dim(); ++a) x[a] = coord(a, idx[a]);
        return x;
    }

    bool operator==(const Grid& o) const {
        return shape_ == o.shape_ && origin_ == o.origin_ && spacing_ == o.spacing_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    std::vector<int> shape_;
    std::vector<double> origin_;
    std::vector<double> spacing_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

// Uniform box grid over [t_min, t_min + n*h) per axis, node k at t_min + k*h.
inline Grid make_box_grid(int dim, int nodes_per_axis, double t_min) {
    const double h = -t_min / nodes_per_axis;
    return Grid(std::vector<int>(dim, nodes_per_axis), std::vector<double>(dim, t_min),
                std::vector<double>(dim, h));
}

} // namespace pluripot
