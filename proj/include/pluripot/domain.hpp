// Model domains: log images of the polydisk and ball, the unit disk, and
// custom convex membership predicates.
#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "pluripot/common.hpp"
#include "pluripot/grid.hpp"

namespace pluripot {

enum class DomainKind { polydisk, ball, disk, custom };

inline std::string to_string(DomainKind k) {
    switch (k) {
        case DomainKind::polydisk: return "polydisk";
        case DomainKind::ball: return "ball";
        case DomainKind::disk: return "disk";
        case DomainKind::custom: return "custom";
    }
    return "custom";
}

inline DomainKind domain_kind_from_string(const std::string& s) {
    if (s == "polydisk") return DomainKind::polydisk;
    if (s == "ball") return DomainKind::ball;
    if (s == "disk") return DomainKind::disk;
    if (s == "custom") return DomainKind::custom;
    throw parse_error("unknown domain kind: " + s);
}

// Membership semantics:
//   polydisk: t_j < 0 for all j (log coordinates)
//   ball:     sum_j exp(2 t_j) < radius^2 (log coordinates)
//   disk:     x^2 + y^2 < 1 (Cartesian coordinates in C)
//   custom:   user predicate on log coordinates; must be convex and
//             downward closed, which is assumed, not checked.
class Domain {
public:
    Domain() : kind_(DomainKind::polydisk), dim_(1) {}

    static Domain polydisk(int dim) { return Domain(DomainKind::polydisk, dim, 1.0, nullptr); }
    static Domain ball(int dim, double radius = 1.0) {
        require(radius > 0.0, "domain: ball radius must be > 0");
        return Domain(DomainKind::ball, dim, radius, nullptr);
    }
    static Domain disk() { return Domain(DomainKind::disk, 2, 1.0, nullptr); }
    static Domain custom(int dim, std::function<bool(const std::vector<double>&)> member,
                         std::vector<bool> axis_downward_closed = {}) {
        Domain d(DomainKind::custom, dim, 1.0, std::move(member));
        if (!axis_downward_closed.empty()) {
            require(static_cast<int>(axis_downward_closed.size()) == dim,
                    "domain: downward-closure flag count");
            d.down_closed_ = std::move(axis_downward_closed);
        }
        return d;
    }

    DomainKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double radius() const { return radius_; }
    bool is_log_domain() const { return kind_ != DomainKind::disk; }

    // True if membership survives lowering the given coordinate arbitrarily.
    bool axis_downward_closed(int axis) const {
        if (kind_ == DomainKind::disk) return false;
        if (kind_ == DomainKind::custom && !down_closed_.empty()) return down_closed_[axis];
        return true;
    }

    bool member(const std::vector<double>& x) const {
        switch (kind_) {
            case DomainKind::polydisk: {
                for (double t : x)
                    if (t >= 0.0) return false;
                return true;
            }
            case DomainKind::ball: {
                double s = 0.0;
                for (double t : x) s += std::exp(2.0 * t);
                return s < radius_ * radius_;
            }
            case DomainKind::disk:
                return x[0] * x[0] + x[1] * x[1] < 1.0;
            case DomainKind::custom:
                return custom_(x);
        }
        return false;
    }

private:
    Domain(DomainKind k, int d, double r, std::function<bool(const std::vector<double>&)> c)
        : kind_(k), dim_(d), radius_(r), custom_(std::move(c)) {}

    DomainKind kind_;
    int dim_;
    double radius_;
    std::function<bool(const std::vector<double>&)> custom_;
    std::vector<bool> down_closed_;
};

} // namespace pluripot
