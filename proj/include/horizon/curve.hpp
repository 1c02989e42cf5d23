#pragma once

#include <string>
#include <vector>

#include "horizon/field.hpp"

namespace horizon {

/// Positively oriented closed curve c(t) = center + rho(t) (cos t, sin t), t in [0, 2 pi).
///
/// rho(t) = r0 + sum_k (a_k cos kt + b_k sin kt). A circle has no harmonics.
/// The polar parameterization is simple whenever rho > 0.
class ClosedCurve {
public:
    enum class Kind { circle, star_shaped };

    static ClosedCurve circle(const Point& center, double radius);
    /// cos_coeffs[k-1] and sin_coeffs[k-1] multiply cos kt and sin kt.
    static ClosedCurve star(const Point& center, double r0, std::vector<double> cos_coeffs,
                            std::vector<double> sin_coeffs);

    Kind kind() const { return kind_; }
    const Point& center() const { return center_; }
    double base_radius() const { return r0_; }
    const std::vector<double>& cos_coeffs() const { return a_; }
    const std::vector<double>& sin_coeffs() const { return b_; }

    double rho(double t) const;
    double rho_prime(double t) const;
    Point point(double t) const;
    /// c'(t).
    Vec2 tangent(double t) const;
    /// Unit normal pointing out of the enclosed region.
    Vec2 outward_normal(double t) const;

    double min_rho() const { return min_rho_; }
    double perimeter() const { return perimeter_; }
    /// Smallest |c(t)|.
    double min_distance_to_origin() const { return min_distance_; }
    /// Largest s with D_s inside the enclosed region; 0 if the origin is outside.
    double enclosed_radius() const;
    bool encloses(const Point& p) const;

    /// Throws PreconditionError unless rho > 0 and the curve stays strictly outside D_sigma.
    void validate(double sigma) const;

    /// Curve with extra harmonics added (coefficients are summed index-wise).
    ClosedCurve perturbed(const std::vector<double>& cos_coeffs, const std::vector<double>& sin_coeffs) const;

    std::string describe() const;

private:
    Kind kind_ = Kind::circle;
    Point center_{0, 0};
    double r0_ = 1.0;
    std::vector<double> a_, b_;
    double min_rho_ = 1.0, perimeter_ = 0.0, min_distance_ = 0.0;

    void cache_extents();
};

}  // namespace horizon
