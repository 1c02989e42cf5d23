#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "horizon/errors.hpp"
#include "horizon/expr.hpp"

namespace horizon {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class JacobianMode { analytic, finite_difference };

/// Planar vector field X = (f, g) on the exterior of the closed disk of radius sigma.
///
/// Evaluators are immutable after construction, so a field can be shared
/// between threads. Checked accessors reject queries with |z| < sigma.
class VectorField {
public:
    using ValueFn = std::function<Vec2(const Point&)>;
    using JacobianFn = std::function<Mat2(const Point&)>;

    VectorField() = default;
    /// An empty `jacobian` selects central finite differences.
    VectorField(std::string name, double sigma, ValueFn value, JacobianFn jacobian = {});

    const std::string& name() const { return name_; }
    double sigma() const { return sigma_; }
    JacobianMode jacobian_mode() const { return jacobian_ ? JacobianMode::analytic : JacobianMode::finite_difference; }

    bool in_domain(const Point& p) const { return p.norm() >= sigma_; }

    Vec2 operator()(const Point& p) const { return evaluate(p); }
    Vec2 evaluate(const Point& p) const;
    Mat2 jacobian(const Point& p) const;

    /// No domain or finiteness checks; used for trial stages of integrators.
    Vec2 evaluate_unchecked(const Point& p) const { return value_(p); }
    Mat2 jacobian_unchecked(const Point& p) const;

    /// Central differences with step h (default 1e-5 * max(1, |p|)).
    Mat2 fd_jacobian(const Point& p, double h = 0.0) const;
    static double default_fd_step(const Point& p) { return 1e-5 * std::max(1.0, p.norm()); }

    /// X_f = (-f_y, f_x), tangent to the level curves of f.
    Vec2 hamiltonian_f(const Point& p) const;
    /// (g_y, -g_x), tangent to the level curves of g.
    Vec2 hamiltonian_g(const Point& p) const;

    /// Same field with the analytic Jacobian dropped.
    VectorField with_fd_jacobian() const;
    /// X + v.
    VectorField translated(const Vec2& v) const;
    /// Q X(Q^T z) for an orthogonal Q; the spectrum is unchanged.
    VectorField conjugated(const Mat2& q, const std::string& suffix = "") const;

private:
    std::string name_;
    double sigma_ = 0.0;
    ValueFn value_;
    JacobianFn jacobian_;
};

Vec2 evaluate(const VectorField& field, const Point& p);
Mat2 jacobian(const VectorField& field, const Point& p);

/// Field built from two expression strings; `analytic` differentiates symbolically.
VectorField make_expr_field(const std::string& name, const std::string& f_expr, const std::string& g_expr,
                            double sigma, JacobianMode mode, const std::map<std::string, double>& parameters = {});

/// Trace, determinant, discriminant and closed-form eigenvalues of a 2x2 matrix.
template <typename Scalar>
struct Spectrum2 {
    Scalar trace{};
    Scalar det{};
    Scalar discriminant{};
    bool complex_pair = false;
    std::complex<Scalar> lambda1{};
    std::complex<Scalar> lambda2{};

    /// T < 0 and D > 0, which for 2x2 matrices means both eigenvalues have negative real part.
    bool hurwitz() const { return trace < Scalar(0) && det > Scalar(0); }

    /// No eigenvalue lies in [0, +inf). A complex pair whose imaginary part is
    /// within imag_tol is treated as real.
    bool no_nonneg_real(Scalar imag_tol = Scalar(0)) const {
        if (complex_pair && std::abs(lambda1.imag()) > imag_tol) return true;
        return lambda1.real() < Scalar(0) && lambda2.real() < Scalar(0);
    }

    Scalar max_real_part() const { return std::max(lambda1.real(), lambda2.real()); }
    Scalar min_real_part() const { return std::min(lambda1.real(), lambda2.real()); }
};

template <typename Scalar>
Spectrum2<Scalar> spectrum(const Eigen::Matrix<Scalar, 2, 2>& jac) {
    using std::abs;
    using std::sqrt;
    if (!jac.allFinite()) throw NumericError("spectrum: non-finite Jacobian entry");
    Spectrum2<Scalar> s;
    s.trace = jac(0, 0) + jac(1, 1);
    s.det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
    // (a - d)^2 + 4bc avoids the cancellation in T^2 - 4D when the roots are close.
    const Scalar diff = jac(0, 0) - jac(1, 1);
    s.discriminant = diff * diff + Scalar(4) * jac(0, 1) * jac(1, 0);
    if (s.discriminant < Scalar(0)) {
        s.complex_pair = true;
        const Scalar im = sqrt(-s.discriminant) / Scalar(2);
        s.lambda1 = {s.trace / Scalar(2), im};
        s.lambda2 = {s.trace / Scalar(2), -im};
    } else {
        const Scalar root = sqrt(s.discriminant);
        const Scalar big = (s.trace + (s.trace >= Scalar(0) ? root : -root)) / Scalar(2);
        const Scalar small = big != Scalar(0) ? s.det / big : Scalar(0);
        s.lambda1 = {std::max(big, small), Scalar(0)};
        s.lambda2 = {std::min(big, small), Scalar(0)};
    }
    return s;
}

struct SpectrumViolation {
    Point location;
    Mat2 jacobian;
    std::string predicate;  // "hurwitz" | "no_nonneg_real" | "det_positive"
};

struct RegionScanGrid {
    int radii = 64;
    int angles = 256;
    int quasi_random = 4096;
};

struct RegionSpectrumReport {
    double r_min = 0.0;
    double r_max = 0.0;
    std::size_t samples = 0;
    std::vector<SpectrumViolation> hurwitz_violations;
    std::vector<SpectrumViolation> no_nonneg_real_violations;
    std::vector<SpectrumViolation> det_positive_violations;
    double min_real_part = std::numeric_limits<double>::infinity();
    double max_real_part = -std::numeric_limits<double>::infinity();

    bool hurwitz_all() const { return hurwitz_violations.empty(); }
    bool no_nonneg_real_all() const { return no_nonneg_real_violations.empty(); }
    bool det_positive_all() const { return det_positive_violations.empty(); }
};

/// Polar grid (geometric radii x uniform angles) plus Halton points, all in [r_min, r_max].
std::vector<Point> annulus_samples(double r_min, double r_max, const RegionScanGrid& grid);

RegionSpectrumReport scan_region(const VectorField& field, double r_min, double r_max,
                                 const RegionScanGrid& grid = {});

}  // namespace horizon
