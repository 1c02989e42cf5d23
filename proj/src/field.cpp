#include "horizon/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "horizon/parallel.hpp"

namespace horizon {

VectorField::VectorField(std::string name, double sigma, ValueFn value, JacobianFn jacobian)
    : name_(std::move(name)), sigma_(sigma), value_(std::move(value)), jacobian_(std::move(jacobian)) {
    if (!(sigma_ >= 0.0)) throw PreconditionError("field '" + name_ + "': sigma must be non-negative");
    if (!value_) throw PreconditionError("field '" + name_ + "': missing evaluator");
}

namespace {

void require_domain(const VectorField& field, const Point& p) {
    if (p.norm() < field.sigma()) {
        std::ostringstream os;
        os << "point (" << p.x() << ", " << p.y() << ") lies inside the excluded disk of radius " << field.sigma()
           << " of field '" << field.name() << "'";
        throw PreconditionError(os.str());
    }
}

}  // namespace

Vec2 VectorField::evaluate(const Point& p) const {
    require_domain(*this, p);
    const Vec2 v = value_(p);
    if (!v.allFinite()) throw NumericError("field '" + name_ + "' produced a non-finite value");
    return v;
}

Mat2 VectorField::jacobian(const Point& p) const {
    require_domain(*this, p);
    const Mat2 j = jacobian_unchecked(p);
    if (!j.allFinite()) throw NumericError("field '" + name_ + "' produced a non-finite Jacobian");
    return j;
}

Mat2 VectorField::jacobian_unchecked(const Point& p) const {
    return jacobian_ ? jacobian_(p) : fd_jacobian(p);
}

Mat2 VectorField::fd_jacobian(const Point& p, double h) const {
    if (h <= 0.0) h = default_fd_step(p);
    const Vec2 ex(h, 0.0);
    const Vec2 ey(0.0, h);
    Mat2 j;
    j.col(0) = (value_(p + ex) - value_(p - ex)) / (2.0 * h);
    j.col(1) = (value_(p + ey) - value_(p - ey)) / (2.0 * h);
    return j;
}

Vec2 VectorField::hamiltonian_f(const Point& p) const {
    const Mat2 j = jacobian(p);
    return {-j(0, 1), j(0, 0)};
}

Vec2 VectorField::hamiltonian_g(const Point& p) const {
    const Mat2 j = jacobian(p);
    return {j(1, 1), -j(1, 0)};
}

VectorField VectorField::with_fd_jacobian() const { return VectorField(name_ + "[fd]", sigma_, value_); }

VectorField VectorField::translated(const Vec2& v) const {
    auto value = [inner = value_, v](const Point& p) -> Vec2 { return inner(p) + v; };
    return VectorField(name_, sigma_, value, jacobian_);
}

VectorField VectorField::conjugated(const Mat2& q, const std::string& suffix) const {
    if (!(q.transpose() * q).isIdentity(1e-12)) throw PreconditionError("conjugation requires an orthogonal matrix");
    auto value = [inner = value_, q](const Point& p) -> Vec2 { return q * inner(q.transpose() * p); };
    JacobianFn jac;
    if (jacobian_) jac = [inner = jacobian_, q](const Point& p) -> Mat2 { return q * inner(q.transpose() * p) * q.transpose(); };
    return VectorField(name_ + suffix, sigma_, value, jac);
}

Vec2 evaluate(const VectorField& field, const Point& p) { return field.evaluate(p); }
Mat2 jacobian(const VectorField& field, const Point& p) { return field.jacobian(p); }

VectorField make_expr_field(const std::string& name, const std::string& f_expr, const std::string& g_expr,
                            double sigma, JacobianMode mode, const std::map<std::string, double>& parameters) {
    const Expr f = parse_expr(f_expr, parameters);
    const Expr g = parse_expr(g_expr, parameters);
    auto value = [f, g](const Point& p) -> Vec2 { return {f(p), g(p)}; };
    VectorField::JacobianFn jac;
    if (mode == JacobianMode::analytic) {
        const Expr fx = f.diff_x(), fy = f.diff_y(), gx = g.diff_x(), gy = g.diff_y();
        jac = [fx, fy, gx, gy](const Point& p) -> Mat2 {
            Mat2 j;
            j << fx(p), fy(p), gx(p), gy(p);
            return j;
        };
    }
    return VectorField(name, sigma, value, jac);
}

namespace {

// Radical inverse used for the quasi-random refinement points.
double halton(std::size_t index, unsigned base) {
    double result = 0.0;
    double f = 1.0 / base;
    for (std::size_t i = index; i > 0; i /= base) {
        result += f * static_cast<double>(i % base);
        f /= base;
    }
    return result;
}

// Polar point whose computed norm is not below r_min despite rounding.
Point polar_point(double r, double th, double r_min) {
    Point p(r * std::cos(th), r * std::sin(th));
    while (p.norm() < r_min) p *= 1.0 + 1e-15;
    return p;
}

}  // namespace

std::vector<Point> annulus_samples(double r_min, double r_max, const RegionScanGrid& grid) {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(grid.radii) * grid.angles + grid.quasi_random);
    const double two_pi = 2.0 * M_PI;
    for (int i = 0; i < grid.radii; ++i) {
        const double t = grid.radii > 1 ? static_cast<double>(i) / (grid.radii - 1) : 0.0;
        const double r = r_min * std::pow(r_max / r_min, t);
        for (int k = 0; k < grid.angles; ++k) {
            const double th = two_pi * k / grid.angles;
            pts.push_back(polar_point(r, th, r_min));
        }
    }
    for (int i = 1; i <= grid.quasi_random; ++i) {
        const double u = halton(static_cast<std::size_t>(i), 2);
        const double v = halton(static_cast<std::size_t>(i), 3);
        const double r = std::clamp(std::sqrt(r_min * r_min + u * (r_max * r_max - r_min * r_min)), r_min, r_max);
        pts.push_back(polar_point(r, two_pi * v, r_min));
    }
    return pts;
}

RegionSpectrumReport scan_region(const VectorField& field, double r_min, double r_max, const RegionScanGrid& grid) {
    if (r_min < field.sigma()) throw PreconditionError("scan_region: r_min must be at least sigma");
    if (!(r_max >= r_min)) throw PreconditionError("scan_region: r_max must be at least r_min");

    const std::vector<Point> pts = annulus_samples(r_min, r_max, grid);
    struct Sample {
        Mat2 jac;
        Spectrum2<double> spec;
    };
    std::vector<Sample> samples(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        const Mat2 j = field.jacobian(pts[i]);
        samples[i] = {j, spectrum(j)};
    });

    RegionSpectrumReport report;
    report.r_min = r_min;
    report.r_max = r_max;
    report.samples = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& s = samples[i].spec;
        // Eigenvalues whose imaginary part is at rounding level are real for
        // this purpose; sampling exactly on a thin set must still register.
        const double imag_tol = 1e-9 * (std::abs(s.trace) + std::sqrt(std::abs(s.det)) + 1e-300);
        if (!s.hurwitz()) report.hurwitz_violations.push_back({pts[i], samples[i].jac, "hurwitz"});
        if (!s.no_nonneg_real(imag_tol))
            report.no_nonneg_real_violations.push_back({pts[i], samples[i].jac, "no_nonneg_real"});
        if (!(s.det > 0.0)) report.det_positive_violations.push_back({pts[i], samples[i].jac, "det_positive"});
        report.min_real_part = std::min(report.min_real_part, s.min_real_part());
        report.max_real_part = std::max(report.max_real_part, s.max_real_part());
    }
    return report;
}

}  // namespace horizon
