#include "horizon/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace horizon {

namespace {

constexpr int kExtentSamples = 2048;

// Golden-section minimization of fn over [lo, hi].
template <typename Fn>
double golden_min(Fn&& fn, double lo, double hi) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = fn(c), fd = fn(d);
    for (int it = 0; it < 80 && b - a > 1e-14; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = fn(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = fn(d);
        }
    }
    return std::min(fc, fd);
}

}  // namespace

ClosedCurve ClosedCurve::circle(const Point& center, double radius) {
    if (!(radius > 0.0)) throw PreconditionError("circle radius must be positive");
    ClosedCurve c;
    c.kind_ = Kind::circle;
    c.center_ = center;
    c.r0_ = radius;
    c.cache_extents();
    return c;
}

ClosedCurve ClosedCurve::star(const Point& center, double r0, std::vector<double> cos_coeffs,
                              std::vector<double> sin_coeffs) {
    ClosedCurve c;
    c.kind_ = Kind::star_shaped;
    c.center_ = center;
    c.r0_ = r0;
    const std::size_t n = std::max(cos_coeffs.size(), sin_coeffs.size());
    cos_coeffs.resize(n, 0.0);
    sin_coeffs.resize(n, 0.0);
    c.a_ = std::move(cos_coeffs);
    c.b_ = std::move(sin_coeffs);
    c.cache_extents();
    if (!(c.min_rho() > 0.0)) throw PreconditionError("star-shaped curve needs a positive radius function");
    return c;
}

double ClosedCurve::rho(double t) const {
    double r = r0_;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        const double kt = static_cast<double>(k + 1) * t;
        r += a_[k] * std::cos(kt) + b_[k] * std::sin(kt);
    }
    return r;
}

double ClosedCurve::rho_prime(double t) const {
    double r = 0.0;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        const double m = static_cast<double>(k + 1);
        r += m * (b_[k] * std::cos(m * t) - a_[k] * std::sin(m * t));
    }
    return r;
}

Point ClosedCurve::point(double t) const { return center_ + rho(t) * Vec2(std::cos(t), std::sin(t)); }

Vec2 ClosedCurve::tangent(double t) const {
    const Vec2 u(std::cos(t), std::sin(t)), v(-std::sin(t), std::cos(t));
    return rho_prime(t) * u + rho(t) * v;
}

Vec2 ClosedCurve::outward_normal(double t) const {
    const Vec2 d = tangent(t);
    return Vec2(d.y(), -d.x()).normalized();
}

void ClosedCurve::cache_extents() {
    if (a_.empty()) {
        min_rho_ = r0_;
        perimeter_ = 2.0 * M_PI * r0_;
        min_distance_ = std::abs(center_.norm() - r0_);
        return;
    }
    // Trig polynomials: trapezoid sums are spectrally accurate, and minima are
    // refined by golden section around the best sample.
    const double h = 2.0 * M_PI / kExtentSamples;
    perimeter_ = 0.0;
    int best_rho = 0, best_dist = 0;
    double rho_min = std::numeric_limits<double>::infinity(), dist_min = rho_min;
    for (int i = 0; i < kExtentSamples; ++i) {
        perimeter_ += tangent(i * h).norm() * h;
        const double r = rho(i * h);
        if (r < rho_min) {
            rho_min = r;
            best_rho = i;
        }
        const double d = point(i * h).norm();
        if (d < dist_min) {
            dist_min = d;
            best_dist = i;
        }
    }
    min_rho_ = std::min(rho_min, golden_min([&](double t) { return rho(t); }, (best_rho - 1) * h, (best_rho + 1) * h));
    min_distance_ = std::min(
        dist_min, golden_min([&](double t) { return point(t).norm(); }, (best_dist - 1) * h, (best_dist + 1) * h));
}

bool ClosedCurve::encloses(const Point& p) const {
    const Vec2 d = p - center_;
    if (d.norm() == 0.0) return true;
    return d.norm() < rho(std::atan2(d.y(), d.x()));
}

double ClosedCurve::enclosed_radius() const { return encloses(Point(0, 0)) ? min_distance_to_origin() : 0.0; }

void ClosedCurve::validate(double sigma) const {
    if (!(min_rho() > 0.0)) throw PreconditionError("curve radius function must stay positive");
    if (!(min_distance_to_origin() > sigma)) {
        std::ostringstream os;
        os << "curve " << describe() << " meets the closed disk of radius " << sigma;
        throw PreconditionError(os.str());
    }
}

ClosedCurve ClosedCurve::perturbed(const std::vector<double>& cos_coeffs, const std::vector<double>& sin_coeffs) const {
    std::vector<double> a = a_, b = b_;
    const std::size_t n = std::max({a.size(), cos_coeffs.size(), sin_coeffs.size()});
    a.resize(n, 0.0);
    b.resize(n, 0.0);
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) a[k] += cos_coeffs[k];
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k) b[k] += sin_coeffs[k];
    return star(center_, r0_, a, b);
}

std::string ClosedCurve::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << (kind_ == Kind::circle ? "circle" : "star") << "(center=(" << center_.x() << "," << center_.y()
       << "), r0=" << r0_;
    if (!a_.empty()) os << ", harmonics=" << a_.size();
    os << ")";
    return os.str();
}

}  // namespace horizon
