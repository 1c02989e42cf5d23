#include "horizon/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss.hpp>

#include "horizon/parallel.hpp"

namespace horizon {

std::string to_string(IndexKind k) {
    switch (k) {
        case IndexKind::finite: return "finite";
        case IndexKind::plus_infinity: return "+inf";
        case IndexKind::minus_infinity: return "-inf";
        case IndexKind::unreliable: return "unreliable";
    }
    return "?";
}

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

double smoothstep_prime(double t) { return t <= 0.0 || t >= 1.0 ? 0.0 : 6.0 * t * (1.0 - t); }

VectorField blend_field(const VectorField& x, double s, double k) {
    auto value = [x, s, k](const Point& p) -> Vec2 {
        const double r = p.norm();
        if (r >= 2.0 * s) return x.evaluate_unchecked(p);
        const Vec2 model = -k * p;
        if (r <= s) return model;
        const double b = smoothstep((r - s) / s);
        return (1.0 - b) * model + b * x.evaluate_unchecked(p);
    };
    auto jac = [x, s, k](const Point& p) -> Mat2 {
        const double r = p.norm();
        if (r >= 2.0 * s) return x.jacobian_unchecked(p);
        if (r <= s) return -k * Mat2::Identity();
        const double t = (r - s) / s;
        const double b = smoothstep(t);
        const Vec2 grad_b = smoothstep_prime(t) / s * p / r;
        const Vec2 diff = x.evaluate_unchecked(p) + k * p;
        return (1.0 - b) * (-k * Mat2::Identity()) + b * x.jacobian_unchecked(p) + diff * grad_b.transpose();
    };
    return VectorField(x.name() + "[ext]", 0.0, value, jac);
}

double mean_gain(const VectorField& x, double r) {
    double sum = 0.0;
    const int n = 256;
    for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        const Point p(r * std::cos(th), r * std::sin(th));
        sum += x.evaluate_unchecked(p).norm() / r;
    }
    return sum / n;
}

bool seam_det_positive(const VectorField& blended, double s) {
    for (double r : {s, 2.0 * s})
        for (int j = 0; j < 256; ++j) {
            const double th = kTwoPi * j / 256;
            if (!(blended.jacobian_unchecked({r * std::cos(th), r * std::sin(th)}).determinant() > 0.0)) return false;
        }
    return true;
}

double circle_flux(const VectorField& f, double r, int n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        const Vec2 u(std::cos(th), std::sin(th));
        sum += f.evaluate_unchecked(r * u).dot(u);
    }
    return sum * r * kTwoPi / n;
}

// Integral of the trace over the annulus a <= |z| <= b.
double annulus_trace(const VectorField& f, double a, double b, int angles) {
    auto ring = [&](double r) {
        double sum = 0.0;
        for (int i = 0; i < angles; ++i) {
            const double th = kTwoPi * i / angles;
            sum += f.jacobian_unchecked({r * std::cos(th), r * std::sin(th)}).trace();
        }
        return r * sum * kTwoPi / angles;
    };
    return boost::math::quadrature::gauss<double, 20>::integrate(ring, a, b);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

// Largest |X| on the circle of radius r; bounds the cancellation error of the flux sum.
double circle_speed(const VectorField& x, double r, int samples = 256) {
    double m = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double th = kTwoPi * i / samples;
        m = std::max(m, x.evaluate_unchecked(Point(r * std::cos(th), r * std::sin(th))).norm());
    }
    return m;
}

}  // namespace

double ExtensionBlend::ramp(double r) const { return smoothstep((r - s) / s); }

double seam_jump(const VectorField& blended, double r, double h, int angles) {
    double worst = 0.0;
    for (int i = 0; i < angles; ++i) {
        const double th = kTwoPi * i / angles;
        const Vec2 u(std::cos(th), std::sin(th));
        const Mat2 d = blended.jacobian_unchecked((r + h) * u) - blended.jacobian_unchecked((r - h) * u);
        worst = std::max(worst, d.cwiseAbs().maxCoeff());
    }
    return worst;
}

ExtensionBlend build_extension(const VectorField& field, double s, double interior_scale) {
    if (!(s >= field.sigma()) || !(s > 0.0)) throw PreconditionError("build_extension: s must be positive and at least sigma");
    ExtensionBlend out;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        out.s = s;
        out.outer = 2.0 * s;
        out.doublings = attempt;
        out.interior_scale = interior_scale > 0.0 ? interior_scale : std::max(1e-3, mean_gain(field, 2.0 * s));
        out.field = blend_field(field, s, out.interior_scale);
        out.seam_discrepancy = std::max(seam_jump(out.field, s), seam_jump(out.field, 2.0 * s));
        out.seam_ok = out.seam_discrepancy <= 1e-4;
        out.det_positive = seam_det_positive(out.field, s);
        if (out.seam_ok && out.det_positive) break;
        s *= 2.0;
    }
    return out;
}

IndexEstimate compute_index(const VectorField& field, const IndexControls& controls) {
    const double sigma = field.sigma();
    const double s = controls.s > 0.0 ? controls.s : (sigma > 0.0 ? sigma : 1.0);
    const double base = controls.ladder_base > 0.0 ? controls.ladder_base : (sigma > 0.0 ? 4.0 * sigma : 4.0);
    if (controls.rungs < 4) throw PreconditionError("compute_index: at least 4 ladder rungs are needed");
    if (!(controls.ladder_factor > 1.0)) throw PreconditionError("compute_index: ladder factor must exceed 1");

    IndexEstimate est;
    est.blend = build_extension(field, s, controls.interior_scale);
    const VectorField& x = est.blend.field;
    const double s_used = est.blend.s;

    for (int k = 0; k < controls.rungs; ++k) est.radii.push_back(base * std::pow(controls.ladder_factor, k));
    est.flux.resize(est.radii.size());
    parallel_for(est.radii.size(), [&](std::size_t k) { est.flux[k] = circle_flux(x, est.radii[k], controls.flux_points); });

    // Radial panels break at the seams and at every rung; none is longer than a factor 2.
    std::vector<double> breaks{s_used, 2.0 * s_used};
    breaks.insert(breaks.end(), est.radii.begin(), est.radii.end());
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<std::pair<double, double>> panels;
    double lo = 0.0;
    for (double b : breaks) {
        double a = lo;
        if (a > 0.0)
            while (b > 2.0 * a) {
                panels.emplace_back(a, 2.0 * a);
                a *= 2.0;
            }
        panels.emplace_back(a, b);
        lo = b;
    }
    std::vector<double> panel_value(panels.size());
    parallel_for(panels.size(), [&](std::size_t i) {
        panel_value[i] = annulus_trace(x, panels[i].first, panels[i].second, controls.area_angles);
    });
    auto area_to = [&](double r) {
        double sum = 0.0;
        for (std::size_t i = 0; i < panels.size() && panels[i].second <= r; ++i) sum += panel_value[i];
        return sum;
    };
    for (double r : est.radii) est.area.push_back(area_to(r));
    est.interior_contribution = area_to(2.0 * s_used);

    bool consistent = true;
    for (std::size_t k = 0; k < est.radii.size(); ++k) {
        const double gap = std::abs(est.flux[k] - est.area[k]);
        est.max_discrepancy = std::max(est.max_discrepancy, gap / (1.0 + std::abs(est.flux[k])));
        if (gap > 10.0 * controls.tol * (1.0 + std::abs(est.flux[k]))) consistent = false;
    }
    if (!consistent) {
        if (controls.throw_on_inconsistency) {
            std::ostringstream os;
            os << "compute_index: flux and area quadrature disagree for '" << field.name()
               << "' (max relative gap " << est.max_discrepancy << ")";
            throw InconsistencyError(os.str());
        }
        est.kind = IndexKind::unreliable;
        est.value = est.flux.back();
        return est;
    }

    // Fluxes below the cancellation floor of their quadrature are zero to working precision.
    const std::size_t n = est.radii.size();
    std::vector<double> resolved(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * kTwoPi * est.radii[k] *
                             circle_speed(x, est.radii[k]);
        resolved[k] = std::abs(est.flux[k]) > floor ? est.flux[k] : 0.0;
    }

    std::vector<double> lr, lf;
    bool same_sign = true;
    for (std::size_t k = n - 4; k < n; ++k) {
        lr.push_back(std::log(est.radii[k]));
        lf.push_back(std::log(std::max(std::abs(resolved[k]), std::numeric_limits<double>::min())));
        if ((resolved[k] > 0) != (resolved[n - 1] > 0) || resolved[k] == 0.0) same_sign = false;
    }
    est.growth_exponent = least_squares_slope(lr, lf);

    const double x0 = resolved[n - 3], x1 = resolved[n - 2], x2 = resolved[n - 1];
    const double den = (x2 - x1) - (x1 - x0);
    est.extrapolated = den != 0.0 ? x2 - (x2 - x1) * (x2 - x1) / den : x2;
    if (!std::isfinite(est.extrapolated)) est.extrapolated = x2;

    if (est.growth_exponent > 0.5 && same_sign) {
        est.kind = est.flux.back() > 0 ? IndexKind::plus_infinity : IndexKind::minus_infinity;
        est.value = est.flux.back() > 0 ? std::numeric_limits<double>::infinity()
                                        : -std::numeric_limits<double>::infinity();
        return est;
    }
    // Cauchy along the ladder: the last increments shrink and end below tolerance.
    bool shrinking = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = n - 4; k + 1 < n; ++k) {
        const double d = std::abs(resolved[k + 1] - resolved[k]);
        if (d > prev) shrinking = false;
        prev = d;
    }
    const bool settled = prev <= controls.tol * (1.0 + std::abs(x2));
    est.kind = shrinking && settled ? IndexKind::finite : IndexKind::unreliable;
    est.value = x2;
    return est;
}

void check_index_shape(const IndexEstimate& estimate, bool hurwitz_region) {
    if (hurwitz_region && estimate.kind == IndexKind::plus_infinity)
        throw InconsistencyError("index +inf for a field that is Hurwitz on the scanned region");
}

ExtensionProbeReport extension_independence_probe(const VectorField& field, const std::vector<double>& s_values,
                                                  const IndexControls& controls) {
    for (double s : s_values)
        if (!(s >= field.sigma())) throw PreconditionError("extension_independence_probe: s values must be at least sigma");
    ExtensionProbeReport rep;
    for (double s : s_values)
        for (double k : {1.0, 2.0}) {
            IndexControls c = controls;
            c.s = s;
            c.interior_scale = k;
            rep.runs.push_back({s, k, compute_index(field, c)});
        }
    rep.kinds_agree = true;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : rep.runs) {
        if (r.estimate.kind != rep.runs.front().estimate.kind) rep.kinds_agree = false;
        if (r.estimate.kind == IndexKind::finite) {
            lo = std::min(lo, r.estimate.value);
            hi = std::max(hi, r.estimate.value);
        }
    }
    rep.max_discrepancy = hi >= lo ? hi - lo : 0.0;
    return rep;
}

}  // namespace horizon
