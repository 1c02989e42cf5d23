#include "horizon/tangency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "horizon/foliation.hpp"
#include "horizon/parallel.hpp"

namespace horizon {

std::string to_string(TangencyClass k) {
    switch (k) {
        case TangencyClass::internal: return "internal";
        case TangencyClass::external: return "external";
        case TangencyClass::degenerate: return "degenerate";
    }
    return "?";
}

std::string to_string(CurveFamily f) { return f == CurveFamily::circles ? "circles" : "star_shaped"; }

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Vec2 gradient_f(const VectorField& field, const Point& p) {
    const Mat2 j = field.jacobian(p);
    const Vec2 g(j(0, 0), j(0, 1));
    if (!(g.norm() >= 1e-12)) {
        std::ostringstream os;
        os << "X_f vanishes on the curve at (" << p.x() << ", " << p.y() << ")";
        throw NumericError(os.str());
    }
    return g;
}

// sin of the angle from X_f to c'(t); zero exactly at tangencies.
double normalized_cross(const VectorField& field, const ClosedCurve& curve, double t) {
    const Vec2 g = gradient_f(field, curve.point(t));
    const Vec2 d = curve.tangent(t);
    return -g.dot(d) / (g.norm() * d.norm());
}

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a;
}

double cyclic_gap(double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, kTwoPi - d);
}

TangencyClass classify(const VectorField& field, const ClosedCurve& curve, double t, double lambda, double delta) {
    const Point p = curve.point(t);
    const double phi = field.evaluate(p).x();
    const double minus = field.evaluate(curve.point(t - delta)).x() - phi;
    const double plus = field.evaluate(curve.point(t + delta)).x() - phi;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(phi) + std::abs(lambda) * p.norm() + 1.0);
    if (std::abs(minus) <= noise || std::abs(plus) <= noise) return TangencyClass::degenerate;
    // f - f(p) along the curve against f - f(p) just outside it (sign of lambda).
    const double sm = minus * lambda, sp = plus * lambda;
    if (sm < 0 && sp < 0) return TangencyClass::external;
    if (sm > 0 && sp > 0) return TangencyClass::internal;
    return TangencyClass::degenerate;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (a + s * ab - p).norm();
}

// Whether some traced leaf passes through two tangencies.
bool tangencies_share_leaf(const VectorField& field, const ClosedCurve& curve, const std::vector<TangencyPoint>& pts) {
    const double perimeter = curve.perimeter();
    const double reach = curve.base_radius() + curve.center().norm();
    LeafControls lc;
    lc.window = Window{-3 * reach, 3 * reach, -3 * reach, 3 * reach};
    lc.step = perimeter / 4000.0;
    lc.max_length = 4.0 * perimeter;
    const double tol = 1e-4 * curve.base_radius();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<std::size_t> partners;
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i && std::abs(pts[i].level - pts[j].level) <= lc.leaf_tol(pts[i].level)) partners.push_back(j);
        if (partners.empty()) continue;
        const LeafArc arc = trace_leaf(field, pts[i].position, LeafComponent::f, lc);
        for (std::size_t j : partners) {
            if (j < i) continue;
            for (std::size_t k = 0; k + 1 < arc.points.size(); ++k) {
                // Skip the segments adjacent to the start of the trace.
                if (k + 1 >= arc.start_index && k <= arc.start_index) continue;
                if (point_segment_distance(pts[j].position, arc.points[k], arc.points[k + 1]) < tol) return true;
            }
        }
    }
    return false;
}

}  // namespace

std::vector<TangencyPoint> find_tangencies(const VectorField& field, const ClosedCurve& curve,
                                           const TangencyControls& controls) {
    curve.validate(field.sigma());
    const int n = std::max(16, controls.samples);
    const double h = kTwoPi / n;
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) s[i] = normalized_cross(field, curve, i * h);

    struct Root {
        double t;
        bool touching;  // zero of the cross product without a sign change
    };
    std::vector<Root> roots;
    for (int i = 0; i < n; ++i) {
        const double a = s[i], b = s[(i + 1) % n];
        if (a == 0.0) {
            const double prev = s[(i + n - 1) % n];
            roots.push_back({i * h, prev * b > 0});
            continue;
        }
        if (a * b < 0.0) {
            double lo = i * h, hi = (i + 1) * h;
            double slo = a;
            for (int it = 0; it < 80 && hi - lo > controls.theta_tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double sm = normalized_cross(field, curve, mid);
                if (sm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((sm < 0) == (slo < 0)) {
                    lo = mid;
                    slo = sm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back({wrap_angle(0.5 * (lo + hi)), false});
            continue;
        }
        // A sampled local minimum of |s| within angle_tol that does not change sign.
        const double prev = s[(i + n - 1) % n];
        if (std::abs(a) < controls.angle_tol && std::abs(a) <= std::abs(prev) && std::abs(a) <= std::abs(b) &&
            prev * b > 0)
            roots.push_back({i * h, true});
    }
    std::sort(roots.begin(), roots.end(), [](const Root& x, const Root& y) { return x.t < y.t; });
    std::vector<Root> unique;
    for (const auto& r : roots)
        if (unique.empty() || cyclic_gap(unique.back().t, r.t) > 1e-9) unique.push_back(r);
    if (unique.size() > 1 && cyclic_gap(unique.front().t, unique.back().t) <= 1e-9) unique.pop_back();

    std::vector<TangencyPoint> out;
    out.reserve(unique.size());
    for (std::size_t k = 0; k < unique.size(); ++k) {
        double gap = kTwoPi;
        if (unique.size() > 1) {
            gap = std::min(cyclic_gap(unique[k].t, unique[(k + 1) % unique.size()].t),
                           cyclic_gap(unique[k].t, unique[(k + unique.size() - 1) % unique.size()].t));
        }
        TangencyPoint tp;
        tp.theta = unique[k].t;
        tp.position = curve.point(tp.theta);
        tp.level = field.evaluate(tp.position).x();
        tp.normal_slope = gradient_f(field, tp.position).dot(curve.outward_normal(tp.theta));
        tp.klass = unique[k].touching ? TangencyClass::degenerate
                                      : classify(field, curve, tp.theta, tp.normal_slope, std::min(1e-3, 0.25 * gap));
        if (tp.klass == TangencyClass::degenerate && controls.throw_on_degenerate) {
            std::ostringstream os;
            os << "degenerate tangency of " << field.name() << " with " << curve.describe() << " at theta=" << tp.theta;
            throw DegenerateTangencyError(os.str(), tp.theta);
        }
        out.push_back(tp);
    }
    return out;
}

int curve_index(const VectorField& field, const ClosedCurve& curve, int samples) {
    curve.validate(field.sigma());
    for (int attempt = 0; attempt < 2; ++attempt) {
        const int n = std::max(16, samples) * (attempt == 0 ? 1 : 16);
        auto angle = [&](int i) {
            const Point p = curve.point(kTwoPi * (i % n) / n);
            const Vec2 g = gradient_f(field, p);
            return std::atan2(g.x(), -g.y());  // direction of X_f = (-f_y, f_x)
        };
        double total = 0.0, prev = angle(0);
        bool resolved = true;
        for (int i = 1; i <= n && resolved; ++i) {
            const double cur = angle(i);
            double d = cur - prev;
            while (d > M_PI) d -= kTwoPi;
            while (d < -M_PI) d += kTwoPi;
            if (std::abs(d) >= M_PI / 2) resolved = false;
            total += d;
            prev = cur;
        }
        if (resolved) return static_cast<int>(std::lround(total / kTwoPi));
    }
    throw NumericError("curve_index: angle increment of X_f reached pi/2 after refinement on " + curve.describe());
}

namespace {

TangencyReport analyze(const VectorField& field, const ClosedCurve& curve, const TangencyControls& controls) {
    TangencyControls tc = controls;
    tc.throw_on_degenerate = false;
    TangencyReport r;
    r.curve = curve;
    r.points = find_tangencies(field, curve, tc);
    for (const auto& p : r.points) {
        if (p.klass == TangencyClass::external) ++r.n_ext;
        if (p.klass == TangencyClass::internal) ++r.n_int;
        if (p.klass == TangencyClass::degenerate) ++r.n_degenerate;
    }
    r.index_formula = (2.0 - r.n_ext + r.n_int) / 2.0;
    r.index_winding = curve_index(field, curve);
    r.formula_holds = r.index_formula == static_cast<double>(r.index_winding);
    if (r.n_degenerate == 0) r.shared_leaf = tangencies_share_leaf(field, curve, r.points);
    r.general_position = r.n_degenerate == 0 && !r.shared_leaf && !r.points.empty();
    if (!r.points.empty()) {
        auto by_level = [](const TangencyPoint& a, const TangencyPoint& b) { return a.level < b.level; };
        const auto lo = std::min_element(r.points.begin(), r.points.end(), by_level);
        const auto hi = std::max_element(r.points.begin(), r.points.end(), by_level);
        r.extremes_external =
            lo != hi && lo->klass == TangencyClass::external && hi->klass == TangencyClass::external;
    }
    return r;
}

}  // namespace

TangencyReport tangency_report(const VectorField& field, const ClosedCurve& curve, const TangencyControls& controls) {
    TangencyReport r = analyze(field, curve, controls);
    std::mt19937_64 rng(controls.seed);
    const int harmonics = std::max(1, controls.jitter_harmonics);
    const double amp = controls.jitter_amplitude * curve.base_radius() / harmonics;
    std::uniform_real_distribution<double> coeff(-amp, amp);
    for (int attempt = 1; !r.general_position && attempt <= controls.jitter_retries; ++attempt) {
        std::vector<double> a(harmonics), b(harmonics);
        for (int k = 0; k < harmonics; ++k) {
            a[k] = coeff(rng);
            b[k] = coeff(rng);
        }
        const ClosedCurve jittered = curve.perturbed(a, b);
        if (!(jittered.min_distance_to_origin() > field.sigma())) continue;
        r = analyze(field, jittered, controls);
        r.jitter_retries = attempt;
    }
    return r;
}

EtaSweepResult eta_sweep(const VectorField& field, const std::vector<double>& radii, CurveFamily family,
                         const EtaSweepControls& controls) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] >= field.sigma())) throw PreconditionError("eta_sweep: radii must be at least sigma");
        if (i > 0 && !(radii[i] > radii[i - 1])) throw PreconditionError("eta_sweep: radii must increase");
    }
    struct Job {
        std::size_t radius_index;
        ClosedCurve curve;
    };
    std::vector<Job> jobs;
    std::mt19937_64 rng(controls.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        // A circle of radius exactly sigma touches the disk; move it just outside.
        const double r = std::max(radii[i], field.sigma() * (1.0 + 1e-9));
        jobs.push_back({i, ClosedCurve::circle({0, 0}, r)});
        if (family != CurveFamily::star_shaped) continue;
        const int h = std::max(1, controls.harmonics);
        for (int k = 0; k < controls.perturbations; ++k) {
            // rho = r (1 + sum c_m) + r sum c_m cos(m t + phase_m) >= r.
            std::vector<double> a(h), b(h);
            double total = 0.0;
            for (int m = 0; m < h; ++m) {
                const double c = controls.amplitude / h * unit(rng);
                const double phase = kTwoPi * unit(rng);
                a[m] = r * c * std::cos(phase);
                b[m] = -r * c * std::sin(phase);
                total += c;
            }
            jobs.push_back({i, ClosedCurve::star({0, 0}, r * (1.0 + total), a, b)});
        }
    }

    std::vector<TangencyReport> reports(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t j) {
        TangencyControls tc = controls.tangency;
        tc.seed = controls.tangency.seed + 0x9e3779b97f4a7c15ULL * (j + 1);
        reports[j] = tangency_report(field, jobs[j].curve, tc);
    });

    EtaSweepResult out;
    out.family = family;
    out.entries.resize(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) out.entries[i].radius = radii[i];
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        auto& e = out.entries[jobs[j].radius_index];
        ++e.curves_tried;
        if (!reports[j].general_position) continue;
        ++e.curves_general;
        e.n_int_min = e.n_int_min ? std::min(*e.n_int_min, reports[j].n_int) : reports[j].n_int;
    }
    for (std::size_t i = 1; i < out.entries.size(); ++i) {
        const auto& prev = out.entries[i - 1].n_int_min;
        const auto& cur = out.entries[i].n_int_min;
        if (prev && cur && *cur < *prev) out.monotonicity_violations.push_back(i);
    }
    return out;
}

}  // namespace horizon
