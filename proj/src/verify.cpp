#include "horizon/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <optional>
#include <sstream>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "horizon/parallel.hpp"

namespace horizon {

std::string to_string(FluxVariant v) { return v == FluxVariant::positive ? "positive" : "negative"; }

namespace {

constexpr int kArcNodes = 7;
constexpr int kAreaNodes = 20;

using ArcRule = boost::math::quadrature::gauss<double, kArcNodes>;
using AreaRule = boost::math::quadrature::gauss<double, kAreaNodes>;

// Full node/weight list of an n-point rule on [-1, 1].
template <typename Rule>
std::vector<std::pair<double, double>> full_rule() {
    std::vector<std::pair<double, double>> out;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            out.emplace_back(0.0, w[i]);
        } else {
            out.emplace_back(-x[i], w[i]);
            out.emplace_back(x[i], w[i]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

const std::vector<std::pair<double, double>>& arc_rule() {
    static const auto r = full_rule<ArcRule>();
    return r;
}

const std::vector<std::pair<double, double>>& area_rule() {
    static const auto r = full_rule<AreaRule>();
    return r;
}

// Integral of fn over [lo, hi] split into `panels` equal Gauss-Legendre panels.
template <typename Fn>
double panel_integral(Fn&& fn, double lo, double hi, int panels) {
    if (hi <= lo) return 0.0;
    const double w = (hi - lo) / panels;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double c = lo + (k + 0.5) * w;
        for (const auto& [x, wt] : area_rule()) sum += wt * fn(c + 0.5 * w * x);
    }
    return 0.5 * w * sum;
}

Vec2 grad_f(const VectorField& field, const Point& p) {
    const Mat2 j = field.jacobian(p);
    return {j(0, 0), j(0, 1)};
}

Vec2 unit_tangent(const VectorField& field, const Point& p) {
    const Vec2 g = grad_f(field, p);
    const double n = g.norm();
    if (!(n > 0.0)) throw NumericError("verify: grad f vanishes on the arc");
    return Vec2(-g.y(), g.x()) / n;
}

Point project(const VectorField& field, Point z, double level) {
    for (int it = 0; it < 4; ++it) {
        const Vec2 g = grad_f(field, z);
        const double r = field.evaluate(z).x() - level;
        if (r == 0.0) break;
        z -= (r / g.squaredNorm()) * g;
    }
    return z;
}

// Point at arc length s from z along sign * X_f, one RK4 step then projection.
Point advance(const VectorField& field, const Point& z, int sign, double s, double level) {
    if (s == 0.0) return z;
    const Vec2 k1 = sign * unit_tangent(field, z);
    const Vec2 k2 = sign * unit_tangent(field, z + 0.5 * s * k1);
    const Vec2 k3 = sign * unit_tangent(field, z + 0.5 * s * k2);
    const Vec2 k4 = sign * unit_tangent(field, z + s * k3);
    return project(field, z + (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), level);
}

struct Segment {
    Point start{0, 0};
    Point end{0, 0};
    int sign = 1;        // direction of travel relative to X_f
    double length = 0.0; // arc length
};

// Arc-length parameterization of a traced leaf polyline.
struct ArcParam {
    const VectorField* field = nullptr;
    double level = 0.0;
    std::vector<Segment> segments;

    Point at(std::size_t i, double s) const { return advance(*field, segments[i].start, segments[i].sign, s, level); }
    Vec2 direction(std::size_t i, double s) const { return segments[i].sign * unit_tangent(*field, at(i, s)); }

    // Composite Gauss-Legendre sum of fn(z) ds.
    template <typename Fn>
    double integrate(Fn&& fn) const {
        double total = 0.0;
        for (std::size_t i = 0; i < segments.size(); ++i) {
            const double l = segments[i].length;
            double sum = 0.0;
            for (const auto& [x, w] : arc_rule()) sum += w * fn(at(i, 0.5 * l * (1.0 + x)));
            total += 0.5 * l * sum;
        }
        return total;
    }
};

ArcParam parameterize(const VectorField& field, const LeafArc& arc) {
    ArcParam a;
    a.field = &field;
    a.level = field.evaluate(arc.points.front()).x();
    std::vector<Point> pts;
    pts.reserve(arc.points.size());
    for (const auto& p : arc.points) {
        const Point q = project(field, p, a.level);
        if (pts.empty() || (q - pts.back()).norm() > 0.0) pts.push_back(q);
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        Segment s;
        s.start = pts[i];
        s.end = pts[i + 1];
        const Vec2 chord = s.end - s.start;
        s.sign = unit_tangent(field, s.start).dot(chord) >= 0.0 ? 1 : -1;
        double l = chord.norm();
        for (int it = 0; it < 2; ++it) {
            const Point e = advance(field, s.start, s.sign, l, a.level);
            l += (s.end - e).dot(s.sign * unit_tangent(field, e));
        }
        s.length = l;
        a.segments.push_back(s);
    }
    return a;
}

double x_tolerance(const LeafArc& arc) {
    double m = 0.0;
    for (const auto& p : arc.points) m = std::max(m, std::abs(p.x()));
    return 1e-9 * (1.0 + m);
}

bool spectrum_along(const VectorField& field, const std::vector<Point>& pts) {
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / 64);
    for (std::size_t i = 0; i < pts.size(); i += stride)
        if (!spectrum(field.jacobian(pts[i])).no_nonneg_real()) return false;
    return spectrum(field.jacobian(pts.back())).no_nonneg_real();
}

template <typename Fn>
double solve_on_segment(Fn&& fn, double lo, double hi, double f_lo, double f_hi) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo < 0.0) == (f_hi < 0.0)) return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
    std::uintmax_t iters = 100;
    const auto r = boost::math::tools::toms748_solve(fn, lo, hi, f_lo, f_hi,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

// Sub-segment of the arc on which x is monotone.
struct MonotonePiece {
    std::size_t segment = 0;
    double s0 = 0.0;
    double s1 = 0.0;
    double x0 = 0.0;
    double x1 = 0.0;
};

// Splits every segment at the points where the arc direction turns in x
// (critical points of the projection); fills the sorted critical x-values.
std::vector<MonotonePiece> monotone_pieces(const ArcParam& a, std::vector<double>& critical) {
    std::vector<MonotonePiece> out;
    critical.clear();
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        const Segment& seg = a.segments[i];
        const double l = seg.length;
        const double d0 = a.direction(i, 0.0).x();
        const double d1 = a.direction(i, l).x();
        if ((d0 < 0.0) == (d1 < 0.0)) {
            out.push_back({i, 0.0, l, seg.start.x(), seg.end.x()});
            continue;
        }
        auto fn = [&](double s) { return a.direction(i, s).x(); };
        const double sc = solve_on_segment(fn, 0.0, l, d0, d1);
        const double xc = a.at(i, sc).x();
        critical.push_back(xc);
        out.push_back({i, 0.0, sc, seg.start.x(), xc});
        out.push_back({i, sc, l, xc, seg.end.x()});
    }
    std::sort(critical.begin(), critical.end());
    return out;
}

// Heights where the vertical line x = alpha meets the arc, highest first.
std::vector<double> crossings(const VectorField& field, const ArcParam& a, const std::vector<MonotonePiece>& pieces,
                              double alpha) {
    std::vector<double> ys;
    for (const auto& pc : pieces) {
        if ((pc.x0 < alpha) == (pc.x1 < alpha)) continue;
        auto fn = [&](double s) { return a.at(pc.segment, s).x() - alpha; };
        const double s = solve_on_segment(fn, pc.s0, pc.s1, pc.x0 - alpha, pc.x1 - alpha);
        Point z = a.at(pc.segment, s);
        // Polish the height with x pinned to alpha while the leaf is far from vertical.
        z.x() = alpha;
        for (int it = 0; it < 3; ++it) {
            const Vec2 g = grad_f(field, z);
            if (std::abs(g.y()) < 0.1 * g.norm()) break;
            z.y() -= (field.evaluate(z).x() - a.level) / g.y();
        }
        ys.push_back(z.y());
    }
    std::sort(ys.begin(), ys.end(), std::greater<>());
    return ys;
}

double slice_integral(const VectorField& field, double alpha, const std::vector<double>& ys, double baseline) {
    if (ys.size() % 2 == 0) {
        std::ostringstream os;
        os << "green_identity_check: the line x = " << alpha << " meets the arc " << ys.size() << " times";
        throw RegionConstructionError(os.str());
    }
    auto gy = [&](double y) { return field.jacobian(Point(alpha, y))(1, 1); };
    double sum = 0.0;
    for (std::size_t k = 0; k < ys.size(); k += 2) {
        const double top = ys[k];
        const double bottom = k + 1 < ys.size() ? ys[k + 1] : baseline;
        const int panels = std::max(1, static_cast<int>(std::ceil(top - bottom)));
        sum += panel_integral(gy, bottom, top, panels);
    }
    return sum;
}

// Area integral of g_y over the region, in vertical slices. Each interval
// between critical x-values is mapped by alpha = a0 + (a1 - a0)(1 - cos pi u)/2
// so the square-root behaviour of the crossings at folds becomes smooth in u.
double area_form(const VectorField& field, const ArcParam& a, const std::vector<MonotonePiece>& pieces, double lo,
                 double hi, const std::vector<double>& crit, double baseline) {
    std::vector<double> cuts{lo};
    for (double c : crit)
        if (c > cuts.back() && c < hi) cuts.push_back(c);
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a0 = cuts[k];
        const double a1 = cuts[k + 1];
        const int panels = std::clamp(static_cast<int>(std::ceil(2.0 * (a1 - a0))), 4, 64);
        auto integrand = [&](double u) {
            const double alpha = a0 + 0.5 * (a1 - a0) * (1.0 - std::cos(M_PI * u));
            const double jac = 0.5 * M_PI * (a1 - a0) * std::sin(M_PI * u);
            if (jac == 0.0) return 0.0;
            return jac * slice_integral(field, alpha, crossings(field, a, pieces, alpha), baseline);
        };
        total += panel_integral(integrand, 0.0, 1.0, panels);
    }
    return total;
}

int orientation(const LeafArc& arc, double tolx) {
    const double d = arc.points.back().x() - arc.points.front().x();
    return d > tolx ? 1 : (d < -tolx ? -1 : 0);
}

LeafArc make_arc(const VectorField& field, std::vector<Point> pts, LeafEnd end_high) {
    LeafArc arc;
    arc.component = LeafComponent::f;
    arc.level = pts.empty() ? 0.0 : field.evaluate(pts.front()).x();
    arc.points = std::move(pts);
    for (const auto& p : arc.points) arc.transverse.push_back(field.evaluate(p).y());
    arc.end_low = LeafEnd::length_budget;
    arc.end_high = end_high;
    return arc;
}

}  // namespace

ArcIntegralReport green_identity_check(const VectorField& field, const LeafArc& arc, double baseline,
                                       const VerifyTolerances& tol) {
    if (arc.points.size() < 2) throw RegionConstructionError("green_identity_check: the arc needs two points");
    const double tolx = x_tolerance(arc);
    const Point& p = arc.points.front();
    const Point& q = arc.points.back();
    const double lo = std::min(p.x(), q.x());
    const double hi = std::max(p.x(), q.x());
    double y_min = p.y();
    for (const auto& z : arc.points) {
        if (z.x() < lo - tolx || z.x() > hi + tolx)
            throw RegionConstructionError("green_identity_check: the endpoints are not the x-extremes of the arc");
        y_min = std::min(y_min, z.y());
    }
    if (!(lo > field.sigma())) throw RegionConstructionError("green_identity_check: the region must lie right of x = sigma");
    if (!(baseline < y_min)) throw RegionConstructionError("green_identity_check: the baseline must lie below the arc");

    const int o = orientation(arc, tolx);
    const ArcParam a = parameterize(field, arc);
    const double fp = a.level;
    const double w = o == 0 ? -1.0 : -o;
    const double leaf = a.integrate([&](const Point& z) {
        const Vec2 x = field.evaluate(z);
        const Vec2 g = grad_f(field, z);
        return w * ((x.x() - fp) * g.x() + x.y() * g.y()) / g.norm();
    });
    const int base_panels = std::max(1, static_cast<int>(std::ceil(hi - lo)));
    const double bottom = panel_integral([&](double al) { return field.evaluate(Point(al, baseline)).y(); }, lo, hi,
                                         base_panels);

    ArcIntegralReport r;
    r.arc = arc;
    r.check = "green";
    r.baseline = baseline;
    r.span = hi - lo;
    std::vector<double> crit;
    const std::vector<MonotonePiece> pieces = monotone_pieces(a, crit);
    r.pieces = static_cast<int>(crit.size()) + 1;
    r.lhs = o == 0 ? 0.0 : area_form(field, a, pieces, lo, hi, crit, baseline);
    r.rhs = leaf - bottom;
    r.slack = r.lhs - r.rhs;
    r.threshold = tol.identity_tol * (1.0 + std::abs(r.lhs));
    r.passed = std::abs(r.slack) <= r.threshold;
    r.spectrum_ok = spectrum_along(field, arc.points);
    return r;
}

ArcIntegralReport flux_inequality_check(const VectorField& field, const LeafArc& arc, FluxVariant variant,
                                        const VerifyTolerances& tol) {
    if (arc.points.size() < 2) throw OrderingError("flux_inequality_check: the arc needs two points");
    const double tolx = x_tolerance(arc);
    const Point& p = arc.points.front();
    const Point& q = arc.points.back();
    const int o = variant == FluxVariant::positive ? 1 : -1;
    if (o * (q.x() - p.x()) < -tolx) {
        std::ostringstream os;
        os << "flux_inequality_check: " << to_string(variant) << " variant needs "
           << (o > 0 ? "x(p) <= x(q)" : "x(q) <= x(p)") << ", got x(p) = " << p.x() << ", x(q) = " << q.x();
        throw OrderingError(os.str());
    }
    const double lo = std::min(p.x(), q.x());
    const double hi = std::max(p.x(), q.x());
    for (const auto& z : arc.points)
        if (z.x() < lo - tolx || z.x() > hi + tolx)
            throw OrderingError("flux_inequality_check: the arc leaves the x-range of its endpoints");
    if (!(lo > field.sigma())) throw OrderingError("flux_inequality_check: the x-range must lie in (sigma, inf)");

    const ArcParam a = parameterize(field, arc);
    const double lhs = a.integrate([&](const Point& z) {
        const Vec2 g = grad_f(field, z);
        return -o * field.evaluate(z).dot(g) / g.norm();
    });
    const double fx_int = a.integrate([&](const Point& z) {
        const Vec2 g = grad_f(field, z);
        return -o * g.x() / g.norm();
    });
    const Point& ref = variant == FluxVariant::positive ? p : q;

    ArcIntegralReport r;
    r.arc = arc;
    r.check = "flux_" + to_string(variant);
    r.span = hi - lo;
    std::vector<double> crit;
    monotone_pieces(a, crit);
    r.pieces = static_cast<int>(crit.size()) + 1;
    r.lhs = lhs;
    r.rhs = field.evaluate(ref).x() * fx_int + field.evaluate(p).y() * r.span;
    r.slack = r.lhs - r.rhs;
    r.threshold = tol.numerical_slack * (1.0 + std::abs(r.lhs));
    r.passed = r.slack >= -r.threshold;
    r.spectrum_ok = spectrum_along(field, arc.points);
    return r;
}

LeafArc flux_arc(const VectorField& field, const Point& p, FluxVariant variant, double length, double step) {
    LeafControls c;
    c.max_length = length;
    c.step = step;
    const HalfLeaf h = trace_half_leaf(field, p, LeafComponent::f, +1, c);
    const int dir = variant == FluxVariant::positive ? 1 : -1;
    double m = 0.0;
    for (const auto& z : h.points) m = std::max(m, std::abs(z.x()));
    const double tolx = 1e-9 * (1.0 + m);

    std::size_t stop = h.points.size();
    for (std::size_t i = 1; i < h.points.size(); ++i)
        if (dir * (h.points[i].x() - p.x()) < -tolx) {
            stop = i;
            break;
        }
    double best = 0.0;
    for (std::size_t i = 0; i < stop; ++i) best = std::max(best, dir * (h.points[i].x() - p.x()));
    std::size_t last = 0;
    for (std::size_t i = 0; i < stop; ++i)
        if (dir * (h.points[i].x() - p.x()) >= best - tolx) last = i;
    if (last == 0) return make_arc(field, {}, LeafEnd::length_budget);
    std::vector<Point> pts(h.points.begin(), h.points.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    return make_arc(field, std::move(pts), last + 1 == h.points.size() ? h.end : LeafEnd::length_budget);
}

std::vector<Point> random_annulus_points(std::size_t n, double r_min, double r_max, std::uint64_t seed, double x_min) {
    if (!(r_min > 0.0 && r_max > r_min)) throw PreconditionError("random_annulus_points: need 0 < r_min < r_max");
    if (x_min >= r_max) throw PreconditionError("random_annulus_points: x_min excludes the annulus");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u2(r_min * r_min, r_max * r_max);
    std::uniform_real_distribution<double> th(0.0, 2.0 * M_PI);
    std::vector<Point> out;
    out.reserve(n);
    while (out.size() < n) {
        const double r = std::sqrt(u2(rng));
        const double t = th(rng);
        const Point z(r * std::cos(t), r * std::sin(t));
        if (z.x() > x_min) out.push_back(z);
    }
    return out;
}

bool FluxBatchReport::all_passed() const {
    return std::all_of(arcs.begin(), arcs.end(), [](const ArcIntegralReport& r) { return r.passed; });
}

bool GreenBatchReport::all_passed() const {
    return std::all_of(regions.begin(), regions.end(), [](const ArcIntegralReport& r) { return r.passed; });
}

namespace {

bool acceptable_arc(const VectorField& field, const LeafArc& arc, const ArcSampling& sampling) {
    if (arc.points.size() < 3) return false;
    double lo = arc.points.front().x();
    for (const auto& z : arc.points) lo = std::min(lo, z.x());
    if (!(lo > field.sigma() * (1.0 + 1e-6))) return false;
    const double span = std::abs(arc.points.back().x() - arc.points.front().x());
    if (span >= sampling.min_span) return true;
    // Vertical leaves: every x equals the seed's.
    const double tolx = x_tolerance(arc);
    return arc.length() >= 0.5 * sampling.length &&
           std::all_of(arc.points.begin(), arc.points.end(),
                       [&](const Point& z) { return std::abs(z.x() - arc.points.front().x()) <= tolx; });
}

std::vector<LeafArc> sample_arcs(const VectorField& field, FluxVariant variant, const ArcSampling& sampling) {
    std::vector<LeafArc> out;
    const std::size_t want = static_cast<std::size_t>(sampling.count);
    const std::size_t batch = std::max<std::size_t>(want, 16);
    const std::size_t budget = want * static_cast<std::size_t>(sampling.max_attempts);
    const std::vector<Point> seeds = random_annulus_points(budget, std::max(sampling.r_min, field.sigma() * (1 + 1e-6)),
                                                           sampling.r_max, sampling.seed, field.sigma());
    for (std::size_t start = 0; start < budget && out.size() < want; start += batch) {
        const std::size_t n = std::min(batch, budget - start);
        std::vector<LeafArc> arcs(n);
        std::vector<char> ok(n, 0);
        parallel_for(n, [&](std::size_t i) {
            try {
                arcs[i] = flux_arc(field, seeds[start + i], variant, sampling.length);
                ok[i] = acceptable_arc(field, arcs[i], sampling);
            } catch (const NumericError&) {
                ok[i] = 0;
            } catch (const PreconditionError&) {
                ok[i] = 0;
            }
        });
        for (std::size_t i = 0; i < n && out.size() < want; ++i)
            if (ok[i]) out.push_back(std::move(arcs[i]));
    }
    return out;
}

}  // namespace

FluxBatchReport flux_inequality_batch(const VectorField& field, FluxVariant variant, const ArcSampling& sampling,
                                      const VerifyTolerances& tol) {
    FluxBatchReport rep;
    rep.variant = variant;
    std::vector<LeafArc> arcs = sample_arcs(field, variant, sampling);
    VectorField used = field;
    if (arcs.size() < static_cast<std::size_t>(sampling.count)) {
        Mat2 q;
        q << 1, 0, 0, -1;
        used = field.conjugated(q, "_reflected");
        arcs = sample_arcs(used, variant, sampling);
        rep.reflected = true;
        if (arcs.size() < static_cast<std::size_t>(sampling.count)) {
            std::ostringstream os;
            os << "flux_inequality_batch: found " << arcs.size() << " of " << sampling.count << " "
               << to_string(variant) << " arcs";
            throw PreconditionError(os.str());
        }
    }
    rep.arcs.resize(arcs.size());
    parallel_for(arcs.size(), [&](std::size_t i) { rep.arcs[i] = flux_inequality_check(used, arcs[i], variant, tol); });
    rep.min_relative_slack = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.arcs) rep.min_relative_slack = std::min(rep.min_relative_slack, r.slack / (1.0 + std::abs(r.lhs)));
    return rep;
}

GreenBatchReport green_identity_batch(const VectorField& field, const std::vector<Point>& seeds, double length,
                                      const VerifyTolerances& tol) {
    GreenBatchReport rep;
    rep.regions.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        LeafArc arc = flux_arc(field, seeds[i], FluxVariant::positive, length);
        if (arc.points.size() < 3) arc = flux_arc(field, seeds[i], FluxVariant::negative, length);
        if (arc.points.size() < 2) throw RegionConstructionError("green_identity_batch: no arc through the seed");
        double y_min = arc.points.front().y();
        for (const auto& z : arc.points) y_min = std::min(y_min, z.y());
        rep.regions[i] = green_identity_check(field, arc, y_min - 2.0, tol);
    });
    rep.degenerate = !rep.regions.empty();
    for (const auto& r : rep.regions) {
        rep.degenerate = rep.degenerate && r.span <= x_tolerance(r.arc);
        rep.max_relative_error = std::max(rep.max_relative_error, std::abs(r.slack) / (1.0 + std::abs(r.lhs)));
    }
    return rep;
}

namespace {

double distance_to_ray(const Point& z, const Point& p, bool upward) {
    const bool beside = upward ? z.y() >= p.y() : z.y() <= p.y();
    return beside ? std::abs(z.x() - p.x()) : (z - p).norm();
}

RayProbe probe_ray(const std::vector<Point>& pts, const Point& p, bool upward, double departure, double hit_tol) {
    RayProbe r;
    r.closest = std::numeric_limits<double>::infinity();
    std::size_t first = pts.size();
    for (std::size_t i = 1; i < pts.size(); ++i)
        if ((pts[i] - p).norm() > departure) {
            first = i;
            break;
        }
    for (std::size_t i = first; i < pts.size(); ++i) {
        r.closest = std::min(r.closest, distance_to_ray(pts[i], p, upward));
        if (i + 1 >= pts.size()) break;
        const double u = pts[i].x() - p.x();
        const double v = pts[i + 1].x() - p.x();
        if ((u < 0.0) != (v < 0.0) && u != v) {
            const double t = u / (u - v);
            const double y = pts[i].y() + t * (pts[i + 1].y() - pts[i].y());
            if (upward ? y >= p.y() : y <= p.y()) {
                r.hit = true;
                r.closest = 0.0;
            }
        }
    }
    if (r.closest <= hit_tol) r.hit = true;
    return r;
}

}  // namespace

VerticalRayReport vertical_ray_check(const VectorField& field, const std::vector<Point>& seeds,
                                     const VerticalRayControls& controls) {
    VerticalRayReport rep;
    rep.entries.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        const Point& p = seeds[i];
        LeafControls c;
        c.max_length = controls.length;
        c.step = controls.step;
        const double h = controls.step > 0.0 ? controls.step : 2e-3 * (1.0 + p.norm());
        const double tol = controls.hit_tol * (1.0 + p.norm());
        const HalfLeaf plus = trace_half_leaf(field, p, LeafComponent::f, +1, c);
        const HalfLeaf minus = trace_half_leaf(field, p, LeafComponent::f, -1, c);
        VerticalRayEntry& e = rep.entries[i];
        e.seed = p;
        e.plus = probe_ray(plus.points, p, true, 10.0 * h, tol);
        e.plus.end = plus.end;
        e.minus = probe_ray(minus.points, p, false, 10.0 * h, tol);
        e.minus.end = minus.end;
        e.spectrum_ok = spectrum_along(field, plus.points) && spectrum_along(field, minus.points);
    });
    rep.min_closest = std::numeric_limits<double>::infinity();
    for (const auto& e : rep.entries) {
        if (!e.spectrum_ok) {
            ++rep.skipped;
            continue;
        }
        if (e.plus.hit || e.minus.hit) ++rep.hits;
        rep.min_closest = std::min({rep.min_closest, e.plus.closest, e.minus.closest});
    }
    return rep;
}

namespace {

// Newton on X(z) = target from z; nullopt when it stalls or leaves the domain.
std::optional<Point> solve_preimage(const VectorField& field, Point z, const Vec2& target, double tol) {
    for (int it = 0; it < 30; ++it) {
        if (!field.in_domain(z)) return std::nullopt;
        const Vec2 r = field.evaluate(z) - target;
        if (r.norm() <= tol) return z;
        const Mat2 j = field.jacobian(z);
        const double det = j.determinant();
        if (!(std::abs(det) > 0.0)) return std::nullopt;
        Mat2 inv;
        inv << j(1, 1), -j(0, 1), -j(1, 0), j(0, 0);
        z -= (inv / det) * r;
    }
    return std::nullopt;
}

}  // namespace

InjectivityScanReport injectivity_scan(const VectorField& field, double s, std::size_t n_pairs, std::uint64_t seed,
                                       const InjectivityControls& controls) {
    if (!(s >= field.sigma())) throw PreconditionError("injectivity_scan: s must be at least sigma");
    InjectivityScanReport rep;
    rep.s = s;
    rep.r_max = controls.r_max > 0.0 ? controls.r_max : 8.0 * s;
    if (!(rep.r_max > s)) throw PreconditionError("injectivity_scan: r_max must exceed s");
    const double r_lo = s * (1.0 + 1e-12);

    // Polar sample grid with an even angle count, geometric radii.
    const std::size_t n_theta = 2 * static_cast<std::size_t>(std::ceil(std::sqrt(double(controls.hash_samples)) / 2.0));
    const std::size_t n_r = (controls.hash_samples + n_theta - 1) / n_theta;
    const std::size_t n = n_theta * n_r;
    std::vector<Point> pts(n);
    std::vector<Vec2> img(n);
    parallel_for(n_r, [&](std::size_t i) {
        const double r = n_r == 1 ? r_lo : r_lo * std::pow(rep.r_max / r_lo, double(i) / double(n_r - 1));
        for (std::size_t j = 0; j < n_theta; ++j) {
            const double t = 2.0 * M_PI * double(j) / double(n_theta);
            const std::size_t k = i * n_theta + j;
            pts[k] = Point(r * std::cos(t), r * std::sin(t));
            img[k] = field.evaluate(pts[k]);
        }
    });
    for (const auto& v : img) rep.image_scale = std::max(rep.image_scale, v.norm());
    rep.samples_hashed = n;
    const double coll_tol = controls.collision_tol_rel * (1.0 + rep.image_scale);

    auto record = [&](const Point& p, const Point& q, double gap) {
        ++rep.collision_count;
        if (rep.collisions.size() < controls.max_reported) rep.collisions.push_back({p, q, gap});
    };

    // Random pairs.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u2(r_lo * r_lo, rep.r_max * rep.r_max);
    std::uniform_real_distribution<double> th(0.0, 2.0 * M_PI);
    auto draw = [&] {
        const double r = std::sqrt(u2(rng));
        const double t = th(rng);
        return Point(r * std::cos(t), r * std::sin(t));
    };
    for (std::size_t k = 0; k < n_pairs; ++k) {
        const Point p = draw();
        const Point q = draw();
        if ((p - q).norm() <= controls.separation_floor) continue;
        const double gap = (field.evaluate(p) - field.evaluate(q)).norm();
        if (gap <= coll_tol) record(p, q, gap);
    }
    rep.pairs_tested = n_pairs;

    // Hash grid over the images: sort by cell, look up the 3x3 neighbourhood.
    const double cell = controls.candidate_rel * (1.0 + rep.image_scale);
    using Key = std::pair<long long, long long>;
    std::vector<std::pair<Key, std::uint32_t>> keyed(n);
    for (std::size_t k = 0; k < n; ++k)
        keyed[k] = {Key(static_cast<long long>(std::floor(img[k].x() / cell)),
                        static_cast<long long>(std::floor(img[k].y() / cell))),
                    static_cast<std::uint32_t>(k)};
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cand;
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint32_t i = static_cast<std::uint32_t>(k);
        const Key key(static_cast<long long>(std::floor(img[k].x() / cell)),
                      static_cast<long long>(std::floor(img[k].y() / cell)));
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                const Key nb(key.first + dx, key.second + dy);
                auto lo = std::lower_bound(keyed.begin(), keyed.end(), std::make_pair(nb, std::uint32_t(0)));
                for (auto it = lo; it != keyed.end() && it->first == nb; ++it) {
                    const std::uint32_t j = it->second;
                    if (j <= i) continue;
                    if ((pts[i] - pts[j]).norm() <= controls.separation_floor) continue;
                    if ((img[i] - img[j]).norm() > cell) continue;
                    cand.emplace_back(i, j);
                }
            }
    }
    std::sort(cand.begin(), cand.end());
    rep.candidates = cand.size();
    std::vector<std::optional<Point>> refined(cand.size());
    parallel_for(cand.size(), [&](std::size_t k) {
        const auto [i, j] = cand[k];
        refined[k] = solve_preimage(field, pts[j], img[i], coll_tol);
    });
    for (std::size_t k = 0; k < cand.size(); ++k) {
        if (!refined[k]) continue;
        const Point& p = pts[cand[k].first];
        const Point& q = *refined[k];
        const double rq = q.norm();
        if ((p - q).norm() <= controls.separation_floor || rq < s || rq > rep.r_max * (1.0 + 1e-9)) continue;
        record(p, q, (field.evaluate(p) - field.evaluate(q)).norm());
    }
    rep.passed = rep.collision_count == 0;
    return rep;
}

}  // namespace horizon
