#include "horizon/infinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "horizon/parallel.hpp"

namespace horizon {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::attractor: return "attractor";
        case Verdict::repellor: return "repellor";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<double> default_ladder_radii(double sigma) {
    const double base = sigma > 0.0 ? sigma : 1.0;
    std::vector<double> r;
    for (int k = 1; k <= 4; ++k) r.push_back(base * std::pow(1.25, k));
    return r;
}

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// min |X + v| / (rel |z|) over the samples, after Newton refinement from the
// worst samples so that isolated zeros between samples are not missed.
double clearance_ratio(const VectorField& field, const Vec2& v, const std::vector<Point>& pts, double rel, double r0,
                       double r1) {
    std::vector<std::pair<double, std::size_t>> ratio(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) ratio[i] = {(field.evaluate(pts[i]) + v).norm() / (rel * pts[i].norm()), i};
    const std::size_t n_refine = std::min<std::size_t>(8, ratio.size());
    std::partial_sort(ratio.begin(), ratio.begin() + n_refine, ratio.end());
    double worst = ratio.empty() ? std::numeric_limits<double>::infinity() : ratio.front().first;
    for (std::size_t k = 0; k < n_refine; ++k) {
        Point z = pts[ratio[k].second];
        for (int it = 0; it < 30; ++it) {
            const Vec2 y = field.evaluate_unchecked(z) + v;
            const Mat2 j = field.jacobian_unchecked(z);
            if (!(std::abs(j.determinant()) > 0.0)) break;
            z -= j.partialPivLu().solve(y);
            if (!z.allFinite() || z.norm() < r0 || z.norm() > r1) break;
            worst = std::min(worst, (field.evaluate(z) + v).norm() / (rel * z.norm()));
        }
    }
    return worst;
}

}  // namespace

TranslationChoice choose_translation(const VectorField& field, const TranslationControls& controls) {
    const double s = controls.s > 0.0 ? controls.s : std::max(field.sigma(), 1e-9);
    const double r_max = controls.r_max > 0.0 ? controls.r_max : 32.0 * (field.sigma() > 0.0 ? field.sigma() : 1.0);
    if (!(s >= field.sigma())) throw PreconditionError("choose_translation: s must be at least sigma");
    if (!(r_max >= s)) throw PreconditionError("choose_translation: r_max must be at least s");
    const std::vector<Point> pts = annulus_samples(s, r_max, controls.grid);

    TranslationChoice best;
    best.v = Vec2::Zero();
    best.min_ratio = clearance_ratio(field, best.v, pts, controls.zero_margin_rel, s, r_max);
    best.candidates_tried = 1;
    if (best.min_ratio > 1.0) return best;

    Vec2 mean = Vec2::Zero();
    Vec2 spread = Vec2::Zero();
    const int n = 256;
    for (int i = 0; i < n; ++i) {
        const double th = kTwoPi * i / n;
        const Vec2 x = field.evaluate(Point(s * std::cos(th), s * std::sin(th)) * (1.0 + 1e-12));
        mean += x / n;
        spread = spread.cwiseMax(x.cwiseAbs());
    }
    const Vec2 center = -mean;
    const double step = std::max({spread.maxCoeff(), center.norm(), 1.0}) / std::max(1, controls.grid_half_width);
    const int w = controls.grid_half_width;
    // Visit candidates in order of distance from the center so ties favor small moves.
    std::vector<Vec2> candidates;
    for (int i = -w; i <= w; ++i)
        for (int j = -w; j <= w; ++j) candidates.push_back(center + step * Vec2(i, j));
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const Vec2& a, const Vec2& b) { return (a - center).norm() < (b - center).norm(); });
    std::vector<double> ratio(candidates.size());
    parallel_for(candidates.size(),
                 [&](std::size_t k) { ratio[k] = clearance_ratio(field, candidates[k], pts, controls.zero_margin_rel, s, r_max); });
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        ++best.candidates_tried;
        if (ratio[k] > best.min_ratio) {
            best.min_ratio = ratio[k];
            best.v = candidates[k];
        }
    }
    if (!(best.min_ratio > 1.0)) {
        std::ostringstream os;
        os << "choose_translation: no translation clears the zero margin for '" << field.name() << "' after "
           << best.candidates_tried << " candidates";
        throw NumericError(os.str());
    }
    return best;
}

NormalProfile normal_profile(const VectorField& field, const Vec2& v, const ClosedCurve& curve, int samples) {
    NormalProfile prof;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    prof.min_abs = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        const double t = kTwoPi * i / samples;
        const Vec2 y = field.evaluate(curve.point(t)) + v;
        const double nc = y.dot(curve.outward_normal(t));
        lo = std::min(lo, nc);
        hi = std::max(hi, nc);
        prof.min_abs = std::min(prof.min_abs, std::abs(nc));
        prof.max_speed = std::max(prof.max_speed, y.norm());
    }
    prof.sign = lo > 0 ? 1 : (hi < 0 ? -1 : 0);
    prof.min_signed = prof.sign >= 0 ? lo : -hi;
    return prof;
}

std::size_t TransversalLadder::accepted_count() const {
    return static_cast<std::size_t>(std::count_if(rungs.begin(), rungs.end(), [](const LadderRung& r) { return r.accepted(); }));
}

bool TransversalLadder::sign_coherent() const {
    int s = 0;
    for (const auto& r : rungs) {
        if (!r.accepted()) continue;
        if (s == 0) s = r.sign;
        if (r.sign != s) return false;
    }
    return true;
}

int TransversalLadder::sign() const {
    for (const auto& r : rungs)
        if (r.accepted()) return r.sign;
    return 0;
}

const LadderRung* TransversalLadder::outermost() const {
    for (auto it = rungs.rbegin(); it != rungs.rend(); ++it)
        if (it->accepted()) return &*it;
    return nullptr;
}

const LadderRung* TransversalLadder::innermost() const {
    for (const auto& r : rungs)
        if (r.accepted()) return &r;
    return nullptr;
}

namespace {

// Star curve around the origin with rho >= radius built from relative coefficients.
ClosedCurve star_from(double radius, const std::vector<double>& c, int harmonics) {
    std::vector<double> a(harmonics), b(harmonics);
    double total = 0.0;
    for (int k = 0; k < harmonics; ++k) {
        a[k] = radius * c[k];
        b[k] = radius * c[harmonics + k];
        total += std::abs(c[k]) + std::abs(c[harmonics + k]);
    }
    return ClosedCurve::star({0, 0}, radius * (1.0 + total), a, b);
}

double search_score(const VectorField& field, const Vec2& v, const ClosedCurve& curve, int sign, int samples) {
    double worst = std::numeric_limits<double>::infinity(), speed = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = kTwoPi * i / samples;
        const Vec2 y = field.evaluate(curve.point(t)) + v;
        worst = std::min(worst, sign * y.dot(curve.outward_normal(t)));
        speed = std::max(speed, y.norm());
    }
    return worst / (1.0 + speed);
}

LadderRung build_rung(const VectorField& field, const Vec2& v, double radius, const LadderControls& controls) {
    LadderRung rung;
    rung.radius = radius;
    const ClosedCurve circle = ClosedCurve::circle({0, 0}, radius);
    NormalProfile prof = normal_profile(field, v, circle, controls.samples);
    rung.margin = 1e-6 * (1.0 + prof.max_speed);
    rung.min_normal = prof.min_abs;
    if (prof.sign != 0 && prof.min_abs > rung.margin) {
        rung.curve = circle;
        rung.sign = prof.sign;
        return rung;
    }

    rung.searched = true;
    const int h = std::max(1, controls.harmonics);
    double mean = 0.0;
    for (int i = 0; i < controls.search_samples; ++i) {
        const double t = kTwoPi * i / controls.search_samples;
        mean += (field.evaluate(circle.point(t)) + v).dot(circle.outward_normal(t));
    }
    const int sign = mean >= 0 ? 1 : -1;
    // Compass search over the 2h relative coefficients; the step halves when no move improves.
    std::vector<double> c(2 * h, 0.0);
    auto score_of = [&](const std::vector<double>& coeffs) {
        const ClosedCurve curve = star_from(radius, coeffs, h);
        if (!(curve.min_distance_to_origin() > field.sigma())) return -std::numeric_limits<double>::infinity();
        return search_score(field, v, curve, sign, controls.search_samples);
    };
    double score = score_of(c);
    double step = 0.1;
    for (int it = 0; it < controls.search_iterations && step > 1e-5; ++it) {
        ++rung.search_iterations;
        std::vector<double> best_trial;
        double best_score = score;
        for (std::size_t k = 0; k < c.size(); ++k)
            for (double dir : {1.0, -1.0}) {
                std::vector<double> trial = c;
                trial[k] += dir * step;
                const double sc = score_of(trial);
                if (sc > best_score) {
                    best_score = sc;
                    best_trial = trial;
                }
            }
        if (best_trial.empty()) {
            step *= 0.5;
            continue;
        }
        c = best_trial;
        score = best_score;
        // Well clear of the acceptance margin; further polishing is not needed.
        if (score > 1e-3) break;
    }
    const ClosedCurve best = star_from(radius, c, h);
    prof = normal_profile(field, v, best, controls.samples);
    rung.margin = 1e-6 * (1.0 + prof.max_speed);
    rung.min_normal = prof.min_abs;
    if (prof.sign != 0 && prof.min_abs > rung.margin) {
        rung.curve = best;
        rung.sign = prof.sign;
    }
    return rung;
}

}  // namespace

TransversalLadder find_transversal_ladder(const VectorField& field, const Vec2& v, const std::vector<double>& radii,
                                          const LadderControls& controls) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > field.sigma())) throw PreconditionError("find_transversal_ladder: radii must exceed sigma");
        if (i > 0 && !(radii[i] > radii[i - 1])) throw PreconditionError("find_transversal_ladder: radii must increase");
    }
    TransversalLadder ladder;
    ladder.v = v;
    for (std::size_t i = 0; i < radii.size(); ++i)
        ladder.rungs.push_back(build_rung(field, v, radii[i], controls));
    return ladder;
}

bool index_sign_consistent(Verdict verdict, const IndexEstimate& index, double tol) {
    bool nonnegative = false, negative = false;
    switch (index.kind) {
        case IndexKind::plus_infinity: nonnegative = true; break;
        case IndexKind::minus_infinity: negative = true; break;
        case IndexKind::finite:
            nonnegative = index.value >= -10.0 * tol;
            negative = !nonnegative;
            break;
        case IndexKind::unreliable: return false;
    }
    if (verdict == Verdict::attractor) return nonnegative;
    if (verdict == Verdict::repellor) return negative;
    return false;
}

InfinityVerdict classify_infinity(const VectorField& field, const InfinityControls& controls) {
    InfinityVerdict out;
    const std::vector<double> radii = controls.radii.empty() ? default_ladder_radii(field.sigma()) : controls.radii;
    out.v = choose_translation(field, controls.translation).v;
    out.ladder = find_transversal_ladder(field, out.v, radii, controls.ladder);
    out.index = compute_index(field, controls.index);

    const VectorField y = field.translated(out.v);
    const LadderRung* outer = out.ladder.outermost();
    const ClosedCurve seed_curve = outer ? *outer->curve : ClosedCurve::circle({0, 0}, radii.back());
    const int n = std::max(1, controls.seeds);

    struct SeedResult {
        bool forward_escape = false, backward_escape = false;
        double min_return = std::numeric_limits<double>::infinity();
    };
    std::vector<SeedResult> results(static_cast<std::size_t>(n));
    parallel_for(results.size(), [&](std::size_t i) {
        const Point seed = seed_curve.point(kTwoPi * static_cast<double>(i) / n);
        const double r = seed.norm();
        const EscapeLadder escape{r * controls.escape_factor, controls.escape_factor, 3};
        FlowControls fc = controls.flow;
        // Stop just past the last escape rung; later growth is not needed for the verdict.
        fc.r_max = 1.01 * escape.rung(escape.rungs - 1);
        for (Direction d : {Direction::forward, Direction::backward}) {
            const Trajectory traj = integrate(y, seed, d, fc);
            const bool escaped = classify_limit(traj, escape).kind == LimitKind::goes_to_infinity;
            (d == Direction::forward ? results[i].forward_escape : results[i].backward_escape) = escaped;
            results[i].min_return = std::min(results[i].min_return, closest_return(traj, 1e-2 * r));
        }
    });

    out.escape.seeds = n;
    out.min_return_distance = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        out.escape.forward_escapes += r.forward_escape;
        out.escape.backward_escapes += r.backward_escape;
        out.min_return_distance = std::min(out.min_return_distance, r.min_return);
    }
    out.periodicity_flag = out.min_return_distance < controls.period_tol;

    if (!out.ladder.usable()) {
        out.reason = "fewer than 4 transversal rungs";
    } else if (!out.ladder.sign_coherent()) {
        out.reason = "ladder rungs disagree in sign";
    } else if (out.periodicity_flag) {
        out.reason = "a sampled orbit returns to its start";
    } else if (out.escape.forward_escapes == n && out.escape.backward_escapes == 0) {
        out.verdict = Verdict::attractor;
    } else if (out.escape.backward_escapes == n && out.escape.forward_escapes == 0) {
        out.verdict = Verdict::repellor;
    } else {
        std::ostringstream os;
        os << "escape not unanimous (forward " << out.escape.forward_escapes << "/" << n << ", backward "
           << out.escape.backward_escapes << "/" << n << ")";
        out.reason = os.str();
    }
    out.index_sign_consistent = index_sign_consistent(out.verdict, out.index, controls.index.tol);
    return out;
}

}  // namespace horizon
