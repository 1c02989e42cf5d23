#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "horizon/index.hpp"
#include "horizon/registry.hpp"

using namespace horizon;

namespace {

// Closed-form outward fluxes through |z| = R.
double flux_rot_decay(double eps, double r) { return -2 * M_PI * eps * r * r / (1 + r * r); }
double flux_rot_feed(double eps, double r) { return 2 * M_PI * eps * r * r / ((1 + r * r) * (1 + r * r)); }

Point polar(double r, double th) { return {r * std::cos(th), r * std::sin(th)}; }

// Rounding bound for a trapezoid flux sum: the radial part is obtained from
// vectors of size |X| ~ R, so cancellation error scales with 2 pi R^2 eps.
double flux_rounding(double r) { return 64 * std::numeric_limits<double>::epsilon() * 2 * M_PI * r * (1 + r); }

}  // namespace

TEST_CASE("extension of -z is -z") {
    const VectorField lin = make_registry_field("linear_hurwitz");
    const ExtensionBlend b = build_extension(lin, 2.0);
    CHECK(b.interior_scale == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.seam_ok);
    CHECK(b.det_positive);
    for (double r : {0.0, 0.5, 2.0, 2.7, 3.9, 4.0, 9.0})
        for (double th : {0.0, 1.0, 2.5}) {
            const Point p = polar(r, th);
            CHECK((b.field.evaluate(p) + p).norm() < 1e-12);
            CHECK(b.field.jacobian(p).trace() == doctest::Approx(-2.0).epsilon(1e-12));
        }
    CHECK_THROWS_AS(build_extension(lin, 0.5), PreconditionError);
}

TEST_CASE("extension of rot_feed_attract agrees with X outside 2s and is C1") {
    const VectorField f = make_registry_field("rot_feed_attract");
    const ExtensionBlend b = build_extension(f, 2.0);
    CHECK(b.s == 2.0);
    CHECK(b.seam_ok);
    CHECK(b.seam_discrepancy <= 1e-4);
    for (double r : {4.0, 4.5, 10.0})
        for (double th : {0.3, 2.0, 4.4}) {
            const Point p = polar(r, th);
            CHECK(b.field.evaluate(p).isApprox(f.evaluate(p), 1e-14));
            CHECK(b.field.jacobian(p).isApprox(f.jacobian(p), 1e-14));
        }
    // Independent check of C1: finite-difference Jacobian of the blended values across each seam.
    for (double seam : {2.0, 4.0})
        for (double th : {0.1, 1.7, 3.3, 5.0}) {
            const Mat2 inside = b.field.fd_jacobian(polar(seam - 1e-6, th), 1e-7);
            const Mat2 outside = b.field.fd_jacobian(polar(seam + 1e-6, th), 1e-7);
            CHECK((inside - outside).cwiseAbs().maxCoeff() < 1e-4);
        }
    CHECK(b.ramp(2.0) == 0.0);
    CHECK(b.ramp(4.0) == 1.0);
    CHECK(b.ramp(3.0) == doctest::Approx(0.5));
}

TEST_CASE("index of -z is -inf with flux -2 pi R^2") {
    const auto est = compute_index(make_registry_field("linear_hurwitz"));
    CHECK(est.kind == IndexKind::minus_infinity);
    CHECK(est.value == -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < est.radii.size(); ++k) {
        const double r = est.radii[k];
        CHECK(est.flux[k] == doctest::Approx(-2 * M_PI * r * r).epsilon(1e-12));
    }
    CHECK(est.growth_exponent == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("index of rot_decay_repel is -2 pi eps") {
    const double eps = 0.5;
    const auto est = compute_index(make_registry_field("rot_decay_repel", eps));
    CHECK(est.kind == IndexKind::finite);
    CHECK(std::abs(est.value + M_PI) <= 0.01 * M_PI);
    CHECK(est.value == doctest::Approx(-M_PI).epsilon(1e-7));
    for (std::size_t k = 0; k < est.radii.size(); ++k)
        if (est.radii[k] >= 2 * est.blend.s)
            CHECK(std::abs(est.flux[k] - flux_rot_decay(eps, est.radii[k])) <= flux_rounding(est.radii[k]));
    CHECK(est.max_discrepancy <= 1e-5);

    for (double e : {0.1, 0.9}) {
        const auto other = compute_index(make_registry_field("rot_decay_repel", e));
        CHECK(other.value == doctest::Approx(-2 * M_PI * e).epsilon(1e-6));
    }
}

TEST_CASE("index of rot_feed_attract is 0") {
    const double eps = 0.5;
    const auto est = compute_index(make_registry_field("rot_feed_attract", eps));
    CHECK(est.kind == IndexKind::finite);
    CHECK(std::abs(est.value) <= 1e-2);
    for (std::size_t k = 0; k < est.radii.size(); ++k)
        if (est.radii[k] >= 2 * est.blend.s)
            CHECK(std::abs(est.flux[k] - flux_rot_feed(eps, est.radii[k])) <= flux_rounding(est.radii[k]));
}

TEST_CASE("radial_slow and shifted_zero diverge to -inf") {
    for (const char* name : {"radial_slow", "shifted_zero"}) {
        const auto est = compute_index(make_registry_field(name));
        INFO(name);
        CHECK(est.kind == IndexKind::minus_infinity);
    }
}

TEST_CASE("flux matches area quadrature on every rung; flux decreases for Hurwitz fields") {
    for (const auto& e : registry()) {
        if (e.oracle.count("hurwitz") && e.oracle.at("hurwitz") != "true") continue;
        const VectorField f = make_registry_field(e.name);
        const auto est = compute_index(f);
        INFO(e.name);
        for (std::size_t k = 0; k < est.radii.size(); ++k)
            CHECK(std::abs(est.flux[k] - est.area[k]) <= 10 * 1e-6 * (1 + std::abs(est.flux[k])));
        for (std::size_t k = 0; k + 1 < est.radii.size(); ++k)
            if (est.radii[k] >= 2 * est.blend.s) CHECK(est.flux[k + 1] < est.flux[k]);
        CHECK(est.kind != IndexKind::plus_infinity);
        CHECK_NOTHROW(check_index_shape(est, true));
    }
    IndexEstimate fake;
    fake.kind = IndexKind::plus_infinity;
    CHECK_THROWS_AS(check_index_shape(fake, true), InconsistencyError);
    CHECK_NOTHROW(check_index_shape(fake, false));
}

TEST_CASE("disagreeing flux and area raise an inconsistency") {
    // Values of -z with the Jacobian of -1.5 z: the divergence theorem fails by construction.
    const VectorField wrong("wrong", 1.0, [](const Point& p) -> Vec2 { return -p; },
                            [](const Point&) -> Mat2 { return -1.5 * Mat2::Identity(); });
    CHECK_THROWS_AS(compute_index(wrong), InconsistencyError);
    IndexControls c;
    c.throw_on_inconsistency = false;
    CHECK(compute_index(wrong, c).kind == IndexKind::unreliable);
}

TEST_CASE("oscillating flux is unreliable") {
    // X = phi(r^2) z with phi(q) = cos(log(q) / 2) / q, so flux(R) = 2 pi cos(log R).
    auto phi = [](double q) { return std::cos(0.5 * std::log(q)) / q; };
    auto dphi = [](double q) { return -(0.5 * std::sin(0.5 * std::log(q)) + std::cos(0.5 * std::log(q))) / (q * q); };
    const VectorField osc(
        "osc", 1.0, [=](const Point& p) -> Vec2 { return phi(p.squaredNorm()) * p; },
        [=](const Point& p) -> Mat2 {
            const double q = p.squaredNorm();
            return phi(q) * Mat2::Identity() + 2 * dphi(q) * p * p.transpose();
        });
    const auto est = compute_index(osc);
    for (std::size_t k = 0; k < est.radii.size(); ++k)
        if (est.radii[k] >= 2 * est.blend.s)
            CHECK(est.flux[k] == doctest::Approx(2 * M_PI * std::cos(std::log(est.radii[k]))).epsilon(1e-9));
    CHECK(est.kind == IndexKind::unreliable);
}

TEST_CASE("extension independence") {
    const auto decay = extension_independence_probe(make_registry_field("rot_decay_repel"), {2, 4, 8});
    CHECK(decay.runs.size() == 6);
    CHECK(decay.kinds_agree);
    CHECK(decay.max_discrepancy <= 1e-3);
    for (const auto& r : decay.runs) CHECK(std::abs(r.estimate.value + M_PI) <= 0.01 * M_PI);

    const auto lin = extension_independence_probe(make_registry_field("linear_hurwitz"), {2, 4});
    CHECK(lin.kinds_agree);
    for (const auto& r : lin.runs) CHECK(r.estimate.kind == IndexKind::minus_infinity);

    const auto feed = extension_independence_probe(make_registry_field("rot_feed_attract"), {2, 4, 8});
    CHECK(feed.kinds_agree);
    for (const auto& r : feed.runs) CHECK(std::abs(r.estimate.value) <= 1e-2);

    CHECK_THROWS_AS(extension_independence_probe(make_registry_field("rot_feed_attract"), {1}), PreconditionError);
}

TEST_CASE("quadratic field with odd trace has index zero, not a roundoff divergence") {
    // Trace of (xy, (y^2 - x^2)/2) is 2y, odd in y, so every disk integral vanishes
    // while |X| grows like r^2 and the raw flux sums carry roundoff growing like r^3.
    const VectorField f = make_registry_field("model_reeb");
    const auto est = compute_index(f);
    CHECK(est.kind == IndexKind::finite);
    CHECK(est.value == 0.0);
    CHECK(std::abs(est.flux.back()) < 1e-3);
}
