#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "horizon/infinity.hpp"
#include "horizon/registry.hpp"

using namespace horizon;

namespace {

// Oracle: smallest |X + v| / |z| on a dense polar grid of the annulus.
double min_relative_speed(const VectorField& f, const Vec2& v, double r0, double r1) {
    double worst = 1e300;
    for (int i = 0; i <= 200; ++i) {
        const double r = r0 * std::pow(r1 / r0, i / 200.0) * (1 + 1e-12);
        for (int k = 0; k < 720; ++k) {
            const double th = 2 * M_PI * k / 720;
            const Point p(r * std::cos(th), r * std::sin(th));
            worst = std::min(worst, (f.evaluate(p) + v).norm() / r);
        }
    }
    return worst;
}

bool is_hurwitz(const RegistryEntry& e) { return !e.oracle.count("hurwitz") || e.oracle.at("hurwitz") == "true"; }

}  // namespace

TEST_CASE("translation choice") {
    const auto lin = choose_translation(make_registry_field("linear_hurwitz"));
    CHECK(lin.v.norm() == 0.0);
    const auto feed = choose_translation(make_registry_field("rot_feed_attract"));
    CHECK(feed.v.norm() == 0.0);
    CHECK(min_relative_speed(make_registry_field("rot_feed_attract"), feed.v, 2, 64) > 1e-4);

    const VectorField shifted = make_registry_field("shifted_zero");
    CHECK(min_relative_speed(shifted, {0, 0}, 1, 32) < 1e-2);  // the zero at (10, 0)
    const auto sz = choose_translation(shifted);
    CHECK(sz.v.norm() > 0.0);
    CHECK(sz.min_ratio > 1.0);
    CHECK(min_relative_speed(shifted, sz.v, 1, 32) > 1e-4);
}

TEST_CASE("round circles are transversal for radial registry fields") {
    const auto lin = find_transversal_ladder(make_registry_field("linear_hurwitz"), {0, 0}, {4, 8, 16, 32});
    REQUIRE(lin.usable());
    CHECK(lin.sign() == -1);
    for (const auto& r : lin.rungs) {
        CHECK(r.curve->kind() == ClosedCurve::Kind::circle);
        CHECK(r.min_normal == doctest::Approx(r.radius).epsilon(1e-12));  // <-z, z/|z|> = -|z|
        CHECK_FALSE(r.searched);
    }

    const double eps = 0.5;
    const auto feed = find_transversal_ladder(make_registry_field("rot_feed_attract", eps), {0, 0}, {3, 4, 6, 9});
    REQUIRE(feed.usable());
    CHECK(feed.sign() == 1);
    for (const auto& r : feed.rungs) {
        const double q = 1 + r.radius * r.radius;
        CHECK(r.min_normal == doctest::Approx(eps * r.radius / (q * q)).epsilon(1e-9));
    }

    const auto decay = find_transversal_ladder(make_registry_field("rot_decay_repel", eps), {0, 0}, {2, 4, 8, 16});
    REQUIRE(decay.usable());
    CHECK(decay.sign() == -1);
    for (const auto& r : decay.rungs)
        CHECK(r.min_normal == doctest::Approx(eps * r.radius / (1 + r.radius * r.radius)).epsilon(1e-9));

    CHECK_THROWS_AS(find_transversal_ladder(make_registry_field("linear_hurwitz"), {0, 0}, {4, 2}), PreconditionError);
}

TEST_CASE("star search finds transversal curves where circles fail") {
    // Rotation in the metric x^2 + 2 y^2 plus weak contraction: ellipses are transversal, circles are not.
    const VectorField f = make_expr_field("elliptic", "-0.2*x - 2*y", "x - 0.2*y", 1.0, JacobianMode::analytic);
    const auto ladder = find_transversal_ladder(f, {0, 0}, {2, 3, 4, 5});
    for (const auto& r : ladder.rungs) {
        CHECK(r.searched);
        REQUIRE(r.accepted());
        CHECK(r.min_normal > r.margin);
        CHECK(r.curve->enclosed_radius() >= r.radius * (1 - 1e-12));
        // Independent recheck at a different sampling.
        const auto prof = normal_profile(f, {0, 0}, *r.curve, 10007);
        CHECK(prof.sign == -1);
    }
    CHECK(ladder.sign_coherent());
}

TEST_CASE("classification of registry fields") {
    struct Case {
        const char* name;
        Verdict verdict;
    };
    for (const Case c : {Case{"linear_hurwitz", Verdict::repellor}, Case{"rot_feed_attract", Verdict::attractor},
                         Case{"rot_decay_repel", Verdict::repellor}, Case{"radial_slow", Verdict::repellor},
                         Case{"shifted_zero", Verdict::repellor}}) {
        const auto v = classify_infinity(make_registry_field(c.name));
        INFO(c.name, " ", v.reason);
        CHECK(v.verdict == c.verdict);
        CHECK(v.index_sign_consistent);
        CHECK_FALSE(v.periodicity_flag);
        CHECK(v.ladder.sign_coherent());
        CHECK(v.ladder.usable());
        for (const auto& r : v.ladder.rungs)
            if (r.accepted()) CHECK(r.min_normal > r.margin);
        if (c.verdict == Verdict::attractor) CHECK(v.escape.forward_fraction() == 1.0);
        if (c.verdict == Verdict::repellor) CHECK(v.escape.backward_fraction() == 1.0);
    }
}

TEST_CASE("Hurwitz registry fields are never inconclusive") {
    for (const auto& e : registry()) {
        if (!is_hurwitz(e)) continue;
        const auto v = classify_infinity(make_registry_field(e.name));
        INFO(e.name);
        CHECK(v.verdict != Verdict::inconclusive);
        CHECK(v.index_sign_consistent);
        CHECK(v.index.kind != IndexKind::plus_infinity);
    }
}

TEST_CASE("a center is inconclusive and periodic") {
    const VectorField rot = make_expr_field("center", "-y", "x", 1.0, JacobianMode::analytic);
    InfinityControls c;
    c.seeds = 8;
    c.index.throw_on_inconsistency = false;
    const auto v = classify_infinity(rot, c);
    CHECK(v.verdict == Verdict::inconclusive);
    CHECK_FALSE(v.ladder.usable());
    CHECK(v.periodicity_flag);
    CHECK_FALSE(v.index_sign_consistent);
}

TEST_CASE("index sign consistency rule") {
    IndexEstimate i;
    i.kind = IndexKind::finite;
    i.value = -1e-7;
    CHECK(index_sign_consistent(Verdict::attractor, i, 1e-6));
    CHECK_FALSE(index_sign_consistent(Verdict::repellor, i, 1e-6));
    i.value = -0.5;
    CHECK(index_sign_consistent(Verdict::repellor, i, 1e-6));
    i.kind = IndexKind::minus_infinity;
    CHECK_FALSE(index_sign_consistent(Verdict::attractor, i, 1e-6));
    CHECK_FALSE(index_sign_consistent(Verdict::inconclusive, i, 1e-6));
}
