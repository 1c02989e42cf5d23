#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "horizon/registry.hpp"
#include "horizon/verify.hpp"
#include "oracles.hpp"

using namespace horizon;

namespace {

double grid_area_oracle(const VectorField& f, const std::vector<Point>& poly, double baseline, int columns = 3000,
                        int rows = 400) {
    const double v = oracle::grid_area(f, poly, baseline, columns, rows);
    REQUIRE_FALSE(std::isnan(v));
    return v;
}

// Oracle: trapezoid sum of the flux-inequality lhs on the polyline itself.
double trapezoid_lhs(const VectorField& f, const std::vector<Point>& poly, int o) {
    auto phi = [&](const Point& z) {
        const Mat2 j = f.jacobian(z);
        const Vec2 g(j(0, 0), j(0, 1));
        return -o * f.evaluate(z).dot(g) / g.norm();
    };
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < poly.size(); ++k)
        s += 0.5 * (phi(poly[k]) + phi(poly[k + 1])) * (poly[k + 1] - poly[k]).norm();
    return s;
}

LeafArc arc_from(const VectorField& f, std::vector<Point> pts) {
    LeafArc a;
    a.level = f.evaluate(pts.front()).x();
    a.points = std::move(pts);
    return a;
}

bool is_hurwitz(const RegistryEntry& e) { return !e.oracle.count("hurwitz") || e.oracle.at("hurwitz") == "true"; }

}  // namespace

TEST_CASE("horizontal leaves: closed-form Green identity and flux slack") {
    // f = -y, g = x - y: leaves are horizontal lines traversed towards +x, g_y = -1.
    const VectorField f = make_expr_field("shear", "-y", "x - y", 1.0, JacobianMode::analytic);
    const LeafArc arc = flux_arc(f, {2, 1}, FluxVariant::positive, 5.0);
    REQUIRE(arc.points.size() > 2);
    const double a = arc.points.front().x(), b = arc.points.back().x();
    CHECK(a == 2.0);
    CHECK(b - a == doctest::Approx(arc.length()).epsilon(1e-9));  // straight leaf
    CHECK(b >= 7.0);

    const auto green = green_identity_check(f, arc, -3.0);
    CHECK(green.passed);
    CHECK(green.lhs == doctest::Approx(-(b - a) * 4.0).epsilon(1e-12));
    CHECK(green.rhs == doctest::Approx(-(b - a) * 4.0).epsilon(1e-10));
    CHECK(green.pieces == 1);

    const auto flux = flux_inequality_check(f, arc, FluxVariant::positive);
    CHECK(flux.passed);
    CHECK(flux.lhs == doctest::Approx((b * b - a * a) / 2 - (b - a)).epsilon(1e-10));
    CHECK(flux.slack == doctest::Approx((b - a) * (b - a) / 2).epsilon(1e-10));

    // Reflection y -> -y: leaves run towards -x; the negative display holds with the same slack.
    const VectorField r = make_expr_field("shear_reflected", "y", "-x - y", 1.0, JacobianMode::analytic);
    const LeafArc back = flux_arc(r, {7, -1}, FluxVariant::negative, 5.0);
    REQUIRE(back.points.size() > 2);
    const double bb = back.points.front().x(), aa = back.points.back().x();
    const auto neg = flux_inequality_check(r, back, FluxVariant::negative);
    CHECK(neg.passed);
    CHECK(neg.slack == doctest::Approx((bb - aa) * (bb - aa) / 2).epsilon(1e-10));

    CHECK_THROWS_AS(flux_inequality_check(r, back, FluxVariant::positive), OrderingError);
    CHECK_THROWS_AS(flux_inequality_check(f, arc, FluxVariant::negative), OrderingError);
    CHECK_THROWS_AS(green_identity_check(f, arc, 2.0), RegionConstructionError);
}

TEST_CASE("vertical leaves of -z: zero span") {
    const VectorField lin = make_registry_field("linear_hurwitz");
    const LeafArc arc = flux_arc(lin, {3, -1}, FluxVariant::positive, 4.0);
    REQUIRE(arc.points.size() > 2);
    for (const auto& p : arc.points) CHECK(p.x() == doctest::Approx(3.0).epsilon(1e-12));
    for (auto v : {FluxVariant::positive, FluxVariant::negative}) {
        const auto r = flux_inequality_check(lin, arc, v);
        CHECK(r.passed);
        CHECK(r.span == doctest::Approx(0.0));
        CHECK(std::abs(r.slack) <= 1e-12 * (1 + std::abs(r.lhs)));
    }
    const auto g = green_identity_check(lin, arc, -20.0);
    CHECK(g.passed);
    CHECK(g.lhs == 0.0);
    CHECK(std::abs(g.rhs) <= 1e-12);
}

TEST_CASE("Green identity on registry arcs against a grid oracle") {
    struct Case {
        const char* name;
        Point p;
        double c;
    };
    for (const Case& k : {Case{"rot_decay_repel", {4, 0}, -10.0}, Case{"rot_feed_attract", {5, 1}, -12.0}}) {
        const VectorField f = make_registry_field(k.name);
        const LeafArc arc = flux_arc(f, k.p, FluxVariant::positive, 6.0);
        REQUIRE(arc.points.size() > 10);
        const auto r = green_identity_check(f, arc, k.c);
        INFO(k.name, " lhs ", r.lhs, " rhs ", r.rhs);
        CHECK(r.passed);
        CHECK(std::abs(r.slack) <= 1e-6 * (1 + std::abs(r.lhs)));
        const double oracle = grid_area_oracle(f, arc.points, k.c);
        CHECK(std::abs(r.lhs - oracle) <= 1e-4 * (1 + std::abs(oracle)));
        CHECK(std::abs(r.rhs - oracle) <= 1e-4 * (1 + std::abs(oracle)));
    }
}

TEST_CASE("Green identity on a folded arc") {
    // Leaves x = y^3 - 3y + k fold twice in x; g_y = x + 2y.
    const VectorField f = make_expr_field("fold", "-x + y^3 - 3*y", "x*y + y^2", 1.0, JacobianMode::analytic);
    std::vector<Point> pts;
    for (int i = 0; i <= 420; ++i) {
        const double y = 2.1 - 0.01 * i;
        pts.emplace_back(y * y * y - 3 * y + 10, y);
    }
    const LeafArc arc = arc_from(f, pts);
    const auto r = green_identity_check(f, arc, -4.0);
    INFO("lhs ", r.lhs, " rhs ", r.rhs);
    CHECK(r.pieces == 3);
    CHECK(r.passed);
    std::vector<Point> dense;
    for (int i = 0; i <= 42000; ++i) {
        const double y = 2.1 - 1e-4 * i;
        dense.emplace_back(y * y * y - 3 * y + 10, y);
    }
    const double oracle = grid_area_oracle(f, dense, -4.0, 4000, 400);
    CHECK(std::abs(r.lhs - oracle) <= 1e-4 * (1 + std::abs(oracle)));

    // Cutting the arc where it is not x-extremal breaks the region.
    std::vector<Point> cut(pts.begin(), pts.begin() + 200);
    CHECK_THROWS_AS(green_identity_check(f, arc_from(f, cut), -4.0), RegionConstructionError);
}

TEST_CASE("flux inequalities on sampled arcs") {
    ArcSampling s;
    s.seed = 7;
    const VectorField decay = make_registry_field("rot_decay_repel");
    const auto pos = flux_inequality_batch(decay, FluxVariant::positive, s);
    CHECK(pos.arcs.size() == 100);
    CHECK_FALSE(pos.reflected);
    CHECK(pos.all_passed());
    CHECK(pos.min_relative_slack >= -1e-8);
    for (std::size_t i = 0; i < pos.arcs.size(); i += 10) {
        const auto& r = pos.arcs[i];
        CHECK(r.span > 0);
        CHECK(std::abs(r.lhs - trapezoid_lhs(decay, r.arc.points, 1)) <= 1e-3 * (1 + std::abs(r.lhs)));
    }

    const auto neg = flux_inequality_batch(decay, FluxVariant::negative, s);
    CHECK(neg.reflected);
    CHECK(neg.all_passed());

    const VectorField slow = make_registry_field("radial_slow");
    const auto sneg = flux_inequality_batch(slow, FluxVariant::negative, s);
    CHECK(sneg.arcs.size() == 100);
    CHECK_FALSE(sneg.reflected);
    CHECK(sneg.all_passed());
    for (std::size_t i = 0; i < sneg.arcs.size(); i += 10) {
        const auto& r = sneg.arcs[i];
        CHECK(std::abs(r.lhs - trapezoid_lhs(slow, r.arc.points, -1)) <= 1e-3 * (1 + std::abs(r.lhs)));
    }

    // Deterministic for a fixed seed.
    const auto again = flux_inequality_batch(decay, FluxVariant::positive, s);
    CHECK(again.min_relative_slack == pos.min_relative_slack);
}

TEST_CASE("flux inequalities hold on every Hurwitz registry field") {
    ArcSampling s;
    s.count = 20;
    for (const auto& e : registry()) {
        if (!is_hurwitz(e)) continue;
        const VectorField f = make_registry_field(e.name);
        s.r_min = 3 * f.sigma();
        s.r_max = 30 * f.sigma();
        for (auto v : {FluxVariant::positive, FluxVariant::negative}) {
            const auto rep = flux_inequality_batch(f, v, s);
            INFO(e.name, " ", to_string(v), " min slack ", rep.min_relative_slack);
            CHECK(rep.arcs.size() == 20);
            CHECK(rep.all_passed());
        }
    }
}

TEST_CASE("vertical ray property") {
    // Oracle: count sign changes of x - a above the seed on an independently traced leaf.
    auto brute_hits = [](const VectorField& f, const Point& p) {
        LeafControls c;
        c.max_length = 60;
        c.step = 1e-3 * (1 + p.norm());
        const HalfLeaf h = trace_half_leaf(f, p, LeafComponent::f, +1, c);
        int hits = 0;
        for (std::size_t i = 20; i + 1 < h.points.size(); ++i) {
            const double u = h.points[i].x() - p.x(), v = h.points[i + 1].x() - p.x();
            if (u * v < 0 && h.points[i].y() >= p.y()) ++hits;
        }
        return hits;
    };

    const VectorField lin = make_registry_field("linear_hurwitz");
    const auto l = vertical_ray_check(lin, {{3, 1}, {-2, 5}, {0, -4}});
    CHECK(l.passed());
    CHECK(l.skipped == 0);

    const VectorField decay = make_registry_field("rot_decay_repel");
    const auto seeds = random_annulus_points(100, 3, 30, 11);
    const auto rep = vertical_ray_check(decay, seeds);
    CHECK(rep.entries.size() == 100);
    CHECK(rep.hits == 0);
    CHECK(rep.skipped == 0);
    CHECK(rep.min_closest > 0);
    for (std::size_t i = 0; i < seeds.size(); i += 10) CHECK(brute_hits(decay, seeds[i]) == 0);

    // Circular leaves re-meet the ray: f = x^2 + y^2.
    const VectorField circ = make_expr_field("circles", "x^2 + y^2", "y", 1.0, JacobianMode::analytic);
    const auto c = vertical_ray_check(circ, {{0, -3}});
    CHECK(c.entries[0].plus.hit);
    CHECK(brute_hits(circ, {0, -3}) >= 1);
}

TEST_CASE("injectivity scan") {
    InjectivityControls c;
    c.hash_samples = 200'000;
    const auto lin = injectivity_scan(make_registry_field("linear_hurwitz"), 2.0, 100'000, 3, c);
    CHECK(lin.passed);
    CHECK(lin.pairs_tested == 100'000);
    CHECK(lin.samples_hashed >= 200'000);

    for (const auto& e : registry()) {
        if (!is_hurwitz(e)) continue;
        const VectorField f = make_registry_field(e.name);
        const auto r = injectivity_scan(f, 4 * f.sigma(), 20'000, 5, c);
        INFO(e.name);
        CHECK(r.passed);
        CHECK(r.collision_count == 0);
    }

    const VectorField reeb = make_registry_field("model_reeb");
    const auto r = injectivity_scan(reeb, 0.4, 10'000, 5, c);
    CHECK_FALSE(r.passed);
    CHECK(r.collision_count > 1000);
    REQUIRE_FALSE(r.collisions.empty());
    for (const auto& col : r.collisions) {
        CHECK((col.p + col.q).norm() <= 1e-6 * (1 + col.p.norm()));  // antipodal
        CHECK((col.p - col.q).norm() > 1e-3);
        CHECK(col.image_gap <= 1e-9 * (1 + r.image_scale));
    }
    const auto again = injectivity_scan(reeb, 0.4, 10'000, 5, c);
    CHECK(again.collision_count == r.collision_count);
    CHECK_THROWS_AS(injectivity_scan(reeb, 0.05, 10, 1, c), PreconditionError);
}
