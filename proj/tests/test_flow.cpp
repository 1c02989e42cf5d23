#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "horizon/flow.hpp"
#include "horizon/registry.hpp"

using namespace horizon;

namespace {

// Classical fixed-step RK4, used as an independent reference.
template <typename F>
Vec2 rk4(F f, Vec2 z, double t, int steps) {
    const double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        const Vec2 k1 = f(z), k2 = f(z + 0.5 * h * k1), k3 = f(z + 0.5 * h * k2), k4 = f(z + h * k3);
        z += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return z;
}

}  // namespace

TEST_CASE("linear contraction matches the explicit solution") {
    const VectorField lin = make_registry_field("linear_hurwitz");
    FlowControls c;
    c.t_max = 10;
    const Trajectory fwd = integrate(lin, {10, 0}, Direction::forward, c);
    CHECK(fwd.terminal == Terminal::left_domain);
    CHECK(fwd.t_end() == doctest::Approx(std::log(10.0)).epsilon(1e-8));
    for (double t = 0; t < std::log(10.0); t += 0.05)
        CHECK(fwd.at(t).norm() == doctest::Approx(10 * std::exp(-t)).epsilon(1e-6));
    CHECK(classify_limit(fwd, EscapeLadder::standard(1)).kind == LimitKind::enters_inner_disk);

    // Radius over t in [0,10] from a seed far enough out.
    c.r_max = 1e6;
    const Trajectory far = integrate(lin, {3e4, 4e4}, Direction::forward, c);
    for (double t = 0; t <= 10; t += 0.5) CHECK(far.at(t).norm() == doctest::Approx(5e4 * std::exp(-t)).epsilon(1e-6));

    c.r_max = 1e4;
    const Trajectory bwd = integrate(lin, {10, 0}, Direction::backward, c);
    CHECK(bwd.terminal == Terminal::escaped);
    CHECK(bwd.t_exit == doctest::Approx(-std::log(1e3)).epsilon(1e-6));
    CHECK(bwd.points.back().norm() >= bwd.r_exit);
    CHECK(classify_limit(bwd, EscapeLadder::standard(1)).kind == LimitKind::goes_to_infinity);
}

TEST_CASE("samples are monotone in time along the integration direction") {
    for (auto dir : {Direction::forward, Direction::backward}) {
        FlowControls c;
        c.t_max = 20;
        const Trajectory t = integrate(make_registry_field("rot_decay_repel"), {4, 0}, dir, c);
        for (std::size_t i = 1; i < t.size(); ++i) {
            if (dir == Direction::forward)
                CHECK(t.times[i] > t.times[i - 1]);
            else
                CHECK(t.times[i] < t.times[i - 1]);
        }
    }
}

TEST_CASE("rot_feed_attract escapes forward; radius agrees with fixed-step reference") {
    const VectorField f = make_registry_field("rot_feed_attract", 0.5);
    FlowControls c;
    c.r_max = 4;
    c.t_max = 1e3;
    const Trajectory t = integrate(f, {3, 0}, Direction::forward, c);
    CHECK(t.terminal == Terminal::escaped);
    const Vec2 ref = rk4([&](const Vec2& z) { return f.evaluate_unchecked(z); }, Vec2(3, 0), 40.0, 40000);
    CHECK((t.at(40.0) - ref).norm() < 1e-6);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.points[i].norm() >= t.points[i - 1].norm() - 1e-12);
    const LimitVerdict v = classify_limit(t, {3.2, 1.1, 3});
    CHECK(v.kind == LimitKind::goes_to_infinity);
    CHECK(v.rungs_crossed == 3);
}

TEST_CASE("radial_slow: forward enters the disk, backward escapes, 1-D reference") {
    const VectorField f = make_registry_field("radial_slow");
    FlowControls c;
    c.r_max = 200;
    c.t_max = 1e3;
    const Trajectory fwd = integrate(f, {5, 0}, Direction::forward, c);
    CHECK(fwd.terminal == Terminal::left_domain);
    auto radial = [](const Vec2& r) { return Vec2(-r.x() / std::sqrt(1 + r.x() * r.x()), 0.0); };
    const double r2 = rk4(radial, Vec2(5, 0), 2.0, 20000).x();
    CHECK(fwd.at(2.0).norm() == doctest::Approx(r2).epsilon(1e-8));
    CHECK(classify_limit(fwd, EscapeLadder::standard(1)).kind == LimitKind::enters_inner_disk);

    const Trajectory bwd = integrate(f, {5, 0}, Direction::backward, c);
    CHECK(bwd.terminal == Terminal::escaped);
    CHECK(classify_limit(bwd, EscapeLadder::standard(1)).kind == LimitKind::goes_to_infinity);
}

TEST_CASE("forward then backward returns to the seed") {
    for (const auto& e : registry()) {
        const VectorField f = make_registry_field(e.name);
        const Point seed(3.0 * f.sigma() + 1.0, 0.7);
        FlowControls c;
        c.t_max = 5;
        c.r_max = 1e6;
        const Trajectory fwd = integrate(f, seed, Direction::forward, c);
        if (fwd.terminal != Terminal::bounded) continue;  // left the domain or escaped before t = 5
        const Trajectory back = integrate(f, fwd.points.back(), Direction::backward, c);
        INFO(e.name);
        CHECK((back.points.back() - seed).norm() <= 1e-6 * (1 + seed.norm()));
    }
}

TEST_CASE("classify_limit is monotone in R_max") {
    const VectorField lin = make_registry_field("linear_hurwitz");
    for (double rmax : {200.0, 1e3, 1e5}) {
        FlowControls c;
        c.r_max = rmax;
        const Trajectory t = integrate(lin, {10, 0}, Direction::backward, c);
        CHECK(classify_limit(t, EscapeLadder::standard(1)).kind == LimitKind::goes_to_infinity);
    }
    // Reaching T_max mid-ladder is inconclusive, never an escape.
    FlowControls short_run;
    short_run.t_max = 1.0;
    const Trajectory t = integrate(lin, {10, 0}, Direction::backward, short_run);
    CHECK(classify_limit(t, EscapeLadder::standard(1)).kind == LimitKind::inconclusive);
    // A closed orbit below the first rung stays bounded.
    const VectorField rot = make_expr_field("rot", "-y", "x", 1.0, JacobianMode::analytic);
    FlowControls orbit;
    orbit.t_max = 30;
    CHECK(classify_limit(integrate(rot, {2, 0}, Direction::forward, orbit), EscapeLadder::standard(1)).kind ==
          LimitKind::stays_bounded);
}

TEST_CASE("uniqueness probe") {
    const auto lin = semi_trajectory_uniqueness_probe(make_registry_field("linear_hurwitz"), {5, 0}, 8, 1e-6, 1.0);
    CHECK(lin.contracting);
    CHECK(lin.within_gronwall_bound);
    CHECK(lin.divergence.back() < lin.divergence.front());
    CHECK(lin.fitted_rate == doctest::Approx(-1.0).epsilon(1e-3));

    const auto rd = semi_trajectory_uniqueness_probe(make_registry_field("rot_decay_repel"), {4, 0}, 8, 1e-6, 5.0);
    CHECK(rd.within_gronwall_bound);
    CHECK(rd.jacobian_bound > 0);
    CHECK(rd.max_divergence < 1e-6 * std::exp(rd.jacobian_bound * 5.0) * 1.001);

    CHECK_THROWS_AS(semi_trajectory_uniqueness_probe(make_registry_field("linear_hurwitz"), {0.5, 0}, 4),
                    PreconditionError);
}

TEST_CASE("closest return detects a closed orbit") {
    const VectorField rot = make_expr_field("rot", "-y", "x", 1.0, JacobianMode::analytic);
    FlowControls c;
    c.t_max = 7;
    CHECK(closest_return(integrate(rot, {2, 0}, Direction::forward, c), 1e-3) < 1e-6);
    CHECK(closest_return(integrate(make_registry_field("rot_decay_repel"), {4, 0}, Direction::backward, c), 0.1) > 0.09);
}
