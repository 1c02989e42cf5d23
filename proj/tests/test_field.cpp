#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "horizon/field.hpp"
#include "horizon/registry.hpp"

using namespace horizon;

namespace {

// Same fields written in the expression language, differentiated symbolically.
VectorField dsl_twin(const std::string& name) {
    const std::map<std::string, double> eps{{"eps", 0.5}};
    if (name == "linear_hurwitz") return make_expr_field(name, "-x", "-y", 1.0, JacobianMode::analytic);
    if (name == "rot_decay_repel")
        return make_expr_field(name, "-y - eps*x/(1 + x^2 + y^2)", "x - eps*y/(1 + x^2 + y^2)", 1.0,
                               JacobianMode::analytic, eps);
    if (name == "rot_feed_attract")
        return make_expr_field(name, "-y + eps*x/(1 + x^2 + y^2)^2", "x + eps*y/(1 + x^2 + y^2)^2", 2.0,
                               JacobianMode::analytic, eps);
    if (name == "radial_slow")
        return make_expr_field(name, "-x/sqrt(1 + x^2 + y^2)", "-y/sqrt(1 + x^2 + y^2)", 1.0, JacobianMode::analytic);
    if (name == "model_reeb") return make_expr_field(name, "x*y", "(y^2 - x^2)/2", 0.1, JacobianMode::analytic);
    return make_expr_field(name, "10 - x", "-y", 1.0, JacobianMode::analytic);
}

}  // namespace

TEST_CASE("evaluate examples") {
    const VectorField lin = make_registry_field("linear_hurwitz");
    CHECK(lin.evaluate({2, 0}).isApprox(Vec2(-2, 0)));
    const Vec2 v = make_registry_field("rot_decay_repel", 0.5).evaluate({1, 0});
    CHECK(v.x() == doctest::Approx(-0.25));
    CHECK(v.y() == doctest::Approx(1.0));
    for (const auto& e : registry()) {
        const VectorField f = make_registry_field(e.name);
        CHECK_THROWS_AS(f.evaluate({f.sigma() / 2, 0}), PreconditionError);
        CHECK_THROWS_AS(f.jacobian({f.sigma() / 2, 0}), PreconditionError);
    }
}

TEST_CASE("non-finite evaluation is reported") {
    const VectorField f = make_expr_field("bad", "sqrt(x - 5)", "y", 1.0, JacobianMode::analytic);
    CHECK_THROWS_AS(f.evaluate({2, 0}), NumericError);
}

TEST_CASE("jacobian examples") {
    CHECK(make_registry_field("linear_hurwitz").jacobian({3, -4}).isApprox(-Mat2::Identity()));
    const Mat2 j = make_registry_field("rot_decay_repel", 0.5).jacobian({0, 10});
    CHECK(j.trace() == doctest::Approx(-2 * 0.5 / (101.0 * 101.0)).epsilon(1e-12));
    CHECK(j.trace() == doctest::Approx(-9.80296e-5).epsilon(1e-5));
    Mat2 expect;
    expect << 2, 1, -1, 2;
    CHECK(make_registry_field("model_reeb").jacobian({1, 2}).isApprox(expect));
}

TEST_CASE("registry Jacobians agree with symbolic differentiation of the DSL twins") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(0, 2 * M_PI), rad(0, 1);
    for (const auto& e : registry()) {
        const VectorField reg = make_registry_field(e.name);
        const VectorField twin = dsl_twin(e.name);
        for (int i = 0; i < 200; ++i) {
            const double r = reg.sigma() * (1.0 + 40.0 * rad(rng));
            const double t = ang(rng);
            const Point p(r * std::cos(t), r * std::sin(t));
            INFO(e.name);
            CHECK((reg.evaluate(p) - twin.evaluate(p)).norm() <= 1e-12 * (1 + reg.evaluate(p).norm()));
            CHECK((reg.jacobian(p) - twin.jacobian(p)).norm() <= 1e-12 * (1 + reg.jacobian(p).norm()));
        }
    }
}

TEST_CASE("trace oracles from the registry metadata") {
    const double eps = 0.5;
    const VectorField rd = make_registry_field("rot_decay_repel", eps);
    const VectorField rf = make_registry_field("rot_feed_attract", eps);
    const VectorField rs = make_registry_field("radial_slow");
    for (double r : {2.0, 3.5, 10.0, 77.0}) {
        const Point p(r * std::cos(1.1), r * std::sin(1.1));
        const double r2 = r * r;
        CHECK(rd.jacobian(p).trace() == doctest::Approx(-2 * eps / ((1 + r2) * (1 + r2))).epsilon(1e-12));
        CHECK(rf.jacobian(p).trace() == doctest::Approx(2 * eps * (1 - r2) / std::pow(1 + r2, 3)).epsilon(1e-12));
        CHECK(rs.jacobian(p).trace() == doctest::Approx(-(2 + r2) / std::pow(1 + r2, 1.5)).epsilon(1e-12));
    }
}

TEST_CASE("finite-difference Jacobian is second order") {
    for (const auto& e : registry()) {
        const VectorField f = make_registry_field(e.name);
        double err_h = 0, err_h2 = 0;
        for (double r : {2.5, 4.0, 7.0}) {
            for (double t : {0.3, 1.9, 4.4}) {
                const Point p(r * std::cos(t), r * std::sin(t));
                const Mat2 exact = f.jacobian(p);
                err_h = std::max(err_h, (f.fd_jacobian(p, 1e-2) - exact).norm());
                err_h2 = std::max(err_h2, (f.fd_jacobian(p, 5e-3) - exact).norm());
            }
        }
        INFO(e.name);
        if (err_h < 1e-9) continue;  // affine or quadratic fields: FD is exact up to rounding
        CHECK(err_h / err_h2 == doctest::Approx(4.0).epsilon(0.05));
    }
    const VectorField fd = make_registry_field("rot_decay_repel").with_fd_jacobian();
    CHECK(fd.jacobian_mode() == JacobianMode::finite_difference);
    CHECK((fd.jacobian({3, 1}) - make_registry_field("rot_decay_repel").jacobian({3, 1})).norm() < 1e-8);
}

TEST_CASE("spectrum examples") {
    auto s1 = spectrum(Mat2(-Mat2::Identity()));
    CHECK_FALSE(s1.complex_pair);
    CHECK(s1.lambda1.real() == -1);
    CHECK(s1.lambda2.real() == -1);
    CHECK(s1.hurwitz());

    Mat2 rot;
    rot << 0, -1, 1, 0;
    auto s2 = spectrum(rot);
    CHECK(s2.complex_pair);
    CHECK(s2.lambda1.real() == 0);
    CHECK(std::abs(s2.lambda1.imag()) == doctest::Approx(1));
    CHECK_FALSE(s2.hurwitz());
    CHECK(s2.no_nonneg_real());

    Mat2 m;
    m << 2, 1, -1, 2;
    auto s3 = spectrum(m);
    CHECK(s3.complex_pair);
    CHECK(s3.lambda1.real() == doctest::Approx(2));
    CHECK(std::abs(s3.lambda1.imag()) == doctest::Approx(1));
    CHECK_FALSE(s3.hurwitz());

    Mat2 bad;
    bad << NAN, 0, 0, 1;
    CHECK_THROWS_AS(spectrum(bad), NumericError);
}

TEST_CASE("spectrum invariants on random matrices") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0, 3);
    for (int i = 0; i < 2000; ++i) {
        Mat2 j;
        j << n(rng), n(rng), n(rng), n(rng);
        const auto s = spectrum(j);
        const auto sum = s.lambda1 + s.lambda2;
        const auto prod = s.lambda1 * s.lambda2;
        const double scale = 1 + j.norm() * j.norm();
        CHECK(std::abs(sum.real() - s.trace) <= 1e-12 * scale);
        CHECK(std::abs(sum.imag()) <= 1e-12 * scale);
        CHECK(std::abs(prod.real() - s.det) <= 1e-12 * scale);
        CHECK(std::abs(prod.imag()) <= 1e-12 * scale);
        CHECK(s.discriminant == doctest::Approx(s.trace * s.trace - 4 * s.det).epsilon(1e-9).scale(scale));
        CHECK((s.discriminant < 0) == s.complex_pair);
        if (s.complex_pair) CHECK(s.lambda1.real() == doctest::Approx(s.trace / 2));
        if (s.hurwitz()) {
            CHECK(s.trace < 0);
            CHECK(s.det > 0);
            CHECK(s.no_nonneg_real());
            CHECK(s.max_real_part() < 0);
        }
        // Conjugation by a rotation leaves T, D and the discriminant unchanged.
        const double th = n(rng);
        Mat2 r;
        r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        const auto c = spectrum(Mat2(r * j * r.transpose()));
        CHECK(std::abs(c.trace - s.trace) <= 1e-10 * scale);
        CHECK(std::abs(c.det - s.det) <= 1e-10 * scale);
        CHECK(std::abs(c.discriminant - s.discriminant) <= 1e-10 * scale);
        CHECK(c.hurwitz() == s.hurwitz());
    }
}

TEST_CASE("scan_region examples") {
    const auto lin = scan_region(make_registry_field("linear_hurwitz"), 1, 100);
    CHECK(lin.hurwitz_all());
    CHECK(lin.samples == 64u * 256u + 4096u);

    const auto rs = scan_region(make_registry_field("radial_slow"), 1, 50);
    CHECK(rs.hurwitz_all());
    CHECK(rs.max_real_part < 0);
    // Largest eigenvalue is -(1+r^2)^(-3/2), attained at r = 50.
    CHECK(rs.max_real_part == doctest::Approx(-std::pow(1 + 2500.0, -1.5)).epsilon(1e-6));

    const auto mr = scan_region(make_registry_field("model_reeb"), 1, 5);
    CHECK_FALSE(mr.hurwitz_all());
    CHECK_FALSE(mr.no_nonneg_real_all());
    CHECK(mr.det_positive_all());
    for (const auto& v : mr.hurwitz_violations) CHECK(v.location.y() >= -1e-12);

    for (const std::string name : {"rot_decay_repel", "rot_feed_attract", "shifted_zero"}) {
        const VectorField f = make_registry_field(name);
        const auto rep = scan_region(f, f.sigma(), 50 * f.sigma());
        INFO(name);
        CHECK(rep.hurwitz_all());
        CHECK(rep.no_nonneg_real_all());
        CHECK(rep.det_positive_all());
    }
    CHECK_THROWS_AS(scan_region(make_registry_field("linear_hurwitz"), 0.5, 3), PreconditionError);
}

TEST_CASE("annulus samples stay inside the annulus") {
    for (const auto& p : annulus_samples(2, 9, {})) {
        CHECK(p.norm() >= 2 - 1e-12);
        CHECK(p.norm() <= 9 + 1e-12);
    }
}

TEST_CASE("conjugation by a reflection keeps the spectrum") {
    Mat2 q;
    q << 1, 0, 0, -1;
    const VectorField f = make_registry_field("rot_decay_repel");
    const VectorField g = f.conjugated(q, "_reflected");
    for (double t : {0.1, 1.0, 2.5}) {
        const Point p(4 * std::cos(t), 4 * std::sin(t));
        const auto a = spectrum(f.jacobian(q.transpose() * p));
        const auto b = spectrum(g.jacobian(p));
        CHECK(a.trace == doctest::Approx(b.trace));
        CHECK(a.det == doctest::Approx(b.det));
        CHECK((g.jacobian(p) - g.fd_jacobian(p)).norm() < 1e-8);
    }
    CHECK(make_registry_field("shifted_zero").translated({-10, 0}).evaluate({3, 4}).isApprox(Vec2(-3, -4)));
}
