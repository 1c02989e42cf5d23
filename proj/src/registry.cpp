#include "horizon/registry.hpp"

#include <cmath>

namespace horizon {

namespace {

// X(z) = omega * (-y, x) + phi(r^2) * z, with dphi = d phi / d(r^2).
template <typename Phi, typename DPhi>
VectorField radial_rotational(const std::string& name, double sigma, double omega, Phi phi, DPhi dphi) {
    auto value = [=](const Point& p) -> Vec2 {
        const double k = phi(p.squaredNorm());
        return {-omega * p.y() + k * p.x(), omega * p.x() + k * p.y()};
    };
    auto jac = [=](const Point& p) -> Mat2 {
        const double r2 = p.squaredNorm();
        const double k = phi(r2);
        const double dk = dphi(r2);
        Mat2 j;
        j << k + 2.0 * dk * p.x() * p.x(), -omega + 2.0 * dk * p.x() * p.y(),
             omega + 2.0 * dk * p.x() * p.y(), k + 2.0 * dk * p.y() * p.y();
        return j;
    };
    return VectorField(name, sigma, value, jac);
}

std::vector<RegistryEntry> build_registry() {
    std::vector<RegistryEntry> r;
    r.push_back({"linear_hurwitz", "X(z) = -z", 1.0, false, 0.0,
                 {{"trace", "-2"},
                  {"radial_component", "-r"},
                  {"flux", "-2 pi R^2"},
                  {"index", "-inf"},
                  {"verdict", "repellor"},
                  {"hurwitz", "true"}}});
    r.push_back({"rot_decay_repel", "X(z) = (-y, x) - eps (x, y) / (1 + r^2)", 1.0, true, 0.5,
                 {{"trace", "-2 eps / (1 + r^2)^2"},
                  {"radial_component", "-eps r / (1 + r^2)"},
                  {"flux", "-2 pi eps R^2 / (1 + R^2)"},
                  {"index", "-2 pi eps"},
                  {"verdict", "repellor"},
                  {"hurwitz", "true"}}});
    r.push_back({"rot_feed_attract", "X(z) = (-y, x) + eps (x, y) / (1 + r^2)^2", 2.0, true, 0.5,
                 {{"trace", "2 eps (1 - r^2) / (1 + r^2)^3"},
                  {"radial_component", "eps r / (1 + r^2)^2"},
                  {"flux", "2 pi eps R^2 / (1 + R^2)^2"},
                  {"index", "0"},
                  {"verdict", "attractor"},
                  {"hurwitz", "true"}}});
    r.push_back({"radial_slow", "X(z) = -z / sqrt(1 + r^2)", 1.0, false, 0.0,
                 {{"trace", "-(2 + r^2) / (1 + r^2)^(3/2)"},
                  {"eigenvalues", "-(1 + r^2)^(-3/2), -(1 + r^2)^(-1/2)"},
                  {"radial_component", "-r / sqrt(1 + r^2)"},
                  {"flux", "-2 pi R^2 / sqrt(1 + R^2)"},
                  {"index", "-inf"},
                  {"verdict", "repellor"},
                  {"hurwitz", "true"}}});
    r.push_back({"model_reeb", "f = x y, g = (y^2 - x^2) / 2", 0.1, false, 0.0,
                 {{"jacobian", "[[y, x], [-x, y]]"},
                  {"eigenvalues", "y +- i x"},
                  {"det", "x^2 + y^2"},
                  {"hurwitz", "false"},
                  {"injective", "false (X(-z) = X(z))"}}});
    r.push_back({"shifted_zero", "X(z) = -(z - (10, 0))", 1.0, false, 0.0,
                 {{"trace", "-2"},
                  {"zero", "(10, 0)"},
                  {"index", "-inf"},
                  {"verdict", "repellor"},
                  {"hurwitz", "true"},
                  {"role", "translation search control"}}});
    return r;
}

}  // namespace

const std::vector<RegistryEntry>& registry() {
    static const std::vector<RegistryEntry> entries = build_registry();
    return entries;
}

bool in_registry(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return true;
    return false;
}

const RegistryEntry& registry_entry(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return e;
    throw PreconditionError("unknown registry field '" + name + "'");
}

VectorField make_registry_field(const std::string& name, double epsilon) {
    const RegistryEntry& entry = registry_entry(name);
    const double eps = std::isnan(epsilon) ? entry.default_epsilon : epsilon;
    if (!entry.takes_epsilon && !std::isnan(epsilon) && epsilon != 0.0)
        throw PreconditionError("field '" + name + "' takes no epsilon parameter");

    if (name == "linear_hurwitz") {
        return VectorField(
            name, entry.sigma, [](const Point& p) -> Vec2 { return -p; },
            [](const Point&) -> Mat2 { return -Mat2::Identity(); });
    }
    if (name == "rot_decay_repel") {
        return radial_rotational(
            name, entry.sigma, 1.0, [eps](double r2) { return -eps / (1.0 + r2); },
            [eps](double r2) { return eps / ((1.0 + r2) * (1.0 + r2)); });
    }
    if (name == "rot_feed_attract") {
        return radial_rotational(
            name, entry.sigma, 1.0, [eps](double r2) { return eps / ((1.0 + r2) * (1.0 + r2)); },
            [eps](double r2) { return -2.0 * eps / ((1.0 + r2) * (1.0 + r2) * (1.0 + r2)); });
    }
    if (name == "radial_slow") {
        return radial_rotational(
            name, entry.sigma, 0.0, [](double r2) { return -1.0 / std::sqrt(1.0 + r2); },
            [](double r2) { return 0.5 / ((1.0 + r2) * std::sqrt(1.0 + r2)); });
    }
    if (name == "model_reeb") {
        return VectorField(
            name, entry.sigma,
            [](const Point& p) -> Vec2 { return {p.x() * p.y(), 0.5 * (p.y() * p.y() - p.x() * p.x())}; },
            [](const Point& p) -> Mat2 {
                Mat2 j;
                j << p.y(), p.x(), -p.x(), p.y();
                return j;
            });
    }
    // shifted_zero
    return VectorField(
        name, entry.sigma, [](const Point& p) -> Vec2 { return Vec2(10.0, 0.0) - p; },
        [](const Point&) -> Mat2 { return -Mat2::Identity(); });
}

}  // namespace horizon
