#pragma once

#include <map>
#include <string>
#include <vector>

#include "horizon/field.hpp"

namespace horizon {

/// Named example field with the closed-form facts that tests compare against.
struct RegistryEntry {
    std::string name;
    std::string formula;
    double sigma = 1.0;
    bool takes_epsilon = false;
    double default_epsilon = 0.0;
    /// Free-form oracle facts: "trace", "radial_component", "flux", "index", "verdict", ...
    std::map<std::string, std::string> oracle;
};

const std::vector<RegistryEntry>& registry();
const RegistryEntry& registry_entry(const std::string& name);
bool in_registry(const std::string& name);

/// Builds a registry field with its analytic Jacobian. NaN epsilon selects the default.
VectorField make_registry_field(const std::string& name, double epsilon = std::numeric_limits<double>::quiet_NaN());

}  // namespace horizon
