#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "horizon/contour.hpp"
#include "horizon/field.hpp"
#include "horizon/report.hpp"

namespace horizon {

/// Unknown key, malformed value, or malformed field expression in a run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPrecondition = 2;
inline constexpr int kExitInconsistency = 3;

const std::vector<std::string>& subcommands();

/// Registry name, or an expression pair with sigma and Jacobian mode.
struct FieldSpec {
    std::string name;
    std::string f_expr;
    std::string g_expr;
    double sigma = 1.0;
    std::string jacobian = "analytic";  // analytic | fd
    double epsilon = std::numeric_limits<double>::quiet_NaN();  // registry parameter, or `eps` in expressions
};

struct RunConfig {
    std::string subcommand = "all";
    FieldSpec field;
    std::uint64_t seed = 1;
    std::string out = "horizon_out";  // not part of the serialized config

    double r_max = 0.0;                 // spectrum scan; 0 selects 32 sigma
    std::optional<Point> point;         // flow seed and foliation leaf; default (3 sigma, 0)
    double t_max = 1e4;
    std::optional<Window> window;       // foliation; default [-10 sigma, 10 sigma]^2
    double radius = 0.0;                // tangency circle; 0 selects 5 sigma
    std::vector<double> radii{2, 4, 8, 16, 32};  // eta sweep
    std::string family = "star_shaped";
    int perturbations = 32;
    double s = 0.0;                     // index blend radius; 0 = automatic
    std::vector<double> s_values{2, 4, 8};
    double tol_index = 1e-6;
    int escape_seeds = 64;
    int arcs = 100;
    int ray_seeds = 100;
    std::size_t pairs = 100'000;
    std::size_t hash_samples = 1'000'000;
    double injectivity_s = 0.0;         // 0 selects 4 sigma
    double tol_identity = 1e-6;
    double tol_slack = 1e-8;
};

struct ConfigKey {
    std::string name;
    std::string help;
};

/// Every key accepted in config files; the CLI exposes each as --<key>.
const std::vector<ConfigKey>& config_keys();

/// Throws ConfigError for unknown keys and unparsable values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines; `#` starts a comment.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Canonical key/value map of everything that determines the output (all keys except out).
std::map<std::string, std::string> serialize_config(const RunConfig& cfg);

/// Throws ConfigError on malformed expressions or unknown registry names.
VectorField build_field(const FieldSpec& spec);

using CsvList = std::vector<std::pair<std::string, CsvTable>>;

/// The report.json document for cfg, with CSV artifacts collected in `csv`.
Json build_report(const RunConfig& cfg, CsvList& csv);

/// Runs the subcommand, writes report.json and CSV files into cfg.out, and
/// returns the exit status. Errors are reported in report.json and on `err`.
int run(const RunConfig& cfg, std::ostream& err);

}  // namespace horizon
