#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "horizon/curve.hpp"
#include "horizon/field.hpp"

namespace horizon {

enum class TangencyClass { internal, external, degenerate };
std::string to_string(TangencyClass k);

/// Point where a leaf of F(f) touches the curve: X_f parallel to c'(theta).
struct TangencyPoint {
    double theta = 0.0;
    Point position{0, 0};
    double level = 0.0;          // f at the tangency
    double normal_slope = 0.0;   // grad f . outward normal
    TangencyClass klass = TangencyClass::degenerate;
};

/// Thrown when a tangency is degenerate (the leaf crosses the curve there).
class DegenerateTangencyError : public NumericError {
public:
    DegenerateTangencyError(const std::string& what, double theta) : NumericError(what), theta_(theta) {}
    double theta() const { return theta_; }

private:
    double theta_;
};

struct TangencyControls {
    int samples = 1 << 14;
    double theta_tol = 1e-12;
    double angle_tol = 1e-10;
    bool throw_on_degenerate = true;
    int jitter_retries = 8;
    double jitter_amplitude = 1e-3;  // relative to the base radius
    int jitter_harmonics = 4;
    std::uint64_t seed = 0x5eed;
};

/// Zeros of the normalized cross product X_f(c(t)) x c'(t), classified as
/// external (the leaf stays outside the curve), internal, or degenerate.
/// Throws NumericError if X_f vanishes on the curve.
std::vector<TangencyPoint> find_tangencies(const VectorField& field, const ClosedCurve& curve,
                                           const TangencyControls& controls = {});

/// Winding number of t -> X_f(c(t)) around 0. Lifted angle increments must
/// stay below pi/2; the partition is refined once before NumericError.
int curve_index(const VectorField& field, const ClosedCurve& curve, int samples = 4096);

struct TangencyReport {
    ClosedCurve curve;                  // the curve actually analyzed (after any jitter)
    int jitter_retries = 0;
    std::vector<TangencyPoint> points;
    int n_ext = 0;
    int n_int = 0;
    int n_degenerate = 0;
    double index_formula = 0.0;         // (2 - n_ext + n_int) / 2
    int index_winding = 0;
    bool formula_holds = false;
    bool general_position = false;
    bool shared_leaf = false;           // two tangencies on one traced leaf
    /// The tangencies where f|_C is smallest and largest are distinct and external.
    bool extremes_external = false;
};

/// find_tangencies + curve_index. A curve out of general position is jittered
/// by random low harmonics up to controls.jitter_retries times.
TangencyReport tangency_report(const VectorField& field, const ClosedCurve& curve,
                               const TangencyControls& controls = {});

enum class CurveFamily { circles, star_shaped };
std::string to_string(CurveFamily f);

struct EtaSweepEntry {
    double radius = 0.0;
    std::optional<int> n_int_min;  // upper bound for the true minimum; empty if no curve was usable
    int curves_tried = 0;
    int curves_general = 0;
};

struct EtaSweepResult {
    CurveFamily family = CurveFamily::star_shaped;
    std::vector<EtaSweepEntry> entries;
    std::vector<std::size_t> monotonicity_violations;  // indices i with min[i] < min[i-1]
    bool nondecreasing() const { return monotonicity_violations.empty(); }
};

struct EtaSweepControls {
    int perturbations = 32;
    int harmonics = 3;
    double amplitude = 0.15;  // sum of harmonic amplitudes relative to the radius
    std::uint64_t seed = 0xe7a;
    TangencyControls tangency{};
};

/// For each radius R, the smallest n_int over the origin-centered circle of
/// radius R and (for star_shaped) random star curves with R <= rho <= R (1 + 2 amplitude).
EtaSweepResult eta_sweep(const VectorField& field, const std::vector<double>& radii, CurveFamily family,
                         const EtaSweepControls& controls = {});

}  // namespace horizon
