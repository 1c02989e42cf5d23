#pragma once

#include <string>
#include <vector>

#include "horizon/field.hpp"

namespace horizon {

/// C^1 extension of X to the whole plane: the linear model -k z for |z| <= s,
/// X for |z| >= 2s, and a smoothstep radial blend in between.
struct ExtensionBlend {
    double s = 1.0;
    double outer = 2.0;
    double interior_scale = 1.0;  // k in the model -k z
    int doublings = 0;            // times s was doubled to pass the checks
    VectorField field;            // sigma = 0, analytic Jacobian when X has one
    double seam_discrepancy = 0.0;  // max Jacobian jump across |z| = s and |z| = 2s
    bool seam_ok = false;         // seam_discrepancy <= 1e-4
    bool det_positive = false;    // det of the blended Jacobian > 0 on both seam circles

    /// Ramp beta(r): 0 for r <= s, 1 for r >= 2s.
    double ramp(double r) const;
};

/// interior_scale <= 0 picks k as the mean of |X(z)| / |z| on |z| = 2s.
/// If the seam or determinant check fails, s is doubled up to 3 times; the
/// last attempt is returned with its flags.
ExtensionBlend build_extension(const VectorField& field, double s, double interior_scale = 0.0);

/// Jacobian jump |DX(r + h) - DX(r - h)| maximized over angles on the circle of radius r.
double seam_jump(const VectorField& blended, double r, double h = 1e-6, int angles = 64);

enum class IndexKind { finite, plus_infinity, minus_infinity, unreliable };
std::string to_string(IndexKind k);

struct IndexControls {
    double s = 0.0;               // blend radius; 0 selects sigma (or 1 when sigma = 0)
    double interior_scale = 0.0;  // 0 = automatic
    double ladder_base = 0.0;     // 0 selects 4 sigma (or 4 when sigma = 0)
    double ladder_factor = 2.0;
    int rungs = 13;
    int flux_points = 4096;
    int area_angles = 512;
    double tol = 1e-6;
    bool throw_on_inconsistency = true;
};

struct IndexEstimate {
    IndexKind kind = IndexKind::unreliable;
    double value = 0.0;                 // +-inf for divergent kinds, last flux otherwise
    std::vector<double> radii;
    std::vector<double> flux;           // outward flux of the blend through |z| = R
    std::vector<double> area;           // Gauss-Legendre polar quadrature of the trace over D_R
    double interior_contribution = 0.0; // area integral of the blended trace over D_{2s}
    double growth_exponent = 0.0;       // slope of log|flux| against log R over the last 4 rungs
    double extrapolated = 0.0;          // Aitken extrapolation of the last three fluxes
    double max_discrepancy = 0.0;       // max |flux - area| / (1 + |flux|)
    ExtensionBlend blend;
};

/// Index at infinity as the limit of the outward flux on a geometric ladder,
/// cross-checked against an area quadrature of the blended trace. Throws
/// InconsistencyError (or returns kind unreliable) when the two disagree by
/// more than 10 tol (1 + |flux|).
IndexEstimate compute_index(const VectorField& field, const IndexControls& controls = {});

/// Throws InconsistencyError when a field that is Hurwitz on the scanned region
/// receives index +inf.
void check_index_shape(const IndexEstimate& estimate, bool hurwitz_region);

struct ExtensionRun {
    double s = 0.0;
    double interior_scale = 0.0;
    IndexEstimate estimate;
};

struct ExtensionProbeReport {
    std::vector<ExtensionRun> runs;
    double max_discrepancy = 0.0;  // over pairs of finite values
    bool kinds_agree = false;
};

/// compute_index for every s in s_values and interior models -z and -2z.
ExtensionProbeReport extension_independence_probe(const VectorField& field, const std::vector<double>& s_values,
                                                  const IndexControls& controls = {});

}  // namespace horizon
