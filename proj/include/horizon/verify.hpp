#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/field.hpp"
#include "horizon/foliation.hpp"

namespace horizon {

/// The arc and baseline do not bound a region of the expected shape.
class RegionConstructionError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// The arc endpoints do not have the projection ordering the check requires.
class OrderingError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

struct VerifyTolerances {
    double identity_tol = 1e-6;     // relative, identities
    double numerical_slack = 1e-8;  // relative, inequalities
};

/// Positive: the arc lies in L_p^+ and runs towards larger x. Negative: the
/// arc ends on L_q^- and runs towards smaller x.
enum class FluxVariant { positive, negative };
std::string to_string(FluxVariant v);

/// Leaf integrals use the outward co-normal of the region below the arc:
/// <v, eta> ds with eta = -o grad f / |grad f|, o = +1 for arcs running to
/// larger x and -1 otherwise.
struct ArcIntegralReport {
    LeafArc arc;                 // oriented from p to q
    std::string check;           // "green" | "flux_positive" | "flux_negative"
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;          // lhs - rhs
    double threshold = 0.0;      // identities: |slack| <= threshold; inequalities: slack >= -threshold
    bool passed = false;
    double span = 0.0;           // |x(q) - x(p)|
    double baseline = 0.0;       // green only
    int pieces = 0;              // x-monotone pieces of the arc
    bool spectrum_ok = true;     // no eigenvalue in [0, inf) at the arc samples
};

/// Area integral of g_y over the region under the arc down to y = baseline,
/// against the boundary form: leaf term minus the integral of g(alpha, c).
/// Throws RegionConstructionError when the endpoints are not the x-extremes of
/// the arc, the baseline is not below it, or a vertical slice meets the arc an
/// even number of times.
ArcIntegralReport green_identity_check(const VectorField& field, const LeafArc& arc, double baseline,
                                       const VerifyTolerances& tol = {});

/// With dt = -o ds / |grad f|: lhs = int <X, grad f> dt and
/// rhs = f(r) int f_x dt + g(p) span, where r = p for the positive variant and
/// r = q for the negative one. Throws OrderingError
/// when the endpoints have the wrong x-order, x leaves the endpoint range, or
/// the x-range is not right of sigma.
ArcIntegralReport flux_inequality_check(const VectorField& field, const LeafArc& arc, FluxVariant variant,
                                        const VerifyTolerances& tol = {});

/// Leaf arc from p along X_f, cut so that p and the returned end are the
/// x-extremes required by the variant. Empty points when the leaf immediately
/// moves the wrong way.
LeafArc flux_arc(const VectorField& field, const Point& p, FluxVariant variant, double length, double step = 0.0);

struct ArcSampling {
    int count = 100;
    double r_min = 3.0;
    double r_max = 30.0;
    double length = 8.0;       // tracing budget per arc
    double min_span = 0.05;    // arcs with a shorter x-span are rejected unless the leaves are vertical
    int max_attempts = 40;     // per requested arc
    std::uint64_t seed = 1;
};

struct FluxBatchReport {
    FluxVariant variant = FluxVariant::positive;
    bool reflected = false;     // arcs taken from Q X(Q^T z), Q = diag(1, -1)
    std::vector<ArcIntegralReport> arcs;
    double min_relative_slack = 0.0;  // min slack / (1 + |lhs|)
    bool all_passed() const;
};

/// Random seeds in the annulus with x > sigma. When the field has too few
/// arcs of the requested direction, all arcs come from the reflected field,
/// which has the same spectrum.
FluxBatchReport flux_inequality_batch(const VectorField& field, FluxVariant variant, const ArcSampling& sampling,
                                      const VerifyTolerances& tol = {});

struct GreenBatchReport {
    std::vector<ArcIntegralReport> regions;
    bool degenerate = false;   // every F(f) leaf is vertical, so each region has empty interior
    double max_relative_error = 0.0;
    bool all_passed() const;
};

/// One region per seed; baseline 2 below the arc minimum.
GreenBatchReport green_identity_batch(const VectorField& field, const std::vector<Point>& seeds, double length,
                                      const VerifyTolerances& tol = {});

/// Area-uniform random points in the annulus, optionally with x > sigma.
std::vector<Point> random_annulus_points(std::size_t n, double r_min, double r_max, std::uint64_t seed,
                                         double x_min = -std::numeric_limits<double>::infinity());

struct VerticalRayControls {
    double length = 60.0;   // tracing budget per half-leaf
    double step = 0.0;      // 0 selects the leaf tracer default
    double hit_tol = 1e-9;  // relative to 1 + |p|
};

struct RayProbe {
    bool hit = false;
    double closest = 0.0;   // distance from the leaf (after leaving p) to the ray
    LeafEnd end = LeafEnd::length_budget;
};

struct VerticalRayEntry {
    Point seed{0, 0};
    RayProbe plus;          // L_p^+ against {(a, y): y >= c}
    RayProbe minus;         // L_p^- against {(a, y): y <= c}
    bool spectrum_ok = true;  // no eigenvalue in [0, inf) along both half-leaves
};

struct VerticalRayReport {
    std::vector<VerticalRayEntry> entries;
    int hits = 0;            // among entries with spectrum_ok
    int skipped = 0;         // entries without spectrum_ok
    double min_closest = 0.0;
    bool passed() const { return hits == 0; }
};

VerticalRayReport vertical_ray_check(const VectorField& field, const std::vector<Point>& seeds,
                                     const VerticalRayControls& controls = {});

struct Collision {
    Point p{0, 0};
    Point q{0, 0};
    double image_gap = 0.0;
};

struct InjectivityControls {
    double r_max = 0.0;              // 0 selects 8 s
    std::size_t hash_samples = 1'000'000;
    double collision_tol_rel = 1e-9; // relative to 1 + image scale
    double separation_floor = 1e-3;
    double candidate_rel = 1e-6;     // hash cell size relative to 1 + image scale
    std::size_t max_reported = 64;
};

struct InjectivityScanReport {
    double s = 0.0;
    double r_max = 0.0;
    std::size_t pairs_tested = 0;
    std::size_t samples_hashed = 0;
    std::size_t candidates = 0;      // hash neighbours refined with Newton
    std::size_t collision_count = 0;
    std::vector<Collision> collisions;  // the first max_reported, in sample order
    double image_scale = 0.0;
    bool passed = false;
};

/// Random pairs in the annulus [s, r_max] plus a hash grid over the images of
/// a polar sample grid; hash neighbours are refined by Newton on X(q) = X(p).
InjectivityScanReport injectivity_scan(const VectorField& field, double s, std::size_t n_pairs, std::uint64_t seed,
                                       const InjectivityControls& controls = {});

}  // namespace horizon
