#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "horizon/curve.hpp"
#include "horizon/field.hpp"
#include "horizon/flow.hpp"
#include "horizon/index.hpp"

namespace horizon {

struct TranslationControls {
    double s = 0.0;             // inner radius of the checked annulus; 0 selects sigma
    double r_max = 0.0;         // outer radius; 0 selects 32 sigma
    double zero_margin_rel = 1e-4;  // |X + v|(z) must exceed zero_margin_rel * |z|
    RegionScanGrid grid{32, 128, 1024};
    int grid_half_width = 4;    // search grid (2w+1)^2 around -mean(X) on the inner circle
};

struct TranslationChoice {
    Vec2 v{0, 0};
    double min_ratio = 0.0;     // min over samples of |X + v| / (zero_margin_rel |z|)
    int candidates_tried = 0;
};

/// v = 0 when X + 0 clears the zero margin on the annulus, otherwise the best
/// grid point around -mean(X) on the inner circle. Throws NumericError when
/// no candidate clears the margin.
TranslationChoice choose_translation(const VectorField& field, const TranslationControls& controls = {});

struct LadderRung {
    double radius = 0.0;
    std::optional<ClosedCurve> curve;  // accepted transversal curve enclosing D_radius
    int sign = 0;                      // sign of <X + v, eta> on the accepted curve
    double min_normal = 0.0;           // min |<X + v, eta>| over the samples
    double margin = 0.0;               // 1e-6 (1 + max |X + v|)
    bool searched = false;             // the round circle failed and star curves were tried
    int search_iterations = 0;
    bool accepted() const { return curve.has_value(); }
};

struct TransversalLadder {
    Vec2 v{0, 0};
    std::vector<LadderRung> rungs;
    std::size_t accepted_count() const;
    /// At least 4 accepted rungs.
    bool usable() const { return accepted_count() >= 4; }
    /// Every accepted rung has the same sign.
    bool sign_coherent() const;
    int sign() const;
    const LadderRung* outermost() const;
    const LadderRung* innermost() const;
};

struct LadderControls {
    int samples = 4096;
    int search_samples = 1024;
    int harmonics = 4;          // 8 coefficients
    int search_iterations = 200;  // compass sweeps
};

/// Default rung radii: sigma 1.25^k, k = 1..4.
std::vector<double> default_ladder_radii(double sigma);

/// Minimum of sign * <X + v, eta> over samples of the curve, and max |X + v|.
struct NormalProfile {
    double min_signed = 0.0;
    double min_abs = 0.0;
    double max_speed = 0.0;
    int sign = 0;   // +1 or -1 when sign-definite, 0 otherwise
};
NormalProfile normal_profile(const VectorField& field, const Vec2& v, const ClosedCurve& curve, int samples);

TransversalLadder find_transversal_ladder(const VectorField& field, const Vec2& v, const std::vector<double>& radii,
                                          const LadderControls& controls = {});

enum class Verdict { attractor, repellor, inconclusive };
std::string to_string(Verdict v);

struct EscapeStats {
    int seeds = 0;
    int forward_escapes = 0;
    int backward_escapes = 0;
    double forward_fraction() const { return seeds ? static_cast<double>(forward_escapes) / seeds : 0.0; }
    double backward_fraction() const { return seeds ? static_cast<double>(backward_escapes) / seeds : 0.0; }
};

struct InfinityControls {
    std::vector<double> radii;  // empty selects default_ladder_radii
    int seeds = 64;
    double escape_factor = 1.05;  // seed-relative escape rungs r_seed * factor^k, k = 1..3
    double period_tol = 1e-6;
    FlowControls flow{};
    TranslationControls translation{};
    LadderControls ladder{};
    IndexControls index{};
};

struct InfinityVerdict {
    Verdict verdict = Verdict::inconclusive;
    Vec2 v{0, 0};
    TransversalLadder ladder;
    EscapeStats escape;
    bool periodicity_flag = false;
    double min_return_distance = 0.0;
    IndexEstimate index;
    bool index_sign_consistent = false;
    std::string reason;  // why the verdict is inconclusive, empty otherwise
};

/// Attractor: every seed on the outermost rung escapes forward; repellor:
/// every seed escapes backward. Mixed outcomes are inconclusive.
InfinityVerdict classify_infinity(const VectorField& field, const InfinityControls& controls = {});

/// I >= 0 for an attractor and I < 0 for a repellor. A finite index within
/// 10 tol of zero counts as zero.
bool index_sign_consistent(Verdict verdict, const IndexEstimate& index, double tol);

}  // namespace horizon
