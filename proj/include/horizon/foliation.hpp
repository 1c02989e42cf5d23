#pragma once

#include <optional>
#include <string>
#include <vector>

#include "horizon/contour.hpp"
#include "horizon/field.hpp"

namespace horizon {

/// Which foliation: level sets of f (traced by X_f) or of g (traced by (g_y, -g_x)).
enum class LeafComponent { f, g };

std::string to_string(LeafComponent c);

/// The traced scalar (f or g), its gradient, and the transverse scalar that
/// increases along the tracing field when det DX > 0.
double leaf_value(const VectorField& field, LeafComponent c, const Point& p);
double transverse_value(const VectorField& field, LeafComponent c, const Point& p);
Vec2 leaf_gradient(const VectorField& field, LeafComponent c, const Point& p);
/// X_f = (-f_y, f_x) or X~_g = (g_y, -g_x); unchecked evaluation.
Vec2 leaf_direction(const VectorField& field, LeafComponent c, const Point& p);

struct LeafControls {
    double step = 0.0;          // arc-length step; 0 selects 2e-3 * (window diagonal or 1 + |start|)
    double max_length = 100.0;  // per direction
    std::optional<Window> window;
    double leaf_tol_rel = 1e-8;       // |F - c| <= leaf_tol_rel * (1 + |c|)
    double monotonicity_tol = 1e-10;
    double leaf_tol(double c) const { return leaf_tol_rel * (1.0 + std::abs(c)); }
};

enum class LeafEnd { length_budget, window_exit, inner_disk, closed };
std::string to_string(LeafEnd e);

/// Arc of a leaf oriented so the transverse scalar increases (g along F(f), f along F(g)).
struct LeafArc {
    double level = 0.0;
    LeafComponent component = LeafComponent::f;
    std::vector<Point> points;
    std::vector<double> transverse;
    std::size_t start_index = 0;  // index of the traced start point
    LeafEnd end_low = LeafEnd::length_budget;   // end with smallest transverse value
    LeafEnd end_high = LeafEnd::length_budget;  // end with largest transverse value

    double length() const;
    double max_residual(const VectorField& field) const;
    /// Smallest step of the transverse scalar between consecutive points.
    double min_transverse_increment() const;
};

struct HalfLeaf {
    std::vector<Point> points;  // starts at the seed
    LeafEnd end = LeafEnd::length_budget;
};

/// One direction of a leaf: sign = +1 follows the tracing field, -1 runs against it.
HalfLeaf trace_half_leaf(const VectorField& field, const Point& start, LeafComponent c, int sign,
                         const LeafControls& controls);

LeafArc trace_leaf(const VectorField& field, const Point& start, LeafComponent c, const LeafControls& controls = {});

struct LevelSetScan {
    Window window;
    double level = 0.0;
    std::vector<ContourComponent> components;
};

LevelSetScan level_components(const VectorField& field, double level, const Window& window,
                              const GridSpec& grid = {}, LeafComponent c = LeafComponent::f);

enum class Boundedness { bounded, unbounded, unknown };
std::string to_string(Boundedness b);

struct HalfReebWitness {
    double level = 0.0;           // witness level c~
    Window window;                // witness window
    Point edge_start{0, 0};       // compact-edge endpoints, where the non-compact edges start
    Point edge_end{0, 0};
    double edge_level = 0.0;      // level of the non-compact edges
    Point tangency{0, 0};         // extremum of F along the compact edge
    double tangency_level = 0.0;
    LeafEnd edge_start_end = LeafEnd::length_budget;  // how each non-compact edge terminated
    LeafEnd edge_end_end = LeafEnd::length_budget;
    int escalation_rounds = 0;    // doubling rounds used for the classification
    Boundedness boundedness = Boundedness::unknown;
};

struct HalfReebControls {
    GridSpec grid{};
    int uniform_levels = 16;
    int escalation_rounds = 3;
    std::size_t max_witnesses = 8;
    int max_edge_candidates = 4000;
};

struct HalfReebReport {
    LeafComponent component = LeafComponent::f;
    Window search_window;
    std::vector<double> levels_scanned;
    std::vector<HalfReebWitness> detected;
    bool none_found() const { return detected.empty(); }
    bool bounded_only() const;
};

/// Levels between consecutive critical values of F restricted to the boundary
/// of window minus the disk, plus `uniform` evenly spaced levels.
std::vector<double> candidate_levels(const VectorField& field, LeafComponent c, const Window& window, int uniform);

HalfReebReport detect_half_reeb(const VectorField& field, LeafComponent c, const Window& search_window,
                                const HalfReebControls& controls = {});

enum class Side { plus, minus };

struct ConvexityProbe {
    bool convex = true;             // no disconnected level found
    bool touches_disk = false;      // the probed side meets the excluded disk
    std::vector<double> levels;     // levels probed
    std::optional<double> witness_level;
};

/// Probes the side H+ (F > c) or H- (F < c) of a traced F(f) leaf inside window:
/// a disconnected level set of f in that side is a non-convexity witness.
ConvexityProbe vertical_convexity_probe(const VectorField& field, const LeafArc& leaf, Side side, const Window& window,
                                        const GridSpec& grid = {}, int n_levels = 24);

}  // namespace horizon
