#pragma once

#include <string>
#include <vector>

#include "horizon/field.hpp"

namespace horizon {

enum class Direction { forward, backward };

struct FlowControls {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double t_max = 1e4;   // integration time budget (absolute value)
    double r_max = 1e4;   // escape radius
    double initial_step = 1e-3;
    double min_step = 1e-13;
    std::size_t max_steps = 4'000'000;
};

enum class Terminal { escaped, bounded, left_domain, step_failure };

/// Time-sampled integral curve. Times are negative for backward integration,
/// so `times` is monotone in the integration direction.
struct Trajectory {
    Point seed{0.0, 0.0};
    Direction direction = Direction::forward;
    std::vector<double> times;
    std::vector<Point> points;
    std::vector<Vec2> velocities;     // dz/dt at each sample
    std::vector<Vec2> accelerations;  // DX(z) X(z); with velocities gives quintic Hermite interpolation
    Terminal terminal = Terminal::bounded;
    double r_exit = 0.0;
    double t_exit = 0.0;

    std::size_t size() const { return times.size(); }
    double t_end() const { return times.empty() ? 0.0 : times.back(); }
    double max_radius() const;
    /// Quintic Hermite interpolation; t is clamped to the integrated interval.
    Point at(double t) const;
};

Trajectory integrate(const VectorField& field, const Point& seed, Direction direction,
                     const FlowControls& controls = {});

struct EscapeLadder {
    double r0 = 4.0;
    double factor = 2.0;
    int rungs = 6;

    static EscapeLadder standard(double sigma) { return {4.0 * sigma, 2.0, 6}; }
    double rung(int k) const;
};

enum class LimitKind { goes_to_infinity, stays_bounded, enters_inner_disk, inconclusive };

struct LimitVerdict {
    LimitKind kind = LimitKind::inconclusive;
    int rungs_crossed = 0;
    std::vector<double> crossing_times;  // first crossing of each rung reached
    double max_radius = 0.0;
    double final_radius = 0.0;
    bool returned_below_rung = false;
};

LimitVerdict classify_limit(const Trajectory& traj, const EscapeLadder& ladder);

struct UniquenessProbeReport {
    Point seed{0.0, 0.0};
    double delta = 0.0;
    double t_window = 0.0;
    std::vector<double> times;
    std::vector<double> divergence;  // max over perturbations of |z_k(t) - z_0(t)|
    double max_divergence = 0.0;
    double fitted_rate = 0.0;        // least-squares slope of log(divergence/delta) against t
    double jacobian_bound = 0.0;     // max operator norm of DX along the orbit
    bool within_gronwall_bound = false;
    bool contracting = false;        // divergence non-increasing in t
};

UniquenessProbeReport semi_trajectory_uniqueness_probe(const VectorField& field, const Point& seed,
                                                       int n_perturbations, double delta = 1e-6,
                                                       double t_window = 1.0, const FlowControls& controls = {});

/// Closest approach to the seed after the orbit first moves `departure` away from it.
double closest_return(const Trajectory& traj, double departure);

std::string to_string(Terminal t);
std::string to_string(LimitKind k);
std::string to_string(Direction d);

}  // namespace horizon
