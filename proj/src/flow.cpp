#include "horizon/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "horizon/parallel.hpp"

namespace horizon {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

struct Node {
    Point p;
    Vec2 v;
    Vec2 a;
};

Point hermite(const Node& n0, const Node& n1, double h, double s) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double h1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    const double h3 = 10 * s3 - 15 * s4 + 6 * s5;
    const double h4 = -4 * s3 + 7 * s4 - 3 * s5;
    const double h5 = 0.5 * (s3 - 2 * s4 + s5);
    return h0 * n0.p + h1 * h * n0.v + h2 * h * h * n0.a + h3 * n1.p + h4 * h * n1.v + h5 * h * h * n1.a;
}

// Parameter s in [0,1] where the segment radius crosses `target`, given that
// the radius is on opposite sides of target at the ends.
double radius_crossing(const Node& n0, const Node& n1, double h, double target) {
    double lo = 0.0, hi = 1.0;
    const bool rising = n0.p.norm() < target;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const bool below = hermite(n0, n1, h, mid).norm() < target;
        if (below == rising)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

Node node_at(const Trajectory& t, std::size_t i) { return {t.points[i], t.velocities[i], t.accelerations[i]}; }

Node make_node(const VectorField& field, const Point& p) {
    const Vec2 v = field.evaluate_unchecked(p);
    return {p, v, field.jacobian_unchecked(p) * v};
}

void push(Trajectory& t, double time, const Node& n) {
    t.times.push_back(time);
    t.points.push_back(n.p);
    t.velocities.push_back(n.v);
    t.accelerations.push_back(n.a);
}

}  // namespace

double Trajectory::max_radius() const {
    double r = 0.0;
    for (const auto& p : points) r = std::max(r, p.norm());
    return r;
}

Point Trajectory::at(double t) const {
    if (times.empty()) return seed;
    const bool increasing = times.size() < 2 || times.back() >= times.front();
    const double lo_t = increasing ? times.front() : times.back();
    const double hi_t = increasing ? times.back() : times.front();
    t = std::clamp(t, lo_t, hi_t);
    if (times.size() == 1) return points.front();
    std::size_t i;
    if (increasing)
        i = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    else
        i = static_cast<std::size_t>(
            std::upper_bound(times.begin(), times.end(), t, [](double a, double b) { return a > b; }) - times.begin());
    i = std::clamp<std::size_t>(i, 1, times.size() - 1);
    const double h = times[i] - times[i - 1];
    if (h == 0.0) return points[i];
    return hermite(node_at(*this, i - 1), node_at(*this, i), h, (t - times[i - 1]) / h);
}

Trajectory integrate(const VectorField& field, const Point& seed, Direction direction, const FlowControls& controls) {
    if (!(seed.norm() > field.sigma())) throw PreconditionError("integrate: seed must lie outside the excluded disk");
    const double sgn = direction == Direction::forward ? 1.0 : -1.0;

    Trajectory traj;
    traj.seed = seed;
    traj.direction = direction;

    auto rhs = [&](const State& x, State& dxdt, double) {
        const Vec2 v = field.evaluate_unchecked(Point(x[0], x[1]));
        dxdt[0] = sgn * v.x();
        dxdt[1] = sgn * v.y();
    };
    auto stepper = odeint::make_controlled(controls.abs_tol, controls.rel_tol, odeint::runge_kutta_dopri5<State>());

    State x{seed.x(), seed.y()};
    double tau = 0.0;
    double dt = controls.initial_step;
    field.evaluate(seed);
    push(traj, 0.0, make_node(field, seed));
    traj.terminal = Terminal::bounded;

    for (std::size_t steps = 0;; ++steps) {
        if (steps >= controls.max_steps) {
            traj.terminal = Terminal::step_failure;
            break;
        }
        if (tau >= controls.t_max) {
            traj.terminal = Terminal::bounded;
            break;
        }
        dt = std::min(dt, controls.t_max - tau);
        const State x_old = x;
        const double tau_old = tau;
        if (stepper.try_step(rhs, x, tau, dt) == odeint::fail) {
            if (dt < controls.min_step) {
                traj.terminal = Terminal::step_failure;
                break;
            }
            continue;
        }
        const Node n1 = make_node(field, Point(x[0], x[1]));
        if (!n1.p.allFinite() || !n1.v.allFinite() || !n1.a.allFinite()) {
            x = x_old;
            tau = tau_old;
            dt *= 0.5;
            if (dt < controls.min_step) {
                traj.terminal = Terminal::step_failure;
                break;
            }
            continue;
        }

        const Node n0 = node_at(traj, traj.size() - 1);
        const double t0 = traj.times.back();
        const double t1 = sgn * tau;
        const double h = t1 - t0;
        const double r = n1.p.norm();

        if (r < field.sigma()) {
            const double s = radius_crossing(n0, n1, h, field.sigma());
            Point q = hermite(n0, n1, h, s);
            while (q.norm() < field.sigma()) q *= 1.0 + 1e-15;
            push(traj, t0 + s * h, make_node(field, q));
            traj.terminal = Terminal::left_domain;
            break;
        }
        push(traj, t1, n1);
        if (r >= controls.r_max) {
            const double s = radius_crossing(n0, n1, h, controls.r_max);
            traj.terminal = Terminal::escaped;
            traj.r_exit = controls.r_max;
            traj.t_exit = t0 + s * h;
            break;
        }
    }
    return traj;
}

double EscapeLadder::rung(int k) const { return r0 * std::pow(factor, k); }

LimitVerdict classify_limit(const Trajectory& traj, const EscapeLadder& ladder) {
    LimitVerdict out;
    if (traj.size() == 0) return out;
    std::vector<double> rungs(static_cast<std::size_t>(std::max(ladder.rungs, 0)));
    for (int k = 0; k < ladder.rungs; ++k) rungs[static_cast<std::size_t>(k)] = ladder.rung(k);
    const int n = ladder.rungs;

    int crossed = 0;
    const double r_seed = traj.points.front().norm();
    while (crossed < n && r_seed >= rungs[static_cast<std::size_t>(crossed)]) {
        out.crossing_times.push_back(traj.times.front());
        ++crossed;
    }
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double r = traj.points[i].norm();
        out.max_radius = std::max(out.max_radius, r);
        while (crossed < n && r >= rungs[static_cast<std::size_t>(crossed)]) {
            double t = traj.times[i];
            if (i > 0) {
                const double r_prev = traj.points[i - 1].norm();
                const double w = (rungs[static_cast<std::size_t>(crossed)] - r_prev) / (r - r_prev);
                t = traj.times[i - 1] + std::clamp(w, 0.0, 1.0) * (traj.times[i] - traj.times[i - 1]);
            }
            out.crossing_times.push_back(t);
            ++crossed;
        }
        const double floor = crossed >= 2 ? rungs[static_cast<std::size_t>(crossed - 2)] : 0.0;
        if (r < floor) out.returned_below_rung = true;
    }
    out.rungs_crossed = crossed;
    out.final_radius = traj.points.back().norm();

    if (n > 0 && crossed == n && !out.returned_below_rung)
        out.kind = LimitKind::goes_to_infinity;
    else if (traj.terminal == Terminal::left_domain)
        out.kind = LimitKind::enters_inner_disk;
    else if (traj.terminal == Terminal::bounded && n > 0 && out.max_radius < rungs.front())
        out.kind = LimitKind::stays_bounded;
    else
        out.kind = LimitKind::inconclusive;
    return out;
}

UniquenessProbeReport semi_trajectory_uniqueness_probe(const VectorField& field, const Point& seed,
                                                       int n_perturbations, double delta, double t_window,
                                                       const FlowControls& controls) {
    if (!(seed.norm() > field.sigma() + delta))
        throw PreconditionError("uniqueness probe: seed must lie outside the excluded disk");
    if (n_perturbations < 1 || !(delta > 0.0) || !(t_window > 0.0))
        throw PreconditionError("uniqueness probe: need n_perturbations >= 1, delta > 0, t_window > 0");

    FlowControls c = controls;
    c.t_max = t_window;
    std::vector<Point> seeds{seed};
    for (int k = 0; k < n_perturbations; ++k) {
        const double th = 2.0 * M_PI * k / n_perturbations;
        seeds.emplace_back(seed + delta * Vec2(std::cos(th), std::sin(th)));
    }
    std::vector<Trajectory> trajs(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) { trajs[i] = integrate(field, seeds[i], Direction::forward, c); });

    double t_common = t_window;
    for (const auto& t : trajs) t_common = std::min(t_common, t.t_end());

    UniquenessProbeReport rep;
    rep.seed = seed;
    rep.delta = delta;
    rep.t_window = t_common;
    const int grid = 64;
    for (int i = 0; i <= grid; ++i) {
        const double t = t_common * i / grid;
        const Point z0 = trajs[0].at(t);
        double d = 0.0;
        for (std::size_t k = 1; k < trajs.size(); ++k) d = std::max(d, (trajs[k].at(t) - z0).norm());
        rep.times.push_back(t);
        rep.divergence.push_back(d);
        rep.max_divergence = std::max(rep.max_divergence, d);
    }

    for (const auto& p : trajs[0].points) {
        if (!field.in_domain(p)) continue;
        const Mat2 j = field.jacobian(p);
        const Mat2 m = j.transpose() * j;
        const double norm = std::sqrt(0.5 * (m.trace() + std::hypot(m(0, 0) - m(1, 1), 2.0 * m(0, 1))));
        rep.jacobian_bound = std::max(rep.jacobian_bound, norm);
    }

    double st = 0, sy = 0, stt = 0, sty = 0;
    int m = 0;
    for (std::size_t i = 1; i < rep.times.size(); ++i) {
        if (!(rep.divergence[i] > 0.0)) continue;
        const double y = std::log(rep.divergence[i] / delta);
        st += rep.times[i];
        sy += y;
        stt += rep.times[i] * rep.times[i];
        sty += rep.times[i] * y;
        ++m;
    }
    if (m >= 2 && m * stt - st * st > 0) rep.fitted_rate = (m * sty - st * sy) / (m * stt - st * st);

    rep.within_gronwall_bound = true;
    rep.contracting = true;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        const double bound = delta * std::exp(rep.jacobian_bound * rep.times[i]) * (1.0 + 1e-3) + 1e-12;
        if (rep.divergence[i] > bound) rep.within_gronwall_bound = false;
        if (i > 0 && rep.divergence[i] > rep.divergence[i - 1] * (1.0 + 1e-9)) rep.contracting = false;
    }
    return rep;
}

double closest_return(const Trajectory& traj, double departure) {
    double best = std::numeric_limits<double>::infinity();
    bool departed = false;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const double d = (traj.points[i] - traj.seed).norm();
        if (!departed) {
            departed = d > departure;
            continue;
        }
        best = std::min(best, d);
        const double seg = (traj.points[i] - traj.points[i - 1]).norm();
        if (std::min(d, (traj.points[i - 1] - traj.seed).norm()) > seg + departure) continue;
        const Node n0 = node_at(traj, i - 1), n1 = node_at(traj, i);
        const double h = traj.times[i] - traj.times[i - 1];
        auto dist = [&](double s) { return (hermite(n0, n1, h, s) - traj.seed).norm(); };
        int k_best = 0;
        for (int k = 0; k <= 32; ++k)
            if (dist(k / 32.0) < dist(k_best / 32.0)) k_best = k;
        double lo = std::max(0.0, (k_best - 1) / 32.0), hi = std::min(1.0, (k_best + 1) / 32.0);
        for (int it = 0; it < 100; ++it) {
            const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
            if (dist(m1) < dist(m2))
                hi = m2;
            else
                lo = m1;
        }
        best = std::min(best, dist(0.5 * (lo + hi)));
    }
    return best;
}

std::string to_string(Terminal t) {
    switch (t) {
        case Terminal::escaped: return "escaped";
        case Terminal::bounded: return "bounded";
        case Terminal::left_domain: return "left_domain";
        case Terminal::step_failure: return "step_failure";
    }
    return "unknown";
}

std::string to_string(LimitKind k) {
    switch (k) {
        case LimitKind::goes_to_infinity: return "goes_to_infinity";
        case LimitKind::stays_bounded: return "stays_bounded";
        case LimitKind::enters_inner_disk: return "enters_inner_disk";
        case LimitKind::inconclusive: return "inconclusive";
    }
    return "unknown";
}

std::string to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

}  // namespace horizon
