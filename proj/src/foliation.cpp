#include "horizon/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "horizon/parallel.hpp"

namespace horizon {

std::string to_string(LeafComponent c) { return c == LeafComponent::f ? "f" : "g"; }

std::string to_string(LeafEnd e) {
    switch (e) {
        case LeafEnd::length_budget: return "length_budget";
        case LeafEnd::window_exit: return "window_exit";
        case LeafEnd::inner_disk: return "inner_disk";
        case LeafEnd::closed: return "closed";
    }
    return "unknown";
}

std::string to_string(Boundedness b) {
    switch (b) {
        case Boundedness::bounded: return "bounded";
        case Boundedness::unbounded: return "unbounded";
        case Boundedness::unknown: return "unknown";
    }
    return "unknown";
}

double leaf_value(const VectorField& field, LeafComponent c, const Point& p) {
    const Vec2 v = field.evaluate_unchecked(p);
    return c == LeafComponent::f ? v.x() : v.y();
}

double transverse_value(const VectorField& field, LeafComponent c, const Point& p) {
    const Vec2 v = field.evaluate_unchecked(p);
    return c == LeafComponent::f ? v.y() : v.x();
}

Vec2 leaf_gradient(const VectorField& field, LeafComponent c, const Point& p) {
    const Mat2 j = field.jacobian_unchecked(p);
    return c == LeafComponent::f ? Vec2(j.row(0).transpose()) : Vec2(j.row(1).transpose());
}

Vec2 leaf_direction(const VectorField& field, LeafComponent c, const Point& p) {
    const Vec2 grad = leaf_gradient(field, c, p);
    return c == LeafComponent::f ? Vec2(-grad.y(), grad.x()) : Vec2(grad.y(), -grad.x());
}

namespace {

constexpr double kGradFloor = 1e-12;

double auto_step(const LeafControls& controls, const Point& start) {
    if (controls.step > 0.0) return controls.step;
    if (controls.window) return 2e-3 * controls.window->diagonal();
    return 2e-3 * (1.0 + start.norm());
}

Vec2 unit_direction(const VectorField& field, LeafComponent c, const Point& p, int sign) {
    const Vec2 d = leaf_direction(field, c, p);
    const double n = d.norm();
    if (!(n >= kGradFloor)) throw NumericError("leaf tracing: vanishing gradient");
    return (sign / n) * d;
}

// Newton steps along the gradient back onto {F = level}.
bool project(const VectorField& field, LeafComponent c, double level, Point& q, double tol) {
    for (int it = 0; it < 6; ++it) {
        const double r = leaf_value(field, c, q) - level;
        if (std::abs(r) <= 1e-3 * tol) return true;
        const Vec2 g = leaf_gradient(field, c, q);
        const double g2 = g.squaredNorm();
        if (!(g2 >= kGradFloor * kGradFloor)) throw NumericError("leaf tracing: vanishing gradient");
        q -= (r / g2) * g;
        if (!q.allFinite()) return false;
    }
    return std::abs(leaf_value(field, c, q) - level) <= tol;
}

// Closest approach of the chord [p, q] to the origin.
double chord_distance_to_origin(const Point& p, const Point& q) {
    const Vec2 d = q - p;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) return p.norm();
    const double t = std::clamp(-p.dot(d) / len2, 0.0, 1.0);
    return (p + t * d).norm();
}

}  // namespace

HalfLeaf trace_half_leaf(const VectorField& field, const Point& start, LeafComponent c, int sign,
                         const LeafControls& controls) {
    if (!(start.norm() > field.sigma())) throw PreconditionError("trace_leaf: start must lie outside the excluded disk");
    const double level = leaf_value(field, c, start);
    const double tol = controls.leaf_tol(level);
    unit_direction(field, c, start, sign);

    HalfLeaf out;
    out.points.push_back(start);
    double h = auto_step(controls, start);
    const double h_min = h * 1e-6;
    double traveled = 0.0;
    Point p = start;
    out.end = LeafEnd::length_budget;
    while (traveled < controls.max_length) {
        // Shorter steps close to the disk, so a leaf that dips into it is not stepped over.
        const double h_near = std::clamp(0.5 * (p.norm() - field.sigma()), 1e-3 * h, h);
        const double h_step = h;
        h = h_near;
        const Vec2 k1 = unit_direction(field, c, p, sign);
        const Vec2 k2 = unit_direction(field, c, p + 0.5 * h * k1, sign);
        const Vec2 k3 = unit_direction(field, c, p + 0.5 * h * k2, sign);
        const Vec2 k4 = unit_direction(field, c, p + h * k3, sign);
        Point q = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        h = h_step;
        if (!project(field, c, level, q, tol) || (q - p).norm() > 2.0 * h_near) {
            h *= 0.5;
            if (h < h_min) throw NumericError("leaf tracing: projection onto the level set failed");
            continue;
        }
        if (chord_distance_to_origin(p, q) < field.sigma()) {
            out.end = LeafEnd::inner_disk;
            break;
        }
        if (controls.window && !controls.window->contains(q)) {
            out.end = LeafEnd::window_exit;
            break;
        }
        traveled += (q - p).norm();
        out.points.push_back(q);
        p = q;
        if (traveled > 4.0 * h && (q - start).norm() < 0.75 * h) {
            out.points.push_back(start);
            out.end = LeafEnd::closed;
            break;
        }
    }
    return out;
}

double LeafArc::length() const {
    double s = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) s += (points[i] - points[i - 1]).norm();
    return s;
}

double LeafArc::max_residual(const VectorField& field) const {
    double r = 0.0;
    for (const auto& p : points) r = std::max(r, std::abs(leaf_value(field, component, p) - level));
    return r;
}

double LeafArc::min_transverse_increment() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < transverse.size(); ++i) m = std::min(m, transverse[i] - transverse[i - 1]);
    return m;
}

LeafArc trace_leaf(const VectorField& field, const Point& start, LeafComponent c, const LeafControls& controls) {
    const HalfLeaf fwd = trace_half_leaf(field, start, c, +1, controls);
    const HalfLeaf bwd = trace_half_leaf(field, start, c, -1, controls);

    LeafArc arc;
    arc.level = leaf_value(field, c, start);
    arc.component = c;
    arc.points.assign(bwd.points.rbegin(), bwd.points.rend());
    arc.start_index = arc.points.size() - 1;
    if (fwd.end == LeafEnd::closed) {
        // The forward pass already went all the way round.
        arc.points.assign(fwd.points.begin(), fwd.points.end());
        arc.start_index = 0;
    } else {
        arc.points.insert(arc.points.end(), fwd.points.begin() + 1, fwd.points.end());
    }
    arc.end_low = fwd.end == LeafEnd::closed ? LeafEnd::closed : bwd.end;
    arc.end_high = fwd.end;
    for (const auto& p : arc.points) arc.transverse.push_back(transverse_value(field, c, p));
    if (arc.transverse.size() > 1 && arc.transverse.back() < arc.transverse.front()) {
        std::reverse(arc.points.begin(), arc.points.end());
        std::reverse(arc.transverse.begin(), arc.transverse.end());
        arc.start_index = arc.points.size() - 1 - arc.start_index;
        std::swap(arc.end_low, arc.end_high);
    }
    return arc;
}

LevelSetScan level_components(const VectorField& field, double level, const Window& window, const GridSpec& grid,
                              LeafComponent c) {
    if (window.max_radius() < field.sigma()) throw PreconditionError("level_components: window lies inside the excluded disk");
    LevelSetScan scan;
    scan.window = window;
    scan.level = level;
    scan.components = contour_components([&](const Point& p) { return leaf_value(field, c, p); }, level, window, grid,
                                         [&](const Point& p) { return field.in_domain(p); });
    return scan;
}

bool HalfReebReport::bounded_only() const {
    return std::all_of(detected.begin(), detected.end(),
                       [](const HalfReebWitness& w) { return w.boundedness == Boundedness::bounded; });
}

namespace {

void collect_piece_critical(const std::vector<double>& v, std::vector<double>& out) {
    // v holds samples along one boundary piece; NaN marks points inside the disk.
    std::size_t i = 0;
    while (i < v.size()) {
        while (i < v.size() && std::isnan(v[i])) ++i;
        std::size_t j = i;
        while (j < v.size() && !std::isnan(v[j])) ++j;
        if (j > i) {
            out.push_back(v[i]);
            out.push_back(v[j - 1]);
            for (std::size_t k = i + 1; k + 1 < j; ++k)
                if ((v[k] >= v[k - 1] && v[k] >= v[k + 1]) || (v[k] <= v[k - 1] && v[k] <= v[k + 1])) out.push_back(v[k]);
        }
        i = j;
    }
}

}  // namespace

std::vector<double> candidate_levels(const VectorField& field, LeafComponent c, const Window& window, int uniform) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto value = [&](const Point& p) { return field.in_domain(p) ? leaf_value(field, c, p) : nan; };
    std::vector<double> crit;
    const int n = 1024;
    const Point corners[4] = {{window.x0, window.y0}, {window.x1, window.y0}, {window.x1, window.y1}, {window.x0, window.y1}};
    for (int e = 0; e < 4; ++e) {
        std::vector<double> v(n + 1);
        for (int k = 0; k <= n; ++k) v[static_cast<std::size_t>(k)] = value(corners[e] + (corners[(e + 1) % 4] - corners[e]) * (double(k) / n));
        collect_piece_critical(v, crit);
    }
    if (window.min_radius() <= field.sigma()) {
        const int m = 4096;
        const double r = field.sigma() * (1.0 + 1e-9);
        std::vector<double> v(m + 1);
        for (int k = 0; k <= m; ++k) {
            const double th = 2.0 * M_PI * k / m;
            const Point p(r * std::cos(th), r * std::sin(th));
            v[static_cast<std::size_t>(k)] = window.contains(p) ? leaf_value(field, c, p) : nan;
        }
        collect_piece_critical(v, crit);
    }
    std::sort(crit.begin(), crit.end());
    std::vector<double> distinct;
    for (double x : crit)
        if (distinct.empty() || x - distinct.back() > 1e-12 * (1.0 + std::abs(x))) distinct.push_back(x);

    std::vector<double> levels;
    for (std::size_t i = 1; i < distinct.size(); ++i) levels.push_back(0.5 * (distinct[i - 1] + distinct[i]));
    const std::size_t cap = 96;
    if (levels.size() > cap) {
        std::vector<double> thin;
        for (std::size_t k = 0; k < cap; ++k) thin.push_back(levels[k * levels.size() / cap]);
        levels = std::move(thin);
    }

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const int g = 129;
    for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) {
            const double x = value({window.x0 + window.width() * i / (g - 1), window.y0 + window.height() * j / (g - 1)});
            if (std::isnan(x)) continue;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    if (hi > lo)
        for (int k = 0; k < uniform; ++k) levels.push_back(lo + (k + 0.5) / uniform * (hi - lo));
    std::sort(levels.begin(), levels.end());
    return levels;
}

namespace {

double min_distance_to(const ContourComponent& comp, const Point& q) {
    const double dx = std::max({comp.bbox.x0 - q.x(), 0.0, q.x() - comp.bbox.x1});
    const double dy = std::max({comp.bbox.y0 - q.y(), 0.0, q.y() - comp.bbox.y1});
    const double outside = std::hypot(dx, dy);
    if (outside > 0.0) return outside;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : comp.points) best = std::min(best, (p - q).norm());
    return best;
}

// Whether the leaf through component a reaches component b outside the window.
bool same_leaf(const VectorField& field, LeafComponent c, const ContourComponent& a, const ContourComponent& b,
               const Window& window, double tol) {
    LeafControls lc;
    lc.window = window.scaled(4.0);
    lc.step = window.diagonal() / 1000.0;
    lc.max_length = 8.0 * (window.width() + window.height());
    const Point start = a.points[a.points.size() / 2];
    if (!(start.norm() > field.sigma())) return false;
    for (int sign : {+1, -1}) {
        const HalfLeaf h = trace_half_leaf(field, start, c, sign, lc);
        for (const auto& p : h.points)
            if (min_distance_to(b, p) < tol) return true;
    }
    return false;
}

// Whether the leaf through the middle of a runs into the excluded disk near the window.
bool leaf_meets_disk(const VectorField& field, LeafComponent c, const ContourComponent& a, const Window& window) {
    LeafControls lc;
    lc.window = window.scaled(4.0);
    lc.step = window.diagonal() / 1000.0;
    lc.max_length = 8.0 * (window.width() + window.height());
    const Point start = a.points[a.points.size() / 2];
    if (!(start.norm() > field.sigma())) return true;
    for (int sign : {+1, -1})
        if (trace_half_leaf(field, start, c, sign, lc).end == LeafEnd::inner_disk) return true;
    return false;
}

std::vector<Point> thin_out(const std::vector<Point>& pts, std::size_t cap) {
    if (pts.size() <= cap) return pts;
    std::vector<Point> out;
    for (std::size_t k = 0; k < cap; ++k) out.push_back(pts[k * (pts.size() - 1) / (cap - 1)]);
    return out;
}

struct CompactEdge {
    Point p, q, m;
    double fm;
};

// Shortest segment p in A, q in B avoiding the disk along which F - level is
// one-signed with a single interior extremum.
std::optional<CompactEdge> find_compact_edge(const VectorField& field, LeafComponent c, double level,
                                             const ContourComponent& a, const ContourComponent& b, int max_candidates) {
    const std::vector<Point> pa = thin_out(a.points, 160), pb = thin_out(b.points, 160);
    struct Pair {
        double len;
        std::size_t i, j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(pa.size() * pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pb.size(); ++j) pairs.push_back({(pa[i] - pb[j]).norm(), i, j});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        return x.len < y.len || (x.len == y.len && (x.i < y.i || (x.i == y.i && x.j < y.j)));
    });
    const int samples = 64;
    const double floor = 1e-12 * (1.0 + std::abs(level));
    int tried = 0;
    for (const Pair& pr : pairs) {
        if (tried++ >= max_candidates) break;
        const Point p = pa[pr.i], q = pb[pr.j];
        if (pr.len <= 0.0 || chord_distance_to_origin(p, q) <= field.sigma() * (1.0 + 1e-9)) continue;
        std::vector<double> w(samples + 1);
        bool ok = true;
        for (int k = 1; k < samples && ok; ++k) {
            w[static_cast<std::size_t>(k)] = leaf_value(field, c, p + (double(k) / samples) * (q - p)) - level;
            ok = std::abs(w[static_cast<std::size_t>(k)]) > floor;
        }
        if (!ok) continue;
        const double s = w[1] > 0 ? 1.0 : -1.0;
        for (int k = 1; k < samples && ok; ++k) ok = s * w[static_cast<std::size_t>(k)] > 0;
        if (!ok) continue;
        // Unimodal: s*w rises then falls with exactly one turn.
        int turns = 0;
        int kmax = 1;
        for (int k = 2; k < samples; ++k) {
            if (s * w[static_cast<std::size_t>(k)] > s * w[static_cast<std::size_t>(kmax)]) kmax = k;
            if (k + 1 < samples) {
                const double d0 = s * (w[static_cast<std::size_t>(k)] - w[static_cast<std::size_t>(k - 1)]);
                const double d1 = s * (w[static_cast<std::size_t>(k + 1)] - w[static_cast<std::size_t>(k)]);
                if (d0 > 0 && d1 < 0) ++turns;
                if (d0 < 0 && d1 > 0) turns += 2;
            }
        }
        if (turns != 1) continue;
        double lo = double(kmax - 1) / samples, hi = double(kmax + 1) / samples;
        auto val = [&](double t) { return s * (leaf_value(field, c, p + t * (q - p)) - level); };
        for (int it = 0; it < 80; ++it) {
            const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
            if (val(m1) < val(m2))
                lo = m1;
            else
                hi = m2;
        }
        const Point m = p + 0.5 * (lo + hi) * (q - p);
        return CompactEdge{p, q, m, leaf_value(field, c, m)};
    }
    return std::nullopt;
}

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
    auto orient = [](const Point& p, const Point& q, const Point& r) {
        const Vec2 u = q - p, v = r - p;
        return u.x() * v.y() - u.y() * v.x();
    };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

// Point on [a, b] where F equals level, assuming F - level changes sign there.
Point level_crossing(const VectorField& field, LeafComponent c, const Point& a, const Point& b, double level) {
    double lo = 0.0, hi = 1.0;
    const bool a_pos = leaf_value(field, c, a) >= level;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((leaf_value(field, c, a + mid * (b - a)) >= level) == a_pos)
            lo = mid;
        else
            hi = mid;
    }
    return a + 0.5 * (lo + hi) * (b - a);
}

std::optional<HalfReebWitness> examine_level(const VectorField& field, LeafComponent c, double level,
                                             const Window& window, const HalfReebControls& controls) {
    const LevelSetScan scan = level_components(field, level, window, controls.grid, c);
    const auto& comps = scan.components;
    if (comps.size() < 2) return std::nullopt;
    const double cell = std::max(window.width() / (controls.grid.nx - 1), window.height() / (controls.grid.ny - 1));
    const std::size_t n = std::min<std::size_t>(comps.size(), 12);
    for (std::size_t ia = 0; ia < n; ++ia) {
        for (std::size_t ib = ia + 1; ib < n; ++ib) {
            if (comps[ia].points.size() < 2 || comps[ib].points.size() < 2) continue;
            const auto edge = find_compact_edge(field, c, level, comps[ia], comps[ib], controls.max_edge_candidates);
            if (!edge) continue;
            if (same_leaf(field, c, comps[ia], comps[ib], window, 2.0 * cell)) continue;

            HalfReebWitness w;
            w.level = level;
            w.window = window;
            w.tangency = edge->m;
            w.tangency_level = edge->fm;

            // Leaves crossing the edge near its extremum turn back on the side
            // against the gradient at a maximum, along it at a minimum.
            const Vec2 d = edge->q - edge->p;
            const Vec2 normal = Vec2(-d.y(), d.x()).normalized();
            const double s_ext = edge->fm > level ? 1.0 : -1.0;
            const double s_grad = leaf_gradient(field, c, edge->m).dot(normal) >= 0 ? 1.0 : -1.0;
            const Vec2 inward = -s_ext * s_grad * normal;
            auto inward_sign = [&](const Point& p) { return leaf_direction(field, c, p).dot(inward) >= 0 ? +1 : -1; };
            auto level_at = [&](double lambda) { return level + lambda * (edge->fm - level); };

            bool exits_everywhere = true;
            bool traced = false;
            for (int round = 0; round <= controls.escalation_rounds; ++round) {
                const Window big = window.scaled(std::pow(2.0, round));
                LeafControls lc;
                lc.window = big;
                lc.step = window.diagonal() / 2000.0;
                lc.max_length = 4.0 * (big.width() + big.height());

                // Leaf from the crossing near p returns to the edge: a U-turn.
                auto u_turn = [&](double lambda) {
                    const Point a1 = level_crossing(field, c, edge->p, edge->m, level_at(lambda));
                    const HalfLeaf h = trace_half_leaf(field, a1, c, inward_sign(a1), lc);
                    for (std::size_t k = 2; k < h.points.size(); ++k)
                        if (segments_cross(h.points[k - 1], h.points[k], edge->p, edge->q)) return true;
                    return false;
                };
                double lo = 0.0, hi = 0.999;
                if (!u_turn(hi)) {
                    exits_everywhere = false;
                    continue;
                }
                for (int it = 0; it < 30; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (u_turn(mid))
                        hi = mid;
                    else
                        lo = mid;
                }
                // The non-compact edges are the limiting leaves just outside the U-turn range.
                const double edge_level = level_at(std::max(0.0, lo - 1e-6));
                const Point a1 = level_crossing(field, c, edge->p, edge->m, edge_level);
                const Point a2 = level_crossing(field, c, edge->m, edge->q, edge_level);
                const HalfLeaf e1 = trace_half_leaf(field, a1, c, inward_sign(a1), lc);
                const HalfLeaf e2 = trace_half_leaf(field, a2, c, inward_sign(a2), lc);
                traced = true;
                w.edge_level = edge_level;
                w.edge_start = a1;
                w.edge_end = a2;
                w.edge_start_end = e1.end;
                w.edge_end_end = e2.end;
                w.escalation_rounds = round;
                auto stops = [](LeafEnd e) { return e == LeafEnd::inner_disk || e == LeafEnd::closed; };
                if (stops(e1.end) && stops(e2.end)) {
                    w.boundedness = Boundedness::bounded;
                    break;
                }
                if (e1.end != LeafEnd::window_exit && e2.end != LeafEnd::window_exit) exits_everywhere = false;
            }
            if (!traced) continue;  // no U-turning leaves: not a half-Reeb pattern
            if (w.boundedness != Boundedness::bounded && exits_everywhere) w.boundedness = Boundedness::unbounded;
            return w;
        }
    }
    return std::nullopt;
}

}  // namespace

HalfReebReport detect_half_reeb(const VectorField& field, LeafComponent c, const Window& search_window,
                                const HalfReebControls& controls) {
    if (search_window.max_radius() < field.sigma())
        throw PreconditionError("detect_half_reeb: search window lies inside the excluded disk");
    HalfReebReport report;
    report.component = c;
    report.search_window = search_window;
    report.levels_scanned = candidate_levels(field, c, search_window, controls.uniform_levels);

    std::vector<std::optional<HalfReebWitness>> found(report.levels_scanned.size());
    parallel_for(found.size(), [&](std::size_t i) {
        found[i] = examine_level(field, c, report.levels_scanned[i], search_window, controls);
    });
    for (auto& w : found) {
        if (!w) continue;
        if (report.detected.size() >= controls.max_witnesses) break;
        report.detected.push_back(*w);
    }
    return report;
}

ConvexityProbe vertical_convexity_probe(const VectorField& field, const LeafArc& leaf, Side side, const Window& window,
                                        const GridSpec& grid, int n_levels) {
    if (leaf.points.empty()) throw PreconditionError("vertical_convexity_probe: empty leaf");
    const LeafComponent c = leaf.component;
    const double sgn = side == Side::plus ? 1.0 : -1.0;
    const int nx = grid.nx, ny = grid.ny;
    const double dx = window.width() / (nx - 1), dy = window.height() / (ny - 1);
    auto node = [&](int i, int j) { return Point(window.x0 + i * dx, window.y0 + j * dy); };
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };

    std::vector<double> val(static_cast<std::size_t>(nx) * ny);
    std::vector<char> ok(val.size(), 0), in_disk(val.size(), 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Point p = node(i, j);
            if (!field.in_domain(p)) {
                in_disk[idx(i, j)] = 1;
                continue;
            }
            val[idx(i, j)] = leaf_value(field, c, p);
            ok[idx(i, j)] = sgn * (val[idx(i, j)] - leaf.level) > 0;
        }

    // Flood fill from nodes next to the leaf on the requested side.
    std::vector<char> region(val.size(), 0);
    std::deque<std::pair<int, int>> queue;
    for (const auto& p : leaf.points) {
        if (!window.contains(p)) continue;
        const int i0 = static_cast<int>(std::floor((p.x() - window.x0) / dx));
        const int j0 = static_cast<int>(std::floor((p.y() - window.y0) / dy));
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di) {
                const int i = std::clamp(i0 + di, 0, nx - 1), j = std::clamp(j0 + dj, 0, ny - 1);
                if (ok[idx(i, j)] && !region[idx(i, j)]) {
                    region[idx(i, j)] = 1;
                    queue.emplace_back(i, j);
                }
            }
    }
    ConvexityProbe probe;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    while (!queue.empty()) {
        const auto [i, j] = queue.front();
        queue.pop_front();
        lo = std::min(lo, val[idx(i, j)]);
        hi = std::max(hi, val[idx(i, j)]);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int a = i + di[k], b = j + dj[k];
            if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
            if (in_disk[idx(a, b)]) probe.touches_disk = true;
            if (ok[idx(a, b)] && !region[idx(a, b)]) {
                region[idx(a, b)] = 1;
                queue.emplace_back(a, b);
            }
        }
    }
    if (!(hi >= lo)) return probe;

    auto valid = [&](const Point& p) {
        const int i = static_cast<int>(std::lround((p.x() - window.x0) / dx));
        const int j = static_cast<int>(std::lround((p.y() - window.y0) / dy));
        if (i < 0 || j < 0 || i >= nx || j >= ny) return false;
        return region[idx(i, j)] != 0;
    };
    const double far = side == Side::plus ? hi : lo;
    const double cell = std::max(dx, dy);
    for (int k = 1; k <= n_levels; ++k) {
        const double level = leaf.level + (far - leaf.level) * k / (n_levels + 1.0);
        probe.levels.push_back(level);
        const auto comps = contour_components([&](const Point& p) { return leaf_value(field, c, p); }, level, window,
                                              grid, valid);
        bool split = false;
        for (std::size_t a = 0; a < comps.size() && !split; ++a)
            for (std::size_t b = a + 1; b < comps.size() && !split; ++b) {
                if (same_leaf(field, c, comps[a], comps[b], window, 2.0 * cell)) continue;
                // A level cut by the hole is disconnected in the domain but says
                // nothing about a hole-free half-plane.
                if (leaf_meets_disk(field, c, comps[a], window) || leaf_meets_disk(field, c, comps[b], window)) {
                    probe.touches_disk = true;
                    continue;
                }
                split = true;
            }
        if (split) {
            probe.convex = false;
            probe.witness_level = level;
            break;
        }
    }
    return probe;
}

}  // namespace horizon
