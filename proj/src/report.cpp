#include "horizon/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace horizon {

Json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

Json point_json(const Point& p) { return Json::array({num(p.x()), num(p.y())}); }

namespace {

Json mat_json(const Mat2& m) {
    return Json::array({Json::array({num(m(0, 0)), num(m(0, 1))}), Json::array({num(m(1, 0)), num(m(1, 1))})});
}

Json complex_json(const std::complex<double>& z) { return Json::array({num(z.real()), num(z.imag())}); }

Json violations(const std::vector<SpectrumViolation>& v, std::size_t cap) {
    Json out = Json::array();
    for (std::size_t i = 0; i < v.size() && i < cap; ++i)
        out.push_back({{"location", point_json(v[i].location)}, {"jacobian", mat_json(v[i].jacobian)}});
    return out;
}

Json numbers(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(num(x));
    return out;
}

}  // namespace

Json to_json(const Spectrum2<double>& s) {
    return {{"trace", num(s.trace)},
            {"det", num(s.det)},
            {"discriminant", num(s.discriminant)},
            {"complex_pair", s.complex_pair},
            {"eigenvalues", Json::array({complex_json(s.lambda1), complex_json(s.lambda2)})},
            {"hurwitz", s.hurwitz()},
            {"no_nonneg_real", s.no_nonneg_real()}};
}

Json to_json(const RegionSpectrumReport& r, std::size_t max_violations) {
    return {{"annulus", Json::array({num(r.r_min), num(r.r_max)})},
            {"samples", r.samples},
            {"hurwitz_all", r.hurwitz_all()},
            {"no_nonneg_real_all", r.no_nonneg_real_all()},
            {"det_positive_all", r.det_positive_all()},
            {"hurwitz_violation_count", r.hurwitz_violations.size()},
            {"no_nonneg_real_violation_count", r.no_nonneg_real_violations.size()},
            {"det_positive_violation_count", r.det_positive_violations.size()},
            {"hurwitz_violations", violations(r.hurwitz_violations, max_violations)},
            {"no_nonneg_real_violations", violations(r.no_nonneg_real_violations, max_violations)},
            {"det_positive_violations", violations(r.det_positive_violations, max_violations)},
            {"min_real_part", num(r.min_real_part)},
            {"max_real_part", num(r.max_real_part)}};
}

Json to_json(const Trajectory& t) {
    return {{"seed", point_json(t.seed)},
            {"direction", to_string(t.direction)},
            {"samples", t.size()},
            {"terminal", to_string(t.terminal)},
            {"t_end", num(t.t_end())},
            {"r_exit", num(t.r_exit)},
            {"t_exit", num(t.t_exit)},
            {"max_radius", num(t.max_radius())},
            {"end", t.points.empty() ? Json(nullptr) : point_json(t.points.back())}};
}

Json to_json(const LimitVerdict& v) {
    return {{"kind", to_string(v.kind)},
            {"rungs_crossed", v.rungs_crossed},
            {"crossing_times", numbers(v.crossing_times)},
            {"max_radius", num(v.max_radius)},
            {"final_radius", num(v.final_radius)},
            {"returned_below_rung", v.returned_below_rung}};
}

Json to_json(const UniquenessProbeReport& r) {
    return {{"seed", point_json(r.seed)},
            {"delta", num(r.delta)},
            {"t_window", num(r.t_window)},
            {"max_divergence", num(r.max_divergence)},
            {"fitted_rate", num(r.fitted_rate)},
            {"jacobian_bound", num(r.jacobian_bound)},
            {"within_gronwall_bound", r.within_gronwall_bound},
            {"contracting", r.contracting}};
}

Json to_json(const LeafArc& a) {
    return {{"level", num(a.level)},
            {"component", to_string(a.component)},
            {"points", a.points.size()},
            {"start", a.points.empty() ? Json(nullptr) : point_json(a.points.front())},
            {"end", a.points.empty() ? Json(nullptr) : point_json(a.points.back())},
            {"length", num(a.length())},
            {"end_low", to_string(a.end_low)},
            {"end_high", to_string(a.end_high)}};
}

Json to_json(const HalfReebReport& r) {
    Json det = Json::array();
    for (const auto& w : r.detected)
        det.push_back({{"level", num(w.level)},
                       {"window", numbers({w.window.x0, w.window.x1, w.window.y0, w.window.y1})},
                       {"edge_start", point_json(w.edge_start)},
                       {"edge_end", point_json(w.edge_end)},
                       {"edge_level", num(w.edge_level)},
                       {"tangency", point_json(w.tangency)},
                       {"tangency_level", num(w.tangency_level)},
                       {"edge_start_end", to_string(w.edge_start_end)},
                       {"edge_end_end", to_string(w.edge_end_end)},
                       {"escalation_rounds", w.escalation_rounds},
                       {"boundedness", to_string(w.boundedness)}});
    const Window& s = r.search_window;
    return {{"component", to_string(r.component)},
            {"search_window", numbers({s.x0, s.x1, s.y0, s.y1})},
            {"levels_scanned", r.levels_scanned.size()},
            {"none_found", r.none_found()},
            {"bounded_only", r.bounded_only()},
            {"detected", det}};
}

Json to_json(const ConvexityProbe& p) {
    return {{"convex", p.convex},
            {"touches_disk", p.touches_disk},
            {"levels", p.levels.size()},
            {"witness_level", p.witness_level ? num(*p.witness_level) : Json(nullptr)}};
}

Json to_json(const ClosedCurve& c) {
    return {{"kind", c.kind() == ClosedCurve::Kind::circle ? "circle" : "star_shaped"},
            {"center", point_json(c.center())},
            {"r0", num(c.base_radius())},
            {"cos", numbers(c.cos_coeffs())},
            {"sin", numbers(c.sin_coeffs())}};
}

Json to_json(const TangencyReport& r) {
    Json pts = Json::array();
    for (const auto& p : r.points)
        pts.push_back({{"theta", num(p.theta)},
                       {"position", point_json(p.position)},
                       {"level", num(p.level)},
                       {"normal_slope", num(p.normal_slope)},
                       {"class", to_string(p.klass)}});
    return {{"curve", to_json(r.curve)},
            {"jitter_retries", r.jitter_retries},
            {"n_ext", r.n_ext},
            {"n_int", r.n_int},
            {"n_degenerate", r.n_degenerate},
            {"index_formula", num(r.index_formula)},
            {"index_winding", r.index_winding},
            {"formula_holds", r.formula_holds},
            {"general_position", r.general_position},
            {"shared_leaf", r.shared_leaf},
            {"extremes_external", r.extremes_external},
            {"points", pts}};
}

Json to_json(const EtaSweepResult& r) {
    Json entries = Json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"radius", num(e.radius)},
                           {"n_int_min", e.n_int_min ? Json(*e.n_int_min) : Json(nullptr)},
                           {"curves_tried", e.curves_tried},
                           {"curves_general", e.curves_general}});
    return {{"family", to_string(r.family)},
            {"entries", entries},
            {"monotonicity_violations", r.monotonicity_violations},
            {"nondecreasing", r.nondecreasing()}};
}

Json to_json(const IndexEstimate& e) {
    return {{"kind", to_string(e.kind)},
            {"value", num(e.value)},
            {"radii", numbers(e.radii)},
            {"flux", numbers(e.flux)},
            {"area", numbers(e.area)},
            {"interior_contribution", num(e.interior_contribution)},
            {"growth_exponent", num(e.growth_exponent)},
            {"extrapolated", num(e.extrapolated)},
            {"max_discrepancy", num(e.max_discrepancy)},
            {"blend",
             {{"s", num(e.blend.s)},
              {"outer", num(e.blend.outer)},
              {"interior_scale", num(e.blend.interior_scale)},
              {"doublings", e.blend.doublings},
              {"seam_discrepancy", num(e.blend.seam_discrepancy)},
              {"seam_ok", e.blend.seam_ok},
              {"det_positive", e.blend.det_positive}}}};
}

Json to_json(const ExtensionProbeReport& r) {
    Json runs = Json::array();
    for (const auto& x : r.runs)
        runs.push_back({{"s", num(x.s)},
                        {"interior_scale", num(x.interior_scale)},
                        {"kind", to_string(x.estimate.kind)},
                        {"value", num(x.estimate.value)}});
    return {{"runs", runs}, {"max_discrepancy", num(r.max_discrepancy)}, {"kinds_agree", r.kinds_agree}};
}

Json to_json(const TransversalLadder& l) {
    Json rungs = Json::array();
    for (const auto& r : l.rungs)
        rungs.push_back({{"radius", num(r.radius)},
                         {"accepted", r.accepted()},
                         {"curve", r.curve ? to_json(*r.curve) : Json(nullptr)},
                         {"sign", r.sign},
                         {"min_normal", num(r.min_normal)},
                         {"margin", num(r.margin)},
                         {"searched", r.searched},
                         {"search_iterations", r.search_iterations}});
    return {{"v", point_json(l.v)},
            {"rungs", rungs},
            {"accepted_count", l.accepted_count()},
            {"usable", l.usable()},
            {"sign_coherent", l.sign_coherent()},
            {"sign", l.sign()}};
}

Json to_json(const InfinityVerdict& v) {
    return {{"verdict", to_string(v.verdict)},
            {"v", point_json(v.v)},
            {"ladder", to_json(v.ladder)},
            {"escape",
             {{"seeds", v.escape.seeds},
              {"forward_escapes", v.escape.forward_escapes},
              {"backward_escapes", v.escape.backward_escapes},
              {"forward_fraction", num(v.escape.forward_fraction())},
              {"backward_fraction", num(v.escape.backward_fraction())}}},
            {"periodicity_flag", v.periodicity_flag},
            {"min_return_distance", num(v.min_return_distance)},
            {"index", {{"kind", to_string(v.index.kind)}, {"value", num(v.index.value)}}},
            {"index_sign_consistent", v.index_sign_consistent},
            {"reason", v.reason}};
}

Json to_json(const ArcIntegralReport& r) {
    return {{"check", r.check},
            {"arc", to_json(r.arc)},
            {"lhs", num(r.lhs)},
            {"rhs", num(r.rhs)},
            {"slack", num(r.slack)},
            {"threshold", num(r.threshold)},
            {"passed", r.passed},
            {"span", num(r.span)},
            {"baseline", num(r.baseline)},
            {"pieces", r.pieces},
            {"spectrum_ok", r.spectrum_ok}};
}

Json to_json(const FluxBatchReport& r) {
    std::size_t failed = 0;
    for (const auto& a : r.arcs) failed += a.passed ? 0 : 1;
    Json arcs = Json::array();
    for (const auto& a : r.arcs)
        arcs.push_back({{"p", point_json(a.arc.points.front())},
                        {"q", point_json(a.arc.points.back())},
                        {"lhs", num(a.lhs)},
                        {"rhs", num(a.rhs)},
                        {"slack", num(a.slack)},
                        {"passed", a.passed}});
    return {{"variant", to_string(r.variant)},
            {"reflected", r.reflected},
            {"arcs_tested", r.arcs.size()},
            {"failed", failed},
            {"all_passed", r.all_passed()},
            {"min_relative_slack", num(r.min_relative_slack)},
            {"arcs", arcs}};
}

Json to_json(const GreenBatchReport& r) {
    Json regions = Json::array();
    for (const auto& x : r.regions) regions.push_back(to_json(x));
    return {{"regions", regions},
            {"degenerate", r.degenerate},
            {"max_relative_error", num(r.max_relative_error)},
            {"all_passed", r.all_passed()}};
}

Json to_json(const VerticalRayReport& r) {
    Json entries = Json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"seed", point_json(e.seed)},
                           {"plus_hit", e.plus.hit},
                           {"plus_closest", num(e.plus.closest)},
                           {"plus_end", to_string(e.plus.end)},
                           {"minus_hit", e.minus.hit},
                           {"minus_closest", num(e.minus.closest)},
                           {"minus_end", to_string(e.minus.end)},
                           {"spectrum_ok", e.spectrum_ok}});
    return {{"entries", entries},
            {"seeds", r.entries.size()},
            {"hits", r.hits},
            {"skipped", r.skipped},
            {"min_closest", num(r.min_closest)},
            {"passed", r.passed()}};
}

Json to_json(const InjectivityScanReport& r) {
    Json cols = Json::array();
    for (const auto& c : r.collisions)
        cols.push_back({{"p", point_json(c.p)}, {"q", point_json(c.q)}, {"image_gap", num(c.image_gap)}});
    return {{"s", num(r.s)},
            {"r_max", num(r.r_max)},
            {"pairs_tested", r.pairs_tested},
            {"samples_hashed", r.samples_hashed},
            {"candidates", r.candidates},
            {"collision_count", r.collision_count},
            {"collisions", cols},
            {"image_scale", num(r.image_scale)},
            {"passed", r.passed}};
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void CsvTable::add(const std::vector<std::string>& row) {
    if (row.size() != header_.size()) throw PreconditionError("CsvTable: row width differs from the header");
    rows_.push_back(row);
}

void CsvTable::add_numbers(const std::vector<double>& row) {
    std::vector<std::string> s;
    s.reserve(row.size());
    for (double v : row) s.push_back(format_number(v));
    add(s);
}

std::string CsvTable::str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
}

void CsvTable::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PreconditionError("cannot write " + path);
    out << str();
}

CsvTable trajectory_csv(const Trajectory& t) {
    CsvTable c({"t", "x", "y", "r"});
    for (std::size_t i = 0; i < t.size(); ++i)
        c.add_numbers({t.times[i], t.points[i].x(), t.points[i].y(), t.points[i].norm()});
    return c;
}

CsvTable polyline_csv(const std::vector<Point>& pts) {
    CsvTable c({"i", "x", "y"});
    for (std::size_t i = 0; i < pts.size(); ++i) c.add_numbers({double(i), pts[i].x(), pts[i].y()});
    return c;
}

CsvTable tangency_points_csv(const TangencyReport& r) {
    CsvTable c({"theta", "x", "y", "class"});
    for (const auto& p : r.points)
        c.add({format_number(p.theta), format_number(p.position.x()), format_number(p.position.y()),
               to_string(p.klass)});
    return c;
}

CsvTable index_ladder_csv(const IndexEstimate& e) {
    CsvTable c({"radius", "flux", "area"});
    for (std::size_t i = 0; i < e.radii.size(); ++i) c.add_numbers({e.radii[i], e.flux[i], e.area[i]});
    return c;
}

CsvTable ladder_curves_csv(const TransversalLadder& l, int samples) {
    CsvTable c({"rung", "theta", "x", "y"});
    for (std::size_t k = 0; k < l.rungs.size(); ++k) {
        if (!l.rungs[k].curve) continue;
        for (int i = 0; i < samples; ++i) {
            const double t = 2.0 * M_PI * i / samples;
            const Point p = l.rungs[k].curve->point(t);
            c.add_numbers({double(k), t, p.x(), p.y()});
        }
    }
    return c;
}

CsvTable failing_arcs_csv(const std::vector<ArcIntegralReport>& arcs) {
    CsvTable c({"arc", "i", "x", "y", "check", "slack"});
    for (std::size_t k = 0; k < arcs.size(); ++k) {
        if (arcs[k].passed) continue;
        const auto& pts = arcs[k].arc.points;
        for (std::size_t i = 0; i < pts.size(); ++i)
            c.add({std::to_string(k), std::to_string(i), format_number(pts[i].x()), format_number(pts[i].y()),
                   arcs[k].check, format_number(arcs[k].slack)});
    }
    return c;
}

void write_json(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PreconditionError("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace horizon
