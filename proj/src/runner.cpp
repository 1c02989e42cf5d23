#include "horizon/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "horizon/expr.hpp"
#include "horizon/registry.hpp"

namespace horizon {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
    return parts;
}

double parse_double(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    double out = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(out))
        throw ConfigError("config key '" + key + "': expected a finite number, got '" + v + "'");
    return out;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v, Int min_value) {
    const std::string t = trim(v);
    Int out{};
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() || out < min_value)
        throw ConfigError("config key '" + key + "': expected an integer >= " + std::to_string(min_value) +
                          ", got '" + v + "'");
    return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& part : split(v, ',')) out.push_back(parse_double(key, part));
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

std::vector<double> parse_fixed(const std::string& key, const std::string& v, std::size_t n) {
    auto xs = parse_list(key, v);
    if (xs.size() != n)
        throw ConfigError("config key '" + key + "': expected " + std::to_string(n) + " comma-separated numbers");
    return xs;
}

double positive(const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError("config key '" + key + "': must be positive");
    return v;
}

double nonnegative(const std::string& key, double v) {
    if (v < 0.0) throw ConfigError("config key '" + key + "': must be nonnegative (0 = automatic)");
    return v;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += format_number(xs[i]);
    }
    return s;
}

bool is_auto(const std::string& v) { return trim(v) == "auto"; }

struct KeyHandler {
    ConfigKey key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<KeyHandler>& handlers() {
    static const std::vector<KeyHandler> table = [] {
        std::vector<KeyHandler> t;
        auto add = [&t](std::string name, std::string help, std::function<void(RunConfig&, const std::string&)> set,
                        std::function<std::string(const RunConfig&)> get) {
            t.push_back({{std::move(name), std::move(help)}, std::move(set), std::move(get)});
        };
        add("subcommand", "spectrum | flow | foliation | tangency | index | classify | verify | all",
            [](RunConfig& c, const std::string& v) {
                const auto& subs = subcommands();
                if (std::find(subs.begin(), subs.end(), trim(v)) == subs.end())
                    throw ConfigError("config key 'subcommand': unknown subcommand '" + v + "'");
                c.subcommand = trim(v);
            },
            [](const RunConfig& c) { return c.subcommand; });
        add("field", "registry field name",
            [](RunConfig& c, const std::string& v) { c.field.name = trim(v); },
            [](const RunConfig& c) { return c.field.name; });
        add("f-expr", "first component as an expression in x, y",
            [](RunConfig& c, const std::string& v) { c.field.f_expr = trim(v); },
            [](const RunConfig& c) { return c.field.f_expr; });
        add("g-expr", "second component as an expression in x, y",
            [](RunConfig& c, const std::string& v) { c.field.g_expr = trim(v); },
            [](const RunConfig& c) { return c.field.g_expr; });
        add("sigma", "radius of the excluded disk for expression fields",
            [](RunConfig& c, const std::string& v) { c.field.sigma = nonnegative("sigma", parse_double("sigma", v)); },
            [](const RunConfig& c) { return format_number(c.field.sigma); });
        add("jacobian", "analytic | fd (expression fields)",
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                if (t != "analytic" && t != "fd") throw ConfigError("config key 'jacobian': expected analytic or fd");
                c.field.jacobian = t;
            },
            [](const RunConfig& c) { return c.field.jacobian; });
        add("epsilon", "registry parameter; bound to eps in expressions (auto = default)",
            [](RunConfig& c, const std::string& v) {
                c.field.epsilon = is_auto(v) ? std::numeric_limits<double>::quiet_NaN() : parse_double("epsilon", v);
            },
            [](const RunConfig& c) { return std::isnan(c.field.epsilon) ? std::string("auto") : format_number(c.field.epsilon); });
        add("seed", "RNG seed",
            [](RunConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>("seed", v, 0); },
            [](const RunConfig& c) { return std::to_string(c.seed); });
        add("out", "output directory",
            [](RunConfig& c, const std::string& v) { c.out = trim(v); },
            [](const RunConfig& c) { return c.out; });
        add("r-max", "outer radius of the spectrum scan (0 = 32 sigma)",
            [](RunConfig& c, const std::string& v) { c.r_max = nonnegative("r-max", parse_double("r-max", v)); },
            [](const RunConfig& c) { return format_number(c.r_max); });
        add("point", "x,y seed for flow and foliation (auto = (3 sigma, 0))",
            [](RunConfig& c, const std::string& v) {
                if (is_auto(v)) { c.point.reset(); return; }
                const auto xy = parse_fixed("point", v, 2);
                c.point = Point(xy[0], xy[1]);
            },
            [](const RunConfig& c) {
                return c.point ? format_number(c.point->x()) + "," + format_number(c.point->y()) : std::string("auto");
            });
        add("t-max", "flow time budget",
            [](RunConfig& c, const std::string& v) { c.t_max = positive("t-max", parse_double("t-max", v)); },
            [](const RunConfig& c) { return format_number(c.t_max); });
        add("window", "x0,x1,y0,y1 foliation window (auto = [-10 sigma, 10 sigma]^2)",
            [](RunConfig& c, const std::string& v) {
                if (is_auto(v)) { c.window.reset(); return; }
                const auto w = parse_fixed("window", v, 4);
                if (!(w[1] > w[0] && w[3] > w[2])) throw ConfigError("config key 'window': empty rectangle");
                c.window = Window{w[0], w[1], w[2], w[3]};
            },
            [](const RunConfig& c) {
                return c.window ? join({c.window->x0, c.window->x1, c.window->y0, c.window->y1}) : std::string("auto");
            });
        add("radius", "tangency circle radius (0 = 5 sigma)",
            [](RunConfig& c, const std::string& v) { c.radius = nonnegative("radius", parse_double("radius", v)); },
            [](const RunConfig& c) { return format_number(c.radius); });
        add("radii", "comma-separated eta sweep radii",
            [](RunConfig& c, const std::string& v) {
                c.radii = parse_list("radii", v);
                for (double r : c.radii) positive("radii", r);
            },
            [](const RunConfig& c) { return join(c.radii); });
        add("family", "circles | star_shaped",
            [](RunConfig& c, const std::string& v) {
                const std::string t = trim(v);
                if (t != "circles" && t != "star_shaped") throw ConfigError("config key 'family': expected circles or star_shaped");
                c.family = t;
            },
            [](const RunConfig& c) { return c.family; });
        add("perturbations", "random star curves per eta sweep radius",
            [](RunConfig& c, const std::string& v) { c.perturbations = parse_int<int>("perturbations", v, 0); },
            [](const RunConfig& c) { return std::to_string(c.perturbations); });
        add("s", "index blend radius (0 = sigma)",
            [](RunConfig& c, const std::string& v) { c.s = nonnegative("s", parse_double("s", v)); },
            [](const RunConfig& c) { return format_number(c.s); });
        add("s-values", "comma-separated blend radii for the extension probe",
            [](RunConfig& c, const std::string& v) {
                c.s_values = parse_list("s-values", v);
                for (double s : c.s_values) positive("s-values", s);
            },
            [](const RunConfig& c) { return join(c.s_values); });
        add("tol-index", "flux/area agreement tolerance for the index",
            [](RunConfig& c, const std::string& v) { c.tol_index = positive("tol-index", parse_double("tol-index", v)); },
            [](const RunConfig& c) { return format_number(c.tol_index); });
        add("escape-seeds", "seeds on the outermost ladder rung",
            [](RunConfig& c, const std::string& v) { c.escape_seeds = parse_int<int>("escape-seeds", v, 1); },
            [](const RunConfig& c) { return std::to_string(c.escape_seeds); });
        add("arcs", "flux arcs per variant",
            [](RunConfig& c, const std::string& v) { c.arcs = parse_int<int>("arcs", v, 1); },
            [](const RunConfig& c) { return std::to_string(c.arcs); });
        add("ray-seeds", "seeds for the vertical ray check",
            [](RunConfig& c, const std::string& v) { c.ray_seeds = parse_int<int>("ray-seeds", v, 1); },
            [](const RunConfig& c) { return std::to_string(c.ray_seeds); });
        add("pairs", "random pairs in the injectivity scan",
            [](RunConfig& c, const std::string& v) { c.pairs = parse_int<std::size_t>("pairs", v, 0); },
            [](const RunConfig& c) { return std::to_string(c.pairs); });
        add("hash-samples", "hashed samples in the injectivity scan",
            [](RunConfig& c, const std::string& v) { c.hash_samples = parse_int<std::size_t>("hash-samples", v, 0); },
            [](const RunConfig& c) { return std::to_string(c.hash_samples); });
        add("injectivity-s", "inner radius of the injectivity scan (0 = 4 sigma)",
            [](RunConfig& c, const std::string& v) {
                c.injectivity_s = nonnegative("injectivity-s", parse_double("injectivity-s", v));
            },
            [](const RunConfig& c) { return format_number(c.injectivity_s); });
        add("tol-identity", "relative tolerance of the Green identity",
            [](RunConfig& c, const std::string& v) { c.tol_identity = positive("tol-identity", parse_double("tol-identity", v)); },
            [](const RunConfig& c) { return format_number(c.tol_identity); });
        add("tol-slack", "relative slack allowed in the flux inequalities",
            [](RunConfig& c, const std::string& v) { c.tol_slack = positive("tol-slack", parse_double("tol-slack", v)); },
            [](const RunConfig& c) { return format_number(c.tol_slack); });
        return t;
    }();
    return table;
}

double sigma_of(const VectorField& field) { return field.sigma() > 0.0 ? field.sigma() : 1.0; }



Json field_json(const RunConfig& cfg, const VectorField& field) {
    Json j;
    j["name"] = field.name();
    j["sigma"] = num(field.sigma());
    j["jacobian"] = field.jacobian_mode() == JacobianMode::analytic ? "analytic" : "fd";
    if (!cfg.field.name.empty()) {
        const auto& e = registry_entry(cfg.field.name);
        j["formula"] = e.formula;
        j["oracle"] = e.oracle;
        if (e.takes_epsilon) j["epsilon"] = num(std::isnan(cfg.field.epsilon) ? e.default_epsilon : cfg.field.epsilon);
    } else {
        j["f_expr"] = cfg.field.f_expr;
        j["g_expr"] = cfg.field.g_expr;
    }
    return j;
}

Json spectrum_section(const RunConfig& cfg, const VectorField& field, RegionSpectrumReport& scan) {
    const double sigma = sigma_of(field);
    const double r_max = cfg.r_max > 0.0 ? cfg.r_max : 32.0 * sigma;
    if (!(r_max > field.sigma())) throw PreconditionError("spectrum: r-max must exceed sigma");
    scan = scan_region(field, field.sigma(), r_max);
    return to_json(scan);
}

Point default_point(const RunConfig& cfg, const VectorField& field) {
    return cfg.point ? *cfg.point : Point(3.0 * sigma_of(field), 0.0);
}

Json flow_section(const RunConfig& cfg, const VectorField& field, CsvList& csv) {
    const Point p = default_point(cfg, field);
    if (!field.in_domain(p)) throw PreconditionError("flow: seed lies inside the excluded disk");
    FlowControls fc;
    fc.t_max = cfg.t_max;
    EscapeLadder ladder = EscapeLadder::standard(sigma_of(field));
    if (p.norm() * 1.05 >= ladder.r0) ladder = {1.05 * 2.0 * p.norm(), 2.0, 6};
    Json j;
    j["seed"] = point_json(p);
    j["ladder"] = {{"r0", num(ladder.r0)}, {"factor", num(ladder.factor)}, {"rungs", ladder.rungs}};
    for (const auto dir : {Direction::forward, Direction::backward}) {
        const Trajectory traj = integrate(field, p, dir, fc);
        const std::string name = to_string(dir);
        j[name] = {{"trajectory", to_json(traj)}, {"limit", to_json(classify_limit(traj, ladder))}};
        csv.emplace_back("trajectory_" + name + ".csv", trajectory_csv(traj));
    }
    j["uniqueness"] = to_json(semi_trajectory_uniqueness_probe(field, p, 8, 1e-6, 1.0, fc));
    return j;
}

Window default_window(const RunConfig& cfg, const VectorField& field) {
    const double h = 10.0 * sigma_of(field);
    return cfg.window ? *cfg.window : Window{-h, h, -h, h};
}

Json foliation_section(const RunConfig& cfg, const VectorField& field, CsvList& csv, HalfReebReport& reeb) {
    const Window w = default_window(cfg, field);
    const Point p = default_point(cfg, field);
    if (!field.in_domain(p)) throw PreconditionError("foliation: leaf seed lies inside the excluded disk");
    LeafControls lc;
    lc.window = w;
    lc.max_length = 4.0 * w.diagonal();
    const LeafArc leaf = trace_leaf(field, p, LeafComponent::f, lc);
    csv.emplace_back("leaf.csv", polyline_csv(leaf.points));
    reeb = detect_half_reeb(field, LeafComponent::f, w);
    Json j;
    j["window"] = {num(w.x0), num(w.x1), num(w.y0), num(w.y1)};
    j["leaf"] = to_json(leaf);
    j["half_reeb"] = to_json(reeb);
    j["convexity"] = {{"plus", to_json(vertical_convexity_probe(field, leaf, Side::plus, w))},
                      {"minus", to_json(vertical_convexity_probe(field, leaf, Side::minus, w))}};
    return j;
}

Json tangency_section(const RunConfig& cfg, const VectorField& field, CsvList& csv, TangencyReport& rep,
                      EtaSweepResult& sweep) {
    const double radius = cfg.radius > 0.0 ? cfg.radius : 5.0 * sigma_of(field);
    rep = tangency_report(field, ClosedCurve::circle(Point(0, 0), radius));
    csv.emplace_back("tangency_points.csv", tangency_points_csv(rep));
    EtaSweepControls ec;
    ec.perturbations = cfg.perturbations;
    ec.seed = cfg.seed;
    std::vector<double> radii;
    std::vector<double> dropped;
    for (double r : cfg.radii) (r > field.sigma() ? radii : dropped).push_back(r);
    sweep = eta_sweep(field, radii, cfg.family == "circles" ? CurveFamily::circles : CurveFamily::star_shaped, ec);
    Json j;
    j["radius"] = num(radius);
    j["report"] = to_json(rep);
    j["eta_sweep"] = to_json(sweep);
    j["eta_sweep"]["radii_dropped"] = dropped;
    return j;
}

Json index_section(const RunConfig& cfg, const VectorField& field, const RegionSpectrumReport& scan, CsvList& csv,
                   IndexEstimate& est) {
    IndexControls ic;
    ic.s = cfg.s;
    ic.tol = cfg.tol_index;
    est = compute_index(field, ic);
    check_index_shape(est, scan.hurwitz_all());
    csv.emplace_back("index_ladder.csv", index_ladder_csv(est));
    std::vector<double> s_ok;
    std::vector<double> dropped;
    for (double s : cfg.s_values) (s >= field.sigma() ? s_ok : dropped).push_back(s);
    Json j;
    j["estimate"] = to_json(est);
    j["hurwitz_region"] = scan.hurwitz_all();
    if (!s_ok.empty()) j["extension_probe"] = to_json(extension_independence_probe(field, s_ok, ic));
    j["s_values_dropped"] = dropped;
    return j;
}

Json classify_section(const RunConfig& cfg, const VectorField& field, CsvList& csv, InfinityVerdict& verdict) {
    InfinityControls ic;
    ic.seeds = cfg.escape_seeds;
    ic.index.tol = cfg.tol_index;
    verdict = classify_infinity(field, ic);
    csv.emplace_back("ladder_curves.csv", ladder_curves_csv(verdict.ladder));
    return to_json(verdict);
}

struct VerifyOutcome {
    bool preconditions = false;
    bool injectivity = false;
    std::optional<bool> flux, green, ray;
};

Json verify_section(const RunConfig& cfg, const VectorField& field, const RegionSpectrumReport& scan, CsvList& csv,
                    VerifyOutcome& out) {
    const double sigma = sigma_of(field);
    Json j;
    InjectivityControls inj;
    inj.hash_samples = cfg.hash_samples;
    const double s = cfg.injectivity_s > 0.0 ? cfg.injectivity_s : 4.0 * sigma;
    const auto scan_inj = injectivity_scan(field, s, cfg.pairs, cfg.seed, inj);
    out.injectivity = scan_inj.passed;
    j["injectivity"] = to_json(scan_inj);

    out.preconditions = scan.no_nonneg_real_all();
    j["preconditions"] = {{"no_nonneg_real", out.preconditions}};
    std::vector<ArcIntegralReport> failing;
    if (!out.preconditions) {
        j["notes"] = Json::array({"flux, Green and vertical ray checks skipped: an eigenvalue in [0, inf) "
                                  "was found on the scanned annulus"});
    } else {
        VerifyTolerances tol{cfg.tol_identity, cfg.tol_slack};
        ArcSampling sampling;
        sampling.count = cfg.arcs;
        sampling.r_min = 3.0 * sigma;
        sampling.r_max = 30.0 * sigma;
        sampling.seed = cfg.seed;
        Json flux = Json::object();
        bool flux_ok = true;
        for (const auto variant : {FluxVariant::positive, FluxVariant::negative}) {
            const auto batch = flux_inequality_batch(field, variant, sampling, tol);
            flux_ok = flux_ok && batch.all_passed();
            for (const auto& a : batch.arcs)
                if (!a.passed) failing.push_back(a);
            flux[to_string(variant)] = to_json(batch);
        }
        out.flux = flux_ok;
        j["flux"] = flux;

        const std::vector<Point> seeds{{4.0 * sigma, 0.0}, {5.0 * sigma, sigma}, {6.0 * sigma, -2.0 * sigma}};
        const auto green = green_identity_batch(field, seeds, 6.0 * sigma, tol);
        out.green = green.all_passed();
        for (const auto& a : green.regions)
            if (!a.passed) failing.push_back(a);
        j["green"] = to_json(green);

        const auto ray_seeds = random_annulus_points(cfg.ray_seeds, 3.0 * sigma, 30.0 * sigma, cfg.seed);
        const auto ray = vertical_ray_check(field, ray_seeds);
        out.ray = ray.passed();
        j["vertical_ray"] = to_json(ray);
    }
    csv.emplace_back("failing_arcs.csv", failing_arcs_csv(failing));
    return j;
}

Json optional_bool(const std::optional<bool>& b) { return b ? Json(*b) : Json(nullptr); }

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"spectrum", "flow",     "foliation", "tangency",
                                                "index",    "classify", "verify",    "all"};
    return names;
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const auto& h : handlers()) k.push_back(h.key);
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& h : handlers()) {
        if (h.key.name == key) {
            h.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        try {
            set_config_value(cfg, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

std::map<std::string, std::string> serialize_config(const RunConfig& cfg) {
    std::map<std::string, std::string> m;
    for (const auto& h : handlers())
        if (h.key.name != "out") m[h.key.name] = h.get(cfg);
    return m;
}

VectorField build_field(const FieldSpec& spec) {
    const bool has_expr = !spec.f_expr.empty() || !spec.g_expr.empty();
    if (!spec.name.empty() && has_expr) throw ConfigError("give either a registry field or f-expr/g-expr, not both");
    if (!spec.name.empty()) {
        if (!in_registry(spec.name)) throw ConfigError("unknown registry field '" + spec.name + "'");
        return make_registry_field(spec.name, spec.epsilon);
    }
    if (spec.f_expr.empty() || spec.g_expr.empty()) throw ConfigError("no field given: set field, or f-expr and g-expr");
    std::map<std::string, double> params;
    if (!std::isnan(spec.epsilon)) params["eps"] = spec.epsilon;
    const JacobianMode mode = spec.jacobian == "fd" ? JacobianMode::finite_difference : JacobianMode::analytic;
    try {
        return make_expr_field("custom", spec.f_expr, spec.g_expr, spec.sigma, mode, params);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("field expression: ") + e.what());
    }
}

Json build_report(const RunConfig& cfg, CsvList& csv) {
    const VectorField field = build_field(cfg.field);
    const std::string& sub = cfg.subcommand;
    const bool all = sub == "all";

    Json report;
    report["schema_version"] = kSchemaVersion;
    report["artifact_version"] = kArtifactVersion;
    report["subcommand"] = sub;
    report["config"] = serialize_config(cfg);
    report["field"] = field_json(cfg, field);
    Json results = Json::object();

    RegionSpectrumReport scan;
    const bool need_scan = all || sub == "spectrum" || sub == "index" || sub == "verify";
    if (need_scan) results["spectrum"] = spectrum_section(cfg, field, scan);
    if (all || sub == "flow") results["flow"] = flow_section(cfg, field, csv);
    HalfReebReport reeb;
    if (all || sub == "foliation") results["foliation"] = foliation_section(cfg, field, csv, reeb);
    TangencyReport tang;
    EtaSweepResult sweep;
    if (all || sub == "tangency") results["tangency"] = tangency_section(cfg, field, csv, tang, sweep);
    IndexEstimate est;
    if (all || sub == "index") results["index"] = index_section(cfg, field, scan, csv, est);
    InfinityVerdict verdict;
    if (all || sub == "classify") results["classify"] = classify_section(cfg, field, csv, verdict);
    VerifyOutcome vo;
    if (all || sub == "verify") results["verify"] = verify_section(cfg, field, scan, csv, vo);

    if (all) {
        Json s;
        s["hurwitz"] = scan.hurwitz_all();
        s["no_nonneg_real"] = scan.no_nonneg_real_all();
        s["index_kind"] = to_string(est.kind);
        s["index_value"] = num(est.value);
        s["verdict"] = to_string(verdict.verdict);
        s["index_sign_consistent"] = verdict.index_sign_consistent;
        s["half_reeb"] = reeb.none_found() ? "none_found" : (reeb.bounded_only() ? "bounded_only" : "unbounded_or_unknown");
        s["tangency_formula_holds"] = tang.formula_holds;
        s["eta_nondecreasing"] = sweep.nondecreasing();
        s["injectivity_passed"] = vo.injectivity;
        s["flux_passed"] = optional_bool(vo.flux);
        s["green_passed"] = optional_bool(vo.green);
        s["vertical_ray_passed"] = optional_bool(vo.ray);
        results["summary"] = s;
    }

    report["results"] = results;
    Json artifacts = Json::array();
    for (const auto& [name, table] : csv) artifacts.push_back(name);
    report["artifacts"] = artifacts;
    report["status"] = {{"exit_code", kExitOk}, {"error", nullptr}};
    return report;
}

int run(const RunConfig& cfg, std::ostream& err) {
    namespace fs = std::filesystem;
    CsvList csv;
    Json report;
    int code = kExitOk;
    std::string kind;
    std::string message;
    try {
        report = build_report(cfg, csv);
    } catch (const ConfigError& e) {
        code = kExitConfig, kind = "config", message = e.what();
    } catch (const ParseError& e) {
        code = kExitConfig, kind = "config", message = e.what();
    } catch (const PreconditionError& e) {
        code = kExitPrecondition, kind = "precondition", message = e.what();
    } catch (const InconsistencyError& e) {
        code = kExitInconsistency, kind = "inconsistency", message = e.what();
    } catch (const NumericError& e) {
        code = kExitInconsistency, kind = "numeric", message = e.what();
    }

    if (code != kExitOk) {
        err << "horizon: " << kind << " error: " << message << "\n";
        csv.clear();
        report = Json::object();
        report["schema_version"] = kSchemaVersion;
        report["artifact_version"] = kArtifactVersion;
        report["subcommand"] = cfg.subcommand;
        report["config"] = serialize_config(cfg);
        report["artifacts"] = Json::array();
        report["status"] = {{"exit_code", code}, {"error", {{"kind", kind}, {"message", message}}}};
    }

    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) {
        err << "horizon: cannot create output directory '" << cfg.out << "': " << ec.message() << "\n";
        return code != kExitOk ? code : kExitConfig;
    }
    const fs::path dir(cfg.out);
    write_json((dir / "report.json").string(), report);
    for (const auto& [name, table] : csv) table.write((dir / name).string());
    return code;
}

}  // namespace horizon
