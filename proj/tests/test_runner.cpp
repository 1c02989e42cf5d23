#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "horizon/runner.hpp"

using namespace horizon;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("horizon_test_runner_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

RunConfig light(const std::string& field, const std::string& sub) {
    RunConfig cfg;
    cfg.field.name = field;
    cfg.subcommand = sub;
    cfg.pairs = 2000;
    cfg.hash_samples = 20000;
    cfg.arcs = 8;
    cfg.ray_seeds = 8;
    cfg.escape_seeds = 16;
    cfg.perturbations = 4;
    return cfg;
}

}  // namespace

TEST_CASE("format_number round-trips and spells out non-finite values") {
    for (double v : {0.1, -3.141592653589793, 1e-300, 6.02214076e23, 0.0}) {
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(num(INFINITY) == "inf");
    CHECK(num(-INFINITY) == "-inf");
    CHECK(num(NAN) == "nan");
    CHECK(num(2.5) == 2.5);
}

TEST_CASE("csv table layout") {
    CsvTable t({"a", "b"});
    t.add_numbers({1.0, 0.5});
    t.add({"x", "y"});
    CHECK(t.rows() == 2);
    CHECK(t.str() == "a,b\n1,0.5\nx,y\n");
}

TEST_CASE("config text parsing") {
    RunConfig cfg;
    apply_config_text(cfg, "# scenario\n"
                           "field = rot_feed_attract   # registry\n"
                           "epsilon = 0.25\n"
                           "\n"
                           "radii = 2, 4,8\n"
                           "point = 3.5,-1\n"
                           "window = -4,4,-2,2\n"
                           "subcommand = classify\n"
                           "seed = 42\n");
    CHECK(cfg.field.name == "rot_feed_attract");
    CHECK(cfg.field.epsilon == 0.25);
    CHECK(cfg.radii == std::vector<double>{2, 4, 8});
    REQUIRE(cfg.point);
    CHECK(cfg.point->y() == -1.0);
    REQUIRE(cfg.window);
    CHECK(cfg.window->x1 == 4.0);
    CHECK(cfg.subcommand == "classify");
    CHECK(cfg.seed == 42);

    CHECK_THROWS_AS(apply_config_text(cfg, "no_such_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(cfg, "seed = -3\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(cfg, "sigma = abc\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(cfg, "point = 1\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(cfg, "subcommand = plot\n"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(cfg, "just text\n"), ConfigError);
}

TEST_CASE("serialized config reproduces the run configuration") {
    RunConfig a;
    apply_config_text(a, "field = radial_slow\nradius = 7\ns-values = 2,8\ntol-slack = 1e-9\nout = somewhere\n");
    const auto kv = serialize_config(a);
    CHECK(kv.count("out") == 0);
    CHECK(kv.size() == config_keys().size() - 1);

    std::string text;
    for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
    RunConfig b;
    apply_config_text(b, text);
    CHECK(serialize_config(b) == kv);
    CHECK(b.s_values == a.s_values);
    CHECK(b.tol_slack == a.tol_slack);
}

TEST_CASE("field construction") {
    FieldSpec reg;
    reg.name = "linear_hurwitz";
    CHECK(build_field(reg).evaluate(Point(2, 1)).isApprox(Vec2(-2, -1)));

    FieldSpec expr;
    expr.f_expr = "-x + eps*y";
    expr.g_expr = "-y";
    expr.epsilon = 0.5;
    expr.sigma = 2.0;
    const auto f = build_field(expr);
    CHECK(f.sigma() == 2.0);
    CHECK(f.evaluate(Point(3, 2)).isApprox(Vec2(-2, -2)));

    FieldSpec bad = expr;
    bad.f_expr = "x +* y";
    CHECK_THROWS_AS(build_field(bad), ConfigError);
    FieldSpec both = expr;
    both.name = "linear_hurwitz";
    CHECK_THROWS_AS(build_field(both), ConfigError);
    FieldSpec unknown;
    unknown.name = "no_such_field";
    CHECK_THROWS_AS(build_field(unknown), ConfigError);
    CHECK_THROWS_AS(build_field(FieldSpec{}), ConfigError);
}

TEST_CASE("classify on rot_feed_attract reports an attractor with index near zero") {
    RunConfig cfg = light("rot_feed_attract", "classify");
    cfg.field.epsilon = 0.5;
    cfg.out = scratch("classify").string();
    std::ostringstream err;
    REQUIRE(run(cfg, err) == kExitOk);
    const Json r = Json::parse(slurp(std::filesystem::path(cfg.out) / "report.json"));
    const Json& c = r["results"]["classify"];
    CHECK(c["verdict"] == "attractor");
    CHECK(c["index_sign_consistent"] == true);
    CHECK(std::abs(c["index"]["value"].get<double>()) <= 0.01);
    CHECK(std::filesystem::exists(std::filesystem::path(cfg.out) / "ladder_curves.csv"));
}

TEST_CASE("tangency on linear_hurwitz at radius 3") {
    RunConfig cfg = light("linear_hurwitz", "tangency");
    cfg.radius = 3.0;
    CsvList csv;
    const Json r = build_report(cfg, csv);
    const Json& t = r["results"]["tangency"]["report"];
    CHECK(t["n_ext"] == 2);
    CHECK(t["n_int"] == 0);
    CHECK(t["index_winding"] == 0);
    CHECK(t["index_formula"] == 0.0);
}

TEST_CASE("exit codes and error records") {
    std::ostringstream err;
    RunConfig parse = light("", "spectrum");
    parse.field.f_expr = "x^";
    parse.field.g_expr = "y";
    parse.out = scratch("parse").string();
    CHECK(run(parse, err) == kExitConfig);
    const Json r1 = Json::parse(slurp(std::filesystem::path(parse.out) / "report.json"));
    CHECK(r1["status"]["exit_code"] == kExitConfig);
    CHECK(r1["status"]["error"]["kind"] == "config");
    CHECK(err.str().find("position") != std::string::npos);

    RunConfig pre = light("linear_hurwitz", "flow");
    pre.point = Point(0.2, 0.0);
    pre.out = scratch("pre").string();
    CHECK(run(pre, err) == kExitPrecondition);

    RunConfig inc = light("rot_decay_repel", "index");
    inc.tol_index = 1e-300;
    inc.out = scratch("inc").string();
    CHECK(run(inc, err) == kExitInconsistency);
    const Json r3 = Json::parse(slurp(std::filesystem::path(inc.out) / "report.json"));
    CHECK(r3["status"]["error"]["kind"] == "inconsistency");
}

TEST_CASE("verify skips the arc checks when the spectrum scan fails") {
    CsvList csv;
    const Json r = build_report(light("model_reeb", "verify"), csv);
    const Json& v = r["results"]["verify"];
    CHECK(v["preconditions"]["no_nonneg_real"] == false);
    CHECK(!v.contains("flux"));
    CHECK(v["injectivity"]["collision_count"].get<int>() > 0);
}

TEST_CASE("identical configs give byte-identical artifacts") {
    RunConfig a = light("rot_decay_repel", "all");
    RunConfig b = a;
    a.out = scratch("det_a").string();
    b.out = scratch("det_b").string();
    std::ostringstream err;
    REQUIRE(run(a, err) == kExitOk);
    REQUIRE(run(b, err) == kExitOk);
    for (const auto& entry : std::filesystem::directory_iterator(a.out)) {
        const auto name = entry.path().filename();
        CHECK_MESSAGE(slurp(entry.path()) == slurp(std::filesystem::path(b.out) / name), name.string());
    }
}
