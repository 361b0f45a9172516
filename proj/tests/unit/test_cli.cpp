#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ccn/errors.hpp"
#include "ccn/export.hpp"
#include "ccn/run.hpp"

using namespace ccn;
namespace fs = std::filesystem;

namespace {

const char* kFoldConfig = R"(# fold run
command = branch
bounds = 0, 1
n = 64
p = 4
q = 1.5
a = "cos(2*pi*x)-0.1"
b = 1
eps = 1e-3
lambda_window = (0, 3]
ds = 0.02
)";

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("ccn_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string config_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

BranchPoint point(double lambda, double u, double gamma) {
    BranchPoint p;
    p.solution.u = Vector::Constant(3, u);
    p.solution.lambda = lambda;
    p.solution.gamma1 = gamma;
    return p;
}

}  // namespace

TEST_CASE("parse_config: minimal branch config") {
    const RunPlan plan = parse_config(kFoldConfig);
    CHECK(plan.command == Command::Branch);
    CHECK(plan.n == 64);
    CHECK(plan.a == "cos(2*pi*x)-0.1");
    CHECK(plan.b == "1");
    CHECK(plan.eps == 1e-3);
    REQUIRE(plan.lambda_window);
    CHECK(!plan.lambda_window->lo_closed);
    CHECK(plan.lambda_window->hi_closed);
    CHECK(plan.lambda_window->hi == 3.0);
    CHECK(plan.newton_tol == 1e-10);
    CHECK(plan.lines.at("a") == 7);
    CHECK(plan.spec().size() == 64);
}

TEST_CASE("parse_config: errors carry lines and suggestions") {
    std::string text = kFoldConfig;
    const std::string p_line = "p = 4";
    text.replace(text.find(p_line), p_line.size(), "p = 1.5");
    const std::string e1 = config_error(text);
    CHECK(e1.find("requires p > 2") != std::string::npos);
    CHECK(e1.find("line 5") != std::string::npos);

    const std::string e2 = config_error(std::string(kFoldConfig) + "epsilonn = 0.1\n");
    CHECK(e2.find("unknown key 'epsilonn'") != std::string::npos);
    CHECK(e2.find("'eps'") != std::string::npos);
    CHECK(e2.find("line 12") != std::string::npos);

    CHECK(config_error("command = branch\nbounds = 0, 1\n").find("missing required key") != std::string::npos);
    CHECK(config_error(std::string(kFoldConfig) + "n = 12\n").find("duplicate") != std::string::npos);
    std::string typed = kFoldConfig;
    typed.replace(typed.find("n = 64"), 6, "n = many");
    CHECK(config_error(typed).find("expects") != std::string::npos);
    CHECK(config_error("command = explode\n").find("unknown command") != std::string::npos);
    CHECK(config_error("just words\n").find("key = value") != std::string::npos);
    std::string bad_expr = kFoldConfig;
    bad_expr.replace(bad_expr.find("b = 1"), 5, "b = min(x,");
    CHECK(config_error(bad_expr).find("line 8") != std::string::npos);
}

TEST_CASE("parse_window") {
    const LambdaWindow a = parse_window("(0, 3]");
    CHECK((!a.lo_closed && a.hi_closed && a.lo == 0 && a.hi == 3));
    const LambdaWindow b = parse_window("[-2, 0)");
    CHECK((b.lo_closed && !b.hi_closed && b.contains(-2) && !b.contains(0)));
    const LambdaWindow c = parse_window("-1, 1");
    CHECK((c.lo_closed && c.hi_closed));
    CHECK_THROWS_AS(parse_window("(3, 0]"), ConfigError);
    CHECK_THROWS_AS(parse_window("3"), ConfigError);
}

TEST_CASE("run: classify on constant coefficients") {
    const RunOutcome r = run(parse_config("command = classify\nbounds = 0, 1\nn = 32\np = 4\nq = 1.5\na = -1\nb = 1\n"));
    CHECK(r.exit_code == kExitOk);
    CHECK(r.summary["regime"]["predicted_diagram"] == "Figure2");
    CHECK(r.summary["regime"]["H02"] == true);
    CHECK(r.summary["regime"]["c_star"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("run: branch writes a CSV with one fold") {
    TempDir tmp;
    RunPlan plan = parse_config(kFoldConfig);
    plan.out_csv = tmp.path / "branch.csv";
    plan.out_svg = tmp.path / "branch.svg";
    plan.dump_solutions = true;
    const RunOutcome r = run(plan);
    CHECK(r.exit_code == kExitOk);
    CHECK(r.summary["branch"]["lambda0_estimate"].is_number());
    std::ifstream in(*plan.out_csv);
    const auto rows = read_branch_csv(in);
    int folds = 0;
    for (const auto& row : rows) folds += row.is_fold;
    CHECK(folds == 1);
    CHECK(fs::exists(tmp.path / "branch.nodes.csv"));
    CHECK(slurp(*plan.out_svg).find("class=\"fold\"") != std::string::npos);
}

TEST_CASE("run: whyburn with a one-element schedule is a config error") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "w.cfg";
    std::ofstream(cfg) << "command = whyburn\nbounds = 0, 1\nn = 32\np = 4\nq = 1.5\na = cos(2*pi*x)\nb = 1\n"
                          "eps_schedule = 0.1\nlambda_window = [-2, 0)\nds = 0.05\n";
    std::ostringstream out, err;
    CHECK(run_config_file(cfg, out, err) == kExitConfig);
    CHECK(err.str().find("eps_schedule") != std::string::npos);
}

TEST_CASE("run: unwritable output path") {
    RunPlan plan = parse_config("command = classify\nbounds = 0, 1\nn = 8\np = 4\nq = 1.5\na = -1\nb = 1\n");
    plan.out_json = "/nonexistent-dir/x/summary.json";
    CHECK(run(plan).exit_code == kExitConfig);
    std::ostringstream out, err;
    CHECK(run_config_file("/nonexistent-dir/none.cfg", out, err) == kExitConfig);
}

TEST_CASE("run: solve and eigen") {
    const RunOutcome s = run(parse_config("command = solve\nbounds = 0, 1\nn = 16\np = 4\nq = 1.5\na = -1\nb = 1\nlambda = 1\n"));
    CHECK(s.exit_code == kExitOk);
    CHECK(s.summary["solution"]["u_max"].get<double>() == doctest::Approx(1.0).epsilon(1e-10));
    const RunOutcome e = run(parse_config("command = eigen\nbounds = 0, 1\nn = 16\nb = 1\nlambda = 3\n"));
    CHECK(e.exit_code == kExitOk);
    CHECK(e.summary.contains("eigen"));
}

TEST_CASE("export: empty branch CSV is header only") {
    std::ostringstream out;
    write_branch_csv(out, Branch{}, Vector::Ones(3));
    CHECK(out.str() == std::string(kBranchCsvHeader) + "\n");
    CHECK(std::string(kBranchCsvHeader) == "s,lambda,eps,u_max,u_min,u_l2,gamma1,stability,is_fold");
}

TEST_CASE("export: two-point branch SVG") {
    Branch br;
    br.points = {point(1.0, 2.0, 1.0), point(3.0, 6.0, 1.0)};
    const std::string svg = render_svg({SvgSeries{&br, 1.0, ""}}, "t");
    std::size_t polylines = 0;
    for (std::size_t at = svg.find("<polyline"); at != std::string::npos; at = svg.find("<polyline", at + 1)) ++polylines;
    CHECK(polylines == 1);
    CHECK(svg.find("stroke-dasharray") == std::string::npos);
    const auto attr = [](const char* name, double v) { return std::string(name) + "=\"" + format_double(v) + "\""; };
    CHECK(svg.find(attr("data-lambda-min", 1.0 - 0.05 * 2.0)) != std::string::npos);
    CHECK(svg.find(attr("data-lambda-max", 3.0 + 0.05 * 2.0)) != std::string::npos);
    CHECK(svg.find(attr("data-u-min", 2.0 - 0.05 * 4.0)) != std::string::npos);
    CHECK(svg.find(attr("data-u-max", 6.0 + 0.05 * 4.0)) != std::string::npos);

    br.points[0].solution.gamma1 = -1.0;
    br.points[1].solution.gamma1 = -1.0;
    CHECK(render_svg({SvgSeries{&br, 1.0, ""}}, "t").find("stroke-dasharray") != std::string::npos);
}

TEST_CASE("export: whyburn series opacity increases as eps decreases") {
    std::vector<Branch> brs(4);
    const double eps[] = {1e-1, 1e-2, 1e-3, 1e-4};
    for (int i = 0; i < 4; ++i) {
        brs[i].eps = eps[i];
        brs[i].points = {point(-1.0, 1.0, -1.0), point(-0.5, 1.5, -1.0)};
    }
    const auto series = whyburn_series(brs);
    REQUIRE(series.size() == 4);
    for (int i = 1; i < 4; ++i) CHECK(series[i].opacity > series[i - 1].opacity);
    const std::string svg = render_svg(series, "w");
    std::size_t groups = 0;
    for (std::size_t at = svg.find("class=\"branch\""); at != std::string::npos; at = svg.find("class=\"branch\"", at + 1))
        ++groups;
    CHECK(groups == 4);
}

TEST_CASE("export: CSV round trip is exact") {
    Branch br;
    br.points = {point(-0.123456789012345678, 1.0 / 3.0, 2.0 / 7.0), point(-1e-17, 5e300, -4.9e-324)};
    br.points[1].is_fold = true;
    br.points[0].solution.stability = Stability::Stable;
    std::ostringstream out;
    write_branch_csv(out, br, Vector::Constant(3, 1.0 / 3.0));
    std::istringstream in(out.str());
    const auto rows = read_branch_csv(in);
    REQUIRE(rows.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(rows[k].lambda == br.points[k].solution.lambda);
        CHECK(rows[k].u_max == br.points[k].solution.u.maxCoeff());
        CHECK(rows[k].gamma1 == *br.points[k].solution.gamma1);
    }
    CHECK(rows[0].stability == "stable");
    CHECK(rows[1].is_fold);
    std::istringstream bad("nope\n");
    CHECK_THROWS_AS(read_branch_csv(bad), IoError);
}

TEST_CASE("CLI binary: deterministic artifacts and exit codes") {
    TempDir tmp;
    auto write_cfg = [&](const std::string& name, const std::string& suffix) {
        const fs::path cfg = tmp.path / (name + ".cfg");
        std::ofstream(cfg) << kFoldConfig << "out_csv = " << (tmp.path / (name + ".csv")).string() << "\nout_json = "
                           << (tmp.path / (name + ".json")).string() << "\nout_svg = "
                           << (tmp.path / (name + ".svg")).string() << "\n"
                           << suffix;
        return cfg;
    };
    const std::string cli = CCN_CLI_PATH;
    const auto call = [&](const fs::path& cfg) {
        const int rc = std::system((cli + " " + cfg.string() + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    CHECK(call(write_cfg("one", "")) == 0);
    CHECK(call(write_cfg("two", "")) == 0);
    for (const char* ext : {".csv", ".svg"}) CHECK(slurp(tmp.path / ("one" + std::string(ext))) == slurp(tmp.path / ("two" + std::string(ext))));
    CHECK(slurp(tmp.path / "one.json") == slurp(tmp.path / "two.json"));

    CHECK(call(write_cfg("bad", "mystery = 1\n")) == 1);
    CHECK(call(write_cfg("cap", "newton_tol = 1e-30\n")) == 2);
}

TEST_CASE("run: verify on a branch with a fold keeps the asymptotic lambdas below it") {
    const RunOutcome v = run(parse_config("command = verify\nbounds = 0, 1\nn = 64\np = 4\nq = 1.5\n"
                                          "a = \"cos(2*pi*x)-0.1\"\nb = 1\neps = 1e-4\nlambda_window = (0, 3]\nds = 0.02\n"));
    CHECK(v.exit_code == kExitOk);
    const auto& rows = v.summary["verification"]["asymptotics"]["rows"];
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) CHECK(r["error"].is_null());
}
