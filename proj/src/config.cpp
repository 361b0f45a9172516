#include "ccn/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ccn/errors.hpp"

namespace ccn {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t edit_distance(const std::string& x, const std::string& y) {
    std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
    for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= x.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= y.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[y.size()];
}

std::optional<std::string> suggest(const std::string& key) {
    std::optional<std::string> best;
    std::size_t best_d = 3;
    for (const auto& k : config_keys()) {
        const std::size_t d = edit_distance(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    if (best) return best;
    // typo appended to a valid key, e.g. "epsilonn" -> "eps"
    for (const auto& k : config_keys())
        if (k.size() >= 2 && key.rfind(k, 0) == 0 && (!best || k.size() > best->size())) best = k;
    return best;
}

double parse_number(const std::string& text, std::size_t line, const std::string& key) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("'" + key + "' expects a number", line);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
        throw ConfigError("'" + key + "' expects a number, got '" + t + "'", line);
    return v;
}

int parse_int(const std::string& text, std::size_t line, const std::string& key) {
    const double v = parse_number(text, line, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("'" + key + "' expects an integer", line);
    return static_cast<int>(v);
}

bool parse_bool(const std::string& text, std::size_t line, const std::string& key) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("'" + key + "' expects true or false", line);
}

std::vector<double> parse_list(const std::string& text, std::size_t line, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item, line, key));
    if (out.empty()) throw ConfigError("'" + key + "' expects a comma-separated list", line);
    return out;
}

Command parse_command(const std::string& v, std::size_t line) {
    if (v == "solve") return Command::Solve;
    if (v == "branch") return Command::Branch;
    if (v == "whyburn") return Command::Whyburn;
    if (v == "verify") return Command::Verify;
    if (v == "eigen") return Command::Eigen;
    if (v == "classify") return Command::Classify;
    throw ConfigError("unknown command '" + v + "' (expected solve, branch, whyburn, verify, eigen or classify)", line);
}

std::vector<std::string> required_keys(Command c) {
    switch (c) {
        case Command::Eigen: return {"bounds", "n", "b", "lambda"};
        case Command::Classify: return {"bounds", "n", "p", "q", "a", "b"};
        case Command::Solve: return {"bounds", "n", "p", "q", "a", "b", "lambda"};
        case Command::Branch:
        case Command::Verify: return {"bounds", "n", "p", "q", "a", "b", "eps", "lambda_window", "ds"};
        case Command::Whyburn: return {"bounds", "n", "p", "q", "a", "b", "eps_schedule", "lambda_window", "ds"};
    }
    return {};
}

}  // namespace

const char* to_string(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Branch: return "branch";
        case Command::Whyburn: return "whyburn";
        case Command::Verify: return "verify";
        case Command::Eigen: return "eigen";
        case Command::Classify: return "classify";
    }
    return "?";
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "command", "dim",          "bounds",      "n",      "p",      "q",          "a",
        "b",       "eps",          "eps_schedule", "gamma_decay", "lambda", "lambda_window", "ds",
        "max_points", "newton_tol", "out_csv",     "out_json", "out_svg", "dump_solutions"};
    return keys;
}

LambdaWindow parse_window(std::string_view text) {
    std::string t = trim(text);
    LambdaWindow w;
    if (!t.empty() && (t.front() == '(' || t.front() == '[')) {
        w.lo_closed = t.front() == '[';
        t.erase(0, 1);
    }
    if (!t.empty() && (t.back() == ')' || t.back() == ']')) {
        w.hi_closed = t.back() == ']';
        t.pop_back();
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos)
        throw ConfigError("lambda_window expects 'lo, hi'");
    w.lo = parse_number(t.substr(0, comma), 0, "lambda_window");
    w.hi = parse_number(t.substr(comma + 1), 0, "lambda_window");
    if (!(w.lo < w.hi)) throw ConfigError("lambda_window requires lo < hi");
    return w;
}

Mesh RunPlan::mesh() const { return Mesh::build(domain, n); }

ProblemSpec RunPlan::spec() const { return ProblemSpec::from_text(mesh(), a, b, p, q, eps, gamma_decay); }

RunPlan parse_config(std::string_view text) {
    std::map<std::string, std::pair<std::string, std::size_t>> values;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        // strip a comment that is not inside quotes
        std::string line;
        bool quoted = false;
        for (char c : raw) {
            if (c == '"') quoted = !quoted;
            if (c == '#' && !quoted) break;
            line.push_back(c);
        }
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

        const auto& keys = config_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            std::string msg = "unknown key '" + key + "'";
            if (auto s = suggest(key)) msg += " (did you mean '" + *s + "'?)";
            throw ConfigError(msg, line_no);
        }
        if (values.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
        values[key] = {value, line_no};
    }

    RunPlan plan;
    for (const auto& [k, v] : values) plan.lines[k] = v.second;
    const auto has = [&](const char* k) { return values.count(k) > 0; };
    const auto val = [&](const char* k) { return values.at(k).first; };
    const auto ln = [&](const char* k) { return values.at(k).second; };

    if (!has("command")) throw ConfigError("missing required key 'command'");
    plan.command = parse_command(val("command"), ln("command"));
    for (const auto& k : required_keys(plan.command))
        if (!has(k.c_str())) throw ConfigError("missing required key '" + k + "' for command " + to_string(plan.command));

    int dim = 1;
    if (has("dim")) {
        dim = parse_int(val("dim"), ln("dim"), "dim");
        if (dim != 1 && dim != 2) throw ConfigError("dim must be 1 or 2", ln("dim"));
    }
    if (has("bounds")) {
        const auto bnd = parse_list(val("bounds"), ln("bounds"), "bounds");
        if (bnd.size() != static_cast<std::size_t>(2 * dim))
            throw ConfigError("bounds needs " + std::to_string(2 * dim) + " values for dim " + std::to_string(dim), ln("bounds"));
        plan.domain = dim == 1 ? Domain::interval(bnd[0], bnd[1]) : Domain::rectangle(bnd[0], bnd[1], bnd[2], bnd[3]);
        for (int d = 0; d < dim; ++d)
            if (!(plan.domain.hi[d] > plan.domain.lo[d])) throw ConfigError("bounds are degenerate", ln("bounds"));
    } else if (dim == 2) {
        plan.domain = Domain::rectangle(0.0, 1.0, 0.0, 1.0);
    }
    if (has("n")) {
        plan.n = parse_int(val("n"), ln("n"), "n");
        if (plan.n < 3) throw ConfigError("requires n >= 3", ln("n"));
    }
    if (has("p")) {
        plan.p = parse_number(val("p"), ln("p"), "p");
        if (!(plan.p > 2.0)) throw ConfigError("requires p > 2", ln("p"));
    }
    if (has("q")) {
        plan.q = parse_number(val("q"), ln("q"), "q");
        if (!(plan.q > 1.0 && plan.q < 2.0)) throw ConfigError("requires 1 < q < 2", ln("q"));
    }
    for (const char* k : {"a", "b"}) {
        if (!has(k)) continue;
        try {
            (void)parse_expression(val(k));
        } catch (const ParseError& e) {
            throw ConfigError(std::string("'") + k + "': " + e.what(), ln(k));
        }
        (std::string(k) == "a" ? plan.a : plan.b) = val(k);
    }
    if (has("eps")) {
        plan.eps = parse_number(val("eps"), ln("eps"), "eps");
        if (!(plan.eps >= 0.0 && plan.eps <= 1.0)) throw ConfigError("requires 0 <= eps <= 1", ln("eps"));
    }
    if (has("eps_schedule")) {
        plan.eps_schedule = parse_list(val("eps_schedule"), ln("eps_schedule"), "eps_schedule");
        for (std::size_t i = 0; i < plan.eps_schedule.size(); ++i) {
            if (!(plan.eps_schedule[i] > 0.0 && plan.eps_schedule[i] <= 1.0))
                throw ConfigError("eps_schedule values must lie in (0, 1]", ln("eps_schedule"));
            if (i > 0 && !(plan.eps_schedule[i] < plan.eps_schedule[i - 1]))
                throw ConfigError("eps_schedule must be strictly decreasing", ln("eps_schedule"));
        }
        if (plan.command == Command::Whyburn && plan.eps_schedule.size() < 2)
            throw ConfigError("eps_schedule needs at least two values", ln("eps_schedule"));
    }
    if (has("gamma_decay")) {
        plan.gamma_decay = parse_number(val("gamma_decay"), ln("gamma_decay"), "gamma_decay");
        if (!(*plan.gamma_decay > 0.0)) throw ConfigError("requires gamma_decay > 0", ln("gamma_decay"));
    }
    if (has("lambda")) plan.lambda = parse_number(val("lambda"), ln("lambda"), "lambda");
    if (has("lambda_window")) {
        try {
            plan.lambda_window = parse_window(val("lambda_window"));
        } catch (const ConfigError& e) {
            throw ConfigError(e.what(), ln("lambda_window"));
        }
    }
    if (has("ds")) {
        plan.ds = parse_number(val("ds"), ln("ds"), "ds");
        if (!(plan.ds > 0.0)) throw ConfigError("requires ds > 0", ln("ds"));
    }
    if (has("max_points")) {
        plan.max_points = parse_int(val("max_points"), ln("max_points"), "max_points");
        if (plan.max_points < 1) throw ConfigError("requires max_points >= 1", ln("max_points"));
    }
    if (has("newton_tol")) {
        plan.newton_tol = parse_number(val("newton_tol"), ln("newton_tol"), "newton_tol");
        if (!(plan.newton_tol > 0.0)) throw ConfigError("requires newton_tol > 0", ln("newton_tol"));
    }
    for (const char* k : {"out_csv", "out_json", "out_svg"}) {
        if (!has(k)) continue;
        if (val(k).empty()) throw ConfigError(std::string("'") + k + "' expects a path", ln(k));
        std::filesystem::path path = val(k);
        if (std::string(k) == "out_csv") plan.out_csv = path;
        else if (std::string(k) == "out_json") plan.out_json = path;
        else plan.out_svg = path;
    }
    if (has("dump_solutions")) plan.dump_solutions = parse_bool(val("dump_solutions"), ln("dump_solutions"), "dump_solutions");

    // Problem-level invariants (b >= 0, a != 0, sampling errors) are checked up front.
    try {
        if (plan.command == Command::Eigen) {
            (void)sample_on_mesh(plan.b, plan.mesh());
        } else {
            (void)plan.spec();
        }
    } catch (const EvalError& e) {
        throw ConfigError(std::string("coefficient evaluation failed: ") + e.what());
    }
    return plan;
}

RunPlan load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace ccn
