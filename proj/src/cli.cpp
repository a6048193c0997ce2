#include "multexode/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "multexode/auxiliary.hpp"
#include "multexode/oracle.hpp"
#include "multexode/parse.hpp"
#include "multexode/solver.hpp"

namespace multexode::cli {

namespace fs = std::filesystem;
using expr::Expr;

ConfigError::ConfigError(std::string field_, const std::string& message)
    : InputError("config field '" + field_ + "': " + message), field(std::move(field_)) {}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

cplx constant_value(const std::string& field, const std::string& text) {
    Expr e;
    try {
        e = expr::parse(text);
    } catch (const SyntaxError& err) {
        throw ConfigError(field, err.what());
    }
    auto c = e.as_constant();
    if (!c) throw ConfigError(field, "expected a constant, got '" + text + "'");
    return *c;
}

double real_value(const std::string& field, const std::string& text) {
    const cplx c = constant_value(field, text);
    if (c.imag() != 0.0) throw ConfigError(field, "expected a real number");
    return c.real();
}

long long integer_value(const std::string& field, const std::string& text) {
    const double v = real_value(field, text);
    if (std::trunc(v) != v) throw ConfigError(field, "expected an integer");
    return static_cast<long long>(v);
}

Interval interval_value(const std::string& field, const std::string& text) {
    const char sep = text.find(':') != std::string::npos ? ':' : ',';
    const auto parts = split(text, sep);
    if (parts.size() != 2) throw ConfigError(field, "expected LO:HI");
    const double lo = real_value(field, parts[0]);
    const double hi = real_value(field, parts[1]);
    if (!(lo < 0.0 && 0.0 < hi)) throw ConfigError(field, "interval must contain 0 in its interior");
    return {lo, hi};
}

bool is_coefficient_key(const std::string& key) {
    return key.size() == 2 && key[0] == 'a' && key[1] >= '1' && key[1] <= '9';
}

const std::set<std::string> kKeys = {"order", "interval", "grid",  "tol",         "max_terms", "initial",
                                     "preset", "zeta",    "omega", "compare_tol", "numeric_diff"};

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const fs::path& path, const Grid& grid, const std::vector<std::pair<std::string, GridFn>>& cols) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write " + path.string());
    os << "x";
    for (const auto& [name, f] : cols) os << "," << name << "_re," << name << "_im";
    os << "\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << number(grid.node(i));
        for (const auto& [name, f] : cols) os << "," << number(f[i].real()) << "," << number(f[i].imag());
        os << "\n";
    }
}

void write_json(const fs::path& path, const nlohmann::ordered_json& doc) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write " + path.string());
    os << doc.dump(2) << "\n";
}

nlohmann::ordered_json samples_json(const Grid& grid, const Interval& validity,
                                    const std::vector<std::pair<std::string, GridFn>>& cols) {
    nlohmann::ordered_json doc;
    std::vector<double> xs(grid.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = grid.node(i);
    doc["validity"] = {validity.lo, validity.hi};
    doc["x"] = xs;
    for (const auto& [name, f] : cols) {
        std::vector<double> re(f.size());
        std::vector<double> im(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            re[i] = f[i].real();
            im[i] = f[i].imag();
        }
        doc["columns"][name] = {{"re", re}, {"im", im}};
    }
    return doc;
}

void emit(const fs::path& dir, const std::string& stem, const std::string& format, const Grid& grid,
          const Interval& validity, const std::vector<std::pair<std::string, GridFn>>& cols, std::ostream& out) {
    const fs::path path = dir / (stem + (format == "json" ? ".json" : ".csv"));
    if (format == "json") write_json(path, samples_json(grid, validity, cols));
    else write_csv(path, grid, cols);
    out << "wrote " << path.string() << "\n";
}

Expr parse_field(const std::string& field, const std::string& text) {
    try {
        return expr::parse(text);
    } catch (const SyntaxError& e) {
        throw ConfigError(field, e.what());
    }
}

Expr coefficient_expr(const ProblemConfig& cfg, const std::string& name, const std::string& text) {
    const std::string prefix = "file:";
    if (text.rfind(prefix, 0) == 0) {
        const fs::path rel = trim(text.substr(prefix.size()));
        const fs::path path = rel.is_absolute() ? rel : cfg.base_dir / rel;
        return expr::sampled(ingest_samples(path, rel.string()), cfg.numeric_diff);
    }
    return parse_field(name, text);
}

BasisSet make_basis(const ProblemConfig& cfg, const Grid& grid, const SolveOptions& opts) {
    if (cfg.preset == "schrodinger") {
        return preset_schrodinger(coefficient_expr(cfg, "zeta", cfg.zeta), cfg.omega, grid, {}, opts);
    }
    if (cfg.preset == "orr") {
        const auto a = coefficient_exprs(cfg);
        return preset_orr_sommerfeld(a[1], a[3], grid, {}, opts);
    }
    return basis(CoeffVector(coefficient_exprs(cfg)), grid, {}, opts);
}

// Coefficients a_1..a_n of the equation the basis solves, for the oracles.
std::vector<Expr> equation_coefficients(const ProblemConfig& cfg) {
    if (cfg.preset == "schrodinger") {
        return schrodinger_coefficients(coefficient_expr(cfg, "zeta", cfg.zeta), cfg.omega);
    }
    return coefficient_exprs(cfg);
}

GridFn combine(const BasisSet& b, const std::vector<cplx>& initial) {
    std::vector<cplx> y(b.grid.size(), 0.0);
    for (std::size_t k = 0; k < b.psi.size(); ++k) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += initial[k] * b.psi[k][i];
    }
    return GridFn(b.grid, std::move(y), "y");
}

std::vector<cplx> require_initial(const ProblemConfig& cfg) {
    if (cfg.initial.empty()) throw ConfigError("initial", "missing; give " + std::to_string(cfg.order) + " values");
    return cfg.initial;
}

CompareReport compare(const ProblemConfig& cfg, const BasisSet& b, const GridFn& y) {
    std::vector<GridFn> a;
    for (const auto& e : equation_coefficients(cfg)) a.push_back(b.context->lower(e));
    const oracle::MatrixFn m = oracle::companion(a);
    const oracle::DysonResult dy = oracle::dyson(m, {cfg.tol, std::max(cfg.max_terms, 400)});
    const oracle::MatrixFn rk = oracle::rk4(m, 4 * b.grid.cells());

    CompareReport report;
    report.validity = b.validity;
    report.tolerance = cfg.compare_tol;
    for (const auto& d : b.diagnostics) report.terms_used.push_back(d.terms_used);
    report.oracles = {"dyson", "rk4"};
    const std::vector<std::pair<std::string, const oracle::MatrixFn*>> sources = {{"dyson", &dy.M}, {"rk4", &rk}};
    for (const auto& [name, mat] : sources) {
        double worst = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            cplx ref = 0.0;
            for (int k = 0; k < mat->n(); ++k) ref += cfg.initial[static_cast<std::size_t>(k)] * mat->at(0, k)[i];
            const double err = std::abs(y[i] - ref);
            worst = std::max(worst, err);
            if (err > report.max_abs_err) {
                report.max_abs_err = err;
                report.err_location = b.grid.node(i);
            }
        }
        report.oracle_errors[name] = worst;
    }
    report.pass = report.max_abs_err <= report.tolerance;
    return report;
}

nlohmann::ordered_json report_json(const CompareReport& r, const BasisSet& b) {
    nlohmann::ordered_json doc;
    doc["max_abs_err"] = r.max_abs_err;
    doc["err_location"] = r.err_location;
    doc["validity"] = {r.validity.lo, r.validity.hi};
    doc["terms_used"] = r.terms_used;
    doc["oracles"] = r.oracles;
    for (const auto& [name, e] : r.oracle_errors) doc["oracle_errors"][name] = e;
    doc["tolerance"] = r.tolerance;
    doc["pass"] = r.pass;
    auto& diags = doc["diagnostics"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < b.diagnostics.size(); ++k) {
        const auto& d = b.diagnostics[k];
        diags.push_back({{"member", k + 1},
                         {"terms_used", d.terms_used},
                         {"last_term_norm", d.last_term_norm},
                         {"apriori_bound", d.apriori_bound},
                         {"converged", d.converged}});
    }
    return doc;
}

std::vector<std::pair<std::string, GridFn>> basis_columns(const BasisSet& b) {
    std::vector<std::pair<std::string, GridFn>> cols;
    for (std::size_t k = 0; k < b.psi.size(); ++k) cols.emplace_back("psi" + std::to_string(k + 1), b.psi[k]);
    return cols;
}

}  // namespace

// ---------------------------------------------------------------------------

ProblemConfig parse_config(std::string_view text, const fs::path& base_dir) {
    std::map<std::string, std::string> kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (!kKeys.contains(key) && !is_coefficient_key(key)) throw ConfigError(key, "unknown key");
        if (!kv.emplace(key, value).second) throw ConfigError(key, "given twice");
    }

    ProblemConfig cfg;
    cfg.base_dir = base_dir;
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (auto v = get("preset")) {
        if (*v != "schrodinger" && *v != "orr") throw ConfigError("preset", "expected 'schrodinger' or 'orr'");
        cfg.preset = *v;
    }
    const int fixed_order = cfg.preset == "schrodinger" ? 2 : cfg.preset == "orr" ? 4 : 0;
    if (auto v = get("order")) {
        const long long n = integer_value("order", *v);
        if (n < 1 || n > 9) throw ConfigError("order", "must lie in 1..9");
        if (fixed_order != 0 && n != fixed_order) {
            throw ConfigError("order", "preset '" + cfg.preset + "' has order " + std::to_string(fixed_order));
        }
        cfg.order = static_cast<int>(n);
    } else if (fixed_order != 0) {
        cfg.order = fixed_order;
    } else {
        throw ConfigError("order", "missing");
    }

    for (const auto& [key, value] : kv) {
        if (is_coefficient_key(key)) cfg.coefficients[key] = value;
    }
    std::set<std::string> wanted;
    if (cfg.preset == "schrodinger") {
        if (!get("zeta")) throw ConfigError("zeta", "missing (required by preset 'schrodinger')");
        if (!get("omega")) throw ConfigError("omega", "missing (required by preset 'schrodinger')");
        cfg.zeta = *get("zeta");
        cfg.omega = constant_value("omega", *get("omega"));
    } else {
        wanted = cfg.preset == "orr" ? std::set<std::string>{"a2", "a4"} : std::set<std::string>{};
        if (cfg.preset.empty()) {
            for (int k = 1; k <= cfg.order; ++k) wanted.insert("a" + std::to_string(k));
        }
        for (const auto& name : wanted) {
            if (!cfg.coefficients.contains(name)) {
                throw ConfigError(name, "missing coefficient " + name + " for order " + std::to_string(cfg.order));
            }
        }
    }
    for (const auto& [name, value] : cfg.coefficients) {
        if (!wanted.contains(name)) {
            throw ConfigError(name, "not used by " + (cfg.preset.empty() ? "order " + std::to_string(cfg.order)
                                                                        : "preset '" + cfg.preset + "'"));
        }
    }
    // Surface syntax errors under the field that holds them.
    for (const auto& [name, value] : cfg.coefficients) {
        if (value.rfind("file:", 0) != 0) (void)parse_field(name, value);
    }
    if (!cfg.zeta.empty() && cfg.zeta.rfind("file:", 0) != 0) (void)parse_field("zeta", cfg.zeta);
    if (cfg.preset != "schrodinger") {
        if (get("zeta")) throw ConfigError("zeta", "only used by preset 'schrodinger'");
        if (get("omega")) throw ConfigError("omega", "only used by preset 'schrodinger'");
    }

    if (auto v = get("interval")) cfg.interval = interval_value("interval", *v);
    if (auto v = get("grid")) {
        const long long g = integer_value("grid", *v);
        if (g < 16 || g % 2 != 0) throw ConfigError("grid", "must be an even integer >= 16");
        cfg.grid = static_cast<std::size_t>(g);
    }
    if (auto v = get("tol")) {
        cfg.tol = real_value("tol", *v);
        if (!(cfg.tol > 0.0)) throw ConfigError("tol", "must be positive");
    }
    if (auto v = get("max_terms")) {
        const long long m = integer_value("max_terms", *v);
        if (m < 1) throw ConfigError("max_terms", "must be >= 1");
        cfg.max_terms = static_cast<int>(m);
    }
    if (auto v = get("compare_tol")) {
        cfg.compare_tol = real_value("compare_tol", *v);
        if (!(cfg.compare_tol > 0.0)) throw ConfigError("compare_tol", "must be positive");
    }
    if (auto v = get("numeric_diff")) {
        if (*v != "true" && *v != "false") throw ConfigError("numeric_diff", "expected true or false");
        cfg.numeric_diff = *v == "true";
    }
    if (auto v = get("initial")) {
        const auto parts = split(*v, ',');
        for (std::size_t i = 0; i < parts.size(); ++i) {
            cfg.initial.push_back(constant_value("initial[" + std::to_string(i) + "]", parts[i]));
        }
        if (static_cast<int>(cfg.initial.size()) != cfg.order) {
            throw ConfigError("initial", "expected " + std::to_string(cfg.order) + " values, got " +
                                             std::to_string(cfg.initial.size()));
        }
    }
    return cfg;
}

ProblemConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::shared_ptr<const expr::SampleTable> ingest_samples(const fs::path& path, std::string id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read sample table " + path.string());
    auto table = std::make_shared<expr::SampleTable>();
    table->id = id.empty() ? path.string() : std::move(id);
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto cols = split(line, ',');
        std::vector<double> v;
        bool numeric = cols.size() == 2 || cols.size() == 3;
        for (const auto& c : cols) {
            if (!numeric) break;
            char* end = nullptr;
            const double d = std::strtod(c.c_str(), &end);
            numeric = !c.empty() && end == c.c_str() + c.size() && std::isfinite(d);
            v.push_back(d);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected 2 or 3 numeric columns");
        }
        first = false;
        if (!table->x.empty() && !(v[0] > table->x.back())) {
            throw NonMonotoneAbscissae(path.string() + ":" + std::to_string(lineno) +
                                       ": abscissae must increase strictly");
        }
        table->x.push_back(v[0]);
        table->y.emplace_back(v[1], v.size() == 3 ? v[2] : 0.0);
    }
    if (table->x.size() < 4) throw InputError(path.string() + ": a sample table needs at least 4 rows");
    return table;
}

std::vector<Expr> coefficient_exprs(const ProblemConfig& cfg) {
    std::map<std::string, Expr> parsed;
    for (const auto& [name, text] : cfg.coefficients) parsed[name] = coefficient_expr(cfg, name, text);
    std::vector<Expr> out;
    for (int k = 1; k <= cfg.order; ++k) {
        const std::string name = "a" + std::to_string(k);
        auto it = parsed.find(name);
        out.push_back(it == parsed.end() ? expr::constant(0.0) : expr::substitute(it->second, parsed));
    }
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Explicit series solutions of linear ODEs with variable coefficients", "multexode"};
    std::string command;
    std::string config_path;
    std::optional<double> tol;
    std::optional<std::size_t> grid_cells;
    std::string interval_text;
    bool numeric_diff = false;
    std::string output_dir = ".";
    std::string format = "csv";
    app.add_option("command", command, "solve | basis | compare | preset")
        ->required()
        ->check(CLI::IsMember({"solve", "basis", "compare", "preset"}));
    app.add_option("--config", config_path, "problem file")->required();
    app.add_option("--tol", tol, "series truncation tolerance");
    app.add_option("--grid", grid_cells, "number of grid cells (even, >= 16)");
    app.add_option("--interval", interval_text, "LO:HI, must contain 0");
    app.add_flag("--numeric-diff", numeric_diff, "allow finite-difference derivatives of sampled data");
    app.add_option("--output", output_dir, "output directory");
    app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        ProblemConfig cfg = load_config(config_path);
        if (tol) {
            if (!(*tol > 0.0)) throw ConfigError("--tol", "must be positive");
            cfg.tol = *tol;
        }
        if (grid_cells) cfg.grid = *grid_cells;
        if (!interval_text.empty()) cfg.interval = interval_value("--interval", interval_text);
        if (numeric_diff) cfg.numeric_diff = true;
        if (command == "preset" && cfg.preset.empty()) throw ConfigError("preset", "missing for the preset command");

        const Grid grid = Grid::uniform(cfg.interval, cfg.grid);
        SolveOptions opts;
        opts.lower.series = {cfg.tol, cfg.max_terms};
        const fs::path dir = output_dir;
        fs::create_directories(dir);

        if (command == "basis" || command == "preset") {
            const BasisSet b = make_basis(cfg, grid, opts);
            emit(dir, "basis", format, b.grid, b.validity, basis_columns(b), out);
            if (command == "preset" && !cfg.initial.empty()) {
                emit(dir, "solution", format, b.grid, b.validity, {{"y", combine(b, cfg.initial)}}, out);
            }
            return 0;
        }
        const std::vector<cplx> initial = require_initial(cfg);
        const BasisSet b = make_basis(cfg, grid, opts);
        const GridFn y = combine(b, initial);
        if (command == "solve") {
            emit(dir, "solution", format, b.grid, b.validity, {{"y", y}}, out);
            return 0;
        }
        const CompareReport report = compare(cfg, b, y);
        write_json(dir / "compare.json", report_json(report, b));
        out << "wrote " << (dir / "compare.json").string() << "\n";
        out << "max_abs_err " << number(report.max_abs_err) << " at x = " << number(report.err_location)
            << (report.pass ? " (pass)" : " (FAIL)") << "\n";
        return report.pass ? 0 : 3;
    } catch (const InputError& e) {
        err << "multexode: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "multexode: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "multexode: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "multexode: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace multexode::cli
