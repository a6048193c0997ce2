// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "multexode/auxiliary.hpp"
#include "multexode/cli.hpp"
#include "multexode/multex.hpp"
#include "multexode/oracle.hpp"
#include "multexode/parse.hpp"
#include "multexode/solver.hpp"
#include "oracles.hpp"

using namespace multexode;
using expr::Expr;
using expr::parse;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Records `value <= limit` under `what`; the detail lists every check.
class Check {
public:
    void le(const std::string& what, double value, double limit) {
        const bool ok = value <= limit;
        add(what + " = " + sci(value) + (ok ? " <= " : " > ") + sci(limit));
        pass_ = pass_ && ok;
    }
    void fail(const std::string& why) {
        add(why);
        pass_ = false;
    }
    [[nodiscard]] Outcome outcome() const { return {pass_, detail_}; }

private:
    void add(const std::string& part) { detail_ += (detail_.empty() ? "" : "; ") + part; }

    bool pass_ = true;
    std::string detail_;
};

Grid grid(double lo, double hi, std::size_t cells) { return Grid::uniform({lo, hi}, cells); }

template <class F>
double err_vs(const GridFn& f, F g) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - cplx(g(f.grid().node(i)))));
    return m;
}

std::string coeff_text(const oracles::SmoothCoeff& c) {
    std::ostringstream os;
    os.precision(17);
    os << c.c0 << " + " << c.c1 << "*x + " << c.c2 << "*sin(" << c.w << "*x + " << c.p << ")";
    return os.str();
}

struct RandomProblem {
    std::vector<Expr> a;
    std::vector<cplx> initial;
};

std::vector<RandomProblem> random_problems(int n, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<RandomProblem> out;
    for (int t = 0; t < count; ++t) {
        RandomProblem p;
        for (int k = 0; k < n; ++k) p.a.push_back(parse(coeff_text(oracles::random_coeff(rng))));
        for (int k = 0; k < n; ++k) p.initial.emplace_back(u(rng), u(rng));
        out.push_back(std::move(p));
    }
    return out;
}

GridFn first_row_times(const oracle::MatrixFn& M, const std::vector<cplx>& ic) {
    GridFn y = GridFn::constant(M.grid(), 0.0);
    for (std::size_t k = 0; k < ic.size(); ++k) y = y + ic[k] * M.at(0, static_cast<int>(k));
    return y;
}

// Fourth-order second difference; one-sided six-point stencils at the two nodes next to each end.
cplx second_derivative(const GridFn& f, std::size_t i) {
    static constexpr double central[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    static constexpr double edge[6] = {15.0 / 4, -77.0 / 6, 107.0 / 6, -13.0, 61.0 / 12, -5.0 / 6};
    const double h2 = f.grid().step() * f.grid().step();
    const std::size_t n = f.size();
    cplx acc = 0.0;
    if (i >= 2 && i + 2 < n) {
        for (int k = 0; k < 5; ++k) acc += central[k] * f[i - 2 + static_cast<std::size_t>(k)];
    } else if (i < 2) {
        for (int k = 0; k < 6; ++k) acc += edge[k] * f[i + static_cast<std::size_t>(k)];
    } else {
        for (int k = 0; k < 6; ++k) acc += edge[k] * f[i - static_cast<std::size_t>(k)];
    }
    return acc / h2;
}

// ---------------------------------------------------------------------------

Outcome exponential_reduction() {
    Check c;
    const Grid g = grid(-1, 1, 2000);
    const GridFn f = GridFn::sample(g, [](double x) { return std::sin(x); });
    const std::vector<GridFn> fs{f, f, f};
    const auto r = multex::multex_E(fs, {1e-12, 200});
    c.le("max |E - exp(1 - cos x)|", err_vs(r.value, [](double x) { return std::exp(1.0 - std::cos(x)); }), 1e-9);
    return c.outcome();
}

Outcome trig_reduction() {
    Check c;
    const Grid g = grid(-1, 1, 2000);
    const std::vector<GridFn> ones{GridFn::constant(g, 1.0), GridFn::constant(g, 1.0)};
    const auto fam = multex::trig_family(ones);
    c.le("cosh error", err_vs(fam.classes[1], [](double x) { return std::cosh(x); }), 1e-9);
    c.le("sinh error", err_vs(fam.classes[0], [](double x) { return std::sinh(x); }), 1e-9);
    const BasisSet b = preset_schrodinger(parse("1"), 2.0, g);
    if (!(b.validity == g.interval())) c.fail("Schroedinger validity shrank");
    c.le("cos 2x error", err_vs(b.psi[0], [](double x) { return std::cos(2 * x); }), 1e-8);
    c.le("sin(2x)/2 error", err_vs(b.psi[1], [](double x) { return std::sin(2 * x) / 2; }), 1e-8);
    return c.outcome();
}

Outcome derivative_relations() {
    Check c;
    // h = 1e-4 on [-1, 1].
    const Grid g = grid(-1, 1, 20000);
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<GridFn> fs;
        for (int k = 0; k < 3; ++k) {
            const auto s = oracles::random_coeff(rng);
            std::uniform_real_distribution<double> q(-0.5, 0.5);
            const double quad = q(rng);
            fs.push_back(GridFn::sample(g, [&](double x) { return s(x) + quad * x * x; }));
        }
        const auto fam = multex::trig_family(fs);
        for (int j = 1; j <= 3; ++j) {
            const GridFn& t = fam.classes[static_cast<std::size_t>(j - 1)];
            const GridFn& prev = fam.classes[static_cast<std::size_t>(j == 1 ? 2 : j - 2)];
            const GridFn& fj = fs[static_cast<std::size_t>(j - 1)];
            for (std::size_t i = 1; i + 1 < g.size(); ++i) {
                const cplx lhs = (t[i + 1] - t[i - 1]) / (2 * g.step());
                const cplx rhs = fj[i] * prev[i];
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1.0));
            }
        }
    }
    c.le("max relative error of T' = f_j T_{j-1}", worst, 1e-5);
    return c.outcome();
}

Outcome kronecker_initial_values() {
    Check c;
    const Grid g = grid(-0.5, 0.5, 1000);
    double symbolic = 0.0;
    double numeric = 0.0;
    for (int n = 2; n <= 4; ++n) {
        for (const auto& p : random_problems(n, 3, 200 + static_cast<std::uint64_t>(n))) {
            const BasisSet b = basis(CoeffVector(p.a), g);
            for (int k = 1; k <= n; ++k) {
                const auto uk = static_cast<std::size_t>(k - 1);
                GridFn d = b.psi[uk];
                for (int j = 1; j <= n; ++j) {
                    const double want = j == k ? 1.0 : 0.0;
                    const cplx exact = b.context->lower(expr::differentiate(b.members[uk], j - 1)).at_zero();
                    symbolic = std::max(symbolic, std::abs(exact - want));
                    numeric = std::max(numeric, std::abs(d.at_zero() - want));
                    d = derivative_fd4(d);
                }
            }
        }
    }
    c.le("max |psi_k^(j-1)(0) - delta_jk| (symbolic)", symbolic, 1e-6);
    c.le("max |psi_k^(j-1)(0) - delta_jk| (finite differences)", numeric, 1e-6);
    return c.outcome();
}

Outcome introductory_example() {
    Check c;
    const Grid g = grid(-1, 1, 2000);
    auto alpha = [](double x) { return 1.0 + x * x / 4; };
    auto beta = [](double x) { return x; };
    const GridFn gamma = lower(expr::trig({parse("1 + x^2/4"), parse("1")}, 2), {}, g);
    const GridFn a = GridFn::sample(g, alpha);
    double residual = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        residual = std::max(residual, std::abs(second_derivative(gamma, i) - a[i] * gamma[i]));
    }
    c.le("sup |gamma'' - alpha gamma|", residual, 1e-6);

    const Solution s = solve_ivp({{parse("0"), parse("1 + x^2/4"), parse("x")}, {1.0, 0.0, 0.0}}, g);
    // The series with integrand beta(s1) gamma(s1) gamma(s3) / gamma(s2)^2, as the cyclic system
    // A' = gamma C, C' = B / gamma^2, B' = beta gamma A, integrated together with gamma'' = alpha gamma.
    oracles::Rhs rhs = [&](double x, const oracles::State& v) {
        const cplx gm = v[0];
        return oracles::State{v[1], alpha(x) * gm, beta(x) * gm * v[4], v[2] / (gm * gm), gm * v[3]};
    };
    std::vector<double> xs(s.y.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = s.y.grid().node(i);
    const auto ref = oracles::trajectory(rhs, {1.0, 0.0, 0.0, 0.0, 1.0}, xs, 5e-4);
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) worst = std::max(worst, std::abs(s.y[i] - ref[i][4]));
    c.le("max |y - integral series| on [" + sci(s.basis.validity.lo) + ", " + sci(s.basis.validity.hi) + "]", worst,
         1e-7);
    return c.outcome();
}

Outcome basis_vs_oracles(double& seconds) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    const Grid g = grid(-0.75, 0.75, 3000);
    double worst_dyson = 0.0;
    double worst_rk4 = 0.0;
    double narrowest = 1.5;
    for (int n = 2; n <= 4; ++n) {
        for (const auto& p : random_problems(n, 20, 600 + static_cast<std::uint64_t>(n))) {
            SolveOptions opts;
            opts.lower.series = {1e-12, 200};
            const Solution s = solve_ivp({p.a, p.initial}, g, {}, opts);
            narrowest = std::min(narrowest, s.basis.validity.width());
            std::vector<GridFn> a;
            for (const auto& e : p.a) a.push_back(s.basis.context->lower(e));
            const oracle::MatrixFn m = oracle::companion(a);
            const GridFn dy = first_row_times(oracle::dyson(m, {1e-13, 400}).M, p.initial);
            const GridFn rk = first_row_times(oracle::rk4(m, 2 * s.y.grid().cells()), p.initial);
            worst_dyson = std::max(worst_dyson, max_abs_diff(s.y, dy));
            worst_rk4 = std::max(worst_rk4, max_abs_diff(s.y, rk));
        }
    }
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.le("max |y - Dyson|", worst_dyson, 1e-6);
    c.le("max |y - RK4|", worst_rk4, 1e-6);
    c.le("runtime seconds", seconds, 180.0);
    if (narrowest < 1.5 - 1e-9) c.fail("a validity interval shrank to width " + sci(narrowest));
    return c.outcome();
}

Outcome closed_form_cross_check() {
    Check c;
    const Grid g = grid(-0.75, 0.75, 3000);
    double worst = 0.0;
    for (int n = 2; n <= 4; ++n) {
        for (const auto& p : random_problems(n, 20, 600 + static_cast<std::uint64_t>(n))) {
            const CoeffVector a(p.a);
            const AuxChain chain = build_aux_chain(a, g);
            const auto closed = closed_form_aux(a);
            for (int k = 1; k <= n; ++k) {
                const auto uk = static_cast<std::size_t>(k);
                worst = std::max(worst, max_abs_diff(chain.realized[uk], chain.context->lower(closed[uk])));
            }
        }
    }
    c.le("max |recursion - closed form|", worst, 1e-7);
    return c.outcome();
}

Outcome orr_sommerfeld() {
    Check c;
    const Grid g = grid(-1, 1, 2000);
    {
        const BasisSet b = preset_orr_sommerfeld(parse("1"), parse("-1"), g);
        const auto exact = oracles::exponential_basis({0.0, 1.0, 0.0, -1.0});
        double worst = 0.0;
        for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, err_vs(b.psi[k], [&](double x) { return exact(k, x); }));
        c.le("constant coefficients vs characteristic roots", worst, 1e-7);
    }
    {
        const Grid h = grid(-0.75, 0.75, 1500);
        const Expr a2 = parse("1 + x/2 - 0.3*cos(2*x)");
        const Expr a4 = parse("cos(x) - 0.5 + 0.2*x^2");
        const BasisSet b = preset_orr_sommerfeld(a2, a4, h);
        const oracle::MatrixFn m = oracle::companion(
            {GridFn::constant(b.grid, 0.0), b.context->lower(a2), GridFn::constant(b.grid, 0.0), b.context->lower(a4)});
        const auto d = oracle::dyson(m, {1e-13, 400});
        double worst = 0.0;
        for (int k = 0; k < 4; ++k) worst = std::max(worst, max_abs_diff(b.psi[static_cast<std::size_t>(k)], d.M.at(0, k)));
        c.le("smooth coefficients vs Dyson", worst, 1e-6);
    }
    {
        const BasisSet b = preset_orr_sommerfeld(parse("0"), parse("0"), g);
        const std::vector<std::function<double(double)>> poly{[](double) { return 1.0; }, [](double x) { return x; },
                                                              [](double x) { return x * x / 2; },
                                                              [](double x) { return x * x * x / 6; }};
        double worst = 0.0;
        for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, err_vs(b.psi[k], poly[k]));
        c.le("zero coefficients vs {1, x, x^2/2, x^3/6}", worst, 1e-13);
    }
    return c.outcome();
}

Outcome dyson_bound() {
    Check c;
    std::mt19937_64 rng(900);
    const Grid g = grid(-1, 1, 400);
    std::vector<GridFn> e;
    for (int k = 0; k < 9; ++k) e.push_back(GridFn::sample(g, oracles::random_coeff(rng)));
    const oracle::MatrixFn m(3, e);
    const auto full = oracle::dyson(m, {1e-15, 400}, true);
    const double G = full.g_integral;
    double ratio = 0.0;
    double fact = 1.0;
    for (std::size_t j = 1; j <= full.term_norms.size(); ++j) {
        fact *= static_cast<double>(j);
        const double bound = std::pow(3 * G, static_cast<double>(j)) / 3.0 / fact;
        ratio = std::max(ratio, full.term_norms[j - 1] / bound);
    }
    c.le("max term norm / factorial bound", ratio, 1.0);
    // Truncate after J terms and compare the bound with the measured remainder.
    double tail_ratio = 0.0;
    for (int J = 1; J <= 12; ++J) {
        oracle::MatrixFn partial = oracle::MatrixFn::identity(g, 3);
        std::vector<GridFn> sum(partial.entries());
        for (int j = 0; j < J; ++j) {
            for (std::size_t q = 0; q < 9; ++q) sum[q] = sum[q] + full.terms->at(static_cast<std::size_t>(j)).entries()[q];
        }
        double tail = 0.0;
        for (std::size_t q = 0; q < 9; ++q) tail = std::max(tail, max_abs_diff(sum[q], full.M.entries()[q]));
        tail_ratio = std::max(tail_ratio, tail / oracle::truncation_bound(G, 3, J));
    }
    c.le("max measured tail / truncation_bound", tail_ratio, 1.0);
    c.le("|bound(1, n=1, J=0) - (e - 1)|", std::abs(oracle::truncation_bound(1.0, 1, 0) - (std::exp(1.0) - 1.0)), 1e-12);
    return c.outcome();
}

Outcome trig_equivalence() {
    Check c;
    std::mt19937_64 rng(1000);
    const Grid g = grid(-1, 1, 400);
    double worst = 0.0;
    for (int n = 2; n <= 5; ++n) {
        for (int trial = 0; trial < 3; ++trial) {
            std::vector<GridFn> fs;
            for (int k = 0; k < n; ++k) fs.push_back(GridFn::sample(g, oracles::random_coeff(rng, 0.66)));
            for (int j = 1; j <= n; ++j) worst = std::max(worst, multex::trig_equiv_check({fs, j}));
        }
    }
    c.le("max trig_equiv_check", worst, 1e-9);
    return c.outcome();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    Check c;
    const fs::path corpus = MULTEXODE_CORPUS_DIR;
    const fs::path root = fs::temp_directory_path() / ("multexode_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    int files = 0;
    for (const auto& entry : fs::directory_iterator(corpus)) {
        if (entry.path().extension() != ".cfg") continue;
        const std::string cfg = entry.path().string();
        const std::string stem = entry.path().stem().string();
        const bool preset = slurp(entry.path()).find("preset") != std::string::npos;
        for (const char* cmd : {"solve", "basis", "compare", "preset"}) {
            if (std::string(cmd) == "preset" && !preset) continue;
            for (const char* format : {"csv", "json"}) {
                std::string outs[2];
                for (int rep = 0; rep < 2; ++rep) {
                    const fs::path dir = root / (stem + "_" + cmd + "_" + format + "_" + std::to_string(rep));
                    const std::string dir_s = dir.string();
                    const char* argv[] = {"multexode", cmd, "--config", cfg.c_str(), "--output", dir_s.c_str(),
                                          "--format", format};
                    std::ostringstream out;
                    std::ostringstream err;
                    const int code = cli::run(8, argv, out, err);
                    if (code != 0) c.fail(stem + " " + cmd + " exited " + std::to_string(code) + ": " + err.str());
                    for (const auto& f : fs::directory_iterator(dir)) outs[rep] += f.path().filename().string() + "\n" + slurp(f.path());
                }
                ++files;
                if (outs[0] != outs[1]) c.fail(stem + " " + cmd + " " + format + " output differs between runs");
                if (outs[0].empty()) c.fail(stem + " " + cmd + " wrote nothing");
            }
        }
    }
    fs::remove_all(root);
    c.le("differing runs out of " + std::to_string(files), 0.0, 0.0);
    return c.outcome();
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    double seconds6 = 0.0;
    const std::vector<Criterion> criteria{
        {1, "exponential reduction", exponential_reduction},
        {2, "trig reduction", trig_reduction},
        {3, "derivative relations", derivative_relations},
        {4, "Kronecker initial values", kronecker_initial_values},
        {5, "introductory third-order example", introductory_example},
        {6, "basis solutions vs Dyson and RK4", [&] { return basis_vs_oracles(seconds6); }},
        {7, "recursion vs closed forms", closed_form_cross_check},
        {8, "Orr-Sommerfeld", orr_sommerfeld},
        {9, "Dyson bound", dyson_bound},
        {10, "equivalence of trig definitions", trig_equivalence},
        {11, "determinism", determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
