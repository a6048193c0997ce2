#include "multexode/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

namespace multexode {

using expr::Expr;

Permutation::Permutation(int n, int shift) : n_(n), shift_(((shift % n) + n) % n) {
    if (n < 1) throw std::invalid_argument("permutation arity must be >= 1");
}

int Permutation::operator()(int j) const { return ((j - 1 - shift_) % n_ + n_) % n_ + 1; }

int Permutation::inverse(int j) const { return (j - 1 + shift_) % n_ + 1; }

namespace {

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned t = requested;
    if (t == 0) {
        if (const char* env = std::getenv("MULTEXODE_THREADS")) {
            try {
                t = static_cast<unsigned>(std::max(1, std::stoi(env)));
            } catch (const std::exception&) {
                t = 1;
            }
        } else {
            t = std::max(1U, std::thread::hardware_concurrency());
        }
    }
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

// Lowers every expression, spreading the work over `threads` workers.
std::vector<GridFn> lower_all(LowerContext& ctx, const std::vector<Expr>& exprs, unsigned threads) {
    std::vector<std::optional<GridFn>> slots(exprs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < exprs.size(); i = next++) {
            try {
                slots[i] = ctx.lower(exprs[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<GridFn> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace

std::vector<Expr> rotated_members(const std::vector<Expr>& phi) {
    const int n = static_cast<int>(phi.size()) - 1;
    if (n < 1) throw std::invalid_argument("rotation needs at least one auxiliary function");
    std::vector<Expr> members;
    for (int k = 1; k <= n; ++k) {
        const Permutation eta(n, k - 1);
        std::vector<Expr> fs;
        for (int j = 1; j <= n; ++j) fs.push_back(phi[static_cast<std::size_t>(eta(j))]);
        members.push_back(expr::trig(std::move(fs), eta.inverse(n)));
    }
    return members;
}

BasisSet assemble_basis(std::vector<Expr> phi, std::vector<Expr> members, const std::vector<Expr>& leading,
                        const Grid& grid, const Env& env, const SolveOptions& opts) {
    const unsigned threads = worker_count(opts.threads, members.size());
    std::vector<Expr> phi_roots(phi.begin() + 1, phi.end());

    Realization r = realize(phi_roots, leading, grid, env, opts.lower);
    std::vector<GridFn> psi;
    try {
        psi = lower_all(*r.context, members, threads);
    } catch (const NotConverged&) {
        // A member series needs a smaller interval than the auxiliary functions do.
        std::vector<Expr> roots = phi_roots;
        roots.insert(roots.end(), members.begin(), members.end());
        r = realize(roots, leading, grid, env, opts.lower);
        psi = lower_all(*r.context, members, threads);
    }

    std::vector<SeriesDiagnostics> diagnostics;
    for (std::size_t k = 0; k < members.size(); ++k) {
        psi[k] = psi[k].with_label("psi" + std::to_string(k + 1));
        auto diag = r.context->series_diagnostics(members[k]);
        if (!diag) {
            diag = SeriesDiagnostics{};
            diag->converged = true;
            diag->converged_within = r.grid.interval();
        }
        diagnostics.push_back(*diag);
    }
    BasisSet b{static_cast<int>(members.size()), std::move(members), std::move(psi), std::move(phi),
               std::move(diagnostics), r.grid, r.grid.interval(), r.context};
    return b;
}

BasisSet basis(const CoeffVector& a, const Grid& grid, const Env& env, const SolveOptions& opts) {
    const int n = a.order();
    if (n == 1) {
        return assemble_basis({Expr{}, a[1]}, {expr::exp_prim(a[1], +1)}, {}, grid, env, opts);
    }
    SymbolicChain chain = build_symbolic_chain(a);
    std::vector<Expr> members = rotated_members(chain.phi);
    return assemble_basis(chain.phi, std::move(members), chain.leading, grid, env, opts);
}

Solution solve_ivp(const IVProblem& p, const Grid& grid, const Env& env, const SolveOptions& opts) {
    if (p.order() < 1) throw InputError("problem order must be >= 1");
    if (static_cast<int>(p.initial.size()) != p.order()) {
        throw InputError("expected " + std::to_string(p.order()) + " initial values, got " +
                         std::to_string(p.initial.size()));
    }
    BasisSet b = basis(CoeffVector(p.coefficients), grid, env, opts);
    std::vector<cplx> y(b.grid.size(), 0.0);
    for (int k = 0; k < b.n; ++k) {
        const cplx w = p.initial[static_cast<std::size_t>(k)];
        if (w == cplx(0.0)) continue;
        const GridFn& psi = b.psi[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += w * psi[i];
    }
    GridFn sol(b.grid, std::move(y), "y");
    return {std::move(sol), std::move(b)};
}

std::vector<Expr> schrodinger_coefficients(const Expr& zeta, cplx omega) {
    return {expr::mul({expr::constant(-1.0), expr::div(expr::differentiate(zeta), zeta)}),
            expr::constant(-omega * omega)};
}

BasisSet preset_schrodinger(const Expr& zeta, cplx omega, const Grid& grid, const Env& env, const SolveOptions& opts) {
    const cplx zeta0 = lower(zeta, env, grid.restricted(std::min<std::size_t>(grid.neg_cells(), 2),
                                                        std::min<std::size_t>(grid.pos_cells(), 2)),
                             opts.lower)
                           .at_zero();
    if (!(std::abs(zeta0) > kValidityFloor)) {
        throw DegenerateLeading("impedance vanishes at x = 0");
    }
    const Expr a2 = expr::constant(-omega * omega);
    const Expr weighted = expr::mul({a2, expr::div(zeta, expr::constant(zeta0))});
    const Expr inverse = expr::div(expr::constant(zeta0), zeta);
    std::vector<Expr> phi{Expr{}, weighted, inverse};
    std::vector<Expr> members{expr::trig({weighted, inverse}, 2), expr::trig({inverse, weighted}, 1)};
    return assemble_basis(std::move(phi), std::move(members), {}, grid, env, opts);
}

BasisSet preset_orr_sommerfeld(const Expr& a2, const Expr& a4, const Grid& grid, const Env& env,
                               const SolveOptions& opts) {
    const Expr c = expr::trig({a2, expr::constant(1.0)}, 2);
    std::vector<Expr> phi{Expr{}, expr::mul({a4, c}), expr::int_pow(c, -2), c, expr::constant(1.0)};
    std::vector<Expr> members = rotated_members(phi);
    return assemble_basis(std::move(phi), std::move(members), {}, grid, env, opts);
}

}  // namespace multexode
