#include "multexode/auxiliary.hpp"

#include <stdexcept>

namespace multexode {

using expr::Expr;

CoeffVector::CoeffVector(std::vector<Expr> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("coefficient vector needs order >= 1");
    a_.reserve(coeffs.size() + 1);
    a_.push_back(expr::constant(-1.0));
    for (auto& c : coeffs) a_.push_back(std::move(c));
}

namespace {

// D^0 f, D^1 f, ..., D^order f.
std::vector<Expr> derivative_table(const Expr& f, int order) {
    std::vector<Expr> out{f};
    for (int s = 1; s <= order; ++s) out.push_back(expr::differentiate(out.back()));
    return out;
}

double binomial(int r, int q) {
    double c = 1.0;
    for (int i = 1; i <= q; ++i) c = c * static_cast<double>(r - q + i) / static_cast<double>(i);
    return c;
}

Expr solve_aux_impl(const AuxOde& ode, const std::string& label, std::vector<Expr>& leading);

SymbolicChain build_chain_impl(const CoeffVector& a, const std::string& prefix, std::vector<Expr>& leading) {
    const int n = a.order();
    if (n < 2) throw std::invalid_argument("auxiliary chain needs order >= 2");
    SymbolicChain chain;
    chain.n = n;
    chain.beta.assign(static_cast<std::size_t>(n + 2), ExprVector{});
    chain.phi.assign(static_cast<std::size_t>(n + 1), Expr{});
    chain.odes.assign(static_cast<std::size_t>(n + 1), AuxOde{});

    ExprVector start(static_cast<std::size_t>(n + 1), expr::constant(0.0));
    start.back() = expr::constant(1.0);
    chain.beta[static_cast<std::size_t>(n + 1)] = std::move(start);

    for (int k = n; k >= 2; --k) {
        const auto uk = static_cast<std::size_t>(k);
        AuxOde ode = extract_aux_ode(a, chain.beta[uk + 1], k - 1);
        if (!ode.leading.as_constant()) leading.push_back(ode.leading);
        chain.phi[uk] = solve_aux_impl(ode, prefix + std::to_string(k), leading);
        chain.odes[uk] = std::move(ode);

        ExprVector scaled = chain.beta[uk + 1];
        for (auto& entry : scaled) entry = expr::mul({chain.phi[uk], entry});
        if (k > 2) {
            chain.beta[uk] = apply_scriptD(scaled);
            continue;
        }
        // beta_2 feeds no further equation; coefficients without symbolic
        // derivatives may leave it unavailable.
        try {
            chain.beta[uk] = apply_scriptD(scaled);
        } catch (const NonDifferentiable&) {
            chain.beta[uk].clear();
        }
    }

    std::vector<Expr> product;
    for (int k = 2; k <= n; ++k) product.push_back(chain.phi[static_cast<std::size_t>(k)]);
    chain.phi[1] = expr::div(a[n], expr::mul(std::move(product)));
    return chain;
}

Expr solve_aux_impl(const AuxOde& ode, const std::string& label, std::vector<Expr>& leading) {
    const int m = ode.order;
    Expr base;
    if (m == 1) {
        base = expr::exp_prim(ode.b[0], +1);
    } else {
        // The first basis member of the auxiliary equation: T(phi_1..phi_m; m).
        const SymbolicChain sub = build_chain_impl(CoeffVector(ode.b), label + "_", leading);
        std::vector<Expr> fs(sub.phi.begin() + 1, sub.phi.end());
        base = expr::trig(std::move(fs), m);
    }
    return expr::aux(expr::make_aux(label, base, ode.b), 0);
}

}  // namespace

ExprVector apply_scriptD(const ExprVector& v) {
    const std::size_t size = v.size();
    std::vector<std::vector<Expr>> d(size);
    for (std::size_t p = 0; p < size; ++p) {
        // Position p+1 is differentiated at most p-1 times.
        d[p] = derivative_table(v[p], p >= 1 ? static_cast<int>(p) - 1 : 0);
    }
    ExprVector out(size, expr::constant(0.0));
    for (std::size_t i = 0; i < size; ++i) {
        std::vector<Expr> terms;
        for (std::size_t m = i + 1; m < size; ++m) terms.push_back(d[m][m - i - 1]);
        out[i] = expr::add(std::move(terms));
    }
    return out;
}

AuxOde extract_aux_ode(const CoeffVector& a, const ExprVector& beta, int expected_order) {
    const int n = a.order();
    if (static_cast<int>(beta.size()) != n + 1) {
        throw std::invalid_argument("beta must have length n + 1");
    }
    int t = 0;
    for (int p = n + 1; p >= 1; --p) {
        if (!beta[static_cast<std::size_t>(p - 1)].is_zero()) {
            t = p;
            break;
        }
    }
    const int m = t - 2;
    if (m < 1 || (expected_order > 0 && m != expected_order)) {
        throw DegenerateLeading("auxiliary equation has order " + std::to_string(std::max(m, 0)) +
                                (expected_order > 0 ? ", expected " + std::to_string(expected_order) : std::string()));
    }

    std::vector<std::vector<Expr>> d(static_cast<std::size_t>(t + 1));
    for (int p = 2; p <= t; ++p) {
        d[static_cast<std::size_t>(p)] = derivative_table(beta[static_cast<std::size_t>(p - 1)], p - 2);
    }

    // c_q multiplies u^(q) in a^t D(u beta).
    std::vector<Expr> c(static_cast<std::size_t>(m + 1));
    for (int q = 0; q <= m; ++q) {
        std::vector<Expr> terms;
        for (int i = 1; i <= t - 1; ++i) {
            for (int p = i + 1; p <= t; ++p) {
                const int r = p - i - 1;
                if (q > r) continue;
                const Expr& dp = d[static_cast<std::size_t>(p)][static_cast<std::size_t>(r - q)];
                if (dp.is_zero()) continue;
                terms.push_back(expr::mul({expr::constant(binomial(r, q)), a[i - 1], dp}));
            }
        }
        c[static_cast<std::size_t>(q)] = expr::add(std::move(terms));
    }

    AuxOde ode;
    ode.order = m;
    ode.leading = beta[static_cast<std::size_t>(t - 1)];
    for (int i = 1; i <= m; ++i) {
        ode.b.push_back(expr::div(c[static_cast<std::size_t>(m - i)], ode.leading));
    }
    return ode;
}

Expr solve_aux_ode(const AuxOde& ode, const std::string& label) {
    std::vector<Expr> leading;
    return solve_aux_impl(ode, label, leading);
}

SymbolicChain build_symbolic_chain(const CoeffVector& a, const std::string& label_prefix) {
    std::vector<Expr> leading;
    SymbolicChain chain = build_chain_impl(a, label_prefix, leading);
    chain.leading = std::move(leading);
    return chain;
}

AuxChain build_aux_chain(const CoeffVector& a, const Grid& grid, const Env& env, const LowerOptions& opts) {
    SymbolicChain chain = build_symbolic_chain(a);
    std::vector<Expr> roots(chain.phi.begin() + 1, chain.phi.end());
    Realization r = realize(roots, chain.leading, grid, env, opts);
    std::vector<GridFn> realized;
    realized.reserve(chain.phi.size());
    realized.push_back(GridFn::constant(r.grid, 0.0));
    for (int k = 1; k <= chain.n; ++k) {
        realized.push_back(r.context->lower(chain.phi[static_cast<std::size_t>(k)]).with_label("phi" + std::to_string(k)));
    }
    return {std::move(chain), std::move(realized), r.grid, r.grid.interval(), r.context};
}

std::vector<Expr> closed_form_aux(const CoeffVector& a) {
    using namespace expr;
    const int n = a.order();
    const Expr up = exp_prim(a[1], +1);
    const Expr down = exp_prim(a[1], -1);
    switch (n) {
        case 2:
            return {Expr{}, mul({a[2], down}), up};
        case 3: {
            const Expr c = trig({mul({a[2], down}), up}, 2);
            return {Expr{}, mul({a[3], down, c}), mul({up, int_pow(c, -2)}), c};
        }
        case 4: {
            const Expr c = trig({mul({a[2], down}), up}, 2);
            const Expr psi4 = trig({mul({a[3], down, c}), mul({up, int_pow(c, -2)}), c}, 3);
            const Expr d1 = differentiate(psi4);
            const Expr d2 = differentiate(d1);
            const Expr inner = add({mul({a[2], psi4}), mul({constant(2.0), a[1], d1}), mul({constant(-3.0), d2})});
            const Expr psi3 = trig({mul({down, int_pow(psi4, 2), inner}), mul({up, int_pow(psi4, -3)})}, 2);
            const Expr psi2 = mul({up, int_pow(psi3, -2), int_pow(psi4, -3)});
            const Expr psi1 = mul({a[4], down, psi3, int_pow(psi4, 2)});
            return {Expr{}, psi1, psi2, psi3, psi4};
        }
        default:
            throw std::invalid_argument("closed forms exist for orders 2, 3 and 4 only");
    }
}

}  // namespace multexode
