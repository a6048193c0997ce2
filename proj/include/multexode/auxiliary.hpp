#pragma once

#include <memory>
#include <string>
#include <vector>

#include "multexode/expr.hpp"
#include "multexode/lower.hpp"

namespace multexode {

/// (-1, a_1, ..., a_n): the coefficients of y^(n) = a_1 y^(n-1) + ... + a_n y
/// with the conventional a_0 = -1 in front.
class CoeffVector {
public:
    /// `coeffs` holds a_1..a_n.
    explicit CoeffVector(std::vector<expr::Expr> coeffs);

    [[nodiscard]] int order() const { return static_cast<int>(a_.size()) - 1; }
    /// a_i for 0 <= i <= n; a_0 is the constant -1.
    [[nodiscard]] const expr::Expr& operator[](int i) const { return a_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] std::vector<expr::Expr> coefficients() const { return {a_.begin() + 1, a_.end()}; }

private:
    std::vector<expr::Expr> a_;
};

/// Length n+1 vector of expressions; element [p - 1] is position p.
using ExprVector = std::vector<expr::Expr>;

/// (Dv)_i = sum_{m = i+1}^{n+1} D^{m-i-1} v_m, i.e. the upper-triangular Toeplitz
/// operator with first row (0, 1, D, ..., D^{n-1}). The last entry is always 0.
[[nodiscard]] ExprVector apply_scriptD(const ExprVector& v);

/// u^(m) = b_1 u^(m-1) + ... + b_m u.
struct AuxOde {
    int order = 0;
    std::vector<expr::Expr> b;  // b_1..b_m
    /// The expression divided out to normalize (the top nonzero entry of beta).
    expr::Expr leading;
};

/// Expands a^t D(u beta) = 0 by the Leibniz rule and normalizes it. `expected_order`
/// (if positive) is the order the construction requires; a lower extracted order
/// raises DegenerateLeading.
[[nodiscard]] AuxOde extract_aux_ode(const CoeffVector& a, const ExprVector& beta, int expected_order = 0);

/// The unique solution of `ode` with u(0) = 1 and u^(s)(0) = 0 for 1 <= s < m,
/// as an auxiliary node labelled `label`. Order 1 is e^{P b_1}; higher orders
/// recurse into a full basis construction for the auxiliary equation.
[[nodiscard]] expr::Expr solve_aux_ode(const AuxOde& ode, const std::string& label);

/// Symbolic part of the chain: beta vectors and auxiliary functions.
struct SymbolicChain {
    int n = 0;
    /// beta[k] for k = 2..n+1 (entries 0, 1 unused). beta[2] is left empty when a
    /// coefficient has no symbolic derivative, since nothing downstream reads it.
    std::vector<ExprVector> beta;
    std::vector<expr::Expr> phi;    // phi[k] for k = 1..n (entry 0 unused)
    std::vector<AuxOde> odes;       // odes[k] for k = 2..n
    /// Every leading coefficient divided out along the way, including nested chains.
    std::vector<expr::Expr> leading;
};

/// Runs the recursion from beta_{n+1} = e_{n+1} down to phi_1 = a_n / (phi_2 ... phi_n).
/// `label_prefix` names the auxiliary nodes (phi2, phi3, ...). Requires n >= 2.
[[nodiscard]] SymbolicChain build_symbolic_chain(const CoeffVector& a, const std::string& label_prefix = "phi");

struct AuxChain {
    SymbolicChain symbolic;
    std::vector<GridFn> realized;  // realized[k] for k = 1..n on `grid`
    Grid grid;
    Interval validity;
    std::shared_ptr<LowerContext> context;

    [[nodiscard]] const expr::Expr& phi(int k) const { return symbolic.phi[static_cast<std::size_t>(k)]; }
};

/// Builds the chain and realizes every phi_k on the largest sub-grid around 0
/// where all divisors and leading coefficients stay above 1e-8.
[[nodiscard]] AuxChain build_aux_chain(const CoeffVector& a, const Grid& grid, const Env& env = {},
                                       const LowerOptions& opts = {});

/// Hand-derived closed forms of phi_1..phi_n for n = 2, 3, 4 (index 0 unused).
/// Independent of the recursion; used to cross-check it.
[[nodiscard]] std::vector<expr::Expr> closed_form_aux(const CoeffVector& a);

}  // namespace multexode
