#pragma once

#include <memory>
#include <vector>

#include "multexode/auxiliary.hpp"
#include "multexode/expr.hpp"
#include "multexode/lower.hpp"

namespace multexode {

/// The right shift pi(j) = j - 1 (mod n) on {1..n}, raised to the power `shift`.
class Permutation {
public:
    Permutation(int n, int shift);

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] int operator()(int j) const;
    [[nodiscard]] int inverse(int j) const;

private:
    int n_;
    int shift_;
};

struct SolveOptions {
    LowerOptions lower;
    /// Worker threads for evaluating basis members; 0 reads MULTEXODE_THREADS
    /// and falls back to the hardware concurrency.
    unsigned threads = 0;
};

/// The n solutions psi_{n,k} with psi_{n,k}^{(j-1)}(0) = delta_{jk}.
struct BasisSet {
    int n = 0;
    std::vector<expr::Expr> members;          // members[k-1]: psi_{n,k} as an expression
    std::vector<GridFn> psi;                  // psi[k-1] realized on `grid`
    std::vector<expr::Expr> phi;              // phi_1..phi_n feeding the rotations (index 0 unused)
    std::vector<SeriesDiagnostics> diagnostics;
    Grid grid;
    Interval validity;
    /// Evaluation context on `grid`; lowers further expressions built from `members`.
    std::shared_ptr<LowerContext> context;
};

struct IVProblem {
    std::vector<expr::Expr> coefficients;  // a_1..a_n
    std::vector<cplx> initial;             // y(0), y'(0), ..., y^(n-1)(0)

    [[nodiscard]] int order() const { return static_cast<int>(coefficients.size()); }
};

struct Solution {
    GridFn y;
    BasisSet basis;
};

/// psi_{n,k} = T(phi_eta(1), ..., phi_eta(n); eta^{-1}(n)) with eta = pi^{k-1}
/// for k = 1..n, given phi_1..phi_n (index 0 unused).
[[nodiscard]] std::vector<expr::Expr> rotated_members(const std::vector<expr::Expr>& phi);

/// Evaluates `members` on the validity grid of `phi` and `members`.
[[nodiscard]] BasisSet assemble_basis(std::vector<expr::Expr> phi, std::vector<expr::Expr> members,
                                      const std::vector<expr::Expr>& leading, const Grid& grid, const Env& env,
                                      const SolveOptions& opts);

/// Fundamental solutions of y^(n) = a_1 y^(n-1) + ... + a_n y. Order 1 is e^{P a_1}.
[[nodiscard]] BasisSet basis(const CoeffVector& a, const Grid& grid, const Env& env = {},
                             const SolveOptions& opts = {});

/// y = sum_k y^{(k-1)}(0) psi_{n,k}.
[[nodiscard]] Solution solve_ivp(const IVProblem& p, const Grid& grid, const Env& env = {},
                                 const SolveOptions& opts = {});

/// (zeta u')' + omega^2 zeta u = 0, i.e. a_1 = -zeta'/zeta, a_2 = -omega^2.
/// Members are C = T(a_2 zeta/zeta(0), zeta(0)/zeta; 2) and S = T(zeta(0)/zeta, a_2 zeta/zeta(0); 1).
[[nodiscard]] BasisSet preset_schrodinger(const expr::Expr& zeta, cplx omega, const Grid& grid, const Env& env = {},
                                          const SolveOptions& opts = {});

/// y'''' = a_2 y'' + a_4 y through C = T(a_2, 1; 2) and the list (a_4 C, C^-2, C, 1).
[[nodiscard]] BasisSet preset_orr_sommerfeld(const expr::Expr& a2, const expr::Expr& a4, const Grid& grid,
                                             const Env& env = {}, const SolveOptions& opts = {});

/// Schroedinger coefficients (a_1, a_2) as expressions.
[[nodiscard]] std::vector<expr::Expr> schrodinger_coefficients(const expr::Expr& zeta, cplx omega);

}  // namespace multexode
