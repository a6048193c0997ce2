#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "multexode/gridfn.hpp"

namespace multexode::expr {

enum class Kind {
    constant,
    var,
    coeff_ref,
    add,
    sub,
    mul,
    div,
    int_pow,
    exp_prim,
    prim,
    trig,
    call,
    sampled,
    aux,
};

enum class Func { sin, cos, exp, sinh, cosh, sqrt };

/// Tabulated coefficient data (strictly increasing abscissae).
struct SampleTable {
    std::string id;
    std::vector<double> x;
    std::vector<cplx> y;
};

struct Node;
struct AuxDef;

/// Handle to an immutable expression node. Equality is structural.
class Expr {
public:
    /// The zero constant.
    Expr();
    explicit Expr(std::shared_ptr<const Node> node);

    [[nodiscard]] const Node& node() const { return *node_; }
    [[nodiscard]] const Node* get() const { return node_.get(); }
    [[nodiscard]] Kind kind() const;
    [[nodiscard]] std::size_t hash() const;
    [[nodiscard]] const std::vector<Expr>& children() const;

    [[nodiscard]] std::optional<cplx> as_constant() const;
    [[nodiscard]] bool is_zero() const;
    [[nodiscard]] bool is_one() const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    std::shared_ptr<const Node> node_;
};

struct Node {
    Kind kind = Kind::constant;
    cplx value{};                 // constant
    std::string name;             // coeff_ref
    std::vector<Expr> children;   // operands; trig inputs f_1..f_n
    int param = 0;                // int_pow exponent, exp_prim sign, trig index, derivative order
    Func func = Func::sin;        // call
    bool numeric_diff = false;    // sampled: finite-difference derivatives allowed
    std::shared_ptr<const SampleTable> table;
    std::shared_ptr<const AuxDef> aux;
    std::size_t hash = 0;
};

/// An auxiliary function u: a closed form `base` together with the linear ODE
/// u^(m) = b_1 u^(m-1) + ... + b_m u that it solves. Differentiating past
/// order m-1 substitutes the ODE instead of differentiating `base` again.
struct AuxDef {
    std::uint64_t id = 0;
    std::string label;
    Expr base;
    std::vector<Expr> ode;          // b_1..b_m, m >= 1
    std::vector<Expr> derivatives;  // D^s base for 0 <= s < m

    [[nodiscard]] int order() const { return static_cast<int>(ode.size()); }
};

// ---------------------------------------------------------------------------
// Construction. Every constructor folds constants, absorbs 0 and 1, and
// flattens nested add/mul; nothing beyond that.

[[nodiscard]] Expr constant(cplx c);
[[nodiscard]] Expr var();
[[nodiscard]] Expr coeff_ref(std::string name);
[[nodiscard]] Expr add(std::vector<Expr> terms);
[[nodiscard]] Expr sub(const Expr& a, const Expr& b);
[[nodiscard]] Expr mul(std::vector<Expr> factors);
[[nodiscard]] Expr div(const Expr& a, const Expr& b);
[[nodiscard]] Expr int_pow(const Expr& base, int k);
[[nodiscard]] Expr exp_prim(const Expr& f, int sign);
[[nodiscard]] Expr prim(const Expr& f);
[[nodiscard]] Expr trig(std::vector<Expr> fs, int j);
[[nodiscard]] Expr call(Func f, const Expr& arg);
[[nodiscard]] Expr sampled(std::shared_ptr<const SampleTable> table, bool numeric_diff, int order = 0);
/// Derivative `order` of an auxiliary function; orders >= m are rewritten through its ODE.
[[nodiscard]] Expr aux(const std::shared_ptr<const AuxDef>& def, int order = 0);

[[nodiscard]] std::shared_ptr<const AuxDef> make_aux(std::string label, Expr base, std::vector<Expr> ode);

[[nodiscard]] Expr operator+(const Expr& a, const Expr& b);
[[nodiscard]] Expr operator-(const Expr& a, const Expr& b);
[[nodiscard]] Expr operator*(const Expr& a, const Expr& b);
[[nodiscard]] Expr operator/(const Expr& a, const Expr& b);
[[nodiscard]] Expr operator-(const Expr& a);

/// Rebuild bottom-up through the simplifying constructors.
[[nodiscard]] Expr simplify(const Expr& e);

/// Canonical text. Parseable (and round-trips) unless the tree holds sampled or
/// auxiliary nodes, which print as opaque labels.
[[nodiscard]] std::string print(const Expr& e);

[[nodiscard]] std::string_view func_name(Func f);

/// d/dx. Product/quotient/chain rules, plus
///   d exp_prim(f, s) = s f exp_prim(f, s),  d prim(f) = f,
///   d trig(f; j) = f_j trig(f; j-1)  (j >= 2),  f_1 trig(f; n)  (j = 1).
/// Throws NonDifferentiable for coefficient references and for sampled data
/// without the numeric-diff flag.
[[nodiscard]] Expr differentiate(const Expr& e);
[[nodiscard]] Expr differentiate(const Expr& e, int times);

/// Replace coefficient references by expressions (repeatedly; cycles are rejected).
[[nodiscard]] Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

/// Every distinct denominator (div right operand, negative-power base) reachable
/// from `roots`, descending into trig inputs and auxiliary definitions.
[[nodiscard]] std::vector<Expr> collect_divisors(const std::vector<Expr>& roots);

/// Node count of the expression DAG (shared nodes counted once).
[[nodiscard]] std::size_t dag_size(const Expr& e);

}  // namespace multexode::expr
