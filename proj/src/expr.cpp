#include "multexode/expr.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace multexode::expr {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_double(double d) {
    d += 0.0;  // -0.0 and 0.0 compare equal, so they must hash equal
    std::uint64_t bits = 0;
    std::memcpy(&bits, &d, sizeof bits);
    return std::hash<std::uint64_t>{}(bits);
}

std::size_t compute_hash(const Node& n) {
    std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
    switch (n.kind) {
        case Kind::constant:
            h = mix(h, hash_double(n.value.real()));
            h = mix(h, hash_double(n.value.imag()));
            break;
        case Kind::coeff_ref:
            h = mix(h, std::hash<std::string>{}(n.name));
            break;
        case Kind::call:
            h = mix(h, static_cast<std::size_t>(n.func));
            break;
        case Kind::sampled:
            h = mix(h, std::hash<std::string>{}(n.table->id));
            h = mix(h, n.numeric_diff ? 1U : 0U);
            break;
        case Kind::aux:
            h = mix(h, std::hash<std::uint64_t>{}(n.aux->id));
            break;
        default:
            break;
    }
    h = mix(h, std::hash<int>{}(n.param));
    for (const auto& c : n.children) {
        h = mix(h, c.hash());
    }
    return h;
}

Expr make(Node n) {
    n.hash = compute_hash(n);
    return Expr(std::make_shared<const Node>(std::move(n)));
}

bool nodes_equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (a->hash != b->hash || a->kind != b->kind || a->param != b->param) return false;
    switch (a->kind) {
        case Kind::constant:
            return a->value == b->value;
        case Kind::coeff_ref:
            return a->name == b->name;
        case Kind::call:
            if (a->func != b->func) return false;
            break;
        case Kind::sampled:
            return a->table->id == b->table->id && a->numeric_diff == b->numeric_diff;
        case Kind::aux:
            return a->aux->id == b->aux->id;
        default:
            break;
    }
    if (a->children.size() != b->children.size()) return false;
    for (std::size_t i = 0; i < a->children.size(); ++i) {
        if (!nodes_equal(a->children[i].get(), b->children[i].get())) return false;
    }
    return true;
}

Expr unary_node(Kind kind, const Expr& child, int param = 0) {
    Node n;
    n.kind = kind;
    n.children = {child};
    n.param = param;
    return make(std::move(n));
}

Expr binary_node(Kind kind, const Expr& a, const Expr& b) {
    Node n;
    n.kind = kind;
    n.children = {a, b};
    return make(std::move(n));
}

cplx apply_func(Func f, cplx v) {
    switch (f) {
        case Func::sin: return std::sin(v);
        case Func::cos: return std::cos(v);
        case Func::exp: return std::exp(v);
        case Func::sinh: return std::sinh(v);
        case Func::cosh: return std::cosh(v);
        case Func::sqrt: return std::sqrt(v);
    }
    return v;
}

std::atomic<std::uint64_t> next_aux_id{1};

}  // namespace

// ---------------------------------------------------------------------------
// Expr handle

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Kind Expr::kind() const { return node_->kind; }
std::size_t Expr::hash() const { return node_->hash; }
const std::vector<Expr>& Expr::children() const { return node_->children; }

std::optional<cplx> Expr::as_constant() const {
    if (node_->kind == Kind::constant) return node_->value;
    return std::nullopt;
}

bool Expr::is_zero() const { return node_->kind == Kind::constant && node_->value == cplx(0.0); }
bool Expr::is_one() const { return node_->kind == Kind::constant && node_->value == cplx(1.0); }

bool operator==(const Expr& a, const Expr& b) { return nodes_equal(a.get(), b.get()); }

// ---------------------------------------------------------------------------
// Constructors

Expr constant(cplx c) {
    Node n;
    n.kind = Kind::constant;
    n.value = c;
    return make(std::move(n));
}

Expr var() {
    Node n;
    n.kind = Kind::var;
    return make(std::move(n));
}

Expr coeff_ref(std::string name) {
    Node n;
    n.kind = Kind::coeff_ref;
    n.name = std::move(name);
    return make(std::move(n));
}

Expr add(std::vector<Expr> terms) {
    cplx c = 0.0;
    std::vector<Expr> flat;
    for (auto& t : terms) {
        if (auto v = t.as_constant()) {
            c += *v;
        } else if (t.kind() == Kind::add) {
            for (const auto& inner : t.children()) {
                if (auto w = inner.as_constant()) c += *w;
                else flat.push_back(inner);
            }
        } else {
            flat.push_back(std::move(t));
        }
    }
    if (flat.empty()) return constant(c);
    if (c != cplx(0.0)) flat.insert(flat.begin(), constant(c));
    if (flat.size() == 1) return flat.front();
    Node n;
    n.kind = Kind::add;
    n.children = std::move(flat);
    return make(std::move(n));
}

Expr sub(const Expr& a, const Expr& b) {
    if (b.is_zero()) return a;
    auto ca = a.as_constant();
    auto cb = b.as_constant();
    if (ca && cb) return constant(*ca - *cb);
    if (a.is_zero()) return mul({constant(-1.0), b});
    return binary_node(Kind::sub, a, b);
}

Expr mul(std::vector<Expr> factors) {
    cplx c = 1.0;
    std::vector<Expr> flat;
    for (auto& f : factors) {
        if (auto v = f.as_constant()) {
            c *= *v;
        } else if (f.kind() == Kind::mul) {
            for (const auto& inner : f.children()) {
                if (auto w = inner.as_constant()) c *= *w;
                else flat.push_back(inner);
            }
        } else {
            flat.push_back(std::move(f));
        }
    }
    if (c == cplx(0.0) || flat.empty()) return constant(c);
    if (c != cplx(1.0)) flat.insert(flat.begin(), constant(c));
    if (flat.size() == 1) return flat.front();
    Node n;
    n.kind = Kind::mul;
    n.children = std::move(flat);
    return make(std::move(n));
}

Expr div(const Expr& a, const Expr& b) {
    auto cb = b.as_constant();
    if (cb && *cb == cplx(1.0)) return a;
    if (cb && *cb != cplx(0.0)) {
        if (auto ca = a.as_constant()) return constant(*ca / *cb);
    }
    if (a.is_zero() && !(cb && *cb == cplx(0.0))) return constant(0.0);
    return binary_node(Kind::div, a, b);
}

Expr int_pow(const Expr& base, int k) {
    if (k == 0) return constant(1.0);
    if (k == 1) return base;
    if (auto c = base.as_constant()) {
        if (!(k < 0 && *c == cplx(0.0))) return constant(std::pow(*c, k));
    }
    return unary_node(Kind::int_pow, base, k);
}

Expr exp_prim(const Expr& f, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("exp_prim sign must be +1 or -1");
    if (f.is_zero()) return constant(1.0);
    return unary_node(Kind::exp_prim, f, sign);
}

Expr prim(const Expr& f) {
    if (f.is_zero()) return constant(0.0);
    return unary_node(Kind::prim, f);
}

Expr trig(std::vector<Expr> fs, int j) {
    const int n = static_cast<int>(fs.size());
    if (n < 1 || j < 1 || j > n) throw std::invalid_argument("trig node needs 1 <= j <= n");
    bool all_zero = true;
    for (const auto& f : fs) all_zero = all_zero && f.is_zero();
    if (all_zero) return constant(j == n ? 1.0 : 0.0);
    Node node;
    node.kind = Kind::trig;
    node.children = std::move(fs);
    node.param = j;
    return make(std::move(node));
}

Expr call(Func f, const Expr& arg) {
    if (auto c = arg.as_constant()) return constant(apply_func(f, *c));
    Node n;
    n.kind = Kind::call;
    n.func = f;
    n.children = {arg};
    return make(std::move(n));
}

Expr sampled(std::shared_ptr<const SampleTable> table, bool numeric_diff, int order) {
    Node n;
    n.kind = Kind::sampled;
    n.table = std::move(table);
    n.numeric_diff = numeric_diff;
    n.param = order;
    return make(std::move(n));
}

Expr aux(const std::shared_ptr<const AuxDef>& def, int order) {
    const int m = def->order();
    if (order < m) {
        Node n;
        n.kind = Kind::aux;
        n.aux = def;
        n.param = order;
        return make(std::move(n));
    }
    if (order == m) {
        std::vector<Expr> terms;
        for (int i = 1; i <= m; ++i) {
            terms.push_back(mul({def->ode[static_cast<std::size_t>(i - 1)], aux(def, m - i)}));
        }
        return add(std::move(terms));
    }
    return differentiate(aux(def, order - 1));
}

std::shared_ptr<const AuxDef> make_aux(std::string label, Expr base, std::vector<Expr> ode) {
    if (ode.empty()) throw std::invalid_argument("auxiliary function needs an ODE of order >= 1");
    auto def = std::make_shared<AuxDef>();
    def->id = next_aux_id.fetch_add(1);
    def->label = std::move(label);
    def->base = std::move(base);
    def->ode = std::move(ode);
    def->derivatives.push_back(def->base);
    for (int s = 1; s < def->order(); ++s) {
        def->derivatives.push_back(differentiate(def->derivatives.back()));
    }
    return def;
}

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return sub(a, b); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return div(a, b); }
Expr operator-(const Expr& a) { return mul({constant(-1.0), a}); }

// ---------------------------------------------------------------------------
// Rebuild helpers

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> kids) {
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::add: return add(std::move(kids));
        case Kind::sub: return sub(kids[0], kids[1]);
        case Kind::mul: return mul(std::move(kids));
        case Kind::div: return div(kids[0], kids[1]);
        case Kind::int_pow: return int_pow(kids[0], n.param);
        case Kind::exp_prim: return exp_prim(kids[0], n.param);
        case Kind::prim: return prim(kids[0]);
        case Kind::trig: return trig(std::move(kids), n.param);
        case Kind::call: return call(n.func, kids[0]);
        default: return e;
    }
}

template <class Leaf>
Expr transform(const Expr& e, std::unordered_map<const Node*, Expr>& memo, Leaf&& leaf) {
    if (auto it = memo.find(e.get()); it != memo.end()) return it->second;
    Expr out;
    if (auto replaced = leaf(e)) {
        out = *replaced;
    } else if (e.children().empty()) {
        out = e;
    } else {
        std::vector<Expr> kids;
        kids.reserve(e.children().size());
        for (const auto& c : e.children()) kids.push_back(transform(c, memo, leaf));
        out = rebuild(e, std::move(kids));
    }
    memo.emplace(e.get(), out);
    return out;
}

}  // namespace

Expr simplify(const Expr& e) {
    std::unordered_map<const Node*, Expr> memo;
    return transform(e, memo, [](const Expr&) -> std::optional<Expr> { return std::nullopt; });
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings) {
    std::vector<std::string> stack;
    std::function<Expr(const Expr&)> go = [&](const Expr& root) -> Expr {
        std::unordered_map<const Node*, Expr> memo;
        return transform(root, memo, [&](const Expr& x) -> std::optional<Expr> {
            if (x.kind() != Kind::coeff_ref) return std::nullopt;
            auto it = bindings.find(x.node().name);
            if (it == bindings.end()) return std::nullopt;
            for (const auto& s : stack) {
                if (s == x.node().name) {
                    throw InputError("cyclic coefficient definition through '" + s + "'");
                }
            }
            stack.push_back(x.node().name);
            Expr out = go(it->second);
            stack.pop_back();
            return out;
        });
    };
    return go(e);
}

// ---------------------------------------------------------------------------
// Printing

std::string_view func_name(Func f) {
    switch (f) {
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::exp: return "exp";
        case Func::sinh: return "sinh";
        case Func::cosh: return "cosh";
        case Func::sqrt: return "sqrt";
    }
    return "?";
}

namespace {

std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string print_constant(cplx c) {
    if (c.imag() == 0.0) {
        return c.real() < 0.0 ? "-" + number(-c.real()) : number(c.real() + 0.0);
    }
    std::string im = number(std::abs(c.imag())) + "*i";
    if (c.real() == 0.0) {
        return "(" + std::string(c.imag() < 0.0 ? "-" : "") + im + ")";
    }
    return "(" + print_constant(c.real()) + (c.imag() < 0.0 ? "-" : "+") + im + ")";
}

std::string paren(const std::string& s) { return "(" + s + ")"; }

bool leads_with_minus(const std::string& s) { return !s.empty() && s.front() == '-'; }

bool atomic_base(const Expr& e) {
    switch (e.kind()) {
        case Kind::var:
        case Kind::coeff_ref:
        case Kind::call:
        case Kind::exp_prim:
        case Kind::prim:
        case Kind::trig:
        case Kind::sampled:
        case Kind::aux:
            return true;
        case Kind::constant: {
            const cplx c = e.node().value;
            return c.imag() != 0.0 || c.real() >= 0.0;
        }
        default:
            return false;
    }
}

std::string print_node(const Expr& e) {
    const Node& n = e.node();
    switch (n.kind) {
        case Kind::constant:
            return print_constant(n.value);
        case Kind::var:
            return "x";
        case Kind::coeff_ref:
            return n.name;
        case Kind::add: {
            std::string s;
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                std::string c = print_node(n.children[i]);
                if (i > 0) {
                    if (n.children[i].kind() == Kind::sub || leads_with_minus(c)) c = paren(c);
                    s += "+";
                }
                s += c;
            }
            return s;
        }
        case Kind::sub: {
            std::string r = print_node(n.children[1]);
            const Kind rk = n.children[1].kind();
            if (rk == Kind::add || rk == Kind::sub || leads_with_minus(r)) r = paren(r);
            return print_node(n.children[0]) + "-" + r;
        }
        case Kind::mul: {
            std::size_t first = 0;
            std::string s;
            if (n.children.front().as_constant() == cplx(-1.0)) {
                s = "-";
                first = 1;
            }
            for (std::size_t i = first; i < n.children.size(); ++i) {
                const Expr& child = n.children[i];
                std::string c = print_node(child);
                const Kind k = child.kind();
                if (k == Kind::add || k == Kind::sub || k == Kind::div || (i > first && leads_with_minus(c)) ||
                    (i == first && first == 1 && leads_with_minus(c))) {
                    c = paren(c);
                }
                if (i > first) s += "*";
                s += c;
            }
            return s;
        }
        case Kind::div: {
            std::string l = print_node(n.children[0]);
            const Kind lk = n.children[0].kind();
            if (lk == Kind::add || lk == Kind::sub) l = paren(l);
            std::string r = print_node(n.children[1]);
            const Kind rk = n.children[1].kind();
            if (rk == Kind::add || rk == Kind::sub || rk == Kind::mul || rk == Kind::div || leads_with_minus(r) ||
                !atomic_base(n.children[1])) {
                if (rk != Kind::int_pow || leads_with_minus(r)) r = paren(r);
            }
            return l + "/" + r;
        }
        case Kind::int_pow: {
            std::string b = print_node(n.children[0]);
            if (!atomic_base(n.children[0])) b = paren(b);
            return b + "^" + std::to_string(n.param);
        }
        case Kind::exp_prim:
            return std::string(n.param > 0 ? "expp(" : "expm(") + print_node(n.children[0]) + ")";
        case Kind::prim:
            return "prim(" + print_node(n.children[0]) + ")";
        case Kind::trig: {
            std::string s = "trig(" + std::to_string(n.param) + ";";
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                s += (i ? ", " : " ") + print_node(n.children[i]);
            }
            return s + ")";
        }
        case Kind::call:
            return std::string(func_name(n.func)) + "(" + print_node(n.children[0]) + ")";
        case Kind::sampled:
            return "{" + n.table->id + "}" + std::string(static_cast<std::size_t>(n.param), '\'');
        case Kind::aux:
            return n.aux->label + std::string(static_cast<std::size_t>(n.param), '\'');
    }
    return "?";
}

}  // namespace

std::string print(const Expr& e) { return print_node(e); }

// ---------------------------------------------------------------------------
// Differentiation

namespace {

class Differentiator {
public:
    Expr d(const Expr& e) {
        if (auto it = memo_.find(e.get()); it != memo_.end()) return it->second;
        Expr out = rule(e);
        memo_.emplace(e.get(), out);
        return out;
    }

private:
    Expr rule(const Expr& e) {
        const Node& n = e.node();
        const auto& c = n.children;
        switch (n.kind) {
            case Kind::constant:
                return constant(0.0);
            case Kind::var:
                return constant(1.0);
            case Kind::coeff_ref:
                throw NonDifferentiable("coefficient reference '" + n.name +
                                        "' has no symbolic form; bind it to an expression first");
            case Kind::add: {
                std::vector<Expr> terms;
                for (const auto& t : c) terms.push_back(d(t));
                return add(std::move(terms));
            }
            case Kind::sub:
                return sub(d(c[0]), d(c[1]));
            case Kind::mul: {
                std::vector<Expr> terms;
                for (std::size_t i = 0; i < c.size(); ++i) {
                    Expr di = d(c[i]);
                    if (di.is_zero()) continue;
                    std::vector<Expr> factors = c;
                    factors[i] = di;
                    terms.push_back(mul(std::move(factors)));
                }
                return add(std::move(terms));
            }
            case Kind::div: {
                const Expr du = d(c[0]);
                const Expr dv = d(c[1]);
                if (dv.is_zero()) return div(du, c[1]);
                return sub(div(du, c[1]), div(mul({c[0], dv}), int_pow(c[1], 2)));
            }
            case Kind::int_pow:
                return mul({constant(static_cast<double>(n.param)), int_pow(c[0], n.param - 1), d(c[0])});
            case Kind::exp_prim:
                return mul({constant(static_cast<double>(n.param)), c[0], e});
            case Kind::prim:
                return c[0];
            case Kind::trig: {
                const int size = static_cast<int>(c.size());
                const int j = n.param;
                return mul({c[static_cast<std::size_t>(j - 1)], trig(c, j == 1 ? size : j - 1)});
            }
            case Kind::call: {
                const Expr& a = c[0];
                const Expr da = d(a);
                if (da.is_zero()) return constant(0.0);
                switch (n.func) {
                    case Func::sin: return mul({call(Func::cos, a), da});
                    case Func::cos: return mul({constant(-1.0), call(Func::sin, a), da});
                    case Func::exp: return mul({e, da});
                    case Func::sinh: return mul({call(Func::cosh, a), da});
                    case Func::cosh: return mul({call(Func::sinh, a), da});
                    case Func::sqrt: return div(da, mul({constant(2.0), e}));
                }
                break;
            }
            case Kind::sampled:
                if (!n.numeric_diff) {
                    throw NonDifferentiable("sampled coefficient '" + n.table->id +
                                            "' cannot be differentiated without numeric differentiation enabled");
                }
                return sampled(n.table, true, n.param + 1);
            case Kind::aux:
                return aux(n.aux, n.param + 1);
        }
        throw std::logic_error("unhandled node kind in differentiate");
    }

    std::unordered_map<const Node*, Expr> memo_;
};

}  // namespace

Expr differentiate(const Expr& e) { return Differentiator{}.d(e); }

Expr differentiate(const Expr& e, int times) {
    Expr out = e;
    for (int i = 0; i < times; ++i) out = differentiate(out);
    return out;
}

// ---------------------------------------------------------------------------
// Traversals

namespace {

template <class Visit>
void walk(const std::vector<Expr>& roots, Visit&& visit) {
    std::unordered_set<const Node*> seen;
    std::unordered_set<std::uint64_t> seen_aux;
    std::vector<Expr> stack(roots.rbegin(), roots.rend());
    while (!stack.empty()) {
        Expr e = stack.back();
        stack.pop_back();
        if (!seen.insert(e.get()).second) continue;
        visit(e);
        for (const auto& c : e.children()) stack.push_back(c);
        if (e.kind() == Kind::aux && seen_aux.insert(e.node().aux->id).second) {
            for (const auto& x : e.node().aux->derivatives) stack.push_back(x);
            for (const auto& x : e.node().aux->ode) stack.push_back(x);
        }
    }
}

void add_factors(const Expr& d, std::vector<Expr>& out) {
    switch (d.kind()) {
        case Kind::constant:
            return;
        case Kind::mul:
            for (const auto& f : d.children()) add_factors(f, out);
            return;
        case Kind::int_pow:
            if (d.node().param > 0) add_factors(d.children()[0], out);
            return;
        default:
            out.push_back(d);
    }
}

}  // namespace

std::vector<Expr> collect_divisors(const std::vector<Expr>& roots) {
    std::vector<Expr> raw;
    walk(roots, [&](const Expr& e) {
        if (e.kind() == Kind::div) add_factors(e.children()[1], raw);
        if (e.kind() == Kind::int_pow && e.node().param < 0) add_factors(e.children()[0], raw);
    });
    std::vector<Expr> out;
    std::unordered_map<std::size_t, std::vector<std::size_t>> by_hash;
    for (auto& d : raw) {
        auto& bucket = by_hash[d.hash()];
        bool dup = false;
        for (std::size_t idx : bucket) dup = dup || out[idx] == d;
        if (!dup) {
            bucket.push_back(out.size());
            out.push_back(d);
        }
    }
    return out;
}

std::size_t dag_size(const Expr& e) {
    std::size_t count = 0;
    walk({e}, [&](const Expr&) { ++count; });
    return count;
}

}  // namespace multexode::expr
