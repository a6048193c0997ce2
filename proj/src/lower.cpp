#include "multexode/lower.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "multexode/multex.hpp"

namespace multexode {

using expr::Expr;
using expr::Kind;

namespace {

std::string describe(const Expr& e) {
    std::string s = expr::print(e);
    if (s.size() > 160) s = s.substr(0, 157) + "...";
    return s;
}

cplx apply(expr::Func f, cplx v) {
    switch (f) {
        case expr::Func::sin: return std::sin(v);
        case expr::Func::cos: return std::cos(v);
        case expr::Func::exp: return std::exp(v);
        case expr::Func::sinh: return std::sinh(v);
        case expr::Func::cosh: return std::cosh(v);
        case expr::Func::sqrt: return std::sqrt(v);
    }
    return v;
}

GridFn map_values(const GridFn& f, auto&& op) {
    std::vector<cplx> out(f.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(f[i]);
    return GridFn(f.grid(), std::move(out));
}

GridFn checked_divide(const GridFn& num, const GridFn& den, double floor, const Expr& divisor) {
    try {
        return algebra(num, den, AlgebraOp::div, floor);
    } catch (const DivisorTooSmall& e) {
        throw DivisorTooSmall(e.x, describe(divisor));
    }
}

}  // namespace

LowerContext::LowerContext(Grid grid, Env env, LowerOptions opts)
    : grid_(grid), env_(std::move(env)), opts_(opts) {}

GridFn LowerContext::lower(const Expr& e) {
    {
        std::shared_lock lock(mutex_);
        if (auto it = memo_.find(e.hash()); it != memo_.end()) {
            for (const auto& [key, value] : it->second) {
                if (key == e) return value;
            }
        }
    }
    GridFn value = compute(e);
    std::unique_lock lock(mutex_);
    auto& bucket = memo_[e.hash()];
    for (const auto& [key, existing] : bucket) {
        if (key == e) return existing;
    }
    bucket.emplace_back(e, value);
    return value;
}

std::optional<SeriesDiagnostics> LowerContext::series_diagnostics(const Expr& trig_node) const {
    if (trig_node.kind() != Kind::trig) return std::nullopt;
    const std::size_t key = expr::trig(trig_node.children(), 1).hash();
    std::shared_lock lock(mutex_);
    auto it = families_.find(key);
    if (it == families_.end()) return std::nullopt;
    for (const auto& fam : it->second) {
        if (std::equal(fam->fs.begin(), fam->fs.end(), trig_node.children().begin(), trig_node.children().end())) {
            return fam->diagnostics;
        }
    }
    return std::nullopt;
}

const LowerContext::Family& LowerContext::family(const Expr& trig_node) {
    const auto& fs = trig_node.children();
    // All classes of one input list share a key: the j = 1 node of that list.
    const std::size_t key = expr::trig(fs, 1).hash();
    auto matches = [&](const Family& fam) { return std::equal(fam.fs.begin(), fam.fs.end(), fs.begin(), fs.end()); };
    {
        std::shared_lock lock(mutex_);
        if (auto it = families_.find(key); it != families_.end()) {
            for (const auto& fam : it->second) {
                if (matches(*fam)) return *fam;
            }
        }
    }
    std::vector<GridFn> inputs;
    inputs.reserve(fs.size());
    for (const auto& f : fs) inputs.push_back(lower(f));
    auto tf = multex::trig_family(inputs, opts_.series);
    auto fam = std::make_shared<Family>(Family{fs, std::move(tf.classes), tf.diagnostics});

    std::unique_lock lock(mutex_);
    auto& bucket = families_[key];
    for (const auto& existing : bucket) {
        if (matches(*existing)) return *existing;
    }
    bucket.push_back(fam);
    return *bucket.back();
}

GridFn LowerContext::sampled(const expr::Node& n) {
    const auto& t = *n.table;
    if (t.x.size() != t.y.size() || t.x.size() < 4) {
        throw InputError("sample table '" + t.id + "' needs at least 4 rows");
    }
    for (std::size_t i = 1; i < t.x.size(); ++i) {
        if (!(t.x[i] > t.x[i - 1])) {
            throw NonMonotoneAbscissae("sample table '" + t.id + "': abscissae must increase strictly");
        }
    }
    const Interval iv = grid_.interval();
    const double slack = 1e-12 * std::max({1.0, std::abs(iv.lo), std::abs(iv.hi)});
    if (iv.lo < t.x.front() - slack || iv.hi > t.x.back() + slack) {
        throw CoverageGap("sample table '" + t.id + "' covers [" + std::to_string(t.x.front()) + ", " +
                          std::to_string(t.x.back()) + "] but the grid spans [" + std::to_string(iv.lo) + ", " +
                          std::to_string(iv.hi) + "]");
    }
    std::vector<cplx> values(grid_.size());
    const auto count = static_cast<std::ptrdiff_t>(t.x.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = grid_.node(i);
        const auto upper = std::upper_bound(t.x.begin(), t.x.end(), x) - t.x.begin();
        const auto base = std::clamp<std::ptrdiff_t>(upper - 2, 0, count - 4);
        cplx acc = 0.0;
        for (std::ptrdiff_t a = base; a < base + 4; ++a) {
            double w = 1.0;
            for (std::ptrdiff_t b = base; b < base + 4; ++b) {
                if (b != a) w *= (x - t.x[b]) / (t.x[a] - t.x[b]);
            }
            acc += w * t.y[static_cast<std::size_t>(a)];
        }
        values[i] = acc;
    }
    GridFn out(grid_, std::move(values), t.id);
    for (int k = 0; k < n.param; ++k) out = derivative_fd4(out);
    return out;
}

GridFn LowerContext::compute(const Expr& e) {
    const expr::Node& n = e.node();
    const auto& c = n.children;
    switch (n.kind) {
        case Kind::constant:
            return GridFn::constant(grid_, n.value);
        case Kind::var:
            return GridFn::identity(grid_);
        case Kind::coeff_ref: {
            auto it = env_.find(n.name);
            if (it == env_.end()) throw UnboundCoefficient(n.name);
            if (it->second.grid() == grid_) return it->second;
            if (it->second.grid().contains(grid_)) return it->second.restricted(grid_);
            throw InvalidGrid("coefficient '" + n.name + "' is sampled on a grid that does not contain the target");
        }
        case Kind::add: {
            GridFn acc = lower(c[0]);
            for (std::size_t i = 1; i < c.size(); ++i) acc = acc + lower(c[i]);
            return acc;
        }
        case Kind::sub:
            return lower(c[0]) - lower(c[1]);
        case Kind::mul: {
            GridFn acc = lower(c[0]);
            for (std::size_t i = 1; i < c.size(); ++i) acc = acc * lower(c[i]);
            return acc;
        }
        case Kind::div:
            return checked_divide(lower(c[0]), lower(c[1]), opts_.div_floor, c[1]);
        case Kind::int_pow: {
            const GridFn base = lower(c[0]);
            const int k = n.param;
            GridFn p = map_values(base, [k](cplx v) {
                cplx r = 1.0;
                for (int i = 0; i < std::abs(k); ++i) r *= v;
                return r;
            });
            if (k > 0) return p;
            // Check the base itself so the floor means the same thing as for div.
            (void)checked_divide(GridFn::constant(grid_, 1.0), base, opts_.div_floor, c[0]);
            return checked_divide(GridFn::constant(grid_, 1.0), p, 0.0, c[0]);
        }
        case Kind::exp_prim:
            try {
                return exp_primitive(lower(c[0]), n.param);
            } catch (const Overflow& err) {
                throw Overflow(err.x, describe(e));
            }
        case Kind::prim:
            return primitive(lower(c[0]));
        case Kind::trig:
            return family(e).classes[static_cast<std::size_t>(n.param - 1)];
        case Kind::call: {
            const expr::Func f = n.func;
            try {
                return map_values(lower(c[0]), [f](cplx v) { return apply(f, v); });
            } catch (const Overflow& err) {
                throw Overflow(err.x, describe(e));
            }
        }
        case Kind::sampled:
            return sampled(n);
        case Kind::aux:
            return lower(n.aux->derivatives[static_cast<std::size_t>(n.param)]);
    }
    throw std::logic_error("unhandled node kind in lower");
}

GridFn lower(const Expr& e, const Env& env, const Grid& grid, const LowerOptions& opts) {
    LowerContext ctx(grid, env, opts);
    return ctx.lower(e);
}

// ---------------------------------------------------------------------------
// Validity realization

namespace {

// Cells to keep so that node x is excluded.
CellRange excluding(const Grid& g, double x) {
    const auto j = static_cast<long long>(std::llround(x / g.step()));
    CellRange r{g.neg_cells(), g.pos_cells()};
    if (j > 0) r.pos = std::min<std::size_t>(r.pos, static_cast<std::size_t>(j - 1));
    else if (j < 0) r.neg = std::min<std::size_t>(r.neg, static_cast<std::size_t>(-j - 1));
    else throw ValidityCollapsed("failure at x = 0 leaves no neighbourhood to work on");
    return r;
}

}  // namespace

Realization realize(const std::vector<Expr>& roots, const std::vector<Expr>& checks, const Grid& grid,
                    const Env& env, const LowerOptions& opts) {
    std::vector<Expr> all_roots = roots;
    all_roots.insert(all_roots.end(), checks.begin(), checks.end());
    std::vector<Expr> guards = expr::collect_divisors(all_roots);
    guards.insert(guards.end(), checks.begin(), checks.end());

    Grid g = grid;
    bool shrunk = false;
    for (;;) {
        auto ctx = std::make_shared<LowerContext>(g, env, opts);
        std::optional<CellRange> cut;
        try {
            for (const auto& e : checks) {
                const GridFn v = ctx->lower(e);
                if (!(std::abs(v.at_zero()) > kValidityFloor)) {
                    throw DegenerateLeading("leading coefficient vanishes at x = 0: " + describe(e));
                }
            }
            for (const auto& e : guards) (void)ctx->lower(e);
            for (const auto& e : roots) (void)ctx->lower(e);
        } catch (const DivisorTooSmall& err) {
            cut = excluding(g, err.x);
        } catch (const Overflow& err) {
            cut = excluding(g, err.x);
        } catch (const NotConverged& err) {
            const auto& within = err.diagnostics.converged_within;
            if (!within) throw ValidityCollapsed(std::string("series diverges next to x = 0: ") + err.what());
            cut = CellRange{static_cast<std::size_t>(std::llround(-within->lo / g.step())),
                            static_cast<std::size_t>(std::llround(within->hi / g.step()))};
        }

        if (!cut) {
            CellRange r{g.neg_cells(), g.pos_cells()};
            for (const auto& e : guards) {
                const CellRange c = zero_free_cells(ctx->lower(e), kValidityFloor);
                if (c.neg + c.pos == 0) {
                    throw ValidityCollapsed("divisor vanishes at x = 0: " + describe(e));
                }
                r.neg = std::min(r.neg, c.neg);
                r.pos = std::min(r.pos, c.pos);
            }
            if (r.neg == g.neg_cells() && r.pos == g.pos_cells()) {
                return {g, ctx, shrunk};
            }
            // One cell of margin on each side that actually stopped short.
            if (r.neg < g.neg_cells() && r.neg > 0) --r.neg;
            if (r.pos < g.pos_cells() && r.pos > 0) --r.pos;
            cut = r;
        }

        CellRange r = *cut;
        if ((r.neg + r.pos) % 2 != 0) {
            if (r.pos >= r.neg && r.pos > 0) --r.pos;
            else --r.neg;
        }
        if (r.neg + r.pos < Grid::kMinRestrictedCells) {
            throw ValidityCollapsed("validity interval shrank below " + std::to_string(Grid::kMinRestrictedCells) +
                                    " cells");
        }
        if (r.neg == g.neg_cells() && r.pos == g.pos_cells()) {
            throw ValidityCollapsed("validity interval cannot be shrunk further");
        }
        g = g.restricted(r.neg, r.pos);
        shrunk = true;
    }
}

}  // namespace multexode
