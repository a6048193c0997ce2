#include "multexode/multex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multexode::multex {

SignTable::SignTable(int n) : n_(n) {
    if (n < 1) {
        throw std::invalid_argument("sign table arity must be >= 1");
    }
}

int SignTable::operator()(int j, int k) const {
    const int kk = nu(k, n_);
    return (kk == nu(j, n_) || kk == nu(j + 1, n_)) ? -1 : 1;
}

namespace {

void check_inputs(std::span<const GridFn> fs) {
    if (fs.empty()) {
        throw std::invalid_argument("series needs at least one input function");
    }
    for (const auto& f : fs) {
        if (!(f.grid() == fs.front().grid())) {
            throw InvalidGrid("series inputs must share one grid");
        }
    }
}

// G = max_x |int_0^x max_i |f_i||, the factorial-domination scale.
double domination_scale(std::span<const GridFn> fs) {
    const Grid& grid = fs.front().grid();
    std::vector<cplx> g(grid.size(), 0.0);
    for (const auto& f : fs) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] = std::max(g[i].real(), std::abs(f[i]));
        }
    }
    return primitive(GridFn(grid, std::move(g))).sup_norm();
}

// Runs S^0, S^1, ... handing each term to `sink(k, term)`. Convergence is
// tested every `cycle` terms against the sup-norm of the last `cycle` terms.
template <class Sink>
SeriesDiagnostics run_series(std::span<const GridFn> fs, int cycle, const SeriesOptions& opts,
                             const char* what, Sink&& sink) {
    if (!(opts.tol > 0.0)) {
        throw std::invalid_argument("series tolerance must be positive");
    }
    check_inputs(fs);
    const Grid& grid = fs.front().grid();
    const int n = static_cast<int>(fs.size());

    GridFn prev = GridFn::constant(grid, 1.0);
    sink(0, prev);

    SeriesDiagnostics diag;
    int last_significant = 0;
    int k = 0;
    double cycle_max = 0.0;
    std::vector<double> cycle_nodes(grid.size(), 0.0);
    bool exhausted = true;
    bool vanished = false;

    while (k < opts.max_terms) {
        ++k;
        GridFn term = primitive(fs[static_cast<std::size_t>(nu(k, n) - 1)] * prev);
        const double norm = term.sup_norm();
        sink(k, term);
        if (norm > opts.tol) {
            last_significant = k;
        }
        cycle_max = std::max(cycle_max, norm);
        for (std::size_t i = 0; i < cycle_nodes.size(); ++i) {
            cycle_nodes[i] = std::max(cycle_nodes[i], std::abs(term[i]));
        }
        vanished = norm == 0.0;
        prev = std::move(term);
        if (vanished || k % cycle == 0) {
            diag.last_term_norm = cycle_max;
            if (vanished || cycle_max <= opts.tol) {
                exhausted = false;
                break;
            }
            if (k < opts.max_terms) {
                cycle_max = 0.0;
                std::fill(cycle_nodes.begin(), cycle_nodes.end(), 0.0);
            }
        }
    }
    if (exhausted) {
        diag.last_term_norm = cycle_max;
    }

    diag.terms_used = last_significant + 1;
    diag.apriori_bound = vanished ? 0.0 : factorial_tail(domination_scale(fs), 1, k);
    diag.converged = !exhausted;
    if (diag.converged) {
        diag.converged_within = grid.interval();
        return diag;
    }

    CellRange region;
    const std::size_t z = grid.zero_index();
    while (region.pos < grid.pos_cells() && cycle_nodes[z + region.pos + 1] <= opts.tol) ++region.pos;
    while (region.neg < grid.neg_cells() && cycle_nodes[z - region.neg - 1] <= opts.tol) ++region.neg;
    if (region.neg + region.pos > 0) {
        diag.converged_within = Interval(grid.node(z - region.neg), grid.node(z + region.pos));
    }
    if (diag.last_term_norm > 1e3 * opts.tol) {
        throw NotConverged(what, diag);
    }
    return diag;
}

}  // namespace

GridFn simplicial(std::span<const GridFn> fs, int j) {
    if (j < 0) {
        throw std::invalid_argument("simplicial order must be >= 0");
    }
    check_inputs(fs);
    const int n = static_cast<int>(fs.size());
    GridFn s = GridFn::constant(fs.front().grid(), 1.0);
    for (int m = 1; m <= j; ++m) {
        s = primitive(fs[static_cast<std::size_t>(nu(m, n) - 1)] * s);
    }
    return s;
}

SeriesResult multex_E(std::span<const GridFn> fs, const SeriesOptions& opts) {
    check_inputs(fs);
    std::vector<cplx> sum(fs.front().grid().size(), 0.0);
    auto diag = run_series(fs, 1, opts, "multex", [&](int, const GridFn& term) {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += term[i];
    });
    return {GridFn(fs.front().grid(), std::move(sum), "E"), diag};
}

TrigFamily trig_family(std::span<const GridFn> fs, const SeriesOptions& opts) {
    check_inputs(fs);
    const int n = static_cast<int>(fs.size());
    const std::size_t size = fs.front().grid().size();
    std::vector<std::vector<cplx>> sums(static_cast<std::size_t>(n), std::vector<cplx>(size, 0.0));
    auto diag = run_series(fs, n, opts, "trig", [&](int k, const GridFn& term) {
        auto& target = sums[static_cast<std::size_t>(nu(k, n) - 1)];
        for (std::size_t i = 0; i < size; ++i) target[i] += term[i];
    });
    TrigFamily family{{}, diag};
    family.classes.reserve(sums.size());
    for (int j = 1; j <= n; ++j) {
        family.classes.emplace_back(fs.front().grid(), std::move(sums[static_cast<std::size_t>(j - 1)]),
                                    "T;" + std::to_string(j));
    }
    return family;
}

SeriesResult trig_T(const TrigSpec& spec, const SeriesOptions& opts) {
    const int n = spec.arity();
    if (spec.j < 1 || spec.j > n) {
        throw std::invalid_argument("trig index must lie in 1..n");
    }
    auto family = trig_family(spec.fs, opts);
    return {std::move(family.classes[static_cast<std::size_t>(spec.j - 1)]), family.diagnostics};
}

double trig_equiv_check(const TrigSpec& spec, const SeriesOptions& opts) {
    const int n = spec.arity();
    const GridFn by_class = trig_T(spec, opts).value;
    const GridFn e_plain = multex_E(spec.fs, opts).value;
    if (n == 1) {
        return max_abs_diff(by_class, e_plain);
    }
    const SignTable eps(n);
    std::vector<GridFn> flipped;
    flipped.reserve(spec.fs.size());
    for (int k = 1; k <= n; ++k) {
        flipped.push_back(cplx(eps(spec.j, k)) * spec.fs[static_cast<std::size_t>(k - 1)]);
    }
    const GridFn e_flipped = multex_E(flipped, opts).value;
    const GridFn by_halves = spec.j == n ? 0.5 * (e_plain + e_flipped) : 0.5 * (e_plain - e_flipped);
    return max_abs_diff(by_class, by_halves);
}

}  // namespace multexode::multex
