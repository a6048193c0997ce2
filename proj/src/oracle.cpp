#include "multexode/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multexode::oracle {

MatrixFn::MatrixFn(int n, std::vector<GridFn> entries) : n_(n), entries_(std::move(entries)) {
    if (n < 1 || entries_.size() != static_cast<std::size_t>(n * n)) {
        throw std::invalid_argument("matrix function needs n*n entries");
    }
    for (const auto& e : entries_) {
        if (!(e.grid() == entries_.front().grid())) throw InvalidGrid("matrix entries must share one grid");
    }
}

MatrixFn MatrixFn::identity(const Grid& grid, int n) {
    std::vector<GridFn> e;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) e.push_back(GridFn::constant(grid, i == j ? 1.0 : 0.0));
    }
    return MatrixFn(n, std::move(e));
}

MatrixFn MatrixFn::zero(const Grid& grid, int n) {
    return MatrixFn(n, std::vector<GridFn>(static_cast<std::size_t>(n * n), GridFn::constant(grid, 0.0)));
}

double MatrixFn::sup_norm() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, e.sup_norm());
    return m;
}

MatrixFn companion(const std::vector<GridFn>& a) {
    if (a.empty()) throw std::invalid_argument("companion matrix needs order >= 1");
    const int n = static_cast<int>(a.size());
    const Grid& grid = a.front().grid();
    std::vector<GridFn> e;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == n - 1) e.push_back(a[static_cast<std::size_t>(n - 1 - j)]);
            else e.push_back(GridFn::constant(grid, j == i + 1 ? 1.0 : 0.0));
        }
    }
    return MatrixFn(n, std::move(e));
}

namespace {

// Nodewise product m(x) B(x).
std::vector<std::vector<cplx>> product(const MatrixFn& m, const std::vector<std::vector<cplx>>& b) {
    const int n = m.n();
    const std::size_t size = m.grid().size();
    std::vector<std::vector<cplx>> out(static_cast<std::size_t>(n * n), std::vector<cplx>(size, 0.0));
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const auto mik = m.at(i, k).values();
            for (int j = 0; j < n; ++j) {
                const auto& bkj = b[static_cast<std::size_t>(k * n + j)];
                auto& o = out[static_cast<std::size_t>(i * n + j)];
                for (std::size_t x = 0; x < size; ++x) o[x] += mik[x] * bkj[x];
            }
        }
    }
    return out;
}

}  // namespace

DysonResult dyson(const MatrixFn& m, const SeriesOptions& opts, bool keep_terms) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("dyson tolerance must be positive");
    const int n = m.n();
    const Grid& grid = m.grid();
    const std::size_t size = grid.size();
    const auto cells = static_cast<std::size_t>(n * n);

    std::vector<cplx> g(size, 0.0);
    for (const auto& e : m.entries()) {
        for (std::size_t x = 0; x < size; ++x) g[x] = std::max(g[x].real(), std::abs(e[x]));
    }
    const double g_integral = primitive(GridFn(grid, std::move(g))).sup_norm();

    std::vector<std::vector<cplx>> sum(cells, std::vector<cplx>(size, 0.0));
    std::vector<std::vector<cplx>> term(cells, std::vector<cplx>(size, 0.0));
    for (int i = 0; i < n; ++i) {
        std::fill(sum[static_cast<std::size_t>(i * n + i)].begin(), sum[static_cast<std::size_t>(i * n + i)].end(), 1.0);
        std::fill(term[static_cast<std::size_t>(i * n + i)].begin(), term[static_cast<std::size_t>(i * n + i)].end(), 1.0);
    }

    auto to_matrix = [&](const std::vector<std::vector<cplx>>& v) {
        std::vector<GridFn> e;
        e.reserve(cells);
        for (const auto& c : v) e.emplace_back(grid, c);
        return MatrixFn(n, std::move(e));
    };
    auto next = [&](const std::vector<std::vector<cplx>>& t) {
        auto prod = product(m, t);
        double norm = 0.0;
        for (auto& c : prod) {
            const GridFn p = primitive(GridFn(grid, std::move(c)));
            c.assign(p.values().begin(), p.values().end());
        }
        for (const auto& c : prod) {
            for (const auto& v : c) norm = std::max(norm, std::abs(v));
        }
        return std::pair{std::move(prod), norm};
    };

    DysonResult result{MatrixFn::identity(grid, n), 0, 0.0, {}, 0.0, 0.0, std::nullopt};
    result.g_integral = g_integral;
    if (keep_terms) result.terms.emplace();

    int j = 0;
    bool done = false;
    while (j < opts.max_terms) {
        auto [t, norm] = next(term);
        ++j;
        result.term_norms.push_back(norm);
        if (keep_terms) result.terms->push_back(to_matrix(t));
        for (std::size_t c = 0; c < cells; ++c) {
            for (std::size_t x = 0; x < size; ++x) sum[c][x] += t[c][x];
        }
        term = std::move(t);
        if (norm <= opts.tol) {
            done = true;
            break;
        }
    }
    result.terms_used = done ? j - 1 : j;
    if (!done) {
        SeriesDiagnostics diag;
        diag.terms_used = j;
        diag.last_term_norm = result.term_norms.back();
        diag.apriori_bound = truncation_bound(g_integral, n, j);
        if (diag.last_term_norm > 1e3 * opts.tol) throw NotConverged("dyson", diag);
    }
    result.next_term_norm = next(term).second;
    result.tail_bound = truncation_bound(g_integral, n, j);
    result.M = to_matrix(sum);
    return result;
}

double truncation_bound(double g_integral, int n, int J) { return factorial_tail(g_integral, n, J); }

MatrixFn rk4(const MatrixFn& m, std::size_t steps) {
    const int n = m.n();
    const Grid& grid = m.grid();
    const std::size_t size = grid.size();
    const auto cells = static_cast<std::size_t>(n * n);
    const std::size_t sub = std::max<std::size_t>(1, (steps + grid.cells() - 1) / grid.cells());

    using Mat = std::vector<cplx>;
    auto eval_m = [&](double x) {
        Mat out(cells);
        for (std::size_t c = 0; c < cells; ++c) out[c] = m.entries()[c].eval(x);
        return out;
    };
    auto node_m = [&](std::size_t i) {
        Mat out(cells);
        for (std::size_t c = 0; c < cells; ++c) out[c] = m.entries()[c][i];
        return out;
    };
    auto mul = [&](const Mat& a, const Mat& b) {
        Mat out(cells, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                const cplx aik = a[static_cast<std::size_t>(i * n + k)];
                for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(i * n + j)] += aik * b[static_cast<std::size_t>(k * n + j)];
            }
        }
        return out;
    };
    auto axpy = [&](const Mat& y, double s, const Mat& k) {
        Mat out(cells);
        for (std::size_t c = 0; c < cells; ++c) out[c] = y[c] + s * k[c];
        return out;
    };

    std::vector<Mat> at(size);
    Mat eye(cells, 0.0);
    for (int i = 0; i < n; ++i) eye[static_cast<std::size_t>(i * n + i)] = 1.0;
    const std::size_t z = grid.zero_index();
    at[z] = eye;

    auto march = [&](int dir, std::size_t count) {
        const double h = dir * grid.step() / static_cast<double>(sub);
        Mat y = eye;
        for (std::size_t cell = 0; cell < count; ++cell) {
            const std::size_t from = dir > 0 ? z + cell : z - cell;
            const std::size_t to = dir > 0 ? from + 1 : from - 1;
            const double x0 = grid.node(from);
            for (std::size_t s = 0; s < sub; ++s) {
                const double x = x0 + static_cast<double>(s) * h;
                const Mat m0 = s == 0 ? node_m(from) : eval_m(x);
                const Mat mh = eval_m(x + 0.5 * h);
                const Mat m1 = s + 1 == sub ? node_m(to) : eval_m(x + h);
                const Mat k1 = mul(m0, y);
                const Mat k2 = mul(mh, axpy(y, 0.5 * h, k1));
                const Mat k3 = mul(mh, axpy(y, 0.5 * h, k2));
                const Mat k4 = mul(m1, axpy(y, h, k3));
                for (std::size_t c = 0; c < cells; ++c) y[c] += (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            at[to] = y;
        }
    };
    march(+1, grid.pos_cells());
    march(-1, grid.neg_cells());

    std::vector<GridFn> e;
    for (std::size_t c = 0; c < cells; ++c) {
        std::vector<cplx> v(size);
        for (std::size_t i = 0; i < size; ++i) v[i] = at[i][c];
        e.emplace_back(grid, std::move(v));
    }
    return MatrixFn(n, std::move(e));
}

}  // namespace multexode::oracle
