#include "multexode/gridfn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace multexode {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) {
        std::ostringstream os;
        os << "interval requires lo < hi, got [" << lo << ", " << hi << "]";
        throw InvalidGrid(os.str());
    }
}

// ---------------------------------------------------------------------------
// Grid

Grid Grid::uniform(Interval iv, std::size_t cells) {
    if (cells < kMinCells || cells % 2 != 0) {
        throw InvalidGrid("grid needs an even number of cells >= 16, got " + std::to_string(cells));
    }
    if (!(iv.lo < 0.0 && 0.0 < iv.hi)) {
        std::ostringstream os;
        os << "grid interval [" << iv.lo << ", " << iv.hi << "] must contain 0 in its interior";
        throw InvalidGrid(os.str());
    }
    const double h = iv.width() / static_cast<double>(cells);
    const double neg_exact = -iv.lo / h;
    const double neg_round = std::round(neg_exact);
    if (std::abs(neg_exact - neg_round) > 1e-9 * std::max(1.0, neg_exact)) {
        std::ostringstream os;
        os << "x = 0 is not a node of [" << iv.lo << ", " << iv.hi << "] with " << cells
           << " cells; choose a cell count for which lo/h is an integer";
        throw InvalidGrid(os.str());
    }
    const auto neg = static_cast<std::size_t>(neg_round);
    return Grid(h, neg, cells - neg);
}

Grid::Grid(double step, std::size_t neg_cells, std::size_t pos_cells)
    : h_(step), neg_(neg_cells), pos_(pos_cells) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw InvalidGrid("grid step must be positive and finite");
    }
    if (neg_cells + pos_cells < kMinRestrictedCells) {
        throw InvalidGrid("grid needs at least 4 cells, got " + std::to_string(neg_cells + pos_cells));
    }
}

Grid Grid::restricted(std::size_t neg, std::size_t pos) const {
    if (neg > neg_ || pos > pos_) {
        throw InvalidGrid("restriction exceeds the parent grid");
    }
    return Grid(h_, neg, pos);
}

bool Grid::contains(const Grid& sub) const {
    return sub.h_ == h_ && sub.neg_ <= neg_ && sub.pos_ <= pos_;
}

// ---------------------------------------------------------------------------
// GridFn

std::size_t nearest_to_zero(const Grid& grid, const std::vector<bool>& bad) {
    const std::size_t z = grid.zero_index();
    if (bad[z]) {
        return z;
    }
    const std::size_t reach = std::max(grid.neg_cells(), grid.pos_cells());
    for (std::size_t d = 1; d <= reach; ++d) {
        if (d <= grid.neg_cells() && bad[z - d]) {
            return z - d;
        }
        if (d <= grid.pos_cells() && bad[z + d]) {
            return z + d;
        }
    }
    return grid.size();
}

GridFn::GridFn(Grid grid, std::vector<cplx> values, std::string label)
    : grid_(grid), values_(std::move(values)), label_(std::move(label)) {
    if (values_.size() != grid_.size()) {
        throw InvalidGrid("sample count " + std::to_string(values_.size()) + " does not match grid size " +
                          std::to_string(grid_.size()));
    }
    bool any_bad = false;
    std::vector<bool> bad(values_.size(), false);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag())) {
            bad[i] = true;
            any_bad = true;
        }
    }
    if (any_bad) {
        throw Overflow(grid_.node(nearest_to_zero(grid_, bad)), label_);
    }
}

GridFn GridFn::constant(const Grid& grid, cplx c, std::string label) {
    return GridFn(grid, std::vector<cplx>(grid.size(), c), std::move(label));
}

GridFn GridFn::identity(const Grid& grid) {
    return sample(grid, [](double x) { return x; }, "x");
}

GridFn GridFn::with_label(std::string label) const {
    GridFn out = *this;
    out.label_ = std::move(label);
    return out;
}

cplx GridFn::eval(double x) const {
    const double h = grid_.step();
    const double lo = grid_.node(0);
    const auto last = static_cast<std::ptrdiff_t>(values_.size()) - 1;
    auto base = static_cast<std::ptrdiff_t>(std::floor((x - lo) / h)) - 1;
    base = std::clamp<std::ptrdiff_t>(base, 0, last - 3);
    cplx acc = 0.0;
    for (std::ptrdiff_t a = 0; a < 4; ++a) {
        const double xa = grid_.node(static_cast<std::size_t>(base + a));
        double w = 1.0;
        for (std::ptrdiff_t b = 0; b < 4; ++b) {
            if (b != a) {
                const double xb = grid_.node(static_cast<std::size_t>(base + b));
                w *= (x - xb) / (xa - xb);
            }
        }
        acc += w * values_[static_cast<std::size_t>(base + a)];
    }
    return acc;
}

double GridFn::sup_norm() const {
    double m = 0.0;
    for (const auto& v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

GridFn GridFn::restricted(const Grid& sub) const {
    if (!grid_.contains(sub)) {
        throw InvalidGrid("restriction target is not a sub-grid");
    }
    const std::size_t first = grid_.zero_index() - sub.zero_index();
    std::vector<cplx> v(values_.begin() + static_cast<std::ptrdiff_t>(first),
                        values_.begin() + static_cast<std::ptrdiff_t>(first + sub.size()));
    return GridFn(sub, std::move(v), label_);
}

// ---------------------------------------------------------------------------
// Primitive

namespace {

// Cumulative integral along one half-line. `at(k)` returns f at offset k from
// zero in the marching direction (k may be -1 to reach across 0). Offsets
// 0..count are filled into `out[k]` as int_0^{k h} in the marching variable.
template <class At>
void march(At&& at, std::size_t count, bool can_look_back, double h, std::vector<cplx>& out) {
    out.assign(count + 1, 0.0);
    for (std::size_t k = 2; k <= count; k += 2) {
        out[k] = out[k - 2] + (h / 3.0) * (at(k - 2) + 4.0 * at(k - 1) + at(k));
    }
    // Odd offsets add one cell to the Simpson value at k - 1 with a cubic-exact
    // four-point rule, falling back to three points on very short grids.
    for (std::size_t k = 1; k <= count; k += 2) {
        const auto pk = static_cast<std::ptrdiff_t>(k) - 1;
        const auto last = static_cast<std::ptrdiff_t>(count);
        const bool back1 = pk >= 1 || can_look_back;
        const bool back2 = pk >= 2;
        cplx half;
        if (back1 && pk + 2 <= last) {
            half = (h / 24.0) * (-at(pk - 1) + 13.0 * at(pk) + 13.0 * at(pk + 1) - at(pk + 2));
        } else if (pk + 3 <= last) {
            half = (h / 24.0) * (9.0 * at(pk) + 19.0 * at(pk + 1) - 5.0 * at(pk + 2) + at(pk + 3));
        } else if (back2) {
            half = (h / 24.0) * (at(pk - 2) - 5.0 * at(pk - 1) + 19.0 * at(pk) + 9.0 * at(pk + 1));
        } else if (pk + 2 <= last) {
            half = (h / 12.0) * (5.0 * at(pk) + 8.0 * at(pk + 1) - at(pk + 2));
        } else if (back1) {
            half = (h / 12.0) * (-at(pk - 1) + 8.0 * at(pk) + 5.0 * at(pk + 1));
        } else {
            half = (h / 2.0) * (at(pk) + at(pk + 1));
        }
        out[k] = out[k - 1] + half;
    }
}

void check_same_grid(const GridFn& f, const GridFn& g) {
    if (!(f.grid() == g.grid())) {
        throw InvalidGrid("pointwise operation on functions sampled on different grids");
    }
}

}  // namespace

GridFn primitive(const GridFn& f) {
    const Grid& grid = f.grid();
    const std::size_t z = grid.zero_index();
    const double h = grid.step();
    const auto vals = f.values();
    std::vector<cplx> out(grid.size(), 0.0);
    std::vector<cplx> half;

    march([&](std::ptrdiff_t k) { return vals[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(z) + k)]; },
          grid.pos_cells(), grid.neg_cells() > 0, h, half);
    for (std::size_t k = 1; k <= grid.pos_cells(); ++k) {
        out[z + k] = half[k];
    }
    march([&](std::ptrdiff_t k) { return vals[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(z) - k)]; },
          grid.neg_cells(), grid.pos_cells() > 0, h, half);
    for (std::size_t k = 1; k <= grid.neg_cells(); ++k) {
        out[z - k] = -half[k];
    }
    return GridFn(grid, std::move(out), f.label().empty() ? "" : "P(" + f.label() + ")");
}

// ---------------------------------------------------------------------------
// Pointwise algebra

GridFn algebra(const GridFn& f, const GridFn& g, AlgebraOp op, double div_floor) {
    check_same_grid(f, g);
    const std::size_t n = f.size();
    std::vector<cplx> out(n);
    switch (op) {
        case AlgebraOp::add:
            for (std::size_t i = 0; i < n; ++i) out[i] = f[i] + g[i];
            break;
        case AlgebraOp::sub:
            for (std::size_t i = 0; i < n; ++i) out[i] = f[i] - g[i];
            break;
        case AlgebraOp::mul:
            for (std::size_t i = 0; i < n; ++i) out[i] = f[i] * g[i];
            break;
        case AlgebraOp::div: {
            std::vector<bool> bad(n, false);
            bool any_bad = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (!(std::abs(g[i]) > div_floor)) {
                    bad[i] = true;
                    any_bad = true;
                }
            }
            if (any_bad) {
                throw DivisorTooSmall(f.grid().node(nearest_to_zero(f.grid(), bad)), g.label());
            }
            for (std::size_t i = 0; i < n; ++i) out[i] = f[i] / g[i];
            break;
        }
    }
    return GridFn(f.grid(), std::move(out));
}

GridFn operator+(const GridFn& f, const GridFn& g) { return algebra(f, g, AlgebraOp::add); }
GridFn operator-(const GridFn& f, const GridFn& g) { return algebra(f, g, AlgebraOp::sub); }
GridFn operator*(const GridFn& f, const GridFn& g) { return algebra(f, g, AlgebraOp::mul); }

GridFn operator*(cplx c, const GridFn& f) {
    std::vector<cplx> out(f.values().begin(), f.values().end());
    for (auto& v : out) v *= c;
    return GridFn(f.grid(), std::move(out));
}

GridFn exp_primitive(const GridFn& f, int sign) {
    if (sign != 1 && sign != -1) {
        throw std::invalid_argument("exp_primitive sign must be +1 or -1");
    }
    const GridFn p = primitive(f);
    std::vector<cplx> out(p.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::exp(static_cast<double>(sign) * p[i]);
    }
    return GridFn(f.grid(), std::move(out), "exp_primitive");
}

// ---------------------------------------------------------------------------
// Zero-free scans

namespace {

// Distance from 0 to the segment [a, b] in the complex plane. A sign change
// between two nodes gives 0 even when both node values clear the floor.
double segment_distance(cplx a, cplx b) {
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) {
        return std::abs(a);
    }
    const double t = -(a.real() * d.real() + a.imag() * d.imag()) / len2;
    if (t <= 0.0) return std::abs(a);
    if (t >= 1.0) return std::abs(b);
    // Perpendicular distance; exactly 0 for a real sign change.
    return std::abs(a.real() * d.imag() - a.imag() * d.real()) / std::sqrt(len2);
}

}  // namespace

CellRange zero_free_cells(const GridFn& f, double floor) {
    const Grid& grid = f.grid();
    const std::size_t z = grid.zero_index();
    CellRange r;
    if (!(std::abs(f[z]) > floor)) {
        return r;
    }
    while (r.pos < grid.pos_cells() && segment_distance(f[z + r.pos], f[z + r.pos + 1]) > floor) ++r.pos;
    while (r.neg < grid.neg_cells() && segment_distance(f[z - r.neg], f[z - r.neg - 1]) > floor) ++r.neg;
    return r;
}

Interval zero_free_interval(const GridFn& f, double floor) {
    const Grid& grid = f.grid();
    if (!(std::abs(f.at_zero()) > floor)) {
        throw DivisorTooSmall(0.0, f.label());
    }
    const CellRange r = zero_free_cells(f, floor);
    if (r.neg + r.pos == 0) {
        throw ValidityCollapsed("no node besides 0 clears the floor");
    }
    const std::size_t z = grid.zero_index();
    return {grid.node(z - r.neg), grid.node(z + r.pos)};
}

// ---------------------------------------------------------------------------

GridFn derivative_fd4(const GridFn& f) {
    const std::size_t n = f.size();
    const double h = f.grid().step();
    std::vector<cplx> d(n);
    auto v = [&](std::size_t i) { return f[i]; };
    for (std::size_t i = 2; i + 2 < n; ++i) {
        d[i] = (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2)) / (12.0 * h);
    }
    d[0] = (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)) / (12.0 * h);
    d[1] = (-3.0 * v(0) - 10.0 * v(1) + 18.0 * v(2) - 6.0 * v(3) + v(4)) / (12.0 * h);
    d[n - 1] = (25.0 * v(n - 1) - 48.0 * v(n - 2) + 36.0 * v(n - 3) - 16.0 * v(n - 4) + 3.0 * v(n - 5)) / (12.0 * h);
    d[n - 2] = (3.0 * v(n - 1) + 10.0 * v(n - 2) - 18.0 * v(n - 3) + 6.0 * v(n - 4) - v(n - 5)) / (12.0 * h);
    return GridFn(f.grid(), std::move(d), f.label().empty() ? "" : f.label() + "'");
}

double max_abs_diff(const GridFn& f, const GridFn& g) {
    check_same_grid(f, g);
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        m = std::max(m, std::abs(f[i] - g[i]));
    }
    return m;
}

}  // namespace multexode
