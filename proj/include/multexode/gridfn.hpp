#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "multexode/errors.hpp"

namespace multexode {

using cplx = std::complex<double>;

/// Default pointwise division floor: |divisor| must exceed this at every node.
inline constexpr double kDefaultDivFloor = 1e-12;

/// Closed interval [lo, hi] with lo < hi.
struct Interval {
    double lo = -1.0;
    double hi = 1.0;

    Interval() = default;
    Interval(double lo_, double hi_);

    [[nodiscard]] double width() const { return hi - lo; }
    [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Uniform grid with spacing h whose node `zero_index()` sits exactly at x = 0.
///
/// Nodes are x_i = (i - neg_cells) * h, so 0 is reproduced without rounding
/// and the two half-lines are mirror images of each other.
class Grid {
public:
    /// Smallest number of cells accepted for a user-facing grid.
    static constexpr std::size_t kMinCells = 16;
    /// Smallest number of cells a shrunken validity grid may keep.
    static constexpr std::size_t kMinRestrictedCells = 4;

    /// Grid on `iv` with `cells` cells. Requires cells >= 16, cells even, and
    /// lo/h integral (within 1e-9) so that 0 is a node.
    static Grid uniform(Interval iv, std::size_t cells);

    Grid(double step, std::size_t neg_cells, std::size_t pos_cells);

    [[nodiscard]] double step() const { return h_; }
    [[nodiscard]] std::size_t cells() const { return neg_ + pos_; }
    [[nodiscard]] std::size_t size() const { return neg_ + pos_ + 1; }
    [[nodiscard]] std::size_t zero_index() const { return neg_; }
    [[nodiscard]] std::size_t neg_cells() const { return neg_; }
    [[nodiscard]] std::size_t pos_cells() const { return pos_; }
    [[nodiscard]] double node(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(neg_)) * h_;
    }
    [[nodiscard]] Interval interval() const { return {node(0), node(cells())}; }

    /// Sub-grid with the same spacing keeping `neg` cells left of 0 and `pos` right of it.
    [[nodiscard]] Grid restricted(std::size_t neg, std::size_t pos) const;
    /// True when `sub` has the same spacing and lies inside this grid.
    [[nodiscard]] bool contains(const Grid& sub) const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    double h_;
    std::size_t neg_;
    std::size_t pos_;
};

/// A complex-valued function sampled on every node of a Grid. Immutable.
class GridFn {
public:
    /// Throws Overflow at the non-finite node closest to 0, InvalidGrid on size mismatch.
    GridFn(Grid grid, std::vector<cplx> values, std::string label = {});

    static GridFn constant(const Grid& grid, cplx c, std::string label = {});
    static GridFn identity(const Grid& grid);

    template <class F>
    static GridFn sample(const Grid& grid, F&& f, std::string label = {}) {
        std::vector<cplx> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = cplx(f(grid.node(i)));
        }
        return GridFn(grid, std::move(v), std::move(label));
    }

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] std::span<const cplx> values() const { return values_; }
    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] cplx operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] cplx at_zero() const { return values_[grid_.zero_index()]; }
    [[nodiscard]] const std::string& label() const { return label_; }
    [[nodiscard]] GridFn with_label(std::string label) const;

    /// Value between nodes by local cubic (4-point Lagrange) interpolation.
    /// Reporting only; the series recurrences never call this.
    [[nodiscard]] cplx eval(double x) const;

    [[nodiscard]] double sup_norm() const;
    [[nodiscard]] GridFn restricted(const Grid& sub) const;

private:
    Grid grid_;
    std::vector<cplx> values_;
    std::string label_;
};

/// g(x) = int_0^x f, signed for x < 0. Composite Simpson from 0 at even offsets,
/// a three-point half-panel rule at odd offsets; g(0) = 0 exactly.
[[nodiscard]] GridFn primitive(const GridFn& f);

enum class AlgebraOp { add, sub, mul, div };

/// Pointwise f op g on identical grids. Division requires |g| > div_floor at
/// every node and throws DivisorTooSmall at the offending node closest to 0.
[[nodiscard]] GridFn algebra(const GridFn& f, const GridFn& g, AlgebraOp op,
                             double div_floor = kDefaultDivFloor);

[[nodiscard]] GridFn operator+(const GridFn& f, const GridFn& g);
[[nodiscard]] GridFn operator-(const GridFn& f, const GridFn& g);
[[nodiscard]] GridFn operator*(const GridFn& f, const GridFn& g);
[[nodiscard]] GridFn operator*(cplx c, const GridFn& f);

/// e^{sign * P f}; sign must be +1 or -1.
[[nodiscard]] GridFn exp_primitive(const GridFn& f, int sign);

/// Cells on each side of 0 over which |f| > floor, scanning outward from 0. A cell
/// ends the scan when the chord between its end values passes within floor of 0.
struct CellRange {
    std::size_t neg = 0;
    std::size_t pos = 0;
};
[[nodiscard]] CellRange zero_free_cells(const GridFn& f, double floor);

/// Largest node interval containing 0 on which |f| > floor. Requires |f(0)| > floor.
[[nodiscard]] Interval zero_free_interval(const GridFn& f, double floor);

/// Fourth-order finite-difference derivative (central inside, one-sided at the ends).
[[nodiscard]] GridFn derivative_fd4(const GridFn& f);

/// max_i |f_i - g_i| over a common grid.
[[nodiscard]] double max_abs_diff(const GridFn& f, const GridFn& g);

/// Index of the node closest to 0 among those flagged by `bad`, or size() if none.
[[nodiscard]] std::size_t nearest_to_zero(const Grid& grid, const std::vector<bool>& bad);

}  // namespace multexode
