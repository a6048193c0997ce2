#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "multexode/errors.hpp"
#include "multexode/gridfn.hpp"

using namespace multexode;

namespace {

Grid grid(double lo, double hi, std::size_t cells) { return Grid::uniform({lo, hi}, cells); }

double max_err(const GridFn& f, double (*g)(double)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i] - g(f.grid().node(i))));
    return m;
}

}  // namespace

TEST(Grid, ZeroIsANode) {
    const Grid g = grid(-0.75, 1.25, 80);
    EXPECT_EQ(g.node(g.zero_index()), 0.0);
    EXPECT_EQ(g.neg_cells(), 30u);
    EXPECT_EQ(g.pos_cells(), 50u);
    EXPECT_DOUBLE_EQ(g.interval().lo, -0.75);
    EXPECT_DOUBLE_EQ(g.interval().hi, 1.25);
}

TEST(Grid, RejectsBadShapes) {
    EXPECT_THROW(grid(-1, 1, 15), InvalidGrid);
    EXPECT_THROW(grid(-1, 1, 14), InvalidGrid);
    EXPECT_THROW(grid(0.1, 1, 100), InvalidGrid);
    EXPECT_THROW(grid(-1, 1, 99), InvalidGrid);
    // 0 must fall on a node.
    EXPECT_THROW(grid(-0.333, 1, 20), InvalidGrid);
    EXPECT_THROW(Grid(0.1, 1, 2), InvalidGrid);
}

TEST(Grid, Restriction) {
    const Grid g = grid(-1, 1, 40);
    const Grid sub = g.restricted(4, 6);
    EXPECT_TRUE(g.contains(sub));
    EXPECT_EQ(sub.size(), 11u);
    EXPECT_DOUBLE_EQ(sub.node(0), -0.2);
    EXPECT_THROW((void)g.restricted(21, 2), InvalidGrid);
    const GridFn x = GridFn::identity(g).restricted(sub);
    EXPECT_DOUBLE_EQ(x[sub.size() - 1].real(), 0.3);
}

TEST(GridFn, RejectsNonFiniteAtNodeNearestZero) {
    const Grid g = grid(-1, 1, 20);
    std::vector<cplx> v(g.size(), 1.0);
    v[2] = std::numeric_limits<double>::infinity();
    v[15] = std::nan("");
    try {
        GridFn f(g, v);
        FAIL();
    } catch (const Overflow& e) {
        EXPECT_DOUBLE_EQ(e.x, 0.5);
    }
}

TEST(GridFn, SizeMismatch) {
    EXPECT_THROW(GridFn(grid(-1, 1, 20), std::vector<cplx>(5)), InvalidGrid);
}

TEST(Primitive, ConstantGivesIdentity) {
    const Grid g = grid(-1, 1, 200);
    const GridFn p = primitive(GridFn::constant(g, 1.0));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(p[i].real(), g.node(i), 1e-14);
}

TEST(Primitive, CosineGivesSine) {
    const GridFn p = primitive(GridFn::sample(grid(-1, 1, 2000), [](double x) { return std::cos(x); }));
    EXPECT_LE(max_err(p, [](double x) { return std::sin(x); }), 1e-10);
}

TEST(Primitive, ZeroAndAnchor) {
    const Grid g = grid(-1, 1, 50);
    EXPECT_EQ(primitive(GridFn::constant(g, 0.0)).sup_norm(), 0.0);
    const GridFn p = primitive(GridFn::sample(g, [](double x) { return std::exp(x) + 3.0; }));
    EXPECT_EQ(p.at_zero(), cplx(0.0));
}

TEST(Primitive, SignedOnNegativeSide) {
    // int_0^x 1 = x < 0 for x < 0, and int_0^x x = x^2/2 > 0.
    const Grid g = grid(-2, 1, 60);
    const GridFn p = primitive(GridFn::identity(g));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(p[i].real(), 0.5 * g.node(i) * g.node(i), 1e-14);
}

TEST(Primitive, Linear) {
    const Grid g = grid(-1, 1, 100);
    const GridFn f = GridFn::sample(g, [](double x) { return std::sin(3 * x); });
    const GridFn h = GridFn::sample(g, [](double x) { return cplx(x * x, std::cos(x)); });
    const cplx c(0.5, -2.0);
    const GridFn lhs = primitive(c * f + h);
    const GridFn rhs = c * primitive(f) + primitive(h);
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-14);
}

TEST(Primitive, ConvergenceOrder) {
    auto err = [](std::size_t cells) {
        const GridFn p = primitive(GridFn::sample(grid(-1, 1, cells), [](double x) { return std::exp(2 * x); }));
        return max_err(p, [](double x) { return 0.5 * (std::exp(2 * x) - 1.0); });
    };
    const double e1 = err(40);
    const double e2 = err(80);
    EXPECT_GE(std::log2(e1 / e2), 3.5);
}

TEST(Algebra, Pointwise) {
    const Grid g = grid(-1, 1, 20);
    const GridFn x = GridFn::identity(g);
    const GridFn sq = algebra(x, x, AlgebraOp::mul);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(sq[i].real(), g.node(i) * g.node(i));
    const GridFn diff = algebra(sq, x, AlgebraOp::sub);
    EXPECT_DOUBLE_EQ(diff[0].real(), 2.0);

    const GridFn c = GridFn::sample(g, [](double t) { return std::cos(t); });
    EXPECT_EQ(algebra(GridFn::constant(g, 1.0), c, AlgebraOp::div).at_zero(), cplx(1.0));

    const GridFn zeta = GridFn::sample(g, [](double t) { return 2.0 + std::sin(t); });
    EXPECT_EQ(max_abs_diff(algebra(zeta, zeta, AlgebraOp::div), GridFn::constant(g, 1.0)), 0.0);
}

TEST(Algebra, DivisorTooSmallNearestZero) {
    const Grid g = grid(-1, 1, 20);
    const GridFn d = GridFn::sample(g, [](double x) { return x - 0.5; }, "d");
    try {
        (void)algebra(GridFn::constant(g, 1.0), d, AlgebraOp::div);
        FAIL();
    } catch (const DivisorTooSmall& e) {
        EXPECT_NEAR(e.x, 0.5, 1e-12);
    }
}

TEST(Algebra, GridMismatch) {
    EXPECT_THROW((void)(GridFn::constant(grid(-1, 1, 20), 1.0) + GridFn::constant(grid(-1, 1, 40), 1.0)), InvalidGrid);
}

TEST(ExpPrimitive, Constant) {
    const Grid g = grid(-1, 1, 100);
    const GridFn up = exp_primitive(GridFn::constant(g, 0.7), +1);
    const GridFn down = exp_primitive(GridFn::constant(g, 0.7), -1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(std::abs(up[i] - std::exp(0.7 * g.node(i))), 0.0, 1e-13);
        EXPECT_NEAR(std::abs(down[i] - std::exp(-0.7 * g.node(i))), 0.0, 1e-13);
    }
    EXPECT_EQ(max_abs_diff(exp_primitive(GridFn::constant(g, 0.0), 1), GridFn::constant(g, 1.0)), 0.0);
}

TEST(ExpPrimitive, ImpedanceForm) {
    // a1 = -zeta'/zeta: e^{-P a1} = zeta / zeta(0).
    const Grid g = grid(-1, 1, 400);
    const GridFn a1 = GridFn::sample(g, [](double x) { return -std::cos(x) / (2.0 + std::sin(x)); });
    const GridFn e = exp_primitive(a1, -1);
    EXPECT_LE(max_err(e, [](double x) { return (2.0 + std::sin(x)) / 2.0; }), 1e-9);
}

TEST(ExpPrimitive, ProductIsOne) {
    const Grid g = grid(-1, 1, 100);
    const GridFn f = GridFn::sample(g, [](double x) { return std::sin(5 * x) + x; });
    EXPECT_LE(max_abs_diff(exp_primitive(f, 1) * exp_primitive(f, -1), GridFn::constant(g, 1.0)), 1e-14);
}

TEST(ExpPrimitive, OverflowCarriesNode) {
    const Grid g = grid(-1, 1, 100);
    EXPECT_THROW((void)exp_primitive(GridFn::constant(g, 1000.0), 1), Overflow);
    EXPECT_THROW((void)exp_primitive(GridFn::constant(g, 1.0), 0), std::invalid_argument);
}

TEST(ZeroFree, LinearFunction) {
    const Grid g = grid(-2, 2, 400);
    const Interval iv = zero_free_interval(GridFn::sample(g, [](double x) { return 1.0 + x; }), 0.1);
    EXPECT_GE(iv.lo, -0.9);
    EXPECT_LE(iv.lo, -0.9 + 2 * g.step());
    EXPECT_DOUBLE_EQ(iv.hi, 2.0);
}

TEST(ZeroFree, Constant) {
    const Grid g = grid(-1, 1, 20);
    EXPECT_EQ(zero_free_interval(GridFn::constant(g, 1.0), 0.5), g.interval());
}

TEST(ZeroFree, CosineZeros) {
    const Grid g = grid(-3, 3, 600);
    const Interval iv = zero_free_interval(GridFn::sample(g, [](double x) { return std::cos(x); }), 0.0);
    const double half = std::numbers::pi / 2;
    EXPECT_LT(iv.hi, half);
    EXPECT_GT(iv.hi, half - 2 * g.step());
    EXPECT_GT(iv.lo, -half);
    EXPECT_LT(iv.lo, -half + 2 * g.step());
}

TEST(ZeroFree, SignChangeBetweenNodes) {
    // The chord between nodes crosses zero even though no node is small.
    const Grid g = grid(-1, 1, 20);
    const GridFn f = GridFn::sample(g, [](double x) { return x - 0.45; });
    const CellRange r = zero_free_cells(f, 1e-8);
    EXPECT_EQ(r.neg, 10u);
    EXPECT_EQ(r.pos, 4u);
}

TEST(ZeroFree, VanishingAtZero) {
    const Grid g = grid(-1, 1, 20);
    EXPECT_THROW((void)zero_free_interval(GridFn::identity(g), 1e-3), DivisorTooSmall);
}

TEST(Fd4, Derivative) {
    const GridFn f = GridFn::sample(grid(-1, 1, 400), [](double x) { return std::sin(2 * x); });
    EXPECT_LE(max_err(derivative_fd4(f), [](double x) { return 2 * std::cos(2 * x); }), 1e-8);
}

TEST(Eval, CubicInterpolation) {
    const GridFn f = GridFn::sample(grid(-1, 1, 200), [](double x) { return std::exp(x); });
    for (double x : {-0.9973, -0.0031, 0.5, 0.99911}) EXPECT_NEAR(f.eval(x).real(), std::exp(x), 1e-9);
    const GridFn cubic = GridFn::sample(grid(-1, 1, 20), [](double x) { return x * x * x - x; });
    EXPECT_NEAR(cubic.eval(0.123).real(), 0.123 * 0.123 * 0.123 - 0.123, 1e-14);
}
