#pragma once

#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "multexode/expr.hpp"
#include "multexode/gridfn.hpp"
#include "multexode/series.hpp"

namespace multexode {

/// Grid-sampled values for coefficient references.
using Env = std::map<std::string, GridFn>;

struct LowerOptions {
    SeriesOptions series;
    double div_floor = kDefaultDivFloor;
};

/// Evaluates expressions on one grid. Results (including whole trig families
/// and their diagnostics) are memoized per context, so a context is the unit
/// of reuse for one solve. Safe to call concurrently.
class LowerContext {
public:
    LowerContext(Grid grid, Env env, LowerOptions opts = {});

    [[nodiscard]] GridFn lower(const expr::Expr& e);

    /// Diagnostics of the trig family a lowered trig node belongs to.
    [[nodiscard]] std::optional<SeriesDiagnostics> series_diagnostics(const expr::Expr& trig_node) const;

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] const Env& env() const { return env_; }
    [[nodiscard]] const LowerOptions& options() const { return opts_; }

private:
    struct Family {
        std::vector<expr::Expr> fs;
        std::vector<GridFn> classes;
        SeriesDiagnostics diagnostics;
    };

    GridFn compute(const expr::Expr& e);
    const Family& family(const expr::Expr& trig_node);
    GridFn sampled(const expr::Node& n);

    Grid grid_;
    Env env_;
    LowerOptions opts_;

    mutable std::shared_mutex mutex_;
    std::unordered_map<std::size_t, std::vector<std::pair<expr::Expr, GridFn>>> memo_;
    std::unordered_map<std::size_t, std::vector<std::shared_ptr<const Family>>> families_;
};

[[nodiscard]] GridFn lower(const expr::Expr& e, const Env& env, const Grid& grid, const LowerOptions& opts = {});

/// An expression set evaluated on the largest sub-grid around 0 where it is
/// well defined: every divisor stays above 1e-8 and every series converges.
struct Realization {
    Grid grid;
    std::shared_ptr<LowerContext> context;
    bool shrunk = false;
};

/// Lowers `roots` and every divisor reachable from them (plus `checks`),
/// shrinking the grid around 0 past failures until all succeed. Throws
/// ValidityCollapsed when fewer than Grid::kMinRestrictedCells cells remain.
[[nodiscard]] Realization realize(const std::vector<expr::Expr>& roots, const std::vector<expr::Expr>& checks,
                                  const Grid& grid, const Env& env, const LowerOptions& opts = {});

/// Floor below which a divisor or leading coefficient ends the validity interval.
inline constexpr double kValidityFloor = 1e-8;

}  // namespace multexode
