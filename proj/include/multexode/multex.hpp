#pragma once

#include <span>
#include <vector>

#include "multexode/gridfn.hpp"
#include "multexode/series.hpp"

namespace multexode::multex {

/// epsilon^n_{j,k} = -1 when k is congruent to j or j+1 modulo n, else +1.
class SignTable {
public:
    explicit SignTable(int n);
    [[nodiscard]] int operator()(int j, int k) const;
    [[nodiscard]] int arity() const { return n_; }

private:
    int n_;
};

/// Cyclic index map: the element of {1..n} congruent to k mod n (so nu(0) = n).
[[nodiscard]] inline int nu(int k, int n) { return ((k - 1) % n + n) % n + 1; }

/// Inputs f_1..f_n (shared grid) and a class index j in 1..n.
struct TrigSpec {
    std::vector<GridFn> fs;
    int j = 1;

    [[nodiscard]] int arity() const { return static_cast<int>(fs.size()); }
};

struct SeriesResult {
    GridFn value;
    SeriesDiagnostics diagnostics;
};

/// All n trig classes of one input list, computed in a single pass.
struct TrigFamily {
    std::vector<GridFn> classes;  // classes[j - 1] == T_{f;j}
    SeriesDiagnostics diagnostics;
};

/// S^j_{f_1..f_n}: S^0 = 1, S^m = P(f_{nu(m)} S^{m-1}). The signed primitive
/// yields both half-line branches, including the (-1)^j of the x < 0 form.
[[nodiscard]] GridFn simplicial(std::span<const GridFn> fs, int j);

/// Multex operator E_{f_1..f_n}: 1 + sum_{j >= 1} S^j, truncated once a term's
/// sup-norm drops to tol.
[[nodiscard]] SeriesResult multex_E(std::span<const GridFn> fs, const SeriesOptions& opts = {});

/// T_{f;1..n} from the mod-n class sums of S^k, stepping one full nu-cycle at a
/// time so every class receives its term before the stopping test.
[[nodiscard]] TrigFamily trig_family(std::span<const GridFn> fs, const SeriesOptions& opts = {});

[[nodiscard]] SeriesResult trig_T(const TrigSpec& spec, const SeriesOptions& opts = {});

/// Max node discrepancy between the class-sum T_{f;j} and the half sum/difference
/// of E_f and E_{epsilon f}. For n = 1 the class sum is compared with E_f itself.
[[nodiscard]] double trig_equiv_check(const TrigSpec& spec, const SeriesOptions& opts = {});

}  // namespace multexode::multex
