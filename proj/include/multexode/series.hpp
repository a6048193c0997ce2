#pragma once

#include <optional>
#include <string>

#include "multexode/errors.hpp"
#include "multexode/gridfn.hpp"

namespace multexode {

/// Truncation controls shared by every iterated-integral series.
struct SeriesOptions {
    double tol = 1e-12;
    int max_terms = 200;
};

struct SeriesDiagnostics {
    int terms_used = 0;
    double last_term_norm = 0.0;
    double apriori_bound = 0.0;
    bool converged = false;
    /// Node interval around 0 on which the last computed terms are already below
    /// tol. Equals the whole grid when converged.
    std::optional<Interval> converged_within;
};

/// Raised when max_terms is exhausted and the last term still exceeds 1e3 * tol.
class NotConverged : public Error {
public:
    NotConverged(std::string what, SeriesDiagnostics diag);
    SeriesDiagnostics diagnostics;
};

/// sum_{j > J} (1/n) (n G)^j / j!, the factorial tail of an iterated-integral
/// series whose integrand is dominated by g with G = |int_0^x g|.
/// Summation stops once terms drop below 1e-18 relative to the running total.
[[nodiscard]] double factorial_tail(double g_integral, int n, int J);

}  // namespace multexode
