#include "multexode/series.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace multexode {

namespace {

std::string not_converged_message(const std::string& what, const SeriesDiagnostics& d) {
    std::ostringstream os;
    os << what << ": not converged after " << d.terms_used << " terms, last term norm " << d.last_term_norm;
    return os.str();
}

}  // namespace

NotConverged::NotConverged(std::string what, SeriesDiagnostics diag)
    : Error(not_converged_message(what, diag)), diagnostics(std::move(diag)) {}

double factorial_tail(double g_integral, int n, int J) {
    if (g_integral < 0.0 || n < 1 || J < 0) {
        throw std::invalid_argument("factorial_tail needs g_integral >= 0, n >= 1, J >= 0");
    }
    if (g_integral == 0.0) {
        return 0.0;
    }
    const double ng = static_cast<double>(n) * g_integral;
    // term_j = (ng)^j / j!, built in log space up to j = J + 1 to avoid overflow.
    const int first = J + 1;
    double log_term = first * std::log(ng) - std::lgamma(first + 1.0);
    double term = std::exp(log_term);
    double total = 0.0;
    for (int j = first; j < first + 100000; ++j) {
        total += term;
        // Past the peak at j ~ ng the ratio ng/(j+1) < 1 and the tail is geometric.
        if (j + 1 > ng && term <= 1e-18 * total) {
            break;
        }
        term *= ng / static_cast<double>(j + 1);
    }
    return total / static_cast<double>(n);
}

}  // namespace multexode
