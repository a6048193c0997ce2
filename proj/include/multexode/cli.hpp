#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "multexode/expr.hpp"
#include "multexode/gridfn.hpp"

namespace multexode::cli {

/// A config value that is missing, malformed or inconsistent. `field` names it.
class ConfigError : public InputError {
public:
    ConfigError(std::string field, const std::string& message);
    std::string field;
};

/// Flat `key = value` problem description. Lines starting with '#' are comments.
struct ProblemConfig {
    int order = 0;
    /// Raw coefficient text by name (a1..a9): an expression or `file:PATH`.
    std::map<std::string, std::string> coefficients;
    Interval interval{-1.0, 1.0};
    std::size_t grid = 200;
    double tol = 1e-12;
    int max_terms = 200;
    std::vector<cplx> initial;
    /// "", "schrodinger" or "orr".
    std::string preset;
    std::string zeta;
    cplx omega = 0.0;
    double compare_tol = 1e-6;
    bool numeric_diff = false;
    /// Directory that relative sample paths resolve against.
    std::filesystem::path base_dir;
};

[[nodiscard]] ProblemConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
[[nodiscard]] ProblemConfig load_config(const std::filesystem::path& path);

/// Reads a CSV table `x, re [, im]` (an optional non-numeric header line and
/// '#' comments are skipped). Throws NonMonotoneAbscissae unless x increases strictly.
[[nodiscard]] std::shared_ptr<const expr::SampleTable> ingest_samples(const std::filesystem::path& path,
                                                                      std::string id = {});

/// Coefficient expressions a_1..a_n of the configured equation, with sample
/// tables loaded and cross-references between coefficients substituted.
[[nodiscard]] std::vector<expr::Expr> coefficient_exprs(const ProblemConfig& cfg);

struct CompareReport {
    double max_abs_err = 0.0;
    double err_location = 0.0;
    Interval validity;
    std::vector<int> terms_used;
    std::vector<std::string> oracles;
    std::map<std::string, double> oracle_errors;
    double tolerance = 0.0;
    bool pass = false;
};

/// Entry point shared by the executable and the tests. Returns the exit code:
/// 0 success, 1 input error, 2 numerical failure, 3 comparison failed.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace multexode::cli
