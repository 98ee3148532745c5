#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace esarb {

/// Sparse inequality row: sum(coef[k] * z[index[k]]) <= upper.
struct LpRow {
    std::vector<std::size_t> index;
    std::vector<double> coef;
    double upper = 0.0;
};

/// Where the risk-minimization variables live inside an LpProblem.
struct VariableRoles {
    std::size_t alpha = 0;
    std::size_t portfolio_begin = 0;
    std::size_t portfolio_count = 0;
    std::size_t auxiliary_begin = 0;
    std::size_t auxiliary_count = 0;
};

/// min objective'z subject to rows and lower <= z <= upper (bounds may be infinite).
struct LpProblem {
    std::vector<double> objective;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<LpRow> rows;
    std::optional<VariableRoles> roles;

    [[nodiscard]] std::size_t variable_count() const noexcept { return objective.size(); }
    /// Throws std::invalid_argument on inconsistent sizes or indices.
    void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

[[nodiscard]] std::string to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> values;
    std::vector<double> row_duals;   ///< non-positive multipliers of the <= rows
    std::size_t iterations = 0;
    double primal_residual = 0.0;    ///< worst bound or row violation
    double duality_gap = 0.0;        ///< objective minus certified lower bound
};

/// Thrown when the solver cannot certify its answer.
class LpNumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solves the LP. Problems carrying VariableRoles whose rows have the hinge
/// shape of an expected-shortfall program are solved through their compact
/// dual, which scales to very many scenarios; everything else goes through a
/// dense dual simplex.
[[nodiscard]] LpSolution solve_lp(const LpProblem& problem);

}  // namespace esarb
