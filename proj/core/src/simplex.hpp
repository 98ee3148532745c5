#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace esarb::detail {

/// Compressed sparse columns, `rows` x (start.size() - 1).
struct SparseColumns {
    std::size_t rows = 0;
    std::vector<std::size_t> start{0};
    std::vector<std::size_t> index;
    std::vector<double> value;

    [[nodiscard]] std::size_t cols() const noexcept { return start.size() - 1; }
    void push_entry(std::size_t row, double v) {
        index.push_back(row);
        value.push_back(v);
    }
    void close_column() { start.push_back(index.size()); }
};

/// min cost'z  s.t.  row_lower <= A z <= row_upper,  lower <= z <= upper.
struct SimplexModel {
    SparseColumns a;
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> row_lower;
    std::vector<double> row_upper;
};

enum class SimplexStatus { optimal, infeasible, unbounded };

/// Bounded dual simplex with a bound-flipping ratio test and explicit dense
/// basis inverse. Meant for few rows and many columns. Bounds may be changed
/// between solves; the basis is kept as a warm start.
class DualSimplex {
public:
    explicit DualSimplex(SimplexModel model);

    SimplexStatus solve();

    void set_column_bounds(std::size_t j, double lo, double hi);
    void set_row_bounds(std::size_t i, double lo, double hi);

    [[nodiscard]] std::vector<double> column_values() const;
    [[nodiscard]] std::vector<double> row_activities() const;
    /// Multipliers y with reduced costs c - A'y.
    [[nodiscard]] std::vector<double> row_duals() const;
    [[nodiscard]] double objective() const;
    /// Lagrangian lower bound min_{box} (c - A'y)'z + (row terms); -inf when not dual feasible.
    [[nodiscard]] double dual_bound() const;
    [[nodiscard]] double max_primal_infeasibility() const;
    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }

private:
    enum class Status : unsigned char { basic, at_lower, at_upper, at_zero };

    void initialize();
    void refactor();
    void compute_primal();
    void compute_duals();
    bool repair_dual_feasibility();
    double column_dot(std::size_t k, const Eigen::VectorXd& v) const;
    void column_into(std::size_t k, Eigen::VectorXd& out) const;
    double nonbasic_value(std::size_t k) const;
    bool release_artificial();
    void widen_artificial();
    std::uint64_t state_hash() const;

    SimplexModel model_;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::vector<double> lo_;   // working bounds, structurals then logicals
    std::vector<double> hi_;
    std::vector<bool> art_lo_;
    std::vector<bool> art_hi_;
    std::vector<Status> status_;
    std::vector<std::size_t> head_;
    std::vector<double> x_;
    std::vector<double> d_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd binv_;
    double big_ = 1e6;
    int widenings_ = 0;
    bool initialized_ = false;
    std::size_t iterations_ = 0;
    std::size_t since_refactor_ = 0;
};

}  // namespace esarb::detail
