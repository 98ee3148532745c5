#include "esarb/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "simplex.hpp"

namespace esarb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kDenseRowLimit = 3000;

}  // namespace

void LpProblem::validate() const {
    const std::size_t n = objective.size();
    if (n == 0) throw std::invalid_argument("LP has no variables");
    if (lower.size() != n || upper.size() != n) {
        throw std::invalid_argument("LP bound vectors differ in length from the objective");
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
            !std::isfinite(objective[j])) {
            throw std::invalid_argument("LP variable bounds or costs are invalid");
        }
    }
    for (const auto& row : rows) {
        if (row.index.size() != row.coef.size() || std::isnan(row.upper)) {
            throw std::invalid_argument("LP row is malformed");
        }
        for (std::size_t k = 0; k < row.index.size(); ++k) {
            if (row.index[k] >= n || !std::isfinite(row.coef[k])) {
                throw std::invalid_argument("LP row references an invalid variable");
            }
        }
    }
    if (roles) {
        const auto& r = *roles;
        if (r.alpha >= n || r.portfolio_begin + r.portfolio_count > n ||
            r.auxiliary_begin + r.auxiliary_count > n) {
            throw std::invalid_argument("LP variable roles out of range");
        }
    }
}

std::string to_string(LpStatus status) {
    switch (status) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

namespace {

double row_activity(const LpRow& row, const std::vector<double>& z) {
    double s = 0.0;
    for (std::size_t k = 0; k < row.index.size(); ++k) s += row.coef[k] * z[row.index[k]];
    return s;
}

double primal_residual(const LpProblem& p, const std::vector<double>& z) {
    double worst = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        worst = std::max({worst, p.lower[j] - z[j], z[j] - p.upper[j]});
    }
    for (const auto& row : p.rows) worst = std::max(worst, row_activity(row, z) - row.upper);
    return worst;
}

double objective_value(const LpProblem& p, const std::vector<double>& z) {
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) s += p.objective[j] * z[j];
    return s;
}

LpStatus convert(detail::SimplexStatus s) {
    switch (s) {
        case detail::SimplexStatus::optimal: return LpStatus::optimal;
        case detail::SimplexStatus::infeasible: return LpStatus::infeasible;
        case detail::SimplexStatus::unbounded: return LpStatus::unbounded;
    }
    return LpStatus::infeasible;
}

LpSolution solve_dense(const LpProblem& p) {
    if (p.rows.size() > kDenseRowLimit) {
        throw LpNumericalError("LP too large for the dense solver and lacks hinge structure");
    }
    const std::size_t n = p.variable_count();
    std::vector<std::map<std::size_t, double>> cols(n);
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const auto& row = p.rows[i];
        for (std::size_t k = 0; k < row.index.size(); ++k) cols[row.index[k]][i] += row.coef[k];
    }
    detail::SimplexModel model;
    model.a.rows = p.rows.size();
    for (const auto& c : cols) {
        for (const auto& [i, v] : c) {
            if (v != 0.0) model.a.push_entry(i, v);
        }
        model.a.close_column();
    }
    model.cost = p.objective;
    model.lower = p.lower;
    model.upper = p.upper;
    model.row_lower.assign(p.rows.size(), -kInf);
    for (const auto& row : p.rows) model.row_upper.push_back(row.upper);

    detail::DualSimplex engine(std::move(model));
    LpSolution sol;
    sol.status = convert(engine.solve());
    sol.iterations = engine.iterations();
    if (sol.status != LpStatus::optimal) return sol;
    sol.values = engine.column_values();
    sol.row_duals = engine.row_duals();
    sol.objective = objective_value(p, sol.values);
    sol.primal_residual = primal_residual(p, sol.values);
    sol.duality_gap = sol.objective - engine.dual_bound();
    return sol;
}

// Hinge-shaped program:
//   min c_a*alpha + c_x'x + c_u'u
//   s.t. a_j*alpha + g_j'x - u_j <= b_j       (one row per auxiliary)
//        s_k*alpha + S_k'x <= e_k              (side rows)
//        [optional] w_a*alpha + w_x'x + w_u'u <= e_c   (single coupling row, w_u >= 0)
//        lo <= x <= hi, u >= 0, alpha free.
// Its dual has one row for alpha and one per portfolio variable, so the
// solver works in a space whose size does not grow with the scenario count.
struct Hinge {
    double a = 0.0;
    std::vector<std::pair<std::size_t, double>> g;
    double b = 0.0;
};

struct Side {
    double s = 0.0;
    std::vector<std::pair<std::size_t, double>> g;
    double e = 0.0;
    std::size_t row = 0;
};

struct Structure {
    VariableRoles roles;
    std::vector<Hinge> hinges;             // indexed by auxiliary
    std::vector<std::size_t> hinge_row;    // original row per auxiliary
    std::vector<Side> sides;
    std::optional<std::size_t> coupling;   // original row index
    double coupling_alpha = 0.0;
    std::vector<double> coupling_x;
    std::vector<double> coupling_u;
    double coupling_upper = 0.0;
};

std::optional<Structure> analyze(const LpProblem& p) {
    if (!p.roles) return std::nullopt;
    const auto& r = *p.roles;
    const std::size_t n = p.variable_count();
    if (1 + r.portfolio_count + r.auxiliary_count != n || r.auxiliary_count == 0) return std::nullopt;
    auto in_port = [&](std::size_t j) { return j >= r.portfolio_begin && j < r.portfolio_begin + r.portfolio_count; };
    auto in_aux = [&](std::size_t j) { return j >= r.auxiliary_begin && j < r.auxiliary_begin + r.auxiliary_count; };
    if (in_port(r.alpha) || in_aux(r.alpha)) return std::nullopt;
    for (std::size_t j = r.portfolio_begin; j < r.portfolio_begin + r.portfolio_count; ++j) {
        if (in_aux(j)) return std::nullopt;
        if (!std::isfinite(p.lower[j]) || !std::isfinite(p.upper[j])) return std::nullopt;
    }
    if (std::isfinite(p.lower[r.alpha]) || std::isfinite(p.upper[r.alpha])) return std::nullopt;
    for (std::size_t j = r.auxiliary_begin; j < r.auxiliary_begin + r.auxiliary_count; ++j) {
        if (p.lower[j] != 0.0 || std::isfinite(p.upper[j]) || p.objective[j] < 0.0) return std::nullopt;
    }

    Structure st;
    st.roles = r;
    st.hinges.resize(r.auxiliary_count);
    st.hinge_row.assign(r.auxiliary_count, p.rows.size());
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const auto& row = p.rows[i];
        double a = 0.0;
        std::map<std::size_t, double> gx;
        std::map<std::size_t, double> gu;
        for (std::size_t k = 0; k < row.index.size(); ++k) {
            const std::size_t j = row.index[k];
            if (j == r.alpha) a += row.coef[k];
            else if (in_port(j)) gx[j - r.portfolio_begin] += row.coef[k];
            else gu[j - r.auxiliary_begin] += row.coef[k];
        }
        std::erase_if(gu, [](const auto& kv) { return kv.second == 0.0; });
        if (gu.empty()) {
            Side side{a, {gx.begin(), gx.end()}, row.upper, i};
            st.sides.push_back(std::move(side));
        } else if (gu.size() == 1 && gu.begin()->second < 0.0 && st.hinge_row[gu.begin()->first] == p.rows.size()) {
            const std::size_t j = gu.begin()->first;
            const double kappa = -gu.begin()->second;
            Hinge h;
            h.a = a / kappa;
            for (const auto& [idx, v] : gx) {
                if (v != 0.0) h.g.emplace_back(idx, v / kappa);
            }
            h.b = row.upper / kappa;
            st.hinges[j] = std::move(h);
            st.hinge_row[j] = i;
        } else {
            if (st.coupling) return std::nullopt;
            st.coupling = i;
            st.coupling_alpha = a;
            st.coupling_x.assign(r.portfolio_count, 0.0);
            st.coupling_u.assign(r.auxiliary_count, 0.0);
            for (const auto& [idx, v] : gx) st.coupling_x[idx] = v;
            for (const auto& [idx, v] : gu) {
                if (v < 0.0) return std::nullopt;
                st.coupling_u[idx] = v;
            }
            st.coupling_upper = row.upper;
        }
    }
    for (std::size_t j = 0; j < r.auxiliary_count; ++j) {
        if (st.hinge_row[j] == p.rows.size()) return std::nullopt;
    }
    return st;
}

class HingeSolver {
public:
    HingeSolver(const LpProblem& p, const Structure& st) : p_(p), st_(st), engine_(build_model()) {}

    struct Point {
        LpStatus status = LpStatus::optimal;
        std::vector<double> z;
        double value = 0.0;      // objective of the theta-modified problem, including -theta*e_c
        double slope = 0.0;      // coupling activity minus its bound
        double dual_value = 0.0; // certified lower bound for the modified problem
    };

    Point evaluate(double theta) {
        const auto& r = st_.roles;
        if (st_.coupling) {
            engine_.set_row_bounds(0, cost_alpha(theta), cost_alpha(theta));
            for (std::size_t i = 0; i < r.portfolio_count; ++i) {
                const double c = cost_x(i, theta);
                engine_.set_row_bounds(1 + i, c, c);
            }
            for (std::size_t j = 0; j < r.auxiliary_count; ++j) {
                engine_.set_column_bounds(j, 0.0, cost_u(j, theta));
            }
        }
        Point pt;
        const auto s = engine_.solve();
        if (s != detail::SimplexStatus::optimal) {
            // Dual infeasible means the primal is unbounded or infeasible; dual unbounded means infeasible.
            pt.status = s == detail::SimplexStatus::infeasible ? LpStatus::unbounded : LpStatus::infeasible;
            return pt;
        }
        const auto y = engine_.row_duals();
        pt.z.assign(p_.variable_count(), 0.0);
        pt.z[r.alpha] = -y[0];
        for (std::size_t i = 0; i < r.portfolio_count; ++i) {
            const std::size_t j = r.portfolio_begin + i;
            pt.z[j] = std::clamp(-y[1 + i], p_.lower[j], p_.upper[j]);
        }
        fill_auxiliaries(pt.z);
        pt.value = modified_objective(pt.z, theta);
        pt.slope = coupling_slack(pt.z);
        pt.dual_value = -engine_.objective() - theta * st_.coupling_upper;
        pi_ = engine_.column_values();
        return pt;
    }

    void fill_auxiliaries(std::vector<double>& z) const {
        const auto& r = st_.roles;
        const double alpha = z[r.alpha];
        for (std::size_t j = 0; j < r.auxiliary_count; ++j) {
            const auto& h = st_.hinges[j];
            double v = h.a * alpha - h.b;
            for (const auto& [i, g] : h.g) v += g * z[r.portfolio_begin + i];
            z[r.auxiliary_begin + j] = std::max(0.0, v);
        }
    }

    double coupling_slack(const std::vector<double>& z) const {
        if (!st_.coupling) return 0.0;
        return row_activity(p_.rows[*st_.coupling], z) - st_.coupling_upper;
    }

    double modified_objective(const std::vector<double>& z, double theta) const {
        double v = objective_value(p_, z);
        if (st_.coupling) v += theta * coupling_slack(z);
        return v;
    }

    [[nodiscard]] std::size_t iterations() const noexcept { return engine_.iterations(); }
    [[nodiscard]] const std::vector<double>& pi() const noexcept { return pi_; }

    /// Multipliers for the original <= rows, non-positive.
    std::vector<double> row_duals(double theta) const {
        std::vector<double> out(p_.rows.size(), 0.0);
        const auto& r = st_.roles;
        for (std::size_t j = 0; j < r.auxiliary_count; ++j) out[st_.hinge_row[j]] = -pi_[j];
        for (std::size_t k = 0; k < st_.sides.size(); ++k) out[st_.sides[k].row] = -pi_[r.auxiliary_count + k];
        if (st_.coupling) out[*st_.coupling] = -theta;
        return out;
    }

private:
    double cost_alpha(double theta) const {
        return p_.objective[st_.roles.alpha] + theta * st_.coupling_alpha;
    }
    double cost_x(std::size_t i, double theta) const {
        const double base = p_.objective[st_.roles.portfolio_begin + i];
        return st_.coupling ? base + theta * st_.coupling_x[i] : base;
    }
    double cost_u(std::size_t j, double theta) const {
        const double base = p_.objective[st_.roles.auxiliary_begin + j];
        return st_.coupling ? base + theta * st_.coupling_u[j] : base;
    }

    detail::SimplexModel build_model() const {
        const auto& r = st_.roles;
        const std::size_t ni = r.portfolio_count;
        detail::SimplexModel m;
        m.a.rows = 1 + ni;
        for (std::size_t j = 0; j < r.auxiliary_count; ++j) {
            const auto& h = st_.hinges[j];
            if (h.a != 0.0) m.a.push_entry(0, -h.a);
            for (const auto& [i, g] : h.g) m.a.push_entry(1 + i, -g);
            m.a.close_column();
            m.cost.push_back(h.b);
            m.lower.push_back(0.0);
            m.upper.push_back(cost_u(j, 0.0));
        }
        for (const auto& side : st_.sides) {
            if (side.s != 0.0) m.a.push_entry(0, -side.s);
            for (const auto& [i, g] : side.g) {
                if (g != 0.0) m.a.push_entry(1 + i, -g);
            }
            m.a.close_column();
            m.cost.push_back(side.e);
            m.lower.push_back(0.0);
            m.upper.push_back(kInf);
        }
        for (std::size_t i = 0; i < ni; ++i) {
            const std::size_t j = r.portfolio_begin + i;
            m.a.push_entry(1 + i, -1.0);
            m.a.close_column();
            m.cost.push_back(p_.upper[j]);
            m.lower.push_back(0.0);
            m.upper.push_back(kInf);
            m.a.push_entry(1 + i, 1.0);
            m.a.close_column();
            m.cost.push_back(-p_.lower[j]);
            m.lower.push_back(0.0);
            m.upper.push_back(kInf);
        }
        m.row_lower.push_back(cost_alpha(0.0));
        m.row_upper.push_back(cost_alpha(0.0));
        for (std::size_t i = 0; i < ni; ++i) {
            m.row_lower.push_back(cost_x(i, 0.0));
            m.row_upper.push_back(cost_x(i, 0.0));
        }
        return m;
    }

    const LpProblem& p_;
    const Structure& st_;
    detail::DualSimplex engine_;
    std::vector<double> pi_;
};

LpSolution finish(const LpProblem& p, std::vector<double> z, double lower_bound,
                  std::vector<double> duals, std::size_t iterations) {
    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.objective = objective_value(p, z);
    sol.primal_residual = primal_residual(p, z);
    sol.duality_gap = sol.objective - lower_bound;
    sol.values = std::move(z);
    sol.row_duals = std::move(duals);
    sol.iterations = iterations;
    return sol;
}

LpSolution solve_structured(const LpProblem& p, const Structure& st) {
    HingeSolver solver(p, st);
    if (!st.coupling) {
        auto pt = solver.evaluate(0.0);
        if (pt.status != LpStatus::optimal) {
            LpSolution sol;
            sol.status = pt.status;
            sol.iterations = solver.iterations();
            return sol;
        }
        return finish(p, std::move(pt.z), pt.dual_value, solver.row_duals(0.0), solver.iterations());
    }

    // Maximize the concave dual function g(theta) of the coupling row.
    const double slope_tol = 1e-10 * (1.0 + std::abs(st.coupling_upper));
    auto lo = solver.evaluate(0.0);
    if (lo.status != LpStatus::optimal) {
        LpSolution sol;
        sol.status = lo.status;
        return sol;
    }
    if (lo.slope <= slope_tol) {
        return finish(p, std::move(lo.z), lo.dual_value, solver.row_duals(0.0), solver.iterations());
    }
    double theta_lo = 0.0;
    double theta_hi = 1.0;
    HingeSolver::Point hi;
    for (int k = 0;; ++k) {
        hi = solver.evaluate(theta_hi);
        if (hi.status != LpStatus::optimal) {
            throw LpNumericalError("coupled LP relaxation lost optimality");
        }
        if (hi.slope <= slope_tol) break;
        if (k > 80) throw LpNumericalError("coupling multiplier diverged");
        theta_lo = theta_hi;
        lo = std::move(hi);
        theta_hi *= 4.0;
    }
    if (std::abs(hi.slope) <= slope_tol) {
        return finish(p, std::move(hi.z), hi.dual_value, solver.row_duals(theta_hi), solver.iterations());
    }
    for (int k = 0; k < 500; ++k) {
        const double denom = lo.slope - hi.slope;
        double theta = (hi.value - lo.value + lo.slope * theta_lo - hi.slope * theta_hi) / denom;
        theta = std::clamp(theta, theta_lo, theta_hi);
        auto mid = solver.evaluate(theta);
        if (mid.status != LpStatus::optimal) {
            throw LpNumericalError("coupled LP relaxation lost optimality");
        }
        const double line = lo.value + lo.slope * (theta - theta_lo);
        const double gap_tol = 1e-11 * (1.0 + std::abs(line));
        if (std::abs(mid.slope) <= slope_tol) {
            return finish(p, std::move(mid.z), mid.dual_value, solver.row_duals(theta), solver.iterations());
        }
        if (line - mid.value <= gap_tol || theta <= theta_lo || theta >= theta_hi) {
            // Both bracketing solutions are optimal at the kink; blend them so the coupling row is tight.
            const double lambda = -hi.slope / denom;
            std::vector<double> z(p.variable_count());
            for (std::size_t j = 0; j < z.size(); ++j) z[j] = lambda * lo.z[j] + (1.0 - lambda) * hi.z[j];
            solver.fill_auxiliaries(z);
            const double bound = std::max(mid.dual_value, std::max(lo.dual_value, hi.dual_value));
            return finish(p, std::move(z), bound, solver.row_duals(theta), solver.iterations());
        }
        if (mid.slope > 0.0) {
            theta_lo = theta;
            lo = std::move(mid);
        } else {
            theta_hi = theta;
            hi = std::move(mid);
        }
    }
    throw LpNumericalError("coupling multiplier search did not converge");
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
    problem.validate();
    if (auto st = analyze(problem)) {
        return solve_structured(problem, *st);
    }
    return solve_dense(problem);
}

}  // namespace esarb
