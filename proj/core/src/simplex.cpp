#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <cstdint>
#include <unordered_set>

namespace esarb::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr std::size_t kRefactorEvery = 50;
constexpr int kMaxWidenings = 3;

struct Candidate {
    std::size_t k;
    double t;
    double abs_alpha;
    double numerator;
};

}  // namespace

DualSimplex::DualSimplex(SimplexModel model) : model_(std::move(model)) {
    m_ = model_.a.rows;
    n_ = model_.a.cols();
    if (model_.cost.size() != n_ || model_.lower.size() != n_ || model_.upper.size() != n_ ||
        model_.row_lower.size() != m_ || model_.row_upper.size() != m_) {
        throw std::invalid_argument("simplex model dimensions disagree");
    }
    for (std::size_t k = 0; k < n_; ++k) {
        if (model_.lower[k] > model_.upper[k]) throw std::invalid_argument("column bounds crossed");
    }
    for (std::size_t i = 0; i < m_; ++i) {
        if (model_.row_lower[i] > model_.row_upper[i]) throw std::invalid_argument("row bounds crossed");
    }
}

double DualSimplex::nonbasic_value(std::size_t k) const {
    switch (status_[k]) {
        case Status::at_lower: return lo_[k];
        case Status::at_upper: return hi_[k];
        default: return 0.0;
    }
}

double DualSimplex::column_dot(std::size_t k, const Eigen::VectorXd& v) const {
    if (k >= n_) return -v[static_cast<Eigen::Index>(k - n_)];
    double s = 0.0;
    for (std::size_t e = model_.a.start[k]; e < model_.a.start[k + 1]; ++e) {
        s += model_.a.value[e] * v[static_cast<Eigen::Index>(model_.a.index[e])];
    }
    return s;
}

void DualSimplex::column_into(std::size_t k, Eigen::VectorXd& out) const {
    out.setZero(static_cast<Eigen::Index>(m_));
    if (k >= n_) {
        out[static_cast<Eigen::Index>(k - n_)] = -1.0;
        return;
    }
    for (std::size_t e = model_.a.start[k]; e < model_.a.start[k + 1]; ++e) {
        out[static_cast<Eigen::Index>(model_.a.index[e])] += model_.a.value[e];
    }
}

void DualSimplex::initialize() {
    const std::size_t total = n_ + m_;
    lo_.resize(total);
    hi_.resize(total);
    art_lo_.assign(total, false);
    art_hi_.assign(total, false);
    status_.assign(total, Status::at_lower);
    x_.assign(total, 0.0);
    d_.assign(total, 0.0);
    head_.resize(m_);

    double scale = 1.0;
    for (std::size_t k = 0; k < n_; ++k) {
        lo_[k] = model_.lower[k];
        hi_[k] = model_.upper[k];
        if (std::isfinite(lo_[k])) scale = std::max(scale, std::abs(lo_[k]));
        if (std::isfinite(hi_[k])) scale = std::max(scale, std::abs(hi_[k]));
    }
    for (std::size_t i = 0; i < m_; ++i) {
        lo_[n_ + i] = model_.row_lower[i];
        hi_[n_ + i] = model_.row_upper[i];
        if (std::isfinite(lo_[n_ + i])) scale = std::max(scale, std::abs(lo_[n_ + i]));
        if (std::isfinite(hi_[n_ + i])) scale = std::max(scale, std::abs(hi_[n_ + i]));
        status_[n_ + i] = Status::basic;
        head_[i] = n_ + i;
    }
    big_ = 1e6 * scale;

    for (std::size_t k = 0; k < n_; ++k) {
        const double c = model_.cost[k];
        const bool has_lo = std::isfinite(lo_[k]);
        const bool has_hi = std::isfinite(hi_[k]);
        if (c > 0.0) {
            if (!has_lo) { lo_[k] = -big_; art_lo_[k] = true; }
            status_[k] = Status::at_lower;
        } else if (c < 0.0) {
            if (!has_hi) { hi_[k] = big_; art_hi_[k] = true; }
            status_[k] = Status::at_upper;
        } else if (has_lo) {
            status_[k] = Status::at_lower;
        } else if (has_hi) {
            status_[k] = Status::at_upper;
        } else {
            status_[k] = Status::at_zero;
        }
    }
    binv_ = -Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    initialized_ = true;
}

void DualSimplex::refactor() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd b(m, m);
    Eigen::VectorXd col;
    for (std::size_t i = 0; i < m_; ++i) {
        column_into(head_[i], col);
        b.col(static_cast<Eigen::Index>(i)) = col;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    if (!lu.isInvertible()) {
        throw std::runtime_error("simplex basis became singular");
    }
    binv_ = lu.inverse();
    since_refactor_ = 0;
}

void DualSimplex::compute_primal() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
    for (std::size_t k = 0; k < n_ + m_; ++k) {
        if (status_[k] == Status::basic) continue;
        const double v = nonbasic_value(k);
        x_[k] = v;
        if (v == 0.0) continue;
        if (k >= n_) {
            rhs[static_cast<Eigen::Index>(k - n_)] += v;
        } else {
            for (std::size_t e = model_.a.start[k]; e < model_.a.start[k + 1]; ++e) {
                rhs[static_cast<Eigen::Index>(model_.a.index[e])] -= v * model_.a.value[e];
            }
        }
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] = xb[static_cast<Eigen::Index>(i)];
}

void DualSimplex::compute_duals() {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
        cb[static_cast<Eigen::Index>(i)] = head_[i] < n_ ? model_.cost[head_[i]] : 0.0;
    }
    y_ = binv_.transpose() * cb;
    for (std::size_t k = 0; k < n_ + m_; ++k) {
        if (status_[k] == Status::basic) {
            d_[k] = 0.0;
        } else {
            const double c = k < n_ ? model_.cost[k] : 0.0;
            d_[k] = c - column_dot(k, y_);
        }
    }
}

bool DualSimplex::repair_dual_feasibility() {
    bool changed = false;
    for (std::size_t k = 0; k < n_ + m_; ++k) {
        const Status s = status_[k];
        if (s == Status::basic || lo_[k] == hi_[k]) continue;
        const double d = d_[k];
        if (d < -kDualTol && s != Status::at_upper) {
            if (!std::isfinite(hi_[k])) { hi_[k] = std::max(big_, lo_[k] + big_); art_hi_[k] = true; }
            status_[k] = Status::at_upper;
            changed = true;
        } else if (d > kDualTol && s != Status::at_lower) {
            if (!std::isfinite(lo_[k])) { lo_[k] = std::min(-big_, hi_[k] - big_); art_lo_[k] = true; }
            status_[k] = Status::at_lower;
            changed = true;
        }
    }
    return changed;
}

bool DualSimplex::release_artificial() {
    bool moved = false;
    for (std::size_t k = 0; k < n_ + m_; ++k) {
        const Status s = status_[k];
        const bool on_art = (s == Status::at_lower && art_lo_[k]) || (s == Status::at_upper && art_hi_[k]);
        if (!on_art || std::abs(d_[k]) > kDualTol) continue;
        const double true_lo = k < n_ ? model_.lower[k] : model_.row_lower[k - n_];
        const double true_hi = k < n_ ? model_.upper[k] : model_.row_upper[k - n_];
        lo_[k] = true_lo;
        hi_[k] = true_hi;
        art_lo_[k] = art_hi_[k] = false;
        if (std::isfinite(true_lo)) status_[k] = Status::at_lower;
        else if (std::isfinite(true_hi)) status_[k] = Status::at_upper;
        else status_[k] = Status::at_zero;
        moved = true;
    }
    return moved;
}

std::uint64_t DualSimplex::state_hash() const {
    std::uint64_t h = 0;
    for (std::size_t k = 0; k < n_ + m_; ++k) {
        if (status_[k] == Status::at_lower) continue;
        std::uint64_t v = (static_cast<std::uint64_t>(k) << 2) | static_cast<std::uint64_t>(status_[k]);
        v += 0x9e3779b97f4a7c15ULL;
        v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
        v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
        h += v ^ (v >> 31);
    }
    return h;
}

void DualSimplex::widen_artificial() {
    big_ *= 1e3;
    for (std::size_t k = 0; k < n_ + m_; ++k) {
        if (art_lo_[k]) lo_[k] = -big_;
        if (art_hi_[k]) hi_[k] = big_;
    }
    ++widenings_;
}

void DualSimplex::set_column_bounds(std::size_t j, double lo, double hi) {
    if (j >= n_ || lo > hi) throw std::invalid_argument("bad column bound update");
    model_.lower[j] = lo;
    model_.upper[j] = hi;
    if (!initialized_) return;
    lo_[j] = lo;
    hi_[j] = hi;
    art_lo_[j] = art_hi_[j] = false;
    Status& s = status_[j];
    if (s == Status::basic) return;
    if (s == Status::at_lower && !std::isfinite(lo)) s = std::isfinite(hi) ? Status::at_upper : Status::at_zero;
    else if (s == Status::at_upper && !std::isfinite(hi)) s = std::isfinite(lo) ? Status::at_lower : Status::at_zero;
    else if (s == Status::at_zero && std::isfinite(lo)) s = Status::at_lower;
    else if (s == Status::at_zero && std::isfinite(hi)) s = Status::at_upper;
}

void DualSimplex::set_row_bounds(std::size_t i, double lo, double hi) {
    if (i >= m_ || lo > hi) throw std::invalid_argument("bad row bound update");
    model_.row_lower[i] = lo;
    model_.row_upper[i] = hi;
    if (!initialized_) return;
    const std::size_t k = n_ + i;
    lo_[k] = lo;
    hi_[k] = hi;
    art_lo_[k] = art_hi_[k] = false;
    Status& s = status_[k];
    if (s == Status::basic) return;
    if (s == Status::at_lower && !std::isfinite(lo)) s = std::isfinite(hi) ? Status::at_upper : Status::at_zero;
    else if (s == Status::at_upper && !std::isfinite(hi)) s = std::isfinite(lo) ? Status::at_lower : Status::at_zero;
    else if (s == Status::at_zero && std::isfinite(lo)) s = Status::at_lower;
    else if (s == Status::at_zero && std::isfinite(hi)) s = Status::at_upper;
}

SimplexStatus DualSimplex::solve() {
    if (!initialized_) initialize();
    refactor();

    const std::size_t limit = iterations_ + 50 * (n_ + m_) + 10000;
    std::unordered_set<std::uint64_t> seen;
    bool bland = false;
    double last_obj = -kInf;
    std::vector<Candidate> cands;
    Eigen::VectorXd col;

    while (true) {
        if (iterations_ > limit) {
            throw std::runtime_error("simplex iteration limit reached");
        }
        if (since_refactor_ >= kRefactorEvery) refactor();
        compute_duals();
        repair_dual_feasibility();
        compute_primal();

        const double obj = objective();
        if (obj > last_obj + 1e-12 * (1.0 + std::abs(obj))) {
            bland = false;
            last_obj = obj;
            seen.clear();
        } else if (!seen.insert(state_hash()).second) {
            // Same basis and bound pattern without progress: cycling.
            bland = true;
        }

        std::size_t r = m_;
        double delta = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t k = head_[i];
            const double v = x_[k];
            double dv = 0.0;
            if (v < lo_[k] - kPrimalTol * (1.0 + std::abs(lo_[k]))) dv = v - lo_[k];
            else if (v > hi_[k] + kPrimalTol * (1.0 + std::abs(hi_[k]))) dv = v - hi_[k];
            else continue;
            if (r == m_ || (bland ? k < head_[r] : std::abs(dv) > std::abs(delta))) {
                r = i;
                delta = dv;
            }
        }

        if (r == m_) {
            if (release_artificial()) continue;
            bool stuck = false;
            for (std::size_t k = 0; k < n_ + m_; ++k) {
                if ((status_[k] == Status::at_lower && art_lo_[k]) ||
                    (status_[k] == Status::at_upper && art_hi_[k])) {
                    stuck = true;
                    break;
                }
            }
            if (!stuck) return SimplexStatus::optimal;
            if (widenings_ >= kMaxWidenings) return SimplexStatus::unbounded;
            widen_artificial();
            continue;
        }

        const Eigen::VectorXd rho = binv_.row(static_cast<Eigen::Index>(r)).transpose();
        const double sign = delta < 0.0 ? 1.0 : -1.0;
        cands.clear();
        for (std::size_t k = 0; k < n_ + m_; ++k) {
            const Status s = status_[k];
            if (s == Status::basic || lo_[k] == hi_[k]) continue;
            const double at = sign * column_dot(k, rho);
            double num;
            if (s == Status::at_lower && at < -kPivotTol) num = std::max(d_[k], 0.0);
            else if (s == Status::at_upper && at > kPivotTol) num = std::max(-d_[k], 0.0);
            else if (s == Status::at_zero && std::abs(at) > kPivotTol) num = std::abs(d_[k]);
            else continue;
            cands.push_back({k, num / std::abs(at), std::abs(at), num});
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            return a.t < b.t || (a.t == b.t && a.k < b.k);
        });

        std::size_t chosen = cands.size();
        std::vector<std::size_t> flips;
        if (bland) {
            if (!cands.empty()) chosen = 0;
        } else {
            double slope = std::abs(delta);
            std::size_t s = 0;
            for (; s < cands.size(); ++s) {
                const std::size_t k = cands[s].k;
                const double range = hi_[k] - lo_[k];
                if (status_[k] != Status::at_zero && std::isfinite(range)) {
                    const double next = slope - cands[s].abs_alpha * range;
                    if (next > 0.0) {
                        flips.push_back(k);
                        slope = next;
                        continue;
                    }
                }
                break;
            }
            if (s < cands.size()) {
                double tmax = kInf;
                for (std::size_t j = s; j < cands.size(); ++j) {
                    tmax = std::min(tmax, (cands[j].numerator + kDualTol) / cands[j].abs_alpha);
                }
                chosen = s;
                for (std::size_t j = s; j < cands.size() && cands[j].t <= tmax; ++j) {
                    if (cands[j].abs_alpha > cands[chosen].abs_alpha) chosen = j;
                }
            }
        }

        if (chosen == cands.size()) {
            bool any_art = false;
            for (std::size_t k = 0; k < n_ + m_; ++k) {
                if (art_lo_[k] || art_hi_[k]) { any_art = true; break; }
            }
            if (any_art && widenings_ < kMaxWidenings) {
                widen_artificial();
                continue;
            }
            return SimplexStatus::infeasible;
        }

        const std::size_t q = cands[chosen].k;
        column_into(q, col);
        const Eigen::VectorXd alpha_q = binv_ * col;
        const double pivot = alpha_q[static_cast<Eigen::Index>(r)];
        const double row_pivot = column_dot(q, rho);
        if (std::abs(pivot) < 1e-11 || std::abs(pivot - row_pivot) > 1e-6 * (1.0 + std::abs(pivot))) {
            if (since_refactor_ > 0) {
                refactor();
                continue;
            }
            throw std::runtime_error("simplex pivot is numerically unstable");
        }

        for (std::size_t k : flips) {
            status_[k] = status_[k] == Status::at_lower ? Status::at_upper : Status::at_lower;
        }
        const std::size_t p = head_[r];
        status_[p] = delta < 0.0 ? Status::at_lower : Status::at_upper;
        status_[q] = Status::basic;
        head_[r] = q;

        const auto ri = static_cast<Eigen::Index>(r);
        binv_.row(ri) /= pivot;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m_); ++i) {
            if (i == ri || alpha_q[i] == 0.0) continue;
            binv_.row(i) -= alpha_q[i] * binv_.row(ri);
        }
        ++since_refactor_;
        ++iterations_;
    }
}

std::vector<double> DualSimplex::column_values() const {
    return std::vector<double>(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
}

std::vector<double> DualSimplex::row_activities() const {
    return std::vector<double>(x_.begin() + static_cast<std::ptrdiff_t>(n_), x_.end());
}

std::vector<double> DualSimplex::row_duals() const {
    return std::vector<double>(y_.data(), y_.data() + y_.size());
}

double DualSimplex::objective() const {
    double s = 0.0;
    for (std::size_t k = 0; k < n_; ++k) s += model_.cost[k] * x_[k];
    return s;
}

double DualSimplex::dual_bound() const {
    double s = 0.0;
    for (std::size_t k = 0; k < n_ + m_; ++k) {
        const double d = d_[k];
        const double lo = k < n_ ? model_.lower[k] : model_.row_lower[k - n_];
        const double hi = k < n_ ? model_.upper[k] : model_.row_upper[k - n_];
        if (d > 0.0) {
            if (std::isfinite(lo)) s += d * lo;
            else if (d > kDualTol) return -kInf;
        } else if (d < 0.0) {
            if (std::isfinite(hi)) s += d * hi;
            else if (d < -kDualTol) return -kInf;
        }
    }
    return s;
}

double DualSimplex::max_primal_infeasibility() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < n_ + m_; ++k) {
        const double lo = k < n_ ? model_.lower[k] : model_.row_lower[k - n_];
        const double hi = k < n_ ? model_.upper[k] : model_.row_upper[k - n_];
        worst = std::max({worst, lo - x_[k], x_[k] - hi});
    }
    return worst;
}

}  // namespace esarb::detail
