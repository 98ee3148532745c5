#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace esarb::detail {

struct NelderMeadOptions {
    std::size_t max_evaluations = 20000;
    double x_tol = 1e-12;
    double f_tol = 1e-16;
    double initial_step = 0.1;
    int restarts = 3;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::vector<double> trace;
};

/// Downhill simplex with standard coefficients. Non-finite values are treated
/// as +inf. Restarts a fresh simplex at the best point after convergence.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
    const std::size_t n = x0.size();
    NelderMeadResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : INFINITY;
    };

    std::vector<double> best = std::move(x0);
    double fbest = eval(best);
    res.trace.push_back(fbest);

    for (int round = 0; round <= opt.restarts; ++round) {
        std::vector<std::vector<double>> s(n + 1, best);
        std::vector<double> fs(n + 1);
        fs[0] = fbest;
        for (std::size_t i = 0; i < n; ++i) {
            const double h = opt.initial_step * (round == 0 ? 1.0 : 0.1) * std::max(1.0, std::abs(best[i]));
            s[i + 1][i] += h;
            fs[i + 1] = eval(s[i + 1]);
        }
        bool converged = false;
        std::vector<std::size_t> order(n + 1);
        while (res.evaluations < opt.max_evaluations) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
            const std::size_t lo = order.front();
            const std::size_t hi = order.back();
            const std::size_t nh = order[n - 1];

            double spread = 0.0;
            for (std::size_t k = 0; k <= n; ++k) {
                for (std::size_t i = 0; i < n; ++i) {
                    spread = std::max(spread, std::abs(s[k][i] - s[lo][i]) / std::max(1.0, std::abs(s[lo][i])));
                }
            }
            const double fspread = std::abs(fs[hi] - fs[lo]);
            if (spread <= opt.x_tol || (std::isfinite(fs[hi]) && fspread <= opt.f_tol * (1e-300 + std::abs(fs[lo])) )) {
                converged = true;
                break;
            }

            std::vector<double> c(n, 0.0);
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == hi) continue;
                for (std::size_t i = 0; i < n; ++i) c[i] += s[k][i] / static_cast<double>(n);
            }
            auto along = [&](double t) {
                std::vector<double> x(n);
                for (std::size_t i = 0; i < n; ++i) x[i] = c[i] + t * (s[hi][i] - c[i]);
                return x;
            };
            auto xr = along(-1.0);
            const double fr = eval(xr);
            if (fr < fs[lo]) {
                auto xe = along(-2.0);
                const double fe = eval(xe);
                if (fe < fr) { s[hi] = std::move(xe); fs[hi] = fe; }
                else { s[hi] = std::move(xr); fs[hi] = fr; }
            } else if (fr < fs[nh]) {
                s[hi] = std::move(xr);
                fs[hi] = fr;
            } else {
                const bool outside = fr < fs[hi];
                auto xc = along(outside ? -0.5 : 0.5);
                const double fc = eval(xc);
                if (fc < (outside ? fr : fs[hi])) {
                    s[hi] = std::move(xc);
                    fs[hi] = fc;
                } else {
                    for (std::size_t k = 0; k <= n; ++k) {
                        if (k == lo) continue;
                        for (std::size_t i = 0; i < n; ++i) s[k][i] = s[lo][i] + 0.5 * (s[k][i] - s[lo][i]);
                        fs[k] = eval(s[k]);
                    }
                }
            }
            const double fmin = *std::min_element(fs.begin(), fs.end());
            res.trace.push_back(std::min(res.trace.back(), fmin));
        }
        const auto k = static_cast<std::size_t>(std::distance(fs.begin(), std::min_element(fs.begin(), fs.end())));
        const bool improved = fs[k] < fbest;
        if (fs[k] <= fbest) {
            fbest = fs[k];
            best = s[k];
        }
        res.converged = converged;
        if (!converged || (!improved && round > 0)) break;
    }
    res.x = std::move(best);
    res.f = fbest;
    return res;
}

}  // namespace esarb::detail
