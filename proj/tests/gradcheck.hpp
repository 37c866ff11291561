#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "nn/tensor.hpp"

namespace newsrank::testing {

// Central finite differences against a scalar loss closure. The closure must
// recompute the full forward pass from the current parameter values. Kept
// independent of the tape so it can act as an oracle for it.
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
};

inline double rel_err(double a, double b) {
    const double denom = std::max({1e-3, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) / denom;
}

inline GradCheckResult finite_diff_check(std::vector<nn::ParamGroup*> params,
                                         const std::function<double()>& loss,
                                         const std::function<void()>& compute_grads,
                                         double h = 1e-5) {
    for (auto* p : params) p->zero_grad();
    compute_grads();
    GradCheckResult res;
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            const double up = loss();
            p->value[i] = orig - h;
            const double down = loss();
            p->value[i] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = p->grad[i];
            res.max_rel_err = std::max(res.max_rel_err, rel_err(analytic, numeric));
            ++res.checked;
        }
    }
    return res;
}

}  // namespace newsrank::testing
