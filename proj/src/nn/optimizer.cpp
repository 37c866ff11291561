#include "nn/optimizer.hpp"

#include <cmath>
#include <cstdio>

#include "common/error.hpp"

namespace newsrank::nn {

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(cfg) {
    if (cfg_.learning_rate <= 0.0) throw InputError("optimizer: learning_rate must be positive");
    if (cfg_.total_steps == 0) throw InputError("optimizer: total_steps must be positive");
    if (cfg_.weight_decay < 0.0) throw InputError("optimizer: weight_decay must be nonnegative");
    if (cfg_.warmup_steps > cfg_.total_steps) {
        throw InputError("optimizer: warmup_steps exceeds total_steps");
    }
}

double Optimizer::lr_at(std::size_t step) const {
    if (step < cfg_.warmup_steps) {
        return cfg_.learning_rate * static_cast<double>(step) /
               static_cast<double>(cfg_.warmup_steps);
    }
    if (step >= cfg_.total_steps) return 0.0;
    const double remain = static_cast<double>(cfg_.total_steps - step);
    const double span = static_cast<double>(cfg_.total_steps - cfg_.warmup_steps);
    return span > 0.0 ? cfg_.learning_rate * remain / span : cfg_.learning_rate;
}

void Optimizer::step(std::vector<ParamGroup*>& params) {
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const ParamGroup* p : params) {
            m_.push_back(Tensor::zeros(p->value.shape()));
            v_.push_back(Tensor::zeros(p->value.shape()));
        }
    }
    if (m_.size() != params.size()) {
        throw TrainError("optimizer: parameter set changed between steps");
    }

    const std::size_t step_index = step_count_;
    if (step_index >= cfg_.total_steps && !warned_past_end_) {
        warned_past_end_ = true;
        std::fprintf(stderr,
                     "warning: optimizer stepped past total_steps=%zu, learning rate is 0\n",
                     cfg_.total_steps);
    }
    const double lr = lr_at(step_index);
    step_count_ = step_index + 1;

    const double t = static_cast<double>(step_count_);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t);

    for (std::size_t p = 0; p < params.size(); ++p) {
        ParamGroup& pg = *params[p];
        if (!pg.value.same_shape(m_[p])) {
            throw TrainError("optimizer: shape of '" + pg.name + "' changed between steps");
        }
        double* w = pg.value.data();
        const double* g = pg.grad.data();
        double* m = m_[p].data();
        double* v = v_[p].data();
        for (std::size_t i = 0; i < pg.value.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * w[i]);
        }
    }
}

}  // namespace newsrank::nn
