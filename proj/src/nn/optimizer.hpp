#pragma once

#include <cstdint>
#include <vector>

#include "nn/tensor.hpp"

namespace newsrank::nn {

struct OptimizerConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-6;
    double weight_decay = 0.01;
    std::size_t warmup_steps = 0;
    std::size_t total_steps = 1;
};

// Adaptive-moment update with decoupled weight decay and a linear
// warmup-then-decay learning rate schedule: lr rises linearly from 0 over
// warmup_steps, then decays linearly to 0 at total_steps.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg);

    // Effective learning rate used for step index `step` (0-based).
    double lr_at(std::size_t step) const;

    // Applies one update from the accumulated gradients. Does not zero them.
    void step(std::vector<ParamGroup*>& params);

    std::size_t step_count() const { return step_count_; }
    const OptimizerConfig& config() const { return cfg_; }
    bool schedule_exhausted() const { return warned_past_end_; }

private:
    OptimizerConfig cfg_;
    std::size_t step_count_ = 0;
    bool warned_past_end_ = false;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace newsrank::nn
