#pragma once

#include <cstdint>

#include "common/rng.hpp"
#include "nn/tensor.hpp"

namespace newsrank::nn {

// Forward math shared by the autodiff graph and the inference paths.
// Matmul kernels keep a fixed per-row accumulation order, so the value of an
// output row depends only on the corresponding input row. Scoring a headline
// alone or inside a larger batch is therefore bitwise identical.

// C = A(m x k) * B(k x n)
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A^T(k x m) * B(k x n); gradient helper
Tensor matmul_at_b(const Tensor& a, const Tensor& b);
// C = A(m x k) * B^T(n x k); gradient helper
Tensor matmul_a_bt(const Tensor& a, const Tensor& b);

// y = x + b broadcast over rows; x rank 1 or 2, b rank 1
Tensor add_rowvec(const Tensor& x, const Tensor& b);

// x*W + b; x rank 1 (treated as single row) or rank 2
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);

// elementwise: x if x > 0 else exp(x) - 1; throws on non-finite input
Tensor elu(const Tensor& x);
// derivative, with d/dx at 0 defined as 1
Tensor elu_grad(const Tensor& x);

Tensor tanh_op(const Tensor& x);

// softmax along the last axis with max-subtraction; rank 1 or 2.
// Throws on non-finite input or empty axis.
Tensor softmax(const Tensor& x);

struct LayerNormCache {
    std::vector<double> inv_std;    // 1/sqrt(var + eps) per row
    std::vector<double> mean;       // per row
    Tensor normalized;              // x_hat before affine
};

// Per-row zero mean / unit variance, then affine gain + bias. gain and bias
// have one entry per feature (last axis).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps,
                  LayerNormCache* cache = nullptr);

// Inverted dropout. training=true: zero with probability rate, scale
// survivors by 1/(1-rate), mask written to *mask if given. training=false:
// identity. 0 <= rate < 1.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng,
               std::vector<double>* mask = nullptr);

// -ln(probs[label]) with probs clamped away from zero
double cross_entropy(const Tensor& probs, std::size_t label);

constexpr double kCrossEntropyEps = 1e-12;

}  // namespace newsrank::nn
