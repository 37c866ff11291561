#include "nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"

namespace newsrank::nn {

namespace {

void require_finite(const Tensor& x, const char* op) {
    if (!x.all_finite()) throw InputError(std::string(op) + ": non-finite input");
}

// interpret rank-1 as a single row
std::pair<std::size_t, std::size_t> as_matrix(const Tensor& x) {
    if (x.rank() == 1) return {1, x.dim(0)};
    if (x.rank() == 2) return {x.dim(0), x.dim(1)};
    throw InputError("expected tensor of rank 1 or 2, got rank " + std::to_string(x.rank()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    auto [m, k] = as_matrix(a);
    auto [bk, n] = as_matrix(b);
    if (k != bk) {
        throw InputError("matmul: inner dimensions disagree, " + a.shape_str() + " vs " +
                         b.shape_str());
    }
    Tensor c = a.rank() == 1 ? Tensor::zeros({n}) : Tensor::zeros({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = pa + i * k;
        double* ci = pc + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            const double av = ai[l];
            const double* bl = pb + l * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
    return c;
}

Tensor matmul_at_b(const Tensor& a, const Tensor& b) {
    auto [k, m] = as_matrix(a);
    auto [bk, n] = as_matrix(b);
    if (k != bk) {
        throw InputError("matmul_at_b: leading dimensions disagree, " + a.shape_str() + " vs " +
                         b.shape_str());
    }
    Tensor c = Tensor::zeros({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t l = 0; l < k; ++l) {
        const double* al = pa + l * m;
        const double* bl = pb + l * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = al[i];
            double* ci = pc + i * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
    return c;
}

Tensor matmul_a_bt(const Tensor& a, const Tensor& b) {
    auto [m, k] = as_matrix(a);
    auto [n, bk] = as_matrix(b);
    if (k != bk) {
        throw InputError("matmul_a_bt: trailing dimensions disagree, " + a.shape_str() + " vs " +
                         b.shape_str());
    }
    Tensor c = Tensor::zeros({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = pa + i * k;
        double* ci = pc + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* bj = pb + j * k;
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
            ci[j] = s;
        }
    }
    return c;
}

Tensor add_rowvec(const Tensor& x, const Tensor& b) {
    auto [m, n] = as_matrix(x);
    if (b.rank() != 1 || b.dim(0) != n) {
        throw InputError("add_rowvec: bias shape " + b.shape_str() + " does not match row width " +
                         std::to_string(n));
    }
    Tensor y = x;
    double* py = y.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < m; ++i) {
        double* yi = py + i * n;
        for (std::size_t j = 0; j < n; ++j) yi[j] += pb[j];
    }
    return y;
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
    return add_rowvec(matmul(x, w), b);
}

Tensor elu(const Tensor& x) {
    require_finite(x, "elu");
    Tensor y = x;
    for (auto& v : y.values()) v = v > 0.0 ? v : std::expm1(v);
    return y;
}

Tensor elu_grad(const Tensor& x) {
    Tensor g = x;
    for (auto& v : g.values()) v = v > 0.0 ? 1.0 : std::exp(v);
    // exp(0) == 1, so the derivative at 0 is 1
    return g;
}

Tensor tanh_op(const Tensor& x) {
    Tensor y = x;
    for (auto& v : y.values()) v = std::tanh(v);
    return y;
}

Tensor softmax(const Tensor& x) {
    require_finite(x, "softmax");
    auto [m, n] = as_matrix(x);
    if (n == 0) throw InputError("softmax: empty axis");
    Tensor y = x;
    double* py = y.data();
    for (std::size_t i = 0; i < m; ++i) {
        double* row = py + i * n;
        double mx = row[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
    }
    return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps,
                  LayerNormCache* cache) {
    if (eps <= 0.0) throw InputError("layer_norm: eps must be positive");
    auto [m, n] = as_matrix(x);
    if (n == 0) throw InputError("layer_norm: empty feature axis");
    if (gain.rank() != 1 || gain.dim(0) != n || bias.rank() != 1 || bias.dim(0) != n) {
        throw InputError("layer_norm: gain/bias shape mismatch for feature width " +
                         std::to_string(n));
    }
    Tensor y = x;
    double* py = y.data();
    const double* pg = gain.data();
    const double* pb = bias.data();
    if (cache) {
        cache->inv_std.assign(m, 0.0);
        cache->mean.assign(m, 0.0);
        cache->normalized = Tensor::zeros(x.shape());
    }
    for (std::size_t i = 0; i < m; ++i) {
        double* row = py + i * n;
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += row[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = row[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        double* cached = cache ? cache->normalized.data() + i * n : nullptr;
        for (std::size_t j = 0; j < n; ++j) {
            const double xhat = (row[j] - mean) * inv_std;
            if (cached) cached[j] = xhat;
            row[j] = xhat * pg[j] + pb[j];
        }
        if (cache) {
            cache->inv_std[i] = inv_std;
            cache->mean[i] = mean;
        }
    }
    return y;
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng,
               std::vector<double>* mask) {
    if (rate < 0.0 || rate >= 1.0) throw InputError("dropout: rate must be in [0, 1)");
    if (!training || rate == 0.0) {
        if (mask) mask->assign(x.size(), 1.0);
        return x;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    Tensor y = x;
    if (mask) mask->assign(x.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (rng.uniform() < rate) {
            y[i] = 0.0;
        } else {
            y[i] *= keep_scale;
            if (mask) (*mask)[i] = keep_scale;
        }
    }
    return y;
}

double cross_entropy(const Tensor& probs, std::size_t label) {
    if (probs.rank() != 1) throw InputError("cross_entropy: expected probability vector");
    if (label >= probs.dim(0)) {
        throw InputError("cross_entropy: label " + std::to_string(label) +
                         " out of range for " + std::to_string(probs.dim(0)) + " classes");
    }
    return -std::log(std::max(probs[label], kCrossEntropyEps));
}

}  // namespace newsrank::nn
