#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "common/rng.hpp"
#include "nn/ops.hpp"
#include "nn/tensor.hpp"

namespace newsrank::nn {

// Handle into a Tape. Only valid for the tape that produced it.
struct Var {
    std::uint32_t id = UINT32_MAX;
    bool valid() const { return id != UINT32_MAX; }
};

// Reverse-mode tape. One forward pass per tape; backward() computes
// gradients for every ParamGroup leaf that was registered via param().
//
// Rank-1 operands follow matmul vector conventions: a rank-1 first argument
// is a row vector, a rank-1 second argument is a column vector, and the
// corresponding result dimension is dropped.
class Tape {
public:
    // leaves
    Var constant(Tensor t);
    Var param(ParamGroup& p);

    // ops
    Var matmul(Var a, Var b);
    Var add_rowvec(Var x, Var b);
    Var dense(Var x, Var w, Var b);
    Var elu(Var x);
    Var tanh(Var x);
    Var layer_norm(Var x, Var gain, Var bias, double eps);
    Var dropout(Var x, double rate, bool training, Rng& rng);
    Var softmax(Var x);
    Var cross_entropy(Var probs, std::size_t label);      // scalar
    Var concat_cols(Var left, Var right);                 // [L | R]
    Var gather_rows(Var table, std::vector<std::size_t> ids);
    Var sum_all(Var x);                                   // scalar
    Var add(Var a, Var b);
    Var scale(Var x, double c);
    Var mean_of(const std::vector<Var>& scalars);         // scalar

    const Tensor& value(Var v) const;

    // Computes local gradients for all registered params. The loss must be a
    // scalar recorded on this tape; calling on an empty tape or twice throws.
    void backward(Var loss);

    // Adds the local gradients into ParamGroup::grad. Kept separate from
    // backward() so callers can reduce multiple tapes in a fixed order.
    void add_grads_to_params();

    // Local gradient for a registered param; null if not registered or
    // backward() has not run.
    const Tensor* local_param_grad(const ParamGroup& p) const;

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        bool grad_alloc = false;
        ParamGroup* pg = nullptr;
        std::function<void(Tape&, std::uint32_t)> back;
    };

    Var push(Tensor value, bool needs_grad, std::function<void(Tape&, std::uint32_t)> back);
    Node& node(Var v);
    const Node& node(Var v) const;
    Tensor& grad_of(std::uint32_t id);
    void accumulate(std::uint32_t id, const double* src, std::size_t n);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

}  // namespace newsrank::nn
