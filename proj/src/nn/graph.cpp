#include "nn/graph.hpp"

#include <cmath>

#include "common/error.hpp"

namespace newsrank::nn {

namespace {

std::pair<std::size_t, std::size_t> logical_matrix(const Tensor& t, bool as_column) {
    if (t.rank() == 2) return {t.dim(0), t.dim(1)};
    if (t.rank() == 1) return as_column ? std::pair<std::size_t, std::size_t>{t.dim(0), 1}
                                        : std::pair<std::size_t, std::size_t>{1, t.dim(0)};
    throw InputError("matmul operand must have rank 1 or 2, got rank " +
                     std::to_string(t.rank()));
}

Tensor with_shape(const Tensor& t, std::size_t r, std::size_t c) {
    return Tensor({r, c}, t.values());
}

}  // namespace

Var Tape::push(Tensor value, bool needs_grad,
               std::function<void(Tape&, std::uint32_t)> back) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tape::Node& Tape::node(Var v) {
    if (!v.valid() || v.id >= nodes_.size()) throw InputError("invalid tape variable");
    return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
    if (!v.valid() || v.id >= nodes_.size()) throw InputError("invalid tape variable");
    return nodes_[v.id];
}

Tensor& Tape::grad_of(std::uint32_t id) {
    Node& n = nodes_[id];
    if (!n.grad_alloc) {
        n.grad = Tensor::zeros(n.value.shape());
        n.grad_alloc = true;
    }
    return n.grad;
}

void Tape::accumulate(std::uint32_t id, const double* src, std::size_t n) {
    Tensor& g = grad_of(id);
    double* dst = g.data();
    for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

Var Tape::constant(Tensor t) { return push(std::move(t), false, nullptr); }

Var Tape::param(ParamGroup& p) {
    Var v = push(p.value, true, nullptr);
    nodes_[v.id].pg = &p;
    return v;
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    auto [m, k] = logical_matrix(ta, false);
    auto [k2, n] = logical_matrix(tb, true);
    if (k != k2) {
        throw InputError("matmul: inner dimensions disagree, " + ta.shape_str() + " vs " +
                         tb.shape_str());
    }
    Tensor out = nn::matmul(with_shape(ta, m, k), with_shape(tb, k, n));
    // drop the dimensions contributed by rank-1 operands
    if (ta.rank() == 1 && tb.rank() == 1) out = Tensor::scalar(out[0]);
    else if (ta.rank() == 1) out = Tensor({n}, out.values());
    else if (tb.rank() == 1) out = Tensor({m}, out.values());

    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng,
                [a, b, m, k, n](Tape& t, std::uint32_t self) {
                    const Tensor g = with_shape(t.nodes_[self].grad, m, n);
                    if (t.nodes_[a.id].needs_grad) {
                        const Tensor bt = with_shape(t.nodes_[b.id].value, k, n);
                        Tensor da = matmul_a_bt(g, bt);
                        t.accumulate(a.id, da.data(), da.size());
                    }
                    if (t.nodes_[b.id].needs_grad) {
                        const Tensor at = with_shape(t.nodes_[a.id].value, m, k);
                        Tensor db = matmul_at_b(at, g);
                        t.accumulate(b.id, db.data(), db.size());
                    }
                });
}

Var Tape::add_rowvec(Var x, Var b) {
    const Tensor& tx = node(x).value;
    const Tensor& tb = node(b).value;
    Tensor out = nn::add_rowvec(tx, tb);
    auto [m, n] = logical_matrix(tx, false);
    const bool ng = node(x).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng,
                [x, b, m, n](Tape& t, std::uint32_t self) {
                    const Tensor& g = t.nodes_[self].grad;
                    if (t.nodes_[x.id].needs_grad) t.accumulate(x.id, g.data(), g.size());
                    if (t.nodes_[b.id].needs_grad) {
                        Tensor db = Tensor::zeros({n});
                        const double* pg = g.data();
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < n; ++j) db[j] += pg[i * n + j];
                        t.accumulate(b.id, db.data(), db.size());
                    }
                });
}

Var Tape::dense(Var x, Var w, Var b) { return add_rowvec(matmul(x, w), b); }

Var Tape::elu(Var x) {
    Tensor out = nn::elu(node(x).value);
    return push(std::move(out), node(x).needs_grad,
                [x](Tape& t, std::uint32_t self) {
                    if (!t.nodes_[x.id].needs_grad) return;
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& xin = t.nodes_[x.id].value;
                    Tensor dx = Tensor::zeros(xin.shape());
                    for (std::size_t i = 0; i < dx.size(); ++i) {
                        const double d = xin[i] > 0.0 ? 1.0 : std::exp(xin[i]);
                        dx[i] = g[i] * d;
                    }
                    t.accumulate(x.id, dx.data(), dx.size());
                });
}

Var Tape::tanh(Var x) {
    Tensor out = tanh_op(node(x).value);
    return push(std::move(out), node(x).needs_grad,
                [x](Tape& t, std::uint32_t self) {
                    if (!t.nodes_[x.id].needs_grad) return;
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& y = t.nodes_[self].value;
                    Tensor dx = Tensor::zeros(y.shape());
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g[i] * (1.0 - y[i] * y[i]);
                    t.accumulate(x.id, dx.data(), dx.size());
                });
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
    LayerNormCache cache;
    Tensor out = nn::layer_norm(node(x).value, node(gain).value, node(bias).value, eps, &cache);
    auto [m, n] = logical_matrix(node(x).value, false);
    const bool ng = node(x).needs_grad || node(gain).needs_grad || node(bias).needs_grad;
    return push(std::move(out), ng,
                [x, gain, bias, m, n, cache = std::move(cache)](Tape& t, std::uint32_t self) {
                    const Tensor& g = t.nodes_[self].grad;
                    const double* pg = g.data();
                    const double* xhat = cache.normalized.data();
                    const double* gamma = t.nodes_[gain.id].value.data();
                    if (t.nodes_[gain.id].needs_grad) {
                        Tensor dg = Tensor::zeros({n});
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < n; ++j)
                                dg[j] += pg[i * n + j] * xhat[i * n + j];
                        t.accumulate(gain.id, dg.data(), dg.size());
                    }
                    if (t.nodes_[bias.id].needs_grad) {
                        Tensor db = Tensor::zeros({n});
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < n; ++j) db[j] += pg[i * n + j];
                        t.accumulate(bias.id, db.data(), db.size());
                    }
                    if (t.nodes_[x.id].needs_grad) {
                        Tensor dx = Tensor::zeros(t.nodes_[x.id].value.shape());
                        const double inv_n = 1.0 / static_cast<double>(n);
                        for (std::size_t i = 0; i < m; ++i) {
                            const double* gi = pg + i * n;
                            const double* xi = xhat + i * n;
                            double sum_gd = 0.0, sum_gdx = 0.0;
                            for (std::size_t j = 0; j < n; ++j) {
                                const double gd = gi[j] * gamma[j];
                                sum_gd += gd;
                                sum_gdx += gd * xi[j];
                            }
                            const double mean_gd = sum_gd * inv_n;
                            const double mean_gdx = sum_gdx * inv_n;
                            double* di = dx.data() + i * n;
                            for (std::size_t j = 0; j < n; ++j) {
                                const double gd = gi[j] * gamma[j];
                                di[j] = cache.inv_std[i] * (gd - mean_gd - xi[j] * mean_gdx);
                            }
                        }
                        t.accumulate(x.id, dx.data(), dx.size());
                    }
                });
}

Var Tape::dropout(Var x, double rate, bool training, Rng& rng) {
    std::vector<double> mask;
    Tensor out = nn::dropout(node(x).value, rate, training, rng, &mask);
    return push(std::move(out), node(x).needs_grad,
                [x, mask = std::move(mask)](Tape& t, std::uint32_t self) {
                    if (!t.nodes_[x.id].needs_grad) return;
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor dx = Tensor::zeros(t.nodes_[x.id].value.shape());
                    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = g[i] * mask[i];
                    t.accumulate(x.id, dx.data(), dx.size());
                });
}

Var Tape::softmax(Var x) {
    Tensor out = nn::softmax(node(x).value);
    auto [m, n] = logical_matrix(out, false);
    return push(std::move(out), node(x).needs_grad,
                [x, m, n](Tape& t, std::uint32_t self) {
                    if (!t.nodes_[x.id].needs_grad) return;
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& y = t.nodes_[self].value;
                    Tensor dx = Tensor::zeros(y.shape());
                    for (std::size_t i = 0; i < m; ++i) {
                        const double* gi = g.data() + i * n;
                        const double* yi = y.data() + i * n;
                        double dot = 0.0;
                        for (std::size_t j = 0; j < n; ++j) dot += gi[j] * yi[j];
                        double* di = dx.data() + i * n;
                        for (std::size_t j = 0; j < n; ++j) di[j] = yi[j] * (gi[j] - dot);
                    }
                    t.accumulate(x.id, dx.data(), dx.size());
                });
}

Var Tape::cross_entropy(Var probs, std::size_t label) {
    const double loss = nn::cross_entropy(node(probs).value, label);
    return push(Tensor::scalar(loss), node(probs).needs_grad,
                [probs, label](Tape& t, std::uint32_t self) {
                    if (!t.nodes_[probs.id].needs_grad) return;
                    const double g = t.nodes_[self].grad[0];
                    const double p = t.nodes_[probs.id].value[label];
                    // below the clamp the loss is constant, so the gradient is 0
                    if (p < kCrossEntropyEps) return;
                    Tensor dp = Tensor::zeros(t.nodes_[probs.id].value.shape());
                    dp[label] = -g / p;
                    t.accumulate(probs.id, dp.data(), dp.size());
                });
}

Var Tape::concat_cols(Var left, Var right) {
    const Tensor& tl = node(left).value;
    const Tensor& tr = node(right).value;
    if (tl.rank() != 2 || tr.rank() != 2 || tl.dim(0) != tr.dim(0)) {
        throw InputError("concat_cols: row counts disagree, " + tl.shape_str() + " vs " +
                         tr.shape_str());
    }
    const std::size_t m = tl.dim(0), p = tl.dim(1), q = tr.dim(1);
    Tensor out = Tensor::zeros({m, p + q});
    for (std::size_t i = 0; i < m; ++i) {
        double* o = out.data() + i * (p + q);
        const double* l = tl.data() + i * p;
        const double* r = tr.data() + i * q;
        for (std::size_t j = 0; j < p; ++j) o[j] = l[j];
        for (std::size_t j = 0; j < q; ++j) o[p + j] = r[j];
    }
    const bool ng = node(left).needs_grad || node(right).needs_grad;
    return push(std::move(out), ng,
                [left, right, m, p, q](Tape& t, std::uint32_t self) {
                    const Tensor& g = t.nodes_[self].grad;
                    if (t.nodes_[left.id].needs_grad) {
                        Tensor dl = Tensor::zeros({m, p});
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < p; ++j)
                                dl[i * p + j] = g[i * (p + q) + j];
                        t.accumulate(left.id, dl.data(), dl.size());
                    }
                    if (t.nodes_[right.id].needs_grad) {
                        Tensor dr = Tensor::zeros({m, q});
                        for (std::size_t i = 0; i < m; ++i)
                            for (std::size_t j = 0; j < q; ++j)
                                dr[i * q + j] = g[i * (p + q) + p + j];
                        t.accumulate(right.id, dr.data(), dr.size());
                    }
                });
}

Var Tape::gather_rows(Var table, std::vector<std::size_t> ids) {
    const Tensor& tt = node(table).value;
    if (tt.rank() != 2) throw InputError("gather_rows: table must be rank 2");
    const std::size_t cols = tt.dim(1);
    Tensor out = Tensor::zeros({ids.size(), cols});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= tt.dim(0)) throw InputError("gather_rows: row index out of range");
        const double* src = tt.data() + ids[i] * cols;
        double* dst = out.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) dst[j] = src[j];
    }
    return push(std::move(out), node(table).needs_grad,
                [table, ids = std::move(ids), cols](Tape& t, std::uint32_t self) {
                    if (!t.nodes_[table.id].needs_grad) return;
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor dt = Tensor::zeros(t.nodes_[table.id].value.shape());
                    for (std::size_t i = 0; i < ids.size(); ++i) {
                        double* dst = dt.data() + ids[i] * cols;
                        const double* src = g.data() + i * cols;
                        for (std::size_t j = 0; j < cols; ++j) dst[j] += src[j];
                    }
                    t.accumulate(table.id, dt.data(), dt.size());
                });
}

Var Tape::sum_all(Var x) {
    const Tensor& tx = node(x).value;
    double s = 0.0;
    for (double v : tx.values()) s += v;
    return push(Tensor::scalar(s), node(x).needs_grad,
                [x](Tape& t, std::uint32_t self) {
                    if (!t.nodes_[x.id].needs_grad) return;
                    const double g = t.nodes_[self].grad[0];
                    Tensor dx = Tensor::full(t.nodes_[x.id].value.shape(), g);
                    t.accumulate(x.id, dx.data(), dx.size());
                });
}

Var Tape::add(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!ta.same_shape(tb)) {
        throw InputError("add: shape mismatch, " + ta.shape_str() + " vs " + tb.shape_str());
    }
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
    const bool ng = node(a).needs_grad || node(b).needs_grad;
    return push(std::move(out), ng,
                [a, b](Tape& t, std::uint32_t self) {
                    const Tensor& g = t.nodes_[self].grad;
                    if (t.nodes_[a.id].needs_grad) t.accumulate(a.id, g.data(), g.size());
                    if (t.nodes_[b.id].needs_grad) t.accumulate(b.id, g.data(), g.size());
                });
}

Var Tape::scale(Var x, double c) {
    Tensor out = node(x).value;
    for (auto& v : out.values()) v *= c;
    return push(std::move(out), node(x).needs_grad,
                [x, c](Tape& t, std::uint32_t self) {
                    if (!t.nodes_[x.id].needs_grad) return;
                    const Tensor& g = t.nodes_[self].grad;
                    Tensor dx = g;
                    for (auto& v : dx.values()) v *= c;
                    t.accumulate(x.id, dx.data(), dx.size());
                });
}

Var Tape::mean_of(const std::vector<Var>& scalars) {
    if (scalars.empty()) throw InputError("mean_of: no terms");
    double s = 0.0;
    bool ng = false;
    for (Var v : scalars) {
        if (node(v).value.rank() != 0) throw InputError("mean_of: terms must be scalars");
        s += node(v).value[0];
        ng = ng || node(v).needs_grad;
    }
    const double inv_n = 1.0 / static_cast<double>(scalars.size());
    return push(Tensor::scalar(s * inv_n), ng,
                [terms = scalars, inv_n](Tape& t, std::uint32_t self) {
                    const double g = t.nodes_[self].grad[0] * inv_n;
                    for (Var v : terms) {
                        if (t.nodes_[v.id].needs_grad) t.accumulate(v.id, &g, 1);
                    }
                });
}

void Tape::backward(Var loss) {
    if (nodes_.empty()) throw TrainError("backward called before any forward pass");
    if (backward_done_) throw TrainError("backward already run on this tape");
    const Node& l = node(loss);
    if (l.value.rank() != 0) throw InputError("backward: loss must be a scalar");
    backward_done_ = true;
    grad_of(loss.id)[0] = 1.0;
    for (std::uint32_t id = loss.id + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.needs_grad || !n.grad_alloc) continue;
        if (n.back) n.back(*this, id);
    }
}

void Tape::add_grads_to_params() {
    if (!backward_done_) throw TrainError("add_grads_to_params called before backward");
    for (Node& n : nodes_) {
        if (!n.pg || !n.grad_alloc) continue;
        double* dst = n.pg->grad.data();
        const double* src = n.grad.data();
        for (std::size_t i = 0; i < n.grad.size(); ++i) dst[i] += src[i];
    }
}

const Tensor* Tape::local_param_grad(const ParamGroup& p) const {
    for (const Node& n : nodes_) {
        if (n.pg == &p) return n.grad_alloc ? &n.grad : nullptr;
    }
    return nullptr;
}

}  // namespace newsrank::nn
