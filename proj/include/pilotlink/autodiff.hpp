// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "pilotlink/tensor.hpp"

namespace pl::ad {

// Reverse-mode automatic differentiation on tensor-valued nodes.
// A graph is built once per evaluation; backward() walks it in reverse
// topological order and accumulates gradients into every reachable node.

struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::shared_ptr<Node>> parents;
    // Propagates this->grad into the parents' grads. Empty for leaves.
    std::function<void(Node&)> backprop;
};

class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}

    const Tensor& value() const { return node_->value; }
    const Tensor& grad() const { return node_->grad; }
    Tensor& grad() { return node_->grad; }
    const std::shared_ptr<Node>& node() const { return node_; }
    bool valid() const { return node_ != nullptr; }

private:
    std::shared_ptr<Node> node_;
};

// Leaf holding a parameter or input tensor.
Var leaf(Tensor t);

// Extension point: ops outside this translation unit build nodes with it.
// The value must already be computed (forward runs at construction time).
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop);

// Seeds root (which must hold exactly one element) with gradient 1 and
// accumulates into all reachable nodes. Zeroes reachable grads first, so
// repeated calls on the same graph are idempotent.
void backward(const Var& root);

// ---- elementwise / arithmetic ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b); // Hadamard
Var div(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_const(const Var& a, double c);
Var tanh_(const Var& a);
Var relu_(const Var& a); // subgradient 0 at the kink
Var sigmoid_(const Var& a);
Var log_(const Var& a);
Var sqrt_(const Var& a);
Var sin_(const Var& a);
Var cos_(const Var& a);
Var clamp_min(const Var& a, double lo); // zero gradient where clamped

// ---- linear algebra / shape ----
Var matmul(const Var& a, const Var& b);          // (m,k)x(k,n)
Var add_rowvec(const Var& x, const Var& v);      // x + 1*v'
Var sub_rowvec(const Var& x, const Var& v);
Var mean_rows(const Var& x);                     // (m,n) -> (n)
Var col(const Var& x, int j);                    // (m,n) -> (m)
Var stack_cols(const std::vector<Var>& cols);    // k of (m) -> (m,k)
Var mul_colvec(const Var& x, const Var& v);      // row i of x scaled by v[i]
Var softmax_rows(const Var& x);
Var gather_rows(const Var& table, std::vector<int> idx);
Var sum_all(const Var& x);                       // -> scalar
Var mean_all(const Var& x);                      // -> scalar
Var div_by_scalar(const Var& x, const Var& s);   // s holds one element

// ---- structured ops ----

// 2-D convolution over (H,W,Cin) with kernel (kh,kw,Cin,Cout) and bias
// (Cout). Zero padding keeps the output (H,W,Cout); odd kernel sides
// required. dil_h/dil_w dilate the kernel.
Var conv2d(const Var& x, const Var& k, const Var& b, int dil_h, int dil_w);

// Fused mean of binary cross-entropy between sigmoid(logits) and targets
// in {0,1}; probabilities clamped to [1e-12, 1-1e-12]. Scalar output.
Var bce_with_logits(const Var& logits, const Tensor& targets);

} // namespace pl::ad
