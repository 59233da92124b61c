#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "masklab/tensor.hpp"

namespace masklab {

enum class LossKind { CategoricalCE, BinaryCE };

// Mean cross-entropy of probabilities against targets: mean over rows for
// CategoricalCE, mean over all entries for BinaryCE. Probabilities are
// clipped at 1e-12 before the log. Shared by the tape op and the eval path,
// so logged losses agree with training losses bit for bit.
double cross_entropy_value(const Tensor& probs, const Tensor& targets, LossKind kind);

// Reverse-mode tape. Nodes are appended in evaluation order, so node ids are
// already a topological order and backward() is a single reverse sweep.
// Stochastic masks never become nodes: they enter ops as plain tensors and
// therefore receive no gradient.
class Tape {
public:
    using NodeId = std::size_t;

    // Leaf with gradient tracking (parameters and inputs).
    NodeId input(Tensor value);

    NodeId matmul(NodeId a, NodeId b);
    // Per-sample mask on the product; mask is a constant (node- or
    // connection-granular, see batched_masked_matmul).
    NodeId masked_matmul(NodeId x, NodeId w, Tensor mask);
    // One shared weight mask for the whole batch: y = x . (w * mask).
    NodeId weight_masked_matmul(NodeId x, NodeId w, Tensor mask);
    NodeId add_bias(NodeId x, NodeId bias);     // bias broadcast over rows
    NodeId add(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);             // elementwise
    NodeId mul_const(NodeId a, Tensor c);       // elementwise by constant
    NodeId scale(NodeId a, double s);
    NodeId relu(NodeId a);
    NodeId softmax_rows(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId sum(NodeId a);                       // scalar
    // Mean cross-entropy of probabilities against fixed targets; probabilities
    // are clipped at 1e-12 before the log, and clipped entries get zero
    // gradient.
    NodeId cross_entropy(NodeId probs, Tensor targets, LossKind kind);

    const Tensor& value(NodeId id) const { return nodes_.at(id).value; }
    std::size_t size() const { return nodes_.size(); }

    // Accumulated gradients for every input() leaf reachable from root.
    // root must be scalar.
    std::unordered_map<NodeId, Tensor> backward(NodeId root);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool is_leaf = false;
        bool touched = false;
        std::vector<NodeId> parents;
        // Propagates this node's grad into its parents' grad buffers.
        std::function<void(Tape&, const Node&)> back;
    };

    NodeId push(Tensor value, std::vector<NodeId> parents,
                std::function<void(Tape&, const Node&)> back);
    void accumulate(NodeId id, const Tensor& g);

    std::vector<Node> nodes_;
};

// Central-difference gradient of a scalar function, (f(x+eps*e_i) -
// f(x-eps*e_i)) / 2eps per coordinate. Independent of the tape; used as the
// oracle against backward().
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f,
                        const Tensor& at, double eps = 1e-6);

// Second-order central differences, (f(x+eps*e_i) - 2f(x) + f(x-eps*e_i)) / eps^2.
Tensor hessian_diag(const std::function<double(const Tensor&)>& f,
                    const Tensor& at, double eps = 1e-4);

} // namespace masklab
