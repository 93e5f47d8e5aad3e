#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "gradapt/tensor.hpp"

// Reverse-mode differentiation over small static computation graphs: just
// the primitives the loss terms need, nothing more. Graphs are immutable
// once built and safe to share; evaluation state lives in a Workspace so a
// graph can be re-bound cheaply inside training loops.

namespace gradapt {

using NodeId = int;

enum class OpKind {
  Input,
  Constant,
  MatMul,
  Add,       // elementwise; one operand may be a scalar
  Mul,       // elementwise; one operand may be a scalar
  Exp,
  Log,
  Neg,
  Sum,       // all elements -> scalar
  Mean,      // all elements -> scalar
  Softmax,   // vector, or row-wise on a matrix; max-shifted
  CosineSim, // two vectors -> scalar
  Trace,     // square matrix -> scalar
  Outer,     // outer product of two vectors
  L1Dist,    // sum of absolute differences -> scalar
};

class GraphError : public std::runtime_error {
 public:
  GraphError(NodeId node, const std::string& what)
      : std::runtime_error("node " + std::to_string(node) + ": " + what), node_(node) {}
  NodeId node() const { return node_; }

 private:
  NodeId node_;
};

struct Node {
  OpKind op;
  std::vector<NodeId> args;
  std::vector<std::size_t> shape;  // inferred at build time
  std::string name;                // inputs only
  bool differentiable = false;     // inputs only
  Tensor value;                    // constants only
};

using Bindings = std::unordered_map<std::string, Tensor>;

class Graph {
 public:
  NodeId input(std::string name, std::vector<std::size_t> shape, bool differentiable = true);
  NodeId constant(Tensor value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId neg(NodeId a);
  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  NodeId softmax(NodeId a);
  NodeId cosine_similarity(NodeId a, NodeId b);
  NodeId trace(NodeId a);
  NodeId outer(NodeId a, NodeId b);
  NodeId l1_distance(NodeId a, NodeId b);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  NodeId push(Node n);
  const std::vector<std::size_t>& shape_of(NodeId id) const;

  std::vector<Node> nodes_;
};

// Reusable evaluation state for one graph. Forward values and adjoints are
// allocated once and overwritten on each call.
class Workspace {
 public:
  explicit Workspace(const Graph& graph);

  // Copies bound tensors into input slots and runs the forward pass.
  // Throws GraphError on missing/mismatched bindings or non-finite values.
  void forward(const Bindings& bindings);

  // Reverse pass seeding d(output)=1; output must be scalar.
  void backward(NodeId output);

  const Tensor& value(NodeId id) const { return values_[static_cast<std::size_t>(id)]; }
  const Tensor& adjoint(NodeId id) const { return adjoints_[static_cast<std::size_t>(id)]; }

  // Gradient for a named differentiable input (valid after backward()).
  const Tensor& input_gradient(const std::string& name) const;

 private:
  void eval_node(NodeId id);
  void backprop_node(NodeId id);

  const Graph* graph_;
  std::vector<Tensor> values_;
  std::vector<Tensor> adjoints_;
  std::unordered_map<std::string, NodeId> input_ids_;
};

// One-shot helpers matching the module contract. evaluate returns forward
// values for every node, indexed by node id.
std::vector<Tensor> evaluate(const Graph& graph, const Bindings& bindings);

std::map<std::string, Tensor> gradient(const Graph& graph, const Bindings& bindings,
                                       NodeId scalar_output);

// Max over input coordinates of |analytic - central difference| /
// max(|analytic|, 1e-8); step must lie in (0, 1e-2].
double finite_difference_check(const Graph& graph, const Bindings& bindings,
                               NodeId scalar_output, double step);

}  // namespace gradapt
