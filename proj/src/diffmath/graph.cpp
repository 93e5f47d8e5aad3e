#include "gradapt/graph.hpp"

#include <algorithm>
#include <cmath>

#include "gradapt/kernels.hpp"

namespace gradapt {

namespace {

std::size_t shape_size(const std::vector<std::size_t>& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

bool is_scalar_shape(const std::vector<std::size_t>& s) { return shape_size(s) == 1 && s.size() <= 1; }

bool is_vector_shape(const std::vector<std::size_t>& s) { return s.size() == 1; }

bool is_matrix_shape(const std::vector<std::size_t>& s) { return s.size() == 2; }

}  // namespace

NodeId Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const std::vector<std::size_t>& Graph::shape_of(NodeId id) const {
  return nodes_[static_cast<std::size_t>(id)].shape;
}

NodeId Graph::input(std::string name, std::vector<std::size_t> shape, bool differentiable) {
  for (auto d : shape) {
    if (d == 0) throw GraphError(static_cast<NodeId>(nodes_.size()), "zero dimension in input shape");
  }
  Node n;
  n.op = OpKind::Input;
  n.shape = std::move(shape);
  n.name = std::move(name);
  n.differentiable = differentiable;
  return push(std::move(n));
}

NodeId Graph::constant(Tensor value) {
  if (shape_size(value.shape) != value.values.size()) {
    throw GraphError(static_cast<NodeId>(nodes_.size()), "constant shape/value length mismatch");
  }
  Node n;
  n.op = OpKind::Constant;
  n.shape = value.shape;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const auto& sa = shape_of(a);
  const auto& sb = shape_of(b);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  std::vector<std::size_t> out;
  if (is_matrix_shape(sa) && is_matrix_shape(sb)) {
    if (sa[1] != sb[0]) throw GraphError(id, "matmul inner dimension mismatch");
    out = {sa[0], sb[1]};
  } else if (is_matrix_shape(sa) && is_vector_shape(sb)) {
    if (sa[1] != sb[0]) throw GraphError(id, "matmul inner dimension mismatch");
    out = {sa[0]};
  } else if (is_vector_shape(sa) && is_matrix_shape(sb)) {
    if (sa[0] != sb[0]) throw GraphError(id, "matmul inner dimension mismatch");
    out = {sb[1]};
  } else {
    throw GraphError(id, "matmul expects matrix or vector operands");
  }
  return push({OpKind::MatMul, {a, b}, std::move(out), "", false, {}});
}

NodeId Graph::add(NodeId a, NodeId b) {
  const auto& sa = shape_of(a);
  const auto& sb = shape_of(b);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  std::vector<std::size_t> out;
  if (sa == sb) {
    out = sa;
  } else if (is_scalar_shape(sb)) {
    out = sa;
  } else if (is_scalar_shape(sa)) {
    out = sb;
  } else {
    throw GraphError(id, "add shape mismatch");
  }
  return push({OpKind::Add, {a, b}, std::move(out), "", false, {}});
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const auto& sa = shape_of(a);
  const auto& sb = shape_of(b);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  std::vector<std::size_t> out;
  if (sa == sb) {
    out = sa;
  } else if (is_scalar_shape(sb)) {
    out = sa;
  } else if (is_scalar_shape(sa)) {
    out = sb;
  } else {
    throw GraphError(id, "mul shape mismatch");
  }
  return push({OpKind::Mul, {a, b}, std::move(out), "", false, {}});
}

NodeId Graph::exp(NodeId a) { return push({OpKind::Exp, {a}, shape_of(a), "", false, {}}); }

NodeId Graph::log(NodeId a) { return push({OpKind::Log, {a}, shape_of(a), "", false, {}}); }

NodeId Graph::neg(NodeId a) { return push({OpKind::Neg, {a}, shape_of(a), "", false, {}}); }

NodeId Graph::sum(NodeId a) { return push({OpKind::Sum, {a}, {}, "", false, {}}); }

NodeId Graph::mean(NodeId a) { return push({OpKind::Mean, {a}, {}, "", false, {}}); }

NodeId Graph::softmax(NodeId a) {
  const auto& sa = shape_of(a);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  if (!is_vector_shape(sa) && !is_matrix_shape(sa)) {
    throw GraphError(id, "softmax expects a vector or matrix");
  }
  return push({OpKind::Softmax, {a}, sa, "", false, {}});
}

NodeId Graph::cosine_similarity(NodeId a, NodeId b) {
  const auto& sa = shape_of(a);
  const auto& sb = shape_of(b);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  if (!is_vector_shape(sa) || sa != sb) {
    throw GraphError(id, "cosine similarity expects two vectors of equal length");
  }
  return push({OpKind::CosineSim, {a, b}, {}, "", false, {}});
}

NodeId Graph::trace(NodeId a) {
  const auto& sa = shape_of(a);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  if (!is_matrix_shape(sa) || sa[0] != sa[1]) throw GraphError(id, "trace expects a square matrix");
  return push({OpKind::Trace, {a}, {}, "", false, {}});
}

NodeId Graph::outer(NodeId a, NodeId b) {
  const auto& sa = shape_of(a);
  const auto& sb = shape_of(b);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  if (!is_vector_shape(sa) || !is_vector_shape(sb)) {
    throw GraphError(id, "outer product expects two vectors");
  }
  return push({OpKind::Outer, {a, b}, {sa[0], sb[0]}, "", false, {}});
}

NodeId Graph::l1_distance(NodeId a, NodeId b) {
  const auto& sa = shape_of(a);
  const auto& sb = shape_of(b);
  const NodeId id = static_cast<NodeId>(nodes_.size());
  if (sa != sb) throw GraphError(id, "l1 distance shape mismatch");
  return push({OpKind::L1Dist, {a, b}, {}, "", false, {}});
}

Workspace::Workspace(const Graph& graph) : graph_(&graph) {
  const auto& ns = graph.nodes();
  values_.resize(ns.size());
  adjoints_.resize(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    values_[i] = Tensor(ns[i].shape, std::vector<double>(shape_size(ns[i].shape), 0.0));
    adjoints_[i] = Tensor(ns[i].shape, std::vector<double>(shape_size(ns[i].shape), 0.0));
    if (ns[i].op == OpKind::Constant) values_[i] = ns[i].value;
    if (ns[i].op == OpKind::Input) input_ids_.emplace(ns[i].name, static_cast<NodeId>(i));
  }
}

void Workspace::forward(const Bindings& bindings) {
  const auto& ns = graph_->nodes();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const NodeId id = static_cast<NodeId>(i);
    const Node& n = ns[i];
    if (n.op == OpKind::Input) {
      const auto it = bindings.find(n.name);
      if (it == bindings.end()) throw GraphError(id, "unbound input '" + n.name + "'");
      if (it->second.shape != n.shape) {
        throw GraphError(id, "binding shape mismatch for input '" + n.name + "'");
      }
      values_[i].values = it->second.values;
    } else if (n.op != OpKind::Constant) {
      eval_node(id);
    }
    if (!values_[i].all_finite()) throw GraphError(id, "non-finite value");
  }
}

void Workspace::eval_node(NodeId id) {
  const Node& n = graph_->node(id);
  Tensor& out = values_[static_cast<std::size_t>(id)];
  const auto arg = [&](std::size_t k) -> const Tensor& {
    return values_[static_cast<std::size_t>(n.args[k])];
  };
  switch (n.op) {
    case OpKind::MatMul: {
      const Tensor& a = arg(0);
      const Tensor& b = arg(1);
      const auto& sa = graph_->node(n.args[0]).shape;
      const auto& sb = graph_->node(n.args[1]).shape;
      if (is_matrix_shape(sa) && is_matrix_shape(sb)) {
        const std::size_t m = sa[0], k = sa[1], p = sb[1];
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < p; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) acc += a.values[r * k + t] * b.values[t * p + c];
            out.values[r * p + c] = acc;
          }
        }
      } else if (is_matrix_shape(sa)) {  // matrix * vector
        kern::gemv(a.values.data(), sa[0], sa[1], b.values.data(), out.values.data());
      } else {  // vector * matrix
        std::fill(out.values.begin(), out.values.end(), 0.0);
        kern::gemv_transposed_accumulate(b.values.data(), sb[0], sb[1], a.values.data(),
                                         out.values.data());
      }
      break;
    }
    case OpKind::Add: {
      const Tensor& a = arg(0);
      const Tensor& b = arg(1);
      if (a.size() == b.size()) {
        kern::add(a.values.data(), b.values.data(), out.values.data(), a.size());
      } else if (b.size() == 1) {
        for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] + b.values[0];
      } else {
        for (std::size_t i = 0; i < b.size(); ++i) out.values[i] = a.values[0] + b.values[i];
      }
      break;
    }
    case OpKind::Mul: {
      const Tensor& a = arg(0);
      const Tensor& b = arg(1);
      if (a.size() == b.size()) {
        kern::hadamard(a.values.data(), b.values.data(), out.values.data(), a.size());
      } else if (b.size() == 1) {
        for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a.values[i] * b.values[0];
      } else {
        for (std::size_t i = 0; i < b.size(); ++i) out.values[i] = a.values[0] * b.values[i];
      }
      break;
    }
    case OpKind::Exp:
      kern::exp_vec(arg(0).values.data(), out.values.data(), out.size());
      break;
    case OpKind::Log: {
      const Tensor& a = arg(0);
      for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = std::log(a.values[i]);
      break;
    }
    case OpKind::Neg: {
      const Tensor& a = arg(0);
      for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = -a.values[i];
      break;
    }
    case OpKind::Sum:
      out.values[0] = kern::sum(arg(0).values.data(), arg(0).size());
      break;
    case OpKind::Mean:
      out.values[0] = kern::sum(arg(0).values.data(), arg(0).size()) /
                      static_cast<double>(arg(0).size());
      break;
    case OpKind::Softmax: {
      const Tensor& a = arg(0);
      const std::size_t cols = n.shape.size() == 2 ? n.shape[1] : n.shape[0];
      const std::size_t rows = a.size() / cols;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* in = a.values.data() + r * cols;
        double* o = out.values.data() + r * cols;
        const double m = kern::max_value(in, cols);
        double z = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
          o[c] = std::exp(in[c] - m);
          z += o[c];
        }
        kern::scale(o, 1.0 / z, cols);
      }
      break;
    }
    case OpKind::CosineSim: {
      const Tensor& a = arg(0);
      const Tensor& b = arg(1);
      const double na = kern::norm2(a.values.data(), a.size());
      const double nb = kern::norm2(b.values.data(), b.size());
      if (na == 0.0 || nb == 0.0) throw GraphError(id, "cosine similarity of zero-norm vector");
      out.values[0] = kern::dot(a.values.data(), b.values.data(), a.size()) / (na * nb);
      break;
    }
    case OpKind::Trace: {
      const Tensor& a = arg(0);
      const std::size_t k = graph_->node(n.args[0]).shape[0];
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += a.values[i * k + i];
      out.values[0] = acc;
      break;
    }
    case OpKind::Outer: {
      const Tensor& a = arg(0);
      const Tensor& b = arg(1);
      for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
          out.values[i * b.size() + j] = a.values[i] * b.values[j];
        }
      }
      break;
    }
    case OpKind::L1Dist:
      out.values[0] =
          kern::l1_distance(arg(0).values.data(), arg(1).values.data(), arg(0).size());
      break;
    case OpKind::Input:
    case OpKind::Constant:
      break;
  }
}

void Workspace::backward(NodeId output) {
  const Node& out_node = graph_->node(output);
  if (shape_size(out_node.shape) != 1 || out_node.shape.size() > 1) {
    throw GraphError(output, "gradient output must be scalar");
  }
  for (auto& adj : adjoints_) std::fill(adj.values.begin(), adj.values.end(), 0.0);
  adjoints_[static_cast<std::size_t>(output)].values[0] = 1.0;
  for (NodeId id = output; id >= 0; --id) backprop_node(id);
}

void Workspace::backprop_node(NodeId id) {
  const Node& n = graph_->node(id);
  if (n.op == OpKind::Input || n.op == OpKind::Constant) return;
  const Tensor& u = adjoints_[static_cast<std::size_t>(id)];
  const Tensor& y = values_[static_cast<std::size_t>(id)];
  const auto val = [&](std::size_t k) -> const Tensor& {
    return values_[static_cast<std::size_t>(n.args[k])];
  };
  const auto adj = [&](std::size_t k) -> Tensor& {
    return adjoints_[static_cast<std::size_t>(n.args[k])];
  };
  switch (n.op) {
    case OpKind::MatMul: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      Tensor& da = adj(0);
      Tensor& db = adj(1);
      const auto& sa = graph_->node(n.args[0]).shape;
      const auto& sb = graph_->node(n.args[1]).shape;
      if (is_matrix_shape(sa) && is_matrix_shape(sb)) {
        const std::size_t m = sa[0], k = sa[1], p = sb[1];
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t t = 0; t < k; ++t) {
            double acc = 0.0;
            for (std::size_t c = 0; c < p; ++c) acc += u.values[r * p + c] * b.values[t * p + c];
            da.values[r * k + t] += acc;
          }
        }
        for (std::size_t t = 0; t < k; ++t) {
          for (std::size_t c = 0; c < p; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < m; ++r) acc += a.values[r * k + t] * u.values[r * p + c];
            db.values[t * p + c] += acc;
          }
        }
      } else if (is_matrix_shape(sa)) {  // y = A x
        kern::rank1_accumulate(da.values.data(), sa[0], sa[1], 1.0, u.values.data(),
                               b.values.data());
        kern::gemv_transposed_accumulate(a.values.data(), sa[0], sa[1], u.values.data(),
                                         db.values.data());
      } else {  // y = x^T B
        for (std::size_t r = 0; r < sb[0]; ++r) {
          da.values[r] += kern::dot(b.values.data() + r * sb[1], u.values.data(), sb[1]);
        }
        kern::rank1_accumulate(db.values.data(), sb[0], sb[1], 1.0, a.values.data(),
                               u.values.data());
      }
      break;
    }
    case OpKind::Add: {
      Tensor& da = adj(0);
      Tensor& db = adj(1);
      if (da.size() == u.size()) {
        kern::axpy(1.0, u.values.data(), da.values.data(), u.size());
      } else {
        da.values[0] += kern::sum(u.values.data(), u.size());
      }
      if (db.size() == u.size()) {
        kern::axpy(1.0, u.values.data(), db.values.data(), u.size());
      } else {
        db.values[0] += kern::sum(u.values.data(), u.size());
      }
      break;
    }
    case OpKind::Mul: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      Tensor& da = adj(0);
      Tensor& db = adj(1);
      if (a.size() == b.size()) {
        for (std::size_t i = 0; i < u.size(); ++i) {
          da.values[i] += u.values[i] * b.values[i];
          db.values[i] += u.values[i] * a.values[i];
        }
      } else if (b.size() == 1) {
        kern::axpy(b.values[0], u.values.data(), da.values.data(), u.size());
        db.values[0] += kern::dot(u.values.data(), a.values.data(), u.size());
      } else {
        da.values[0] += kern::dot(u.values.data(), b.values.data(), u.size());
        kern::axpy(a.values[0], u.values.data(), db.values.data(), u.size());
      }
      break;
    }
    case OpKind::Exp: {
      Tensor& da = adj(0);
      for (std::size_t i = 0; i < u.size(); ++i) da.values[i] += u.values[i] * y.values[i];
      break;
    }
    case OpKind::Log: {
      const Tensor& a = val(0);
      Tensor& da = adj(0);
      for (std::size_t i = 0; i < u.size(); ++i) da.values[i] += u.values[i] / a.values[i];
      break;
    }
    case OpKind::Neg: {
      Tensor& da = adj(0);
      kern::axpy(-1.0, u.values.data(), da.values.data(), u.size());
      break;
    }
    case OpKind::Sum: {
      Tensor& da = adj(0);
      const double g = u.values[0];
      for (std::size_t i = 0; i < da.size(); ++i) da.values[i] += g;
      break;
    }
    case OpKind::Mean: {
      Tensor& da = adj(0);
      const double g = u.values[0] / static_cast<double>(da.size());
      for (std::size_t i = 0; i < da.size(); ++i) da.values[i] += g;
      break;
    }
    case OpKind::Softmax: {
      Tensor& da = adj(0);
      const std::size_t cols = n.shape.size() == 2 ? n.shape[1] : n.shape[0];
      const std::size_t rows = y.size() / cols;
      for (std::size_t r = 0; r < rows; ++r) {
        const double* s = y.values.data() + r * cols;
        const double* g = u.values.data() + r * cols;
        double* d = da.values.data() + r * cols;
        const double gs = kern::dot(g, s, cols);
        for (std::size_t c = 0; c < cols; ++c) d[c] += s[c] * (g[c] - gs);
      }
      break;
    }
    case OpKind::CosineSim: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      Tensor& da = adj(0);
      Tensor& db = adj(1);
      const double na = kern::norm2(a.values.data(), a.size());
      const double nb = kern::norm2(b.values.data(), b.size());
      const double c = y.values[0];
      const double g = u.values[0];
      for (std::size_t i = 0; i < a.size(); ++i) {
        da.values[i] += g * (b.values[i] / (na * nb) - c * a.values[i] / (na * na));
        db.values[i] += g * (a.values[i] / (na * nb) - c * b.values[i] / (nb * nb));
      }
      break;
    }
    case OpKind::Trace: {
      Tensor& da = adj(0);
      const std::size_t k = graph_->node(n.args[0]).shape[0];
      const double g = u.values[0];
      for (std::size_t i = 0; i < k; ++i) da.values[i * k + i] += g;
      break;
    }
    case OpKind::Outer: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      Tensor& da = adj(0);
      Tensor& db = adj(1);
      for (std::size_t i = 0; i < a.size(); ++i) {
        da.values[i] += kern::dot(u.values.data() + i * b.size(), b.values.data(), b.size());
      }
      for (std::size_t i = 0; i < a.size(); ++i) {
        kern::axpy(a.values[i], u.values.data() + i * b.size(), db.values.data(), b.size());
      }
      break;
    }
    case OpKind::L1Dist: {
      const Tensor& a = val(0);
      const Tensor& b = val(1);
      Tensor& da = adj(0);
      Tensor& db = adj(1);
      const double g = u.values[0];
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        da.values[i] += g * s;
        db.values[i] -= g * s;
      }
      break;
    }
    case OpKind::Input:
    case OpKind::Constant:
      break;
  }
}

const Tensor& Workspace::input_gradient(const std::string& name) const {
  const auto it = input_ids_.find(name);
  if (it == input_ids_.end()) throw GraphError(-1, "unknown input '" + name + "'");
  return adjoints_[static_cast<std::size_t>(it->second)];
}

std::vector<Tensor> evaluate(const Graph& graph, const Bindings& bindings) {
  Workspace ws(graph);
  ws.forward(bindings);
  std::vector<Tensor> out;
  out.reserve(graph.node_count());
  for (std::size_t i = 0; i < graph.node_count(); ++i) out.push_back(ws.value(static_cast<NodeId>(i)));
  return out;
}

std::map<std::string, Tensor> gradient(const Graph& graph, const Bindings& bindings,
                                       NodeId scalar_output) {
  Workspace ws(graph);
  ws.forward(bindings);
  ws.backward(scalar_output);
  std::map<std::string, Tensor> grads;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const Node& n = graph.node(static_cast<NodeId>(i));
    if (n.op == OpKind::Input && n.differentiable) {
      grads.emplace(n.name, ws.adjoint(static_cast<NodeId>(i)));
    }
  }
  return grads;
}

double finite_difference_check(const Graph& graph, const Bindings& bindings,
                               NodeId scalar_output, double step) {
  if (!(step > 0.0) || step > 1e-2) throw std::invalid_argument("fd step out of range");
  const auto grads = gradient(graph, bindings, scalar_output);
  Bindings probe = bindings;
  double worst = 0.0;
  for (const auto& [name, g] : grads) {
    Tensor& t = probe[name];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t.values[i];
      t.values[i] = saved + step;
      const double up = evaluate(graph, probe)[static_cast<std::size_t>(scalar_output)].values[0];
      t.values[i] = saved - step;
      const double down = evaluate(graph, probe)[static_cast<std::size_t>(scalar_output)].values[0];
      t.values[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double err = std::fabs(g.values[i] - fd) / std::max(std::fabs(g.values[i]), 1e-8);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace gradapt
