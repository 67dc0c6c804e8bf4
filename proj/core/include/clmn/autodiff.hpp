// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/tensor.hpp"

#include <deque>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace clmn::nn {

/// Ordered collection of named parameter tensors. Names are stable public
/// identifiers (they are what checkpoints store). References returned by
/// add()/at() stay valid for the lifetime of the set.
class ParamSet {
 public:
  Tensor& add(std::string name, Tensor t);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  bool operator==(const ParamSet& other) const;

 private:
  std::deque<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Named gradient tensors, one per parameter registered on a Graph, in
/// registration order.
class Gradients {
 public:
  void set(std::string name, Tensor g);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t size() const { return entries_.size(); }

  /// Adds `other` entrywise; names missing here are inserted.
  void accumulate(const Gradients& other);
  void scale(double s);

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while its Graph lives.
class Var {
 public:
  Var() = default;

  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Graph& graph() const { return *g_; }
  std::size_t id() const { return id_; }
  bool valid() const { return g_ != nullptr; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : g_(g), id_(id) {}
  Graph* g_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run tape. Each op records its output value and a closure that
/// propagates the output gradient to its inputs. Nodes are appended in
/// execution order, so reverse insertion order is a valid topological order.
class Graph {
 public:
  /// Receives the node's own output value and the gradient flowing into it.
  using BackwardFn = std::function<void(Graph&, const Mat& out_value, const Mat& out_grad)>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Mat value);
  /// Registers a parameter leaf. The tensor is borrowed, not copied, and must
  /// outlive the graph. Registering a name twice returns the same node.
  Var param(const std::string& name, const Tensor& t);

  /// Appends an op node. The backward closure is kept only when some input
  /// needs a gradient.
  Var record(Mat value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Mat value, const std::vector<Var>& inputs, BackwardFn backward);

  bool needs_grad(const Var& v) const { return nodes_[v.id()].needs_grad; }
  bool grad_enabled() const { return grad_enabled_; }

  template <typename Derived>
  void accumulate(const Var& v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.id()];
    if (!n.needs_grad) return;
    if (!n.has_grad) {
      n.grad = g;
      n.has_grad = true;
    } else {
      n.grad += g;
    }
  }

  /// Reverse pass from a scalar loss. Every registered parameter gets an
  /// entry; parameters not on a path to the loss get zeros.
  Gradients backward(const Var& loss);

  const Mat& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.borrowed ? *n.borrowed : n.owned;
  }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Mat owned;
    const Mat* borrowed = nullptr;
    Mat grad;
    bool needs_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  bool grad_enabled_;
  // deque keeps value references stable while nodes are appended.
  std::deque<Node> nodes_;
  std::vector<std::pair<std::string, std::size_t>> params_;
  std::unordered_map<std::string, std::size_t> param_ids_;
  std::vector<const Tensor*> param_tensors_;
};

inline const Mat& Var::value() const { return g_->value(id_); }

}  // namespace clmn::nn
