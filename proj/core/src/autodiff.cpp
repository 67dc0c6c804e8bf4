// SPDX-License-Identifier: Apache-2.0
#include "clmn/autodiff.hpp"

#include "clmn/errors.hpp"

namespace clmn::nn {

Tensor& ParamSet::add(std::string name, Tensor t) {
  if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(t));
  return entries_.back().second;
}

Tensor& ParamSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("unknown parameter: " + name);
  return entries_[it->second].second;
}

const Tensor& ParamSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("unknown parameter: " + name);
  return entries_[it->second].second;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries_) n += t.size();
  return n;
}

bool ParamSet::operator==(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first != other.entries_[i].first) return false;
    if (!(entries_[i].second == other.entries_[i].second)) return false;
  }
  return true;
}

void Gradients::set(std::string name, Tensor g) {
  auto it = index_.find(name);
  if (it != index_.end()) {
    entries_[it->second].second = std::move(g);
    return;
  }
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(g));
}

const Tensor& Gradients::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("no gradient for parameter: " + name);
  return entries_[it->second].second;
}

void Gradients::accumulate(const Gradients& other) {
  for (const auto& [name, g] : other.entries_) {
    auto it = index_.find(name);
    if (it == index_.end()) {
      set(name, g);
      continue;
    }
    Tensor& mine = entries_[it->second].second;
    if (mine.shape() != g.shape()) {
      throw DimensionError("gradient shape mismatch for " + name + ": " +
                           shape_string(mine.shape()) + " vs " + shape_string(g.shape()));
    }
    mine.mat() += g.mat();
  }
}

void Gradients::scale(double s) {
  for (auto& [name, g] : entries_) g.mat() *= s;
}

Var Graph::constant(Mat value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::param(const std::string& name, const Tensor& t) {
  if (auto it = param_ids_.find(name); it != param_ids_.end()) {
    return Var(this, it->second);
  }
  Node n;
  n.borrowed = &t.mat();
  n.needs_grad = grad_enabled_;
  nodes_.push_back(std::move(n));
  const std::size_t id = nodes_.size() - 1;
  param_ids_.emplace(name, id);
  params_.emplace_back(name, id);
  param_tensors_.push_back(&t);
  return Var(this, id);
}

Var Graph::record(Mat value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  if (grad_enabled_) {
    for (const Var& in : inputs) {
      if (nodes_[in.id()].needs_grad) {
        n.needs_grad = true;
        break;
      }
    }
  }
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Mat value, const std::vector<Var>& inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  if (grad_enabled_) {
    for (const Var& in : inputs) {
      if (nodes_[in.id()].needs_grad) {
        n.needs_grad = true;
        break;
      }
    }
  }
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Gradients Graph::backward(const Var& loss) {
  if (loss.g_ != this) throw ContractError("backward: loss belongs to a different graph");
  const Mat& lv = value(loss.id());
  if (lv.size() != 1) {
    throw ContractError("backward: loss must be scalar, got " + std::to_string(lv.rows()) +
                        "x" + std::to_string(lv.cols()));
  }
  for (auto& n : nodes_) n.has_grad = false;

  Node& root = nodes_[loss.id()];
  if (root.needs_grad) {
    root.grad = Mat::Ones(1, 1);
    root.has_grad = true;
  }
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, n.borrowed ? *n.borrowed : n.owned, n.grad);
  }

  Gradients out;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto& [name, id] = params_[k];
    const Tensor& p = *param_tensors_[k];
    const Node& n = nodes_[id];
    if (n.has_grad) {
      out.set(name, Tensor(p.shape(), std::span<const double>(n.grad.data(), n.grad.size())));
    } else {
      out.set(name, Tensor::zeros(p.shape()));
    }
  }
  return out;
}

}  // namespace clmn::nn
