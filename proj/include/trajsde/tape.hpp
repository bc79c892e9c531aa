#pragma once

#include <cmath>
#include <vector>

#include "trajsde/common.hpp"
#include "trajsde/param_store.hpp"

namespace trajsde::nn {

using NodeId = int;

inline double sigmoid_scalar(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double softplus_scalar(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

/// Record of one executed forward pass over vector-valued operations.
/// backward() replays it in reverse and accumulates d(loss)/d(params) into a
/// flat Gradients vector. Values are kept on the tape, so a Tape instance is
/// single-pass: build, read values, backward, discard (or reset()).
class Tape {
 public:
  enum class Op : std::uint8_t {
    Input,     // constant leaf
    Param,     // parameter slice leaf
    Affine,    // W a + b
    Tanh,
    Sigmoid,
    Softplus,
    Sqrt,
    Square,
    Add,
    Sub,
    Mul,       // elementwise
    AffC,      // alpha * a + beta
    CMul,      // a (.) const vector
    Concat,
    Segment,
    Sum,       // -> length-1
    StopGrad,
  };

  struct Node {
    Op op;
    NodeId a = -1, b = -1;
    SliceId w = -1, bias = -1;
    double alpha = 0.0, beta = 0.0;
    int seg_off = 0;
    Vec cvec;  // payload for Input / CMul
    Vec val;
  };

  explicit Tape(const ParamStore& params) : params_(&params) { nodes_.reserve(1024); }

  const Vec& value(NodeId id) const { return nodes_[id].val; }
  std::size_t size() const { return nodes_.size(); }
  void reset() { nodes_.clear(); }

  NodeId input(Vec v) {
    Node n{Op::Input};
    n.val = std::move(v);
    return push(std::move(n));
  }
  NodeId input_scalar(double x) { return input(Vec::Constant(1, x)); }

  NodeId param(SliceId s) {
    Node n{Op::Param};
    n.w = s;
    n.val = params_->vector(s);
    return push(std::move(n));
  }

  NodeId affine(SliceId W, SliceId b, NodeId x) {
    auto Wm = params_->matrix(W);
    const Vec& xv = nodes_[x].val;
    if (Wm.cols() != xv.size())
      throw ConfigError("affine: weight matrix " + params_->slice(W).name + " expects input of length " +
                        std::to_string(Wm.cols()) + ", got " + std::to_string(xv.size()));
    Node n{Op::Affine};
    n.a = x;
    n.w = W;
    n.bias = b;
    n.val = Wm * xv + params_->vector(b);
    return push(std::move(n));
  }

  NodeId tanh(NodeId a) { return unary(Op::Tanh, a, [](double x) { return std::tanh(x); }); }
  NodeId sigmoid(NodeId a) { return unary(Op::Sigmoid, a, sigmoid_scalar); }
  NodeId softplus(NodeId a) { return unary(Op::Softplus, a, softplus_scalar); }
  NodeId sqrt(NodeId a) { return unary(Op::Sqrt, a, [](double x) { return std::sqrt(x); }); }
  NodeId square(NodeId a) { return unary(Op::Square, a, [](double x) { return x * x; }); }

  NodeId add(NodeId a, NodeId b) { return binary(Op::Add, a, b); }
  NodeId sub(NodeId a, NodeId b) { return binary(Op::Sub, a, b); }
  NodeId mul(NodeId a, NodeId b) { return binary(Op::Mul, a, b); }

  /// alpha * a + beta, elementwise.
  NodeId affc(NodeId a, double alpha, double beta) {
    Node n{Op::AffC};
    n.a = a;
    n.alpha = alpha;
    n.beta = beta;
    n.val = (alpha * nodes_[a].val).array() + beta;
    return push(std::move(n));
  }

  NodeId cmul(NodeId a, Vec c) {
    if (nodes_[a].val.size() != c.size()) throw UsageError("cmul: length mismatch");
    Node n{Op::CMul};
    n.a = a;
    n.val = nodes_[a].val.cwiseProduct(c);
    n.cvec = std::move(c);
    return push(std::move(n));
  }

  NodeId concat(NodeId a, NodeId b) {
    Node n{Op::Concat};
    n.a = a;
    n.b = b;
    n.val.resize(nodes_[a].val.size() + nodes_[b].val.size());
    n.val << nodes_[a].val, nodes_[b].val;
    return push(std::move(n));
  }

  NodeId segment(NodeId a, int off, int len) {
    if (off < 0 || len < 1 || off + len > nodes_[a].val.size())
      throw UsageError("segment: range out of bounds");
    Node n{Op::Segment};
    n.a = a;
    n.seg_off = off;
    n.val = nodes_[a].val.segment(off, len);
    return push(std::move(n));
  }

  NodeId sum(NodeId a) {
    Node n{Op::Sum};
    n.a = a;
    n.val = Vec::Constant(1, nodes_[a].val.sum());
    return push(std::move(n));
  }

  NodeId mean(NodeId a) {
    const double inv = 1.0 / static_cast<double>(nodes_[a].val.size());
    return affc(sum(a), inv, 0.0);
  }

  /// Identity in the forward pass; blocks gradient flow in the backward pass.
  NodeId stop_gradient(NodeId a) {
    Node n{Op::StopGrad};
    n.a = a;
    n.val = nodes_[a].val;
    return push(std::move(n));
  }

  /// Accumulate d(root)/d(params) into grads. root must be scalar.
  void backward(NodeId root, Gradients& grads) const {
    if (nodes_[root].val.size() != 1)
      throw UsageError("backward: loss root must be a scalar node");
    if (grads.size() != static_cast<Eigen::Index>(params_->size()))
      throw UsageError("backward: gradient vector length mismatch");

    std::vector<Vec> bar(nodes_.size());
    bar[root] = Vec::Ones(1);

    auto touch = [&](NodeId id) -> Vec& {
      if (bar[id].size() == 0) bar[id] = Vec::Zero(nodes_[id].val.size());
      return bar[id];
    };

    for (NodeId i = static_cast<NodeId>(nodes_.size()) - 1; i >= 0; --i) {
      if (bar[i].size() == 0) continue;  // not reachable from root
      const Node& n = nodes_[i];
      const Vec& gi = bar[i];
      switch (n.op) {
        case Op::Input:
        case Op::StopGrad:
          break;
        case Op::Param: {
          const auto& s = params_->slice(n.w);
          grads.segment(s.offset, s.len()) += gi;
          break;
        }
        case Op::Affine: {
          const auto& sw = params_->slice(n.w);
          const auto& sb = params_->slice(n.bias);
          const Vec& x = nodes_[n.a].val;
          Eigen::Map<MatRM> gW(grads.data() + sw.offset, sw.rows, sw.cols);
          gW.noalias() += gi * x.transpose();
          grads.segment(sb.offset, sb.len()) += gi;
          touch(n.a).noalias() += params_->matrix(n.w).transpose() * gi;
          break;
        }
        case Op::Tanh:
          touch(n.a).array() += gi.array() * (1.0 - n.val.array().square());
          break;
        case Op::Sigmoid:
          touch(n.a).array() += gi.array() * n.val.array() * (1.0 - n.val.array());
          break;
        case Op::Softplus: {
          const Vec& x = nodes_[n.a].val;
          Vec& ga = touch(n.a);
          for (Eigen::Index k = 0; k < x.size(); ++k) ga[k] += gi[k] * sigmoid_scalar(x[k]);
          break;
        }
        case Op::Sqrt:
          touch(n.a).array() += gi.array() * 0.5 / n.val.array();
          break;
        case Op::Square:
          touch(n.a).array() += gi.array() * 2.0 * nodes_[n.a].val.array();
          break;
        case Op::Add:
          touch(n.a) += gi;
          touch(n.b) += gi;
          break;
        case Op::Sub:
          touch(n.a) += gi;
          touch(n.b) -= gi;
          break;
        case Op::Mul:
          touch(n.a).array() += gi.array() * nodes_[n.b].val.array();
          touch(n.b).array() += gi.array() * nodes_[n.a].val.array();
          break;
        case Op::AffC:
          touch(n.a) += n.alpha * gi;
          break;
        case Op::CMul:
          touch(n.a).array() += gi.array() * n.cvec.array();
          break;
        case Op::Concat: {
          const Eigen::Index la = nodes_[n.a].val.size();
          touch(n.a) += gi.head(la);
          touch(n.b) += gi.tail(gi.size() - la);
          break;
        }
        case Op::Segment:
          touch(n.a).segment(n.seg_off, gi.size()) += gi;
          break;
        case Op::Sum:
          touch(n.a).array() += gi[0];
          break;
      }
    }
  }

 private:
  template <class F>
  NodeId unary(Op op, NodeId a, F f) {
    Node n{op};
    n.a = a;
    n.val = nodes_[a].val.unaryExpr(f);
    return push(std::move(n));
  }

  NodeId binary(Op op, NodeId a, NodeId b) {
    const Vec& av = nodes_[a].val;
    const Vec& bv = nodes_[b].val;
    if (av.size() != bv.size()) throw UsageError("tape: elementwise op on mismatched lengths");
    Node n{op};
    n.a = a;
    n.b = b;
    switch (op) {
      case Op::Add: n.val = av + bv; break;
      case Op::Sub: n.val = av - bv; break;
      case Op::Mul: n.val = av.cwiseProduct(bv); break;
      default: throw UsageError("tape: not a binary op");
    }
    return push(std::move(n));
  }

  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  const ParamStore* params_;
  std::vector<Node> nodes_;
};

}  // namespace trajsde::nn
