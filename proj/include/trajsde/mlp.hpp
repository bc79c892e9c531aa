#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "trajsde/param_store.hpp"
#include "trajsde/tape.hpp"

namespace trajsde::nn {

enum class Act { Identity, Tanh, Sigmoid, Softplus };

inline Act act_from_string(const std::string& s) {
  if (s == "identity") return Act::Identity;
  if (s == "tanh") return Act::Tanh;
  if (s == "sigmoid") return Act::Sigmoid;
  if (s == "softplus") return Act::Softplus;
  throw ConfigError("unknown activation '" + s + "'");
}

inline std::string act_to_string(Act a) {
  switch (a) {
    case Act::Identity: return "identity";
    case Act::Tanh: return "tanh";
    case Act::Sigmoid: return "sigmoid";
    case Act::Softplus: return "softplus";
  }
  return "identity";
}

/// Fully-connected net: widths[0] inputs -> ... -> widths.back() outputs.
/// Hidden activations are tanh; the output activation is configurable.
struct MlpSpec {
  std::vector<int> widths;
  Act output_act = Act::Identity;

  MlpSpec() = default;
  MlpSpec(std::vector<int> w, Act out) : widths(std::move(w)), output_act(out) {
    if (widths.size() < 2) throw ConfigError("mlp spec needs at least one layer");
    for (int x : widths)
      if (x < 1) throw ConfigError("mlp spec widths must be >= 1");
  }

  int in_dim() const { return widths.front(); }
  int out_dim() const { return widths.back(); }
  int num_layers() const { return static_cast<int>(widths.size()) - 1; }
};

/// Slice handles for one MLP inside a ParamStore.
struct MlpParams {
  MlpSpec spec;
  std::vector<SliceId> weights;
  std::vector<SliceId> biases;
};

inline MlpParams register_mlp(ParamStore& store, const std::string& prefix, const MlpSpec& spec) {
  MlpParams p;
  p.spec = spec;
  for (int l = 0; l < spec.num_layers(); ++l) {
    p.weights.push_back(store.add_matrix(prefix + ".w" + std::to_string(l), spec.widths[l + 1], spec.widths[l]));
    p.biases.push_back(store.add_vector(prefix + ".b" + std::to_string(l), spec.widths[l + 1]));
  }
  return p;
}

/// Weights uniform in +-sqrt(1/fan_in); biases stay zero.
inline void init_mlp(ParamStore& store, const MlpParams& p, std::mt19937_64& rng) {
  for (int l = 0; l < p.spec.num_layers(); ++l)
    store.init_uniform(p.weights[l], std::sqrt(1.0 / p.spec.widths[l]), rng);
}

inline NodeId apply_act(Tape& t, NodeId x, Act a) {
  switch (a) {
    case Act::Identity: return x;
    case Act::Tanh: return t.tanh(x);
    case Act::Sigmoid: return t.sigmoid(x);
    case Act::Softplus: return t.softplus(x);
  }
  return x;
}

/// Taped forward pass. Input length must equal the first width.
inline NodeId mlp_forward(Tape& t, const MlpParams& p, NodeId input) {
  if (t.value(input).size() != p.spec.in_dim())
    throw ConfigError("mlp_forward: expected input of length " + std::to_string(p.spec.in_dim()) +
                      ", got " + std::to_string(t.value(input).size()));
  NodeId x = input;
  const int L = p.spec.num_layers();
  for (int l = 0; l < L; ++l) {
    x = t.affine(p.weights[l], p.biases[l], x);
    x = apply_act(t, x, l + 1 < L ? Act::Tanh : p.spec.output_act);
  }
  return x;
}

/// Tape-free forward pass for inference-only paths.
inline Vec mlp_eval(const ParamStore& store, const MlpParams& p, const Vec& input) {
  if (input.size() != p.spec.in_dim())
    throw ConfigError("mlp_eval: expected input of length " + std::to_string(p.spec.in_dim()) +
                      ", got " + std::to_string(input.size()));
  Vec x = input;
  const int L = p.spec.num_layers();
  for (int l = 0; l < L; ++l) {
    x = store.matrix(p.weights[l]) * x + store.vector(p.biases[l]);
    const Act a = l + 1 < L ? Act::Tanh : p.spec.output_act;
    switch (a) {
      case Act::Identity: break;
      case Act::Tanh: x = x.array().tanh(); break;
      case Act::Sigmoid: x = x.unaryExpr([](double v) { return sigmoid_scalar(v); }); break;
      case Act::Softplus: x = x.unaryExpr([](double v) { return softplus_scalar(v); }); break;
    }
  }
  return x;
}

}  // namespace trajsde::nn
