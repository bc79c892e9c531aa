#pragma once

#include <random>
#include <string>

#include "trajsde/mlp.hpp"

namespace trajsde::nn {

/// Gated update of a latent state with an encoded input feature:
///   r = sigma(W_r [h (+) x] + b_r)
///   z = sigma(W_z [h (+) x] + b_z)
///   g = tanh(W_g [(r (.) h) (+) x] + b_g)
///   h' = z (.) h + (1 - z) (.) g
/// so every output component is a strict convex mix of h and the candidate g.
struct GruParams {
  int state_dim = 0;
  int input_dim = 0;
  SliceId w_r = -1, w_z = -1, w_g = -1;
  SliceId b_r = -1, b_z = -1, b_g = -1;
};

inline GruParams register_gru(ParamStore& store, const std::string& prefix, int state_dim, int input_dim) {
  GruParams p;
  p.state_dim = state_dim;
  p.input_dim = input_dim;
  const int cat = state_dim + input_dim;
  p.w_r = store.add_matrix(prefix + ".wr", state_dim, cat);
  p.w_z = store.add_matrix(prefix + ".wz", state_dim, cat);
  p.w_g = store.add_matrix(prefix + ".wg", state_dim, cat);
  p.b_r = store.add_vector(prefix + ".br", state_dim);
  p.b_z = store.add_vector(prefix + ".bz", state_dim);
  p.b_g = store.add_vector(prefix + ".bg", state_dim);
  return p;
}

/// Weights uniform in +-sqrt(1/fan_in); update-gate bias +1 so the cell
/// favors retaining the latent early in training.
inline void init_gru(ParamStore& store, const GruParams& p, std::mt19937_64& rng) {
  const double bound = std::sqrt(1.0 / (p.state_dim + p.input_dim));
  store.init_uniform(p.w_r, bound, rng);
  store.init_uniform(p.w_z, bound, rng);
  store.init_uniform(p.w_g, bound, rng);
  store.vector_mut(p.b_z).setConstant(1.0);
}

inline NodeId gru_step(Tape& t, const GruParams& p, NodeId h_prior, NodeId x_feat) {
  if (t.value(h_prior).size() != p.state_dim || t.value(x_feat).size() != p.input_dim)
    throw ConfigError("gru_step: state/input dimension mismatch");
  const NodeId cat = t.concat(h_prior, x_feat);
  const NodeId r = t.sigmoid(t.affine(p.w_r, p.b_r, cat));
  const NodeId z = t.sigmoid(t.affine(p.w_z, p.b_z, cat));
  const NodeId cat_g = t.concat(t.mul(r, h_prior), x_feat);
  const NodeId g = t.tanh(t.affine(p.w_g, p.b_g, cat_g));
  return t.add(t.mul(z, h_prior), t.mul(t.affc(z, -1.0, 1.0), g));
}

/// Tape-free step for inference-only paths. Same arithmetic as gru_step.
inline Vec gru_eval(const ParamStore& store, const GruParams& p, const Vec& h_prior, const Vec& x_feat) {
  if (h_prior.size() != p.state_dim || x_feat.size() != p.input_dim)
    throw ConfigError("gru_eval: state/input dimension mismatch");
  Vec cat(p.state_dim + p.input_dim);
  cat << h_prior, x_feat;
  const Vec r = (store.matrix(p.w_r) * cat + store.vector(p.b_r)).unaryExpr([](double v) { return sigmoid_scalar(v); });
  const Vec z = (store.matrix(p.w_z) * cat + store.vector(p.b_z)).unaryExpr([](double v) { return sigmoid_scalar(v); });
  Vec cat_g(p.state_dim + p.input_dim);
  cat_g << r.cwiseProduct(h_prior), x_feat;
  const Vec g = (store.matrix(p.w_g) * cat_g + store.vector(p.b_g)).array().tanh();
  return z.cwiseProduct(h_prior) + (Vec::Ones(p.state_dim) - z).cwiseProduct(g);
}

}  // namespace trajsde::nn
