#pragma once

#include <cmath>
#include <string>

#include "trajsde/param_store.hpp"

namespace trajsde::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment vectors, aligned index-for-index with the ParamStore.
struct AdamState {
  Vec m, v;
  long step = 0;

  explicit AdamState(const ParamStore& p) : m(Vec::Zero(p.size())), v(Vec::Zero(p.size())) {}
};

/// One Adam update in place. Throws NumericError on non-finite gradients.
inline void optimizer_step(ParamStore& params, const Gradients& grads, double lr, AdamState& st,
                           const AdamConfig& cfg = {}) {
  if (grads.size() != static_cast<Eigen::Index>(params.size()))
    throw UsageError("optimizer_step: gradient length mismatch");
  if (!grads.allFinite()) {
    Eigen::Index bad = 0;
    for (Eigen::Index i = 0; i < grads.size(); ++i)
      if (!std::isfinite(grads[i])) { bad = i; break; }
    std::string owner = "?";
    for (std::size_t s = 0; s < params.num_slices(); ++s) {
      const auto& sl = params.slice(static_cast<SliceId>(s));
      if (static_cast<std::size_t>(bad) >= sl.offset && static_cast<std::size_t>(bad) < sl.offset + sl.len())
        owner = sl.name;
    }
    throw NumericError("optimizer_step: non-finite gradient at index " + std::to_string(bad) +
                       " (slice '" + owner + "')");
  }
  st.step += 1;
  st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * grads;
  st.v = cfg.beta2 * st.v.array() + (1.0 - cfg.beta2) * grads.array().square();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  params.flat().array() -= lr * (st.m.array() / c1) / ((st.v.array() / c2).sqrt() + cfg.eps);
}

/// Scale grads down to the given global L2 norm if they exceed it.
inline void clip_global_norm(Gradients& grads, double max_norm) {
  const double n = grads.norm();
  if (n > max_norm && n > 0.0) grads *= max_norm / n;
}

}  // namespace trajsde::nn
