#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "trajsde/common.hpp"

namespace trajsde::nn {

using SliceId = int;

/// All trainable parameters of a model, stored as one flat 64-bit real
/// vector. Named slices view disjoint ranges of it; the slices cover the
/// vector exactly and their shapes are immutable after construction.
class ParamStore {
 public:
  struct Slice {
    std::string name;
    std::size_t offset = 0;
    int rows = 0;   // rows > 0, cols > 0 for matrices; cols == 0 for vectors
    int cols = 0;
    std::size_t len() const { return cols > 0 ? std::size_t(rows) * cols : std::size_t(rows); }
    bool is_matrix() const { return cols > 0; }
  };

  SliceId add_matrix(const std::string& name, int rows, int cols) {
    if (rows < 1 || cols < 1) throw ConfigError("param slice '" + name + "': bad shape");
    return add(name, rows, cols);
  }

  SliceId add_vector(const std::string& name, int len) {
    if (len < 1) throw ConfigError("param slice '" + name + "': bad length");
    return add(name, len, 0);
  }

  std::size_t size() const { return total_; }
  const Vec& flat() const { return data_; }
  Vec& flat() { return data_; }

  const Slice& slice(SliceId id) const { return slices_.at(id); }
  std::size_t num_slices() const { return slices_.size(); }

  SliceId find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown param slice '" + name + "'");
    return it->second;
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Eigen::Map<const MatRM> matrix(SliceId id) const {
    const Slice& s = slices_[id];
    if (!s.is_matrix()) throw UsageError("param slice '" + s.name + "' is not a matrix");
    return {data_.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<const Vec> vector(SliceId id) const {
    const Slice& s = slices_[id];
    return {data_.data() + s.offset, static_cast<Eigen::Index>(s.len())};
  }
  Eigen::Map<Vec> vector_mut(SliceId id) {
    const Slice& s = slices_[id];
    return {data_.data() + s.offset, static_cast<Eigen::Index>(s.len())};
  }

  /// Fill a slice with uniform values in [-bound, bound].
  void init_uniform(SliceId id, double bound, std::mt19937_64& rng) {
    auto v = vector_mut(id);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
  }

 private:
  SliceId add(const std::string& name, int rows, int cols) {
    if (index_.count(name)) throw ConfigError("duplicate param slice '" + name + "'");
    Slice s{name, total_, rows, cols};
    total_ += s.len();
    slices_.push_back(s);
    index_[name] = static_cast<SliceId>(slices_.size() - 1);
    data_.conservativeResize(total_);
    data_.tail(s.len()).setZero();
    return static_cast<SliceId>(slices_.size() - 1);
  }

  Vec data_ = Vec(0);
  std::size_t total_ = 0;
  std::vector<Slice> slices_;
  std::map<std::string, SliceId> index_;
};

/// Gradient of a scalar loss, aligned index-for-index with a ParamStore.
using Gradients = Vec;

inline Gradients zero_gradients(const ParamStore& p) {
  return Vec::Zero(p.size());
}

}  // namespace trajsde::nn
