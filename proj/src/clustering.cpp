#include "melcomp/clustering.h"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace melcomp {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

class WardState {
 public:
  explicit WardState(const std::vector<std::vector<double>>& points)
      : n_(points.size()), cost_(n_ * n_, 0.0), size_(n_, 1), active_(n_, true), nn_(n_, kNone),
        nn_cost_(n_, std::numeric_limits<double>::infinity()) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < points[i].size(); ++k) {
          double diff = points[i][k] - points[j][k];
          d2 += diff * diff;
        }
        // Increase of the sum of squares when two singletons merge.
        at(i, j) = 0.5 * d2;
        at(j, i) = at(i, j);
      }
    }
    for (std::size_t i = 0; i < n_; ++i) refresh(i);
  }

  void merge_until(std::size_t target) {
    std::size_t remaining = n_;
    while (remaining > target) {
      std::size_t best = kNone;
      for (std::size_t i = 0; i < n_; ++i) {
        if (active_[i] && nn_[i] != kNone && (best == kNone || nn_cost_[i] < nn_cost_[best])) best = i;
      }
      merge(best, nn_[best]);
      --remaining;
    }
  }

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> slot_label(n_, kNone);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (active_[i]) slot_label[i] = next++;
    }
    std::vector<std::size_t> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = slot_label[find_root(i)];
    return out;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return cost_[i * n_ + j]; }

  std::size_t find_root(std::size_t i) const {
    while (parent_of(i) != i) i = parent_of(i);
    return i;
  }
  std::size_t parent_of(std::size_t i) const { return parent_.empty() || parent_[i] == kNone ? i : parent_[i]; }

  // Nearest active partner j > i, lowest j on ties.
  void refresh(std::size_t i) {
    nn_[i] = kNone;
    nn_cost_[i] = std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (active_[j] && at(i, j) < nn_cost_[i]) {
        nn_[i] = j;
        nn_cost_[i] = at(i, j);
      }
    }
  }

  void merge(std::size_t i, std::size_t j) {
    if (parent_.empty()) parent_.assign(n_, kNone);
    const double ni = static_cast<double>(size_[i]);
    const double nj = static_cast<double>(size_[j]);
    const double dij = at(i, j);
    for (std::size_t k = 0; k < n_; ++k) {
      if (!active_[k] || k == i || k == j) continue;
      const double nk = static_cast<double>(size_[k]);
      // Lance-Williams update for Ward linkage.
      double d = ((ni + nk) * at(i, k) + (nj + nk) * at(j, k) - nk * dij) / (ni + nj + nk);
      at(i, k) = d;
      at(k, i) = d;
    }
    size_[i] += size_[j];
    active_[j] = false;
    parent_[j] = i;
    nn_[j] = kNone;

    for (std::size_t p = 0; p < n_; ++p) {
      if (!active_[p]) continue;
      if (p == i || nn_[p] == i || nn_[p] == j) {
        refresh(p);
      } else if (p < i && at(p, i) < nn_cost_[p]) {
        nn_[p] = i;
        nn_cost_[p] = at(p, i);
      } else if (p < i && at(p, i) == nn_cost_[p] && i < nn_[p]) {
        nn_[p] = i;
      }
    }
  }

  std::size_t n_;
  std::vector<double> cost_;
  std::vector<std::size_t> size_;
  std::vector<bool> active_;
  std::vector<std::size_t> nn_;
  std::vector<double> nn_cost_;
  std::vector<std::size_t> parent_;
};

}  // namespace

std::vector<std::size_t> ward_cluster(const std::vector<std::vector<double>>& points, std::size_t clusters) {
  if (points.empty()) return {};
  if (clusters == 0) throw std::invalid_argument("ward_cluster needs at least one cluster");
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw std::invalid_argument("points differ in dimension");
  }
  WardState state(points);
  state.merge_until(std::min(clusters, points.size()));
  return state.labels();
}

}  // namespace melcomp
