#pragma once

#include <span>
#include <vector>

#include "fairgi/models.hpp"

namespace fairgi {

struct AdamSettings {
  double learning_rate = 1e-3;
  double weight_decay = 0.0;  // L2 term added to the gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Per-parameter adaptive-moment descent. Moments are allocated lazily on the
// first step and must keep seeing the same parameter list.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  explicit AdamOptimizer(AdamSettings settings) : settings_(settings) {}

  const AdamSettings& settings() const { return settings_; }
  long steps() const { return step_; }

  // Descends along `grad`. Pass `ascend` to climb instead.
  void step(std::span<Parameter> params, bool ascend = false);

  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  AdamSettings settings_;
  long step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace fairgi
