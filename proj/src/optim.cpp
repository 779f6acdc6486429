#include "fairgi/optim.hpp"

#include <cmath>

#include "fairgi/error.hpp"

namespace fairgi {

void AdamOptimizer::step(std::span<Parameter> params, bool ascend) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  if (m_.size() != params.size()) fail(ErrorKind::kShape, "optimizer parameter list changed");
  ++step_;
  const double sign = ascend ? -1.0 : 1.0;
  const double c1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    Matrix g = sign * p.grad;
    if (settings_.weight_decay != 0.0) g += settings_.weight_decay * p.value;
    m_[k] = settings_.beta1 * m_[k] + (1.0 - settings_.beta1) * g;
    v_[k] = settings_.beta2 * v_[k] + (1.0 - settings_.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = m_[k] / c1;
    const Matrix v_hat = v_[k] / c2;
    p.value.array() -= settings_.learning_rate * m_hat.array() / (v_hat.array().sqrt() + settings_.epsilon);
  }
}

}  // namespace fairgi
