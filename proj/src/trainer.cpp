#include "tech/trainer.hpp"

#include <cmath>

#include <stdexcept>

namespace tech {

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  if (cfg_.lr < 0) throw std::invalid_argument("adam: lr must be >= 0");
  first_moment_.reserve(params_.size());
  second_moment_.reserve(params_.size());
  for (const Tensor& p : params_) {
    first_moment_.emplace_back(static_cast<std::size_t>(p.size()), 0.0);
    second_moment_.emplace_back(static_cast<std::size_t>(p.size()), 0.0);
  }
}

void AdamOptimizer::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

void AdamOptimizer::step() {
  ++steps_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    auto values = p.data();
    auto& m = first_moment_[i];
    auto& v = second_moment_[i];
    const bool has_grad = p.has_grad();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double g = has_grad ? p.grad()[j] : 0.0;
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      values[j] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

void TrainConfig::validate() const {
  if (lr < 0) throw std::invalid_argument("train config: lr must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("train config: seeds must be non-empty");
  bank.validate();
}

}  // namespace tech
