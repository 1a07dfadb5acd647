#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace charfix {

struct AdamParams {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over a flat parameter vector; moment buffers are sized on first step.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamParams params = {}) : params_(params) {}

  void step(std::vector<double>& x, const std::vector<double>& grad) {
    const std::size_t n = x.size();
    if (m_.size() != n) {
      m_.assign(n, 0.0);
      v_.assign(n, 0.0);
      t_ = 0;
    }
    ++t_;
    const double corr1 = 1.0 - std::pow(params_.beta1, t_);
    const double corr2 = 1.0 - std::pow(params_.beta2, t_);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = grad[i];
      m_[i] = params_.beta1 * m_[i] + (1.0 - params_.beta1) * g;
      v_[i] = params_.beta2 * v_[i] + (1.0 - params_.beta2) * g * g;
      const double mhat = m_[i] / corr1;
      const double vhat = v_[i] / corr2;
      x[i] -= params_.alpha * mhat / (std::sqrt(vhat) + params_.epsilon);
    }
  }

  void reset() {
    m_.clear();
    v_.clear();
    t_ = 0;
  }

 private:
  AdamParams params_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace charfix
