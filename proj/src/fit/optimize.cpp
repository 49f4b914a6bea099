#include "pico/fit/optimize.hpp"

#include <cmath>

namespace pico {

Adam::Adam(VecX lr, double beta1, double beta2, double eps)
    : lr_(std::move(lr)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_ = VecX::Zero(lr_.size());
  v_ = VecX::Zero(lr_.size());
}

void Adam::step(VecX& x, const VecX& grad) {
  require(grad.size() == lr_.size() && x.size() == lr_.size(), ErrorKind::DimensionMismatch,
          "Adam parameter size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] -= lr_[i] * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
}

VecX central_difference(const std::function<double(const VecX&)>& f, const VecX& x, const VecX& step) {
  VecX g(x.size());
  VecX probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step[i];
    const double hi = f(probe);
    probe[i] = x[i] - step[i];
    const double lo = f(probe);
    probe[i] = x[i];
    g[i] = (hi - lo) / (2.0 * step[i]);
  }
  return g;
}

MinimizeResult minimize(const VecX& x0, const VecX& lr, const std::function<Evaluation(const VecX&)>& eval,
                        const std::function<VecX(const VecX&)>& gradient, const MinimizeOptions& options,
                        const std::function<bool(int, const VecX&)>& before_step) {
  auto checked = [&](const VecX& x) {
    const Evaluation e = eval(x);
    require(std::isfinite(e.loss), ErrorKind::NonFiniteLoss, "loss evaluated to " + std::to_string(e.loss));
    return e;
  };
  MinimizeResult r;
  r.best = x0;
  r.initial_loss = r.best_loss = checked(x0).loss;
  r.trace.push_back(r.best_loss);
  std::vector<double> best_history{r.best_loss};

  VecX rate = lr;
  Adam adam(rate);
  VecX x = x0;
  int since_best = 0, halvings = 0;
  for (int it = 0; it < options.iterations; ++it) {
    if (before_step && before_step(it, x)) {
      // The objective changed: re-score the best and restart the stop window.
      r.best_loss = checked(r.best).loss;
      best_history.assign(1, r.best_loss);
    }
    const VecX g = gradient(x);
    require(g.allFinite(), ErrorKind::NonFiniteLoss, "non-finite gradient");
    adam.step(x, g);
    const Evaluation e = checked(x);
    r.trace.push_back(e.loss);
    if (e.admissible && e.loss < r.best_loss) {
      r.best_loss = e.loss;
      r.best = x;
      since_best = 0;
    } else {
      ++since_best;
    }
    best_history.push_back(r.best_loss);
    r.iterations = it + 1;
    if (options.plateau > 0 && since_best >= options.plateau) {
      if (halvings == options.max_halvings) break;
      ++halvings;
      rate *= 0.5;
      adam = Adam(rate);
      x = r.best;
      since_best = 0;
      best_history.assign(1, r.best_loss);
      continue;
    }
    const size_t n = best_history.size();
    if (options.patience > 0 && n > static_cast<size_t>(options.patience)) {
      const double before = best_history[n - 1 - options.patience];
      if (before - r.best_loss <= options.tolerance * std::abs(before)) break;
    }
  }
  return r;
}

}  // namespace pico
