#pragma once

#include "pico/common.hpp"

#include <functional>

namespace pico {

using VecX = Eigen::VectorXd;

/// Adam with a learning rate per parameter.
class Adam {
 public:
  explicit Adam(VecX lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void step(VecX& x, const VecX& grad);
  int steps() const { return t_; }

 private:
  VecX lr_, m_, v_;
  double beta1_, beta2_, eps_;
  int t_ = 0;
};

/// Central differences with per-parameter steps, evaluated in parameter order.
VecX central_difference(const std::function<double(const VecX&)>& f, const VecX& x, const VecX& step);

struct MinimizeOptions {
  int iterations = 300;
  int patience = 20;         // window for the relative-improvement stop
  double tolerance = 1e-5;   // relative improvement of the best loss over `patience` iterations
  int plateau = 10;          // iterations without a new best before restarting from it at half rate; 0 disables
  int max_halvings = 6;
};

struct Evaluation {
  double loss = 0.0;
  bool admissible = true;  // only admissible iterates may become the best
};

struct MinimizeResult {
  VecX best;
  double best_loss = 0.0;
  double initial_loss = 0.0;
  std::vector<double> trace;  // loss of every evaluated iterate, starting with x0
  int iterations = 0;
};

/// Adam from x0 keeping the lowest-loss admissible iterate (x0 always
/// counts). `before_step(iteration, x)` may change the objective, in which
/// case it returns true and the current best is re-scored. After `plateau`
/// iterations without a new best, Adam restarts from the best with fresh
/// moments and half the rates; the stop window restarts with it. Throws
/// NonFiniteLoss.
MinimizeResult minimize(const VecX& x0, const VecX& lr, const std::function<Evaluation(const VecX&)>& eval,
                        const std::function<VecX(const VecX&)>& gradient, const MinimizeOptions& options,
                        const std::function<bool(int, const VecX&)>& before_step = {});

}  // namespace pico
