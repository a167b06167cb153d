#pragma once

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <string>

namespace acok {

struct AdamSettings {
  double eta = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  void validate() const;
};

/// First and second moment estimates of the ADAM update.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  AdamSettings settings;

  AdamState() = default;
  AdamState(Eigen::Index size, AdamSettings settings);
};

/// One bias-corrected ADAM update applied entrywise. Throws DivergenceError
/// on non-finite gradient entries, leaving state and params untouched.
void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad);

struct LbfgsSettings {
  int memory = 50;
  double gradient_tolerance = 1e-9;  ///< on the max-norm of the gradient
  double relative_decrease_tolerance = 1e-12;
  long max_iterations = 50000;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_evaluations = 40;

  void validate() const;
};

enum class LbfgsTermination {
  GradientTolerance,
  RelativeDecrease,
  MaxIterations,
  LineSearchFailure,
};

std::string to_string(LbfgsTermination reason);

/// Curvature-pair history with the two-loop recursion.
class LbfgsState {
 public:
  explicit LbfgsState(int memory);

  /// Stores (s, y) when s'y > 0; returns whether the pair was kept.
  bool push(const Eigen::VectorXd& s, const Eigen::VectorXd& y);
  /// -H g for the implicit inverse-Hessian approximation.
  Eigen::VectorXd direction(const Eigen::VectorXd& grad) const;

  std::size_t size() const noexcept { return s_.size(); }
  int memory() const noexcept { return memory_; }
  const std::deque<Eigen::VectorXd>& s_history() const noexcept { return s_; }
  const std::deque<Eigen::VectorXd>& y_history() const noexcept { return y_; }

 private:
  int memory_;
  std::deque<Eigen::VectorXd> s_;
  std::deque<Eigen::VectorXd> y_;
  std::deque<double> rho_;
};

/// Returns f(x) and writes the gradient into `grad` (already sized).
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsProgress {
  long iteration = 0;
  double loss = 0.0;
  double gradient_norm = 0.0;
  double step_length = 0.0;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double loss = 0.0;
  double gradient_norm = 0.0;
  long iterations = 0;
  long evaluations = 0;
  LbfgsTermination termination = LbfgsTermination::MaxIterations;
};

/// Unconstrained L-BFGS with a strong-Wolfe line search (cubic interpolation).
/// `on_iteration` sees every accepted step. Throws DivergenceError when the
/// loss at the starting point is not finite.
LbfgsResult lbfgs_minimize(Eigen::VectorXd x0, const Objective& objective,
                           const LbfgsSettings& settings,
                           const std::function<void(const LbfgsProgress&)>& on_iteration = {});

}  // namespace acok
