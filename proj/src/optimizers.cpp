#include "acok/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "acok/errors.hpp"

namespace acok {

void AdamSettings::validate() const {
  if (!(eta >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(eps_hat > 0.0)) throw ConfigError("adam_epsilon must be positive");
}

AdamState::AdamState(Eigen::Index size, AdamSettings s)
    : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)), settings(s) {
  settings.validate();
}

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad) {
  if (grad.size() != params.size() || state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: gradient, state, and parameters differ in size");
  }
  if (!grad.allFinite()) {
    throw DivergenceError("adam_step: non-finite gradient", state.step + 1);
  }
  const auto& s = state.settings;
  state.step += 1;
  state.m = s.beta1 * state.m + (1.0 - s.beta1) * grad;
  state.v = s.beta2 * state.v + (1.0 - s.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(s.beta1, t);
  const double c2 = 1.0 - std::pow(s.beta2, t);
  params.array() -= s.eta * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + s.eps_hat);
}

void LbfgsSettings::validate() const {
  if (memory < 1) throw ConfigError("lbfgs_memory must be >= 1");
  if (!(gradient_tolerance >= 0.0)) throw ConfigError("lbfgs_gtol must be >= 0");
  if (!(relative_decrease_tolerance >= 0.0)) throw ConfigError("lbfgs_ftol must be >= 0");
  if (max_iterations < 0) throw ConfigError("lbfgs_max_iter must be >= 0");
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) throw ConfigError("Wolfe constants need 0 < c1 < c2 < 1");
  if (max_line_search_evaluations < 1) throw ConfigError("line search needs >= 1 evaluation");
}

std::string to_string(LbfgsTermination reason) {
  switch (reason) {
    case LbfgsTermination::GradientTolerance: return "gradient_tolerance";
    case LbfgsTermination::RelativeDecrease: return "relative_decrease";
    case LbfgsTermination::MaxIterations: return "max_iterations";
    case LbfgsTermination::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

LbfgsState::LbfgsState(int memory) : memory_(memory) {
  if (memory < 1) throw std::invalid_argument("LbfgsState: memory must be >= 1");
}

bool LbfgsState::push(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  const double sy = s.dot(y);
  if (!(sy > 0.0) || !std::isfinite(sy)) return false;
  if (static_cast<int>(s_.size()) == memory_) {
    s_.pop_front();
    y_.pop_front();
    rho_.pop_front();
  }
  s_.push_back(s);
  y_.push_back(y);
  rho_.push_back(1.0 / sy);
  return true;
}

Eigen::VectorXd LbfgsState::direction(const Eigen::VectorXd& grad) const {
  Eigen::VectorXd q = grad;
  const std::size_t k = s_.size();
  std::vector<double> alpha(k);
  for (std::size_t i = k; i-- > 0;) {
    alpha[i] = rho_[i] * s_[i].dot(q);
    q -= alpha[i] * y_[i];
  }
  if (k > 0) q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
  for (std::size_t i = 0; i < k; ++i) {
    const double beta = rho_[i] * y_[i].dot(q);
    q += (alpha[i] - beta) * s_[i];
  }
  return -q;
}

namespace {

struct Trial {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

// Minimizer of the cubic matching values and slopes at a and b, safeguarded
// into the inner part of the bracket; bisection when the fit is unusable.
double cubic_step(const Trial& a, const Trial& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double mid = 0.5 * (lo + hi);
  if (!std::isfinite(a.f) || !std::isfinite(b.f) || !std::isfinite(a.slope) ||
      !std::isfinite(b.slope)) {
    return mid;
  }
  const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (disc < 0.0) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
  const double denom = b.slope - a.slope + 2.0 * d2;
  if (denom == 0.0) return mid;
  const double alpha = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(alpha) || alpha < lo + margin || alpha > hi - margin) return mid;
  return alpha;
}

class LineSearch {
 public:
  LineSearch(const Objective& objective, const LbfgsSettings& settings, long& evaluations)
      : objective_(objective), settings_(settings), evaluations_(evaluations) {}

  // Strong-Wolfe search along d from (x0, f0, g0). On failure returns false
  // with `best` holding the lowest point seen, if any beat f0.
  bool run(const Eigen::VectorXd& x0, double f0, const Eigen::VectorXd& g0,
           const Eigen::VectorXd& d, double alpha_init, Trial& accepted, Trial& best) {
    x0_ = &x0;
    d_ = &d;
    f0_ = f0;
    slope0_ = g0.dot(d);
    budget_ = settings_.max_line_search_evaluations;
    best_ = &best;
    best.f = f0;
    best.alpha = 0.0;

    Trial prev;
    prev.alpha = 0.0;
    prev.f = f0;
    prev.slope = slope0_;
    double alpha = alpha_init;
    for (int i = 0; budget_ > 0; ++i) {
      Trial cur = evaluate(alpha);
      if (!std::isfinite(cur.f) || cur.f > f0_ + settings_.c1 * alpha * slope0_ ||
          (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur, accepted);
      }
      if (std::abs(cur.slope) <= -settings_.c2 * slope0_) {
        accepted = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, accepted);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return false;
  }

 private:
  Trial evaluate(double alpha) {
    --budget_;
    ++evaluations_;
    Trial t;
    t.alpha = alpha;
    t.x = *x0_ + alpha * *d_;
    t.g.resize(t.x.size());
    t.f = objective_(t.x, t.g);
    t.slope = std::isfinite(t.f) ? t.g.dot(*d_) : std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(t.f) && t.g.allFinite() && t.f < best_->f) *best_ = t;
    return t;
  }

  bool zoom(Trial lo, Trial hi, Trial& accepted) {
    while (budget_ > 0) {
      const double alpha = cubic_step(lo, hi);
      if (alpha == lo.alpha || alpha == hi.alpha) return false;
      Trial cur = evaluate(alpha);
      if (!std::isfinite(cur.f) || cur.f > f0_ + settings_.c1 * alpha * slope0_ || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.slope) <= -settings_.c2 * slope0_) {
        accepted = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return false;
  }

  const Objective& objective_;
  const LbfgsSettings& settings_;
  long& evaluations_;
  const Eigen::VectorXd* x0_ = nullptr;
  const Eigen::VectorXd* d_ = nullptr;
  double f0_ = 0.0;
  double slope0_ = 0.0;
  int budget_ = 0;
  Trial* best_ = nullptr;
};

}  // namespace

LbfgsResult lbfgs_minimize(Eigen::VectorXd x0, const Objective& objective,
                           const LbfgsSettings& settings,
                           const std::function<void(const LbfgsProgress&)>& on_iteration) {
  settings.validate();
  LbfgsResult result;
  result.x = std::move(x0);
  Eigen::VectorXd g(result.x.size());
  double f = objective(result.x, g);
  result.evaluations = 1;
  if (!std::isfinite(f) || !g.allFinite()) {
    throw DivergenceError("lbfgs_minimize: non-finite loss at the starting point", 0);
  }
  result.loss = f;
  result.gradient_norm = g.lpNorm<Eigen::Infinity>();

  if (result.gradient_norm <= settings.gradient_tolerance) {
    result.termination = LbfgsTermination::GradientTolerance;
    return result;
  }
  if (settings.max_iterations == 0) {
    result.termination = LbfgsTermination::MaxIterations;
    return result;
  }

  LbfgsState history(settings.memory);
  LineSearch search(objective, settings, result.evaluations);
  while (true) {
    Eigen::VectorXd d = history.direction(g);
    if (!(d.dot(g) < 0.0)) {
      history = LbfgsState(settings.memory);
      d = -g;
    }
    double alpha = history.size() == 0 ? std::min(1.0, 1.0 / g.norm()) : 1.0;

    Trial accepted;
    Trial best;
    bool ok = search.run(result.x, f, g, d, alpha, accepted, best);
    if (!ok && history.size() > 0) {
      // Retry once from steepest descent with a fresh history.
      history = LbfgsState(settings.memory);
      d = -g;
      alpha = std::min(1.0, 1.0 / g.norm());
      ok = search.run(result.x, f, g, d, alpha, accepted, best);
    }
    if (!ok) {
      if (best.alpha > 0.0 && best.f < f) {
        result.x = best.x;
        result.loss = best.f;
        result.gradient_norm = best.g.lpNorm<Eigen::Infinity>();
      }
      result.termination = LbfgsTermination::LineSearchFailure;
      return result;
    }

    history.push(accepted.x - result.x, accepted.g - g);
    const double f_old = f;
    result.x = std::move(accepted.x);
    g = std::move(accepted.g);
    f = accepted.f;
    result.loss = f;
    result.gradient_norm = g.lpNorm<Eigen::Infinity>();
    result.iterations += 1;
    if (on_iteration) {
      on_iteration(LbfgsProgress{result.iterations, f, result.gradient_norm, accepted.alpha});
    }

    if (result.gradient_norm <= settings.gradient_tolerance) {
      result.termination = LbfgsTermination::GradientTolerance;
      return result;
    }
    const double scale = std::max({std::abs(f_old), std::abs(f), 1.0});
    if ((f_old - f) / scale <= settings.relative_decrease_tolerance) {
      result.termination = LbfgsTermination::RelativeDecrease;
      return result;
    }
    if (result.iterations >= settings.max_iterations) {
      result.termination = LbfgsTermination::MaxIterations;
      return result;
    }
  }
}

}  // namespace acok
