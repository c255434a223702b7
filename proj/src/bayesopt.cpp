#include "scrbo/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scrbo/error.hpp"
#include "scrbo/rng.hpp"

namespace scrbo::bo {

namespace {

constexpr std::uint64_t kLhsStream = 1;
constexpr std::uint64_t kFitStream = 2;
constexpr std::uint64_t kAcquireStream = 3;
constexpr std::uint64_t kPerturbStream = 4;

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

std::uint64_t nth_prime(std::size_t n) {
  std::uint64_t count = 0;
  for (std::uint64_t p = 2;; ++p) {
    bool prime = true;
    for (std::uint64_t q = 2; q * q <= p; ++q) {
      if (p % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime && count++ == n) return p;
  }
}

double l1(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// Greedy coordinate descent with step halving.
void refine(const gp::GPModel& model, double kappa, Point& x, double& score, const AcquisitionOptions& opt) {
  double step = opt.initial_step;
  Point trial = x;
  while (step >= opt.min_step) {
    bool improved = false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      for (double dir : {-1.0, 1.0}) {
        trial = x;
        trial[j] = std::clamp(x[j] + dir * step, 0.0, 1.0);
        if (trial[j] == x[j]) continue;
        const double s = lcb(model, trial, kappa);
        if (s < score) {
          score = s;
          x = trial;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

}  // namespace

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  require(!dims_.empty(), ErrorCode::configuration, "search space has no dimensions");
  for (const auto& d : dims_) {
    require(d.lower < d.upper, ErrorCode::configuration, "dimension " + d.name + ": lower must be < upper");
    require(d.scale != Scale::log || d.lower > 0.0, ErrorCode::configuration,
            "dimension " + d.name + ": log scale needs positive bounds");
  }
}

SearchSpace SearchSpace::scr() {
  return SearchSpace({{"n_nodes", Kind::integer, 50, 200, Scale::linear},
                      {"w_in", Kind::continuous, 0.01, 0.95, Scale::linear},
                      {"w", Kind::continuous, 0.01, 0.95, Scale::linear},
                      {"lambda", Kind::continuous, 1e-12, 1e-2, Scale::log}});
}

double SearchSpace::to_value(std::size_t i, double unit) const {
  const auto& d = dims_[i];
  if (unit <= 0.0) return d.lower;
  if (unit >= 1.0) return d.upper;
  if (d.scale == Scale::log) {
    const double lo = std::log(d.lower), hi = std::log(d.upper);
    return std::clamp(std::exp(lo + unit * (hi - lo)), d.lower, d.upper);
  }
  return d.lower + unit * (d.upper - d.lower);
}

double SearchSpace::to_unit(std::size_t i, double value) const {
  const auto& d = dims_[i];
  if (d.scale == Scale::log) {
    const double lo = std::log(d.lower), hi = std::log(d.upper);
    return (std::log(value) - lo) / (hi - lo);
  }
  return (value - d.lower) / (d.upper - d.lower);
}

std::vector<double> SearchSpace::decode(std::span<const double> unit) const {
  require(unit.size() == size(), ErrorCode::shape, "point dimension does not match search space");
  std::vector<double> v(size());
  for (std::size_t i = 0; i < size(); ++i) {
    v[i] = to_value(i, unit[i]);
    if (dims_[i].kind == Kind::integer) v[i] = std::clamp(std::round(v[i]), dims_[i].lower, dims_[i].upper);
  }
  return v;
}

Point SearchSpace::encode(std::span<const double> values) const {
  require(values.size() == size(), ErrorCode::shape, "point dimension does not match search space");
  Point u(size());
  for (std::size_t i = 0; i < size(); ++i) u[i] = to_unit(i, values[i]);
  return u;
}

SCRParams to_scr_params(std::span<const double> values) {
  require(values.size() == 4, ErrorCode::shape, "reservoir parameters need 4 values");
  return SCRParams{static_cast<std::size_t>(std::llround(values[0])), values[1], values[2], values[3]};
}

std::vector<double> from_scr_params(const SCRParams& p) {
  return {static_cast<double>(p.n_nodes), p.w_in, p.w, p.lambda};
}

void BOConfig::validate() const {
  require(n_init >= 2, ErrorCode::configuration, "n_init must be >= 2");
  require(max_evals >= n_init, ErrorCode::configuration, "max_evals must be >= n_init");
  require(kappa >= 0.0, ErrorCode::configuration, "kappa must be >= 0");
  require(epsilon > 0.0, ErrorCode::configuration, "epsilon must be > 0");
  require(gp_restarts >= 1, ErrorCode::configuration, "gp_restarts must be >= 1");
  require(refit_growth >= 0.0, ErrorCode::configuration, "refit_growth must be >= 0");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged: return "converged";
    case StopReason::budget: return "budget";
    case StopReason::target_reached: return "target_reached";
  }
  return "unknown";
}

StopReason parse_stop_reason(const std::string& text) {
  if (text == "converged") return StopReason::converged;
  if (text == "budget") return StopReason::budget;
  if (text == "target_reached") return StopReason::target_reached;
  throw Error(ErrorCode::parse, "unknown stop reason: " + text);
}

std::vector<Point> lhs_sample(const SearchSpace& space, std::size_t n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::invalid_argument, "lhs_sample: n must be >= 1");
  Rng rng(seed);
  std::vector<Point> pts(n, Point(space.size()));
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < space.size(); ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (std::size_t i = 0; i < n; ++i) {
      pts[i][j] = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
    }
  }
  return pts;
}

double lcb(const gp::GPModel& model, std::span<const double> x, double kappa) {
  const auto p = model.posterior(x);
  return p.mean - kappa * p.std;
}

Point acquire_next(const gp::GPModel& model, const SearchSpace& space, double kappa, std::uint64_t seed,
                   const AcquisitionOptions& options) {
  const std::size_t d = space.size();
  Rng rng(seed);
  std::vector<double> shift(d);
  std::vector<std::uint64_t> bases(d);
  for (std::size_t j = 0; j < d; ++j) {
    shift[j] = rng.uniform();
    bases[j] = nth_prime(j);
  }

  std::vector<Point> cands(options.candidates, Point(d));
  std::vector<double> scores(options.candidates);
  for (std::size_t i = 0; i < options.candidates; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double h = radical_inverse(i + 1, bases[j]) + shift[j];
      cands[i][j] = h - std::floor(h);
    }
    scores[i] = lcb(model, cands[i], kappa);
  }
  std::vector<std::size_t> order(options.candidates);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t top = std::min(options.refine, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] < scores[b] || (scores[a] == scores[b] && a < b); });

  Point best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < top; ++k) {
    Point x = cands[order[k]];
    double s = scores[order[k]];
    refine(model, kappa, x, s, options);
    if (s < best_score) {
      best_score = s;
      best = std::move(x);
    }
  }
  return best;
}

BOResult optimize(const Objective& objective, const SearchSpace& space, const BOConfig& config) {
  config.validate();
  BOResult result;
  auto& history = result.history;
  double worst_finite = -std::numeric_limits<double>::infinity();
  std::size_t finite_count = 0;
  Rng perturb_rng(derive_seed(config.seed, kPerturbStream));

  auto penalty = [&] { return 1e3 * std::max(finite_count ? std::abs(worst_finite) : 0.0, 1.0); };

  auto evaluate = [&](Point unit) {
    for (double& u : unit) u = std::clamp(u, 0.0, 1.0);
    Evaluation e;
    e.values = space.decode(unit);
    e.unit = std::move(unit);
    e.index = history.size();
    double v;
    try {
      v = objective(e.values);
    } catch (const Error&) {
      v = std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isfinite(v)) {
      e.value = v;
      worst_finite = std::max(worst_finite, v);
      if (finite_count++ == 0 || v < result.best_value) {
        result.best_value = v;
        result.best_index = e.index;
        result.best_values = e.values;
      }
    } else {
      e.failed = true;
      e.value = penalty();
    }
    history.push_back(std::move(e));
  };
  auto target_hit = [&] { return config.target_value && finite_count > 0 && result.best_value <= *config.target_value; };

  std::vector<Point> design;
  for (const auto& p : config.initial_points) design.push_back(space.encode(p));
  if (design.size() < config.n_init) {
    for (auto& p : lhs_sample(space, config.n_init - design.size(), derive_seed(config.seed, kLhsStream)))
      design.push_back(std::move(p));
  }
  for (auto& p : design) {
    if (history.size() >= config.max_evals) break;
    evaluate(std::move(p));
  }
  require(finite_count > 0, ErrorCode::optimization_failed, "every initial evaluation failed");

  if (target_hit()) {
    result.stop_reason = StopReason::target_reached;
    return result;
  }

  std::optional<gp::Hyperparameters> warm;
  std::size_t fitted_size = 0;
  std::optional<Point> previous;
  result.stop_reason = StopReason::budget;
  for (std::uint64_t iter = 0; history.size() < config.max_evals; ++iter) {
    std::vector<Point> xs;
    std::vector<double> ys;
    xs.reserve(history.size());
    ys.reserve(history.size());
    const double pen = penalty();
    for (const auto& e : history) {
      xs.push_back(e.unit);
      ys.push_back(e.failed ? pen : e.value);
    }
    const std::size_t n = history.size();
    const bool refit = !warm || n <= config.refit_every_until ||
                       static_cast<double>(n) >= (1.0 + config.refit_growth) * static_cast<double>(fitted_size);
    std::optional<gp::GPModel> fitted;
    if (refit) {
      gp::FitOptions fit{config.gp_restarts, derive_seed(derive_seed(config.seed, kFitStream), iter), warm};
      fitted.emplace(gp::gp_fit(xs, ys, fit));
      warm = fitted->hyperparameters();
      fitted_size = n;
    } else {
      fitted.emplace(gp::GPModel::from_hyperparameters(xs, ys, *warm));
    }
    const gp::GPModel& model = *fitted;

    Point next = acquire_next(model, space, config.kappa, derive_seed(derive_seed(config.seed, kAcquireStream), iter));
    if (previous && l1(next, *previous) < config.epsilon) {
      result.stop_reason = StopReason::converged;
      break;
    }
    previous = next;
    const bool duplicate =
        std::any_of(history.begin(), history.end(), [&](const Evaluation& e) { return l1(e.unit, next) < 1e-9; });
    if (duplicate) {
      for (double& u : next) u += perturb_rng.uniform(-1e-3, 1e-3);
    }
    evaluate(std::move(next));
    if (target_hit()) {
      result.stop_reason = StopReason::target_reached;
      break;
    }
  }
  return result;
}

BOResult optimize_scr(const std::function<double(const SCRParams&)>& objective, const BOConfig& config) {
  return optimize([&](std::span<const double> v) { return objective(to_scr_params(v)); }, SearchSpace::scr(), config);
}

}  // namespace scrbo::bo
