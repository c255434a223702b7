#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "scrbo/bayesopt.hpp"
#include "scrbo/error.hpp"
#include "scrbo/rng.hpp"

using namespace scrbo;
using namespace scrbo::bo;

namespace {

SearchSpace unit_square() {
  return SearchSpace({{"x", Kind::continuous, 0.0, 1.0, Scale::linear}, {"y", Kind::continuous, 0.0, 1.0, Scale::linear}});
}

using oracle::stratified;

}  // namespace

TEST_CASE("reservoir search space") {
  const auto space = SearchSpace::scr();
  REQUIRE(space.size() == 4);
  CHECK(space[0].kind == Kind::integer);
  CHECK(space[3].scale == Scale::log);
  const auto lo = space.decode(Point{0, 0, 0, 0}), hi = space.decode(Point{1, 1, 1, 1});
  CHECK(lo == std::vector<double>{50, 0.01, 0.01, 1e-12});
  CHECK(hi[0] == 200);
  CHECK(hi[1] == doctest::Approx(0.95));
  CHECK(hi[3] == doctest::Approx(1e-2));
  CHECK(space.decode(Point{0.5, 0.5, 0.5, 0.5})[3] == doctest::Approx(1e-7));

  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    Point u{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    const auto v = space.decode(u);
    CHECK(v[0] == std::round(v[0]));
    CHECK(v[0] >= 50);
    CHECK(v[0] <= 200);
    CHECK(std::abs(space.encode(v)[3] - u[3]) <= 1e-12);
    CHECK(std::abs(space.encode(v)[1] - u[1]) <= 1e-12);
  }
  CHECK_THROWS_AS(SearchSpace({{"bad", Kind::continuous, 0.0, 1.0, Scale::log}}), Error);
  CHECK_THROWS_AS(SearchSpace({{"bad", Kind::continuous, 1.0, 1.0, Scale::linear}}), Error);
}

TEST_CASE("scr parameter conversion") {
  const SCRParams p = to_scr_params(std::vector<double>{120, 0.3, 0.7, 1e-5});
  CHECK(p == SCRParams{120, 0.3, 0.7, 1e-5});
  CHECK(from_scr_params(p) == std::vector<double>{120, 0.3, 0.7, 1e-5});
}

TEST_CASE("latin hypercube stratification") {
  const auto space = SearchSpace::scr();
  for (std::size_t n : {1u, 2u, 4u, 10u, 50u}) {
    const auto pts = lhs_sample(space, n, 7);
    REQUIRE(pts.size() == n);
    for (std::size_t d = 0; d < 4; ++d) CHECK(stratified(pts, d));
  }
  CHECK(lhs_sample(space, 50, 3) == lhs_sample(space, 50, 3));
  CHECK(lhs_sample(space, 50, 3) != lhs_sample(space, 50, 4));
  // Log-scaled lambda: one point per decade-fifth of the exponent range.
  const auto pts = lhs_sample(space, 50, 9);
  std::vector<int> decades(10, 0);
  for (const auto& p : pts) {
    const double lam = space.decode(p)[3];
    CHECK(lam >= 1e-12);
    CHECK(lam <= 1e-2);
    ++decades[std::min(9, static_cast<int>(std::floor(std::log10(lam) + 12.0)))];
  }
  for (int c : decades) CHECK(c == 5);
}

TEST_CASE("lower confidence bound") {
  std::vector<Point> xs{{0.1, 0.1}, {0.5, 0.9}, {0.8, 0.3}, {0.4, 0.4}};
  const std::vector<double> ys{1.0, -0.5, 2.0, 0.7};
  const auto model = gp::GPModel::from_hyperparameters(xs, ys, {{0.3, 0.3}, 1.5, 1e-10});
  const Point q{0.6, 0.2};
  CHECK(lcb(model, q, 0.0) == model.posterior(q).mean);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(lcb(model, xs[i], 2.0) == doctest::Approx(ys[i]).epsilon(1e-3));
  const Point far{50.0, 50.0};
  CHECK(lcb(model, far, 2.0) == doctest::Approx(model.y_offset() - 2.0 * std::sqrt(1.5)).epsilon(0.01));
}

TEST_CASE("acquire_next finds the interior minimum of the posterior mean") {
  std::vector<Point> xs;
  std::vector<double> ys;
  for (int i = 0; i <= 4; ++i) {
    for (int j = 0; j <= 4; ++j) {
      xs.push_back({i / 4.0, j / 4.0});
      ys.push_back(std::pow(i / 4.0 - 0.5, 2) + std::pow(j / 4.0 - 0.5, 2));
    }
  }
  const auto model = gp::GPModel::from_hyperparameters(xs, ys, {{0.4, 0.4}, 1.0, 1e-8});
  // Oracle: dense scan of the mean surface.
  Point best{0, 0};
  double best_v = INFINITY;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const Point p{i / 400.0, j / 400.0};
      const double v = lcb(model, p, 0.0);
      if (v < best_v) {
        best_v = v;
        best = p;
      }
    }
  }
  const auto x = acquire_next(model, unit_square(), 0.0, 5);
  CHECK(std::abs(x[0] - best[0]) + std::abs(x[1] - best[1]) <= 0.02);
  CHECK(acquire_next(model, unit_square(), 0.0, 5) == x);
}

TEST_CASE("acquire_next with a huge kappa explores") {
  std::vector<Point> xs{{0.1, 0.1}, {0.2, 0.15}, {0.15, 0.3}};
  const std::vector<double> ys{0.0, 1.0, 0.5};
  const auto model = gp::GPModel::from_hyperparameters(xs, ys, {{0.2, 0.2}, 1.0, 1e-8});
  const auto x = acquire_next(model, unit_square(), 1e6, 6);
  double max_std = 0.0;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) max_std = std::max(max_std, model.posterior(Point{i / 100.0, j / 100.0}).std);
  CHECK(model.posterior(x).std >= 0.999 * max_std);
  for (const auto& t : xs) CHECK(std::hypot(x[0] - t[0], x[1] - t[1]) > 0.3);
}

TEST_CASE("optimize a convex bowl") {
  const Objective bowl = [](std::span<const double> v) { return std::pow(v[0] - 0.3, 2) + std::pow(v[1] - 0.7, 2); };
  BOConfig cfg;
  cfg.n_init = 10;
  cfg.max_evals = 80;
  cfg.seed = 3;
  const auto r = optimize(bowl, unit_square(), cfg);
  CHECK(r.best_value <= 1e-2);
  CHECK(r.history.size() <= 80);
  CHECK(r.history.size() >= 10);
  double running = INFINITY;
  for (const auto& e : r.history) {
    CHECK(e.index < r.history.size());
    running = std::min(running, e.value);
    for (double u : e.unit) {
      CHECK(u >= 0.0);
      CHECK(u <= 1.0);
    }
  }
  CHECK(r.best_value == running);
  CHECK(r.history[r.best_index].value == r.best_value);

  const auto again = optimize(bowl, unit_square(), cfg);
  REQUIRE(again.history.size() == r.history.size());
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    CHECK(again.history[i].unit == r.history[i].unit);
    CHECK(again.history[i].value == r.history[i].value);
  }
  CHECK(again.stop_reason == r.stop_reason);
}

TEST_CASE("hyperparameter refit schedule") {
  const Objective bowl = [](std::span<const double> v) { return std::pow(v[0] - 0.3, 2) + std::pow(v[1] - 0.7, 2); };
  BOConfig cfg;
  cfg.n_init = 10;
  cfg.max_evals = 60;
  cfg.seed = 3;
  cfg.kappa = 1.0;
  cfg.epsilon = 1e-9;
  // The schedule changes nothing until refit_every_until observations.
  BOConfig lazy = cfg;
  lazy.refit_every_until = 12;
  lazy.refit_growth = 0.5;
  const auto eager = optimize(bowl, unit_square(), cfg);
  const auto sparse = optimize(bowl, unit_square(), lazy);
  // Identical up to the first skipped refit.
  REQUIRE(sparse.history.size() > 13);
  for (std::size_t i = 0; i < 13; ++i) CHECK(sparse.history[i].unit == eager.history[i].unit);
  CHECK(sparse.best_value <= 1e-2);
  const auto again = optimize(bowl, unit_square(), lazy);
  REQUIRE(again.history.size() == sparse.history.size());
  for (std::size_t i = 0; i < sparse.history.size(); ++i) CHECK(again.history[i].unit == sparse.history[i].unit);
  lazy.refit_growth = -0.1;
  CHECK_THROWS_AS(lazy.validate(), Error);
}

TEST_CASE("optimize converges before the budget on an easy problem") {
  const Objective bowl = [](std::span<const double> v) { return std::pow(v[0] - 0.3, 2) + std::pow(v[1] - 0.7, 2); };
  BOConfig cfg;
  cfg.n_init = 10;
  cfg.max_evals = 300;
  cfg.seed = 4;
  cfg.kappa = 0.0;
  const auto r = optimize(bowl, unit_square(), cfg);
  CHECK(r.stop_reason == StopReason::converged);
  CHECK(r.history.size() < 300);
}

TEST_CASE("target value stops right after initialization") {
  const Objective f = [](std::span<const double> v) { return v[0] + v[1]; };
  BOConfig cfg;
  cfg.n_init = 6;
  cfg.max_evals = 50;
  cfg.target_value = 10.0;
  const auto r = optimize(f, unit_square(), cfg);
  CHECK(r.stop_reason == StopReason::target_reached);
  CHECK(r.history.size() == 6);
}

TEST_CASE("initial points are evaluated first") {
  const Objective f = [](std::span<const double> v) { return v[0] * v[1]; };
  BOConfig cfg;
  cfg.n_init = 4;
  cfg.max_evals = 6;
  cfg.initial_points = {{0.25, 0.75}};
  const auto r = optimize(f, unit_square(), cfg);
  CHECK(r.history.front().values == std::vector<double>{0.25, 0.75});
  CHECK(r.history.size() == 6);
  CHECK(r.stop_reason == StopReason::budget);
}

TEST_CASE("failed evaluations are penalized, not fatal") {
  const Objective f = [](std::span<const double> v) -> double {
    if (v[0] > 0.5) throw Error(ErrorCode::singular_system, "boom");
    if (v[1] > 0.8) return std::numeric_limits<double>::quiet_NaN();
    return v[0] + v[1];
  };
  BOConfig cfg;
  cfg.n_init = 10;
  cfg.max_evals = 20;
  cfg.seed = 8;
  const auto r = optimize(f, unit_square(), cfg);
  std::size_t failures = 0;
  for (const auto& e : r.history) {
    if (e.failed) {
      ++failures;
      CHECK(e.value >= 1e3);
    }
  }
  CHECK(failures > 0);
  CHECK(r.best_value < 1.5);

  const Objective never = [](std::span<const double>) -> double { throw Error(ErrorCode::singular_system, "x"); };
  try {
    optimize(never, unit_square(), cfg);
    FAIL("expected optimization failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::optimization_failed);
  }
}

TEST_CASE("optimize_scr stays inside the reservoir bounds") {
  BOConfig cfg;
  cfg.n_init = 8;
  cfg.max_evals = 12;
  cfg.seed = 2;
  const auto r = optimize_scr(
      [](const SCRParams& p) {
        return std::pow(std::log10(p.lambda) + 6.0, 2) + std::pow(p.w - 0.5, 2) + static_cast<double>(p.n_nodes) / 200.0;
      },
      cfg);
  for (const auto& e : r.history) {
    const auto p = to_scr_params(e.values);
    CHECK(p.n_nodes >= 50);
    CHECK(p.n_nodes <= 200);
    CHECK(p.w_in >= 0.01);
    CHECK(p.w_in <= 0.95);
    CHECK(p.lambda >= 1e-12);
    CHECK(p.lambda <= 1e-2);
  }
}

TEST_CASE("config validation and stop reasons") {
  BOConfig cfg;
  cfg.n_init = 1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.n_init = 10;
  cfg.max_evals = 5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  for (auto s : {StopReason::converged, StopReason::budget, StopReason::target_reached})
    CHECK(parse_stop_reason(to_string(s)) == s);
  CHECK_THROWS_AS(parse_stop_reason("nope"), Error);
}
