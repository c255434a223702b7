#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "doctest.h"
#include "scrbo/error.hpp"
#include "scrbo/gridsearch.hpp"

using namespace scrbo;
using namespace scrbo::grid;

TEST_CASE("standard grid layout") {
  const auto g = GridSpec::standard();
  CHECK(g.size() == 1500);
  CHECK(g.n_nodes == std::vector<std::size_t>{50, 100, 200});
  REQUIRE(g.w_in.size() == 10);
  CHECK(g.w_in.front() == 0.01);
  CHECK(g.w_in.back() == 0.95);
  CHECK(g.w_in[1] == doctest::Approx(0.01 + 0.94 / 9.0));
  REQUIRE(g.lambda.size() == 5);
  const double expected[] = {1e-12, std::pow(10.0, -9.5), 1e-7, std::pow(10.0, -4.5), 1e-2};
  for (int i = 0; i < 5; ++i) CHECK(g.lambda[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  CHECK_THROWS_AS(g.at(1500), Error);
}

TEST_CASE("grid search covers the product in canonical order") {
  const auto g = GridSpec::standard();
  const auto r = grid_search([](const SCRParams& p) { return p.lambda; }, g);
  REQUIRE(r.table.size() == 1500);
  std::set<std::tuple<std::size_t, double, double, double>> cells;
  for (const auto& e : r.table) cells.insert({e.params.n_nodes, e.params.w_in, e.params.w, e.params.lambda});
  CHECK(cells.size() == 1500);
  CHECK(r.table[0].params == SCRParams{50, 0.01, 0.01, 1e-12});
  CHECK(r.table[1].params.lambda == g.lambda[1]);
  CHECK(r.table[5].params.w == g.w[1]);
  CHECK(r.table[50].params.w_in == g.w_in[1]);
  CHECK(r.table[500].params.n_nodes == 100);
  CHECK(r.best == SCRParams{50, 0.01, 0.01, 1e-12});
  CHECK(r.best_value == 1e-12);
}

TEST_CASE("single-cell grid and failing cells") {
  const GridSpec one{{70}, {0.2}, {0.4}, {1e-6}};
  const auto r = grid_search([](const SCRParams&) { return 3.0; }, one);
  CHECK(r.best == SCRParams{70, 0.2, 0.4, 1e-6});
  CHECK(r.best_value == 3.0);

  const GridSpec two{{50}, {0.1}, {0.2, 0.3}, {1e-4, 1e-3}};
  const auto f = grid_search(
      [](const SCRParams& p) -> double {
        if (p.w == 0.2) throw Error(ErrorCode::singular_system, "bad cell");
        return p.lambda == 1e-3 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
      },
      two);
  CHECK(std::isinf(f.table[0].value));
  CHECK(std::isinf(f.table[1].value));
  CHECK(f.table[2].value == 1.0);
  CHECK(std::isinf(f.table[3].value));
  CHECK(f.best == two.at(2));
  CHECK_THROWS_AS(grid_search([](const SCRParams&) { return 0.0; }, GridSpec{}), Error);
}

TEST_CASE("grid ties keep the earliest cell") {
  const auto r = grid_search([](const SCRParams& p) { return p.n_nodes == 50 ? 2.0 : 1.0; }, GridSpec::standard());
  CHECK(r.best == SCRParams{100, 0.01, 0.01, 1e-12});
}

TEST_CASE("linspace and logspace") {
  CHECK(linspace(0.0, 1.0, 5) == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(linspace(2.0, 3.0, 1) == std::vector<double>{2.0});
  CHECK(logspace(-2.0, 0.0, 3)[1] == doctest::Approx(0.1));
}
