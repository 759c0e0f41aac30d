#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "trajpair/ranking.hpp"
#include "trajpair/rng.hpp"

using namespace trajpair;

namespace {

VoteSet votes_of(std::vector<std::string> items, std::vector<std::pair<int, int>> votes) {
  VoteSet set;
  set.items = std::move(items);
  set.votes = std::move(votes);
  return set;
}

VoteSet simulate_votes(const std::vector<std::string>& items, const std::vector<double>& u,
                       int count, uint64_t seed) {
  Rng rng(seed);
  VoteSet set;
  set.items = items;
  const int n = static_cast<int>(items.size());
  for (int k = 0; k < count; ++k) {
    const int i = rng.uniform_int(n);
    int j = rng.uniform_int(n - 1);
    if (j >= i) ++j;
    if (rng.uniform() < bt_prob(u[i], u[j])) {
      set.votes.emplace_back(i, j);
    } else {
      set.votes.emplace_back(j, i);
    }
  }
  return set;
}

// Independent oracle: gradient ascent on the Bradley-Terry log-likelihood.
std::vector<double> bt_fit_gradient_ascent(const VoteSet& votes, int iterations = 200000) {
  const int n = static_cast<int>(votes.items.size());
  std::vector<std::vector<double>> wins(n, std::vector<double>(n, 0.0));
  for (const auto& [w, l] : votes.votes) wins[w][l] += 1.0;
  std::vector<double> u(n, 0.0);
  const double lr = 1.0 / (1.0 + static_cast<double>(votes.votes.size()) / n);
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> grad(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double p = bt_prob(u[i], u[j]);
        grad[i] += wins[i][j] * (1.0 - p) - wins[j][i] * p;
      }
    }
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      u[i] += lr * grad[i];
      mean += u[i];
    }
    mean /= n;
    for (double& v : u) v -= mean;
  }
  return u;
}

}  // namespace

TEST_CASE("bt_prob formula") {
  CHECK(bt_prob(0.7, 0.7) == 0.5);
  CHECK(bt_prob(std::log(3.0), 0.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(bt_prob(1.25, -0.48) == doctest::Approx(0.8494).epsilon(1e-4 / 0.8494));

  Rng rng(57);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3);
    CHECK(bt_prob(a, b) + bt_prob(b, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bt_prob(a + 1.7, b + 1.7) == doctest::Approx(bt_prob(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("bt_fit_ilsr: symmetric two-item votes give zero utilities for any alpha") {
  for (const double alpha : {0.0, 0.01, 1.0}) {
    const Utilities fit = bt_fit_ilsr(
        votes_of({"a", "b"}, {{0, 1}, {1, 0}, {0, 1}, {1, 0}}), alpha);
    CHECK(std::fabs(fit.u[0]) <= 1e-8);
    CHECK(std::fabs(fit.u[1]) <= 1e-8);
  }
}

TEST_CASE("bt_fit_ilsr: two-item maximum likelihood is the win-ratio log") {
  const Utilities fit =
      bt_fit_ilsr(votes_of({"a", "b"}, {{0, 1}, {0, 1}, {0, 1}, {1, 0}}), 0.0);
  CHECK(fit.u[0] - fit.u[1] == doctest::Approx(std::log(3.0)).epsilon(1e-6));
  CHECK(fit.u[0] + fit.u[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("bt_fit_ilsr: relabeling permutes utilities") {
  const std::vector<double> u_true{0.8, -0.2, -0.6};
  const VoteSet original = simulate_votes({"x", "y", "z"}, u_true, 3000, 61);
  VoteSet permuted = original;
  // Swap items 0 and 2 everywhere.
  permuted.items = {"z", "y", "x"};
  for (auto& [w, l] : permuted.votes) {
    w = w == 0 ? 2 : (w == 2 ? 0 : w);
    l = l == 0 ? 2 : (l == 2 ? 0 : l);
  }
  const Utilities fit_a = bt_fit_ilsr(original, 0.01);
  const Utilities fit_b = bt_fit_ilsr(permuted, 0.01);
  CHECK(fit_a.u[0] == doctest::Approx(fit_b.u[2]).epsilon(1e-9));
  CHECK(fit_a.u[1] == doctest::Approx(fit_b.u[1]).epsilon(1e-9));
  CHECK(fit_a.u[2] == doctest::Approx(fit_b.u[0]).epsilon(1e-9));
}

TEST_CASE("bt_fit_ilsr: disconnected graphs need regularization") {
  // Two components: (a, b) and (c, d).
  const VoteSet votes = votes_of({"a", "b", "c", "d"}, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  CHECK_THROWS_AS(bt_fit_ilsr(votes, 0.0), RankingError);
  const Utilities fit = bt_fit_ilsr(votes, 0.01);
  CHECK(fit.u.size() == 4);
  double mean = 0.0;
  for (const double v : fit.u) mean += v;
  CHECK(std::fabs(mean) <= 1e-9);
}

TEST_CASE("bt_fit_ilsr matches the gradient-ascent MLE on small instances") {
  const std::vector<double> u_true{0.9, 0.1, -0.4, -0.6};
  const VoteSet votes = simulate_votes({"a", "b", "c", "d"}, u_true, 400, 67);
  const Utilities ilsr = bt_fit_ilsr(votes, 0.0);
  const std::vector<double> mle = bt_fit_gradient_ascent(votes);
  for (size_t i = 0; i < mle.size(); ++i) {
    CHECK(std::fabs(ilsr.u[i] - mle[i]) <= 1e-4);
  }
}

TEST_CASE("bt_fit_ilsr recovers the generating ranking with enough votes") {
  const std::vector<double> u_true{1.1, 0.4, 0.0, -0.5, -1.0};
  const std::vector<std::string> items{"a", "b", "c", "d", "e"};
  const VoteSet votes = simulate_votes(items, u_true, 200000, 71);
  const Utilities fit = bt_fit_ilsr(votes, 0.01);
  for (size_t i = 1; i < fit.u.size(); ++i) {
    CHECK(fit.u[i - 1] > fit.u[i]);
  }
  for (size_t i = 0; i < fit.u.size(); ++i) {
    // u_true is already centered.
    CHECK(std::fabs(fit.u[i] - u_true[i]) <= 0.05);
  }

  // Shifting the generating utilities changes nothing observable.
  std::vector<double> shifted = u_true;
  for (double& v : shifted) v += 2.5;
  const VoteSet votes_shifted = simulate_votes(items, shifted, 200000, 71);
  const Utilities fit_shifted = bt_fit_ilsr(votes_shifted, 0.01);
  for (size_t i = 0; i < fit.u.size(); ++i) {
    CHECK(fit_shifted.u[i] == doctest::Approx(fit.u[i]).epsilon(1e-9));
  }
}

TEST_CASE("parse_votes_csv") {
  std::istringstream good("winner,loser\nalpha,beta\nbeta,alpha\nalpha,gamma\n");
  const VoteSet set = parse_votes_csv(good);
  REQUIRE(set.items.size() == 3);
  CHECK(set.items[0] == "alpha");
  CHECK(set.items[1] == "beta");
  CHECK(set.items[2] == "gamma");
  REQUIRE(set.votes.size() == 3);
  CHECK(set.votes[0] == std::pair<int, int>{0, 1});
  CHECK(set.votes[2] == std::pair<int, int>{0, 2});

  std::istringstream missing_comma("winner,loser\nalpha beta\n");
  CHECK_THROWS_WITH_AS(parse_votes_csv(missing_comma),
                       doctest::Contains("line 2"), RankingError);

  std::istringstream empty("");
  CHECK_THROWS_AS(parse_votes_csv(empty), RankingError);

  std::istringstream header_only("winner,loser\n");
  CHECK_THROWS_AS(parse_votes_csv(header_only), RankingError);

  std::istringstream self_vote("winner,loser\nalpha,alpha\n");
  CHECK_THROWS_AS(parse_votes_csv(self_vote), RankingError);

  std::istringstream bad_header("a,b\nalpha,beta\n");
  CHECK_THROWS_AS(parse_votes_csv(bad_header), RankingError);
}
