#pragma once

// Bradley-Terry strength fitting via iterative Luce Spectral Ranking.
//
// Each iteration builds a continuous-time Markov chain from the current
// strengths pi = exp(u): an observed "i beats j" contributes a transition
// rate 1/(pi_i + pi_j) from j to i, and the regularizer adds alpha virtual
// wins in both directions for every item pair. The stationary distribution of
// that chain becomes the next strength estimate; at the fixed point with
// alpha = 0 the estimate satisfies the maximum-likelihood stationarity
// conditions of the Bradley-Terry model.

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "trajpair/error.hpp"

namespace trajpair {

struct VoteSet {
  std::vector<std::string> items;
  std::vector<std::pair<int, int>> votes;  // (winner index, loser index)
};

struct Utilities {
  std::vector<double> u;  // centered to mean zero
};

// P(i beats j) under the Bradley-Terry model.
inline double bt_prob(double u_i, double u_j) { return 1.0 / (1.0 + std::exp(u_j - u_i)); }

namespace detail {

// Stationary distribution of the chain with off-diagonal rates
// rate[i][j] (i -> j): solves pi^T Q = 0, sum(pi) = 1 by Gaussian elimination.
inline std::vector<double> stationary_distribution(std::vector<std::vector<double>> rate) {
  const int n = static_cast<int>(rate.size());
  // A = Q^T with the last equation replaced by the normalization constraint.
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) row_sum += rate[i][j];
    }
    rate[i][i] = -row_sum;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i][j] = rate[j][i];
  }
  for (int j = 0; j < n; ++j) a[n - 1][j] = 1.0;
  a[n - 1][n] = 1.0;

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::fabs(a[row][col]) > std::fabs(a[pivot][col])) pivot = row;
    }
    if (std::fabs(a[pivot][col]) < 1e-300) {
      throw RankingError("bt_fit_ilsr: singular chain (disconnected comparison graph?)");
    }
    std::swap(a[col], a[pivot]);
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      const double factor = a[row][col] / a[col][col];
      if (factor == 0.0) continue;
      for (int k = col; k <= n; ++k) a[row][k] -= factor * a[col][k];
    }
  }
  std::vector<double> pi(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    pi[i] = a[i][n] / a[i][i];
    total += pi[i];
  }
  for (double& p : pi) p /= total;
  return pi;
}

inline bool comparison_graph_connected(int n, const std::vector<std::pair<int, int>>& votes) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& [w, l] : votes) {
    parent[find(w)] = find(l);
  }
  const int root = find(0);
  for (int i = 1; i < n; ++i) {
    if (find(i) != root) return false;
  }
  return true;
}

}  // namespace detail

inline Utilities bt_fit_ilsr(const VoteSet& votes, double alpha = 0.01) {
  const int n = static_cast<int>(votes.items.size());
  if (n < 2) throw RankingError("bt_fit_ilsr: need at least two items");
  if (alpha < 0.0) throw RankingError("bt_fit_ilsr: alpha must be >= 0");
  for (const auto& [w, l] : votes.votes) {
    if (w == l || w < 0 || l < 0 || w >= n || l >= n) {
      throw RankingError("bt_fit_ilsr: invalid vote indices");
    }
  }
  if (alpha == 0.0 && !detail::comparison_graph_connected(n, votes.votes)) {
    throw RankingError("bt_fit_ilsr: comparison graph disconnected and alpha = 0");
  }

  // Aggregate win counts once; iterations then cost O(n^2).
  std::vector<std::vector<double>> wins(n, std::vector<double>(n, 0.0));
  for (const auto& [w, l] : votes.votes) wins[w][l] += 1.0;

  constexpr int kMaxIterations = 10000;
  constexpr double kTolerance = 1e-8;
  std::vector<double> pi(n, 1.0 / n);
  std::vector<double> u(n, 0.0);
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    std::vector<std::vector<double>> rate(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double inv = 1.0 / (pi[i] + pi[j]);
        // Losses of i against j move mass i -> j; alpha adds a virtual win
        // each way per pair.
        rate[i][j] += (wins[j][i] + alpha) * inv;
      }
    }
    pi = detail::stationary_distribution(std::move(rate));
    std::vector<double> u_next(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      u_next[i] = std::log(pi[i]);
      mean += u_next[i];
    }
    mean /= n;
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      u_next[i] -= mean;
      delta = std::fmax(delta, std::fabs(u_next[i] - u[i]));
    }
    u = std::move(u_next);
    if (delta < kTolerance) {
      return Utilities{std::move(u)};
    }
  }
  throw RankingError("bt_fit_ilsr: no convergence after " + std::to_string(kMaxIterations) +
                     " iterations");
}

// CSV with header `winner,loser`; items are indexed in order of first
// appearance.
inline VoteSet parse_votes_csv(std::istream& in) {
  VoteSet set;
  std::map<std::string, int> index;
  const auto item_id = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(set.items.size());
    set.items.push_back(name);
    index.emplace(name, id);
    return id;
  };
  const auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    size_t start = 0;
    while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
    return s.substr(start);
  };

  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    const size_t comma = trimmed.find(',');
    if (comma == std::string::npos) {
      throw RankingError("votes csv: missing comma at line " + std::to_string(line_no));
    }
    const std::string first = strip(trimmed.substr(0, comma));
    const std::string second = strip(trimmed.substr(comma + 1));
    if (second.find(',') != std::string::npos) {
      throw RankingError("votes csv: too many fields at line " + std::to_string(line_no));
    }
    if (!have_header) {
      if (first != "winner" || second != "loser") {
        throw RankingError("votes csv: expected header 'winner,loser' at line " +
                           std::to_string(line_no));
      }
      have_header = true;
      continue;
    }
    if (first.empty() || second.empty()) {
      throw RankingError("votes csv: empty item name at line " + std::to_string(line_no));
    }
    const int w = item_id(first);
    const int l = item_id(second);
    if (w == l) {
      throw RankingError("votes csv: winner equals loser at line " + std::to_string(line_no));
    }
    set.votes.emplace_back(w, l);
  }
  if (!have_header) throw RankingError("votes csv: empty file");
  if (set.votes.empty()) throw RankingError("votes csv: no votes");
  return set;
}

inline VoteSet load_votes_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RankingError("votes csv: cannot open " + path);
  return parse_votes_csv(in);
}

}  // namespace trajpair
