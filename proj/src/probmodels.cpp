#include "rankforge/probmodels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rankforge/dataset.hpp"
#include "rankforge/error.hpp"

namespace rankforge::probmodels {

namespace {

int sign_of(int a, int b) { return (a > b) - (a < b); }

void check_weighted_permutation(std::span<const int> positions,
                                std::span<const double> weights,
                                std::size_t n) {
  if (positions.size() != n)
    throw Error("positions must have one entry per object");
  if (weights.size() != n)
    throw Error("weight vector length must equal the query size");
  std::vector<bool> seen(n, false);
  for (int p : positions) {
    if (p < 1 || p > static_cast<int>(n) || seen[p - 1])
      throw Error("positions must form a permutation of 1..N");
    seen[p - 1] = true;
  }
}

}  // namespace

double default_gamma(std::size_t n_objects) {
  if (n_objects < 2) return 1.0;
  return 2.0 / (static_cast<double>(n_objects) *
                static_cast<double>(n_objects - 1));
}

LossValueAndGrad pl_loss(std::span<const double> scores,
                         std::span<const int> positions,
                         std::span<const double> weights) {
  const std::size_t n = scores.size();
  if (n == 0) throw Error("empty query");
  check_weighted_permutation(positions, weights, n);

  // order[p] = object chosen at rank position p+1.
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[positions[i] - 1] = static_cast<int>(i);

  // Suffix log-sum-exp over the not-yet-chosen objects.
  std::vector<double> suffix_lse(n);
  double run = scores[order[n - 1]];
  suffix_lse[n - 1] = run;
  for (std::size_t p = n - 1; p-- > 0;) {
    double f = scores[order[p]];
    double mx = std::max(run, f);
    run = mx + std::log(std::exp(run - mx) + std::exp(f - mx));
    suffix_lse[p] = run;
  }

  LossValueAndGrad out;
  out.grad.assign(n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    out.value += weights[p] * (suffix_lse[p] - scores[order[p]]);
    out.grad[order[p]] -= weights[p];
    // Every object still in the suffix feels this factor's softmax pull.
    for (std::size_t q = p; q < n; ++q)
      out.grad[order[q]] += weights[p] * std::exp(scores[order[q]] - suffix_lse[p]);
  }
  return out;
}

LossValueAndGrad reverse_pl_loss(std::span<const double> scores,
                                 std::span<const int> positions,
                                 std::span<const double> weights) {
  const std::size_t n = scores.size();
  if (n == 0) throw Error("empty query");
  check_weighted_permutation(positions, weights, n);

  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[positions[i] - 1] = static_cast<int>(i);

  // Elimination runs worst-to-best; the factor at rank position p normalizes
  // the inverse worths of the survivors, i.e. rank positions 1..p.
  std::vector<double> prefix_lse(n);
  double run = -scores[order[0]];
  prefix_lse[0] = run;
  for (std::size_t p = 1; p < n; ++p) {
    double f = -scores[order[p]];
    double mx = std::max(run, f);
    run = mx + std::log(std::exp(run - mx) + std::exp(f - mx));
    prefix_lse[p] = run;
  }

  LossValueAndGrad out;
  out.grad.assign(n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    out.value += weights[p] * (prefix_lse[p] + scores[order[p]]);
    out.grad[order[p]] += weights[p];
    for (std::size_t q = 0; q <= p; ++q)
      out.grad[order[q]] -= weights[p] * std::exp(-scores[order[q]] - prefix_lse[p]);
  }
  return out;
}

LossValueAndGrad group_pl_loss(std::span<const double> scores,
                               std::span<const int> ratings,
                               functionals::Aggregation agg,
                               std::span<const double> weights) {
  const std::size_t n = scores.size();
  if (n == 0 || ratings.size() != n)
    throw Error("group PL requires matching nonempty scores and ratings");

  // Members per rating, descending.
  std::map<int, std::vector<int>, std::greater<int>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[ratings[i]].push_back(static_cast<int>(i));

  LossValueAndGrad out;
  out.grad.assign(n, 0.0);
  const std::size_t g = groups.size();
  if (g < 2) return out;  // no ordering information
  if (!weights.empty() && weights.size() != g)
    throw Error("group PL weights must have one entry per group");

  std::vector<std::vector<int>> members;
  std::vector<double> gscore;
  std::vector<std::vector<double>> ggrad;
  members.reserve(g);
  for (auto& [rating, idx] : groups) {
    std::vector<double> member_scores;
    member_scores.reserve(idx.size());
    for (int i : idx) member_scores.push_back(scores[i]);
    gscore.push_back(functionals::group_score(agg, member_scores));
    ggrad.push_back(functionals::group_score_grad(agg, member_scores));
    members.push_back(std::move(idx));
  }

  std::vector<int> gpos(g);
  for (std::size_t p = 0; p < g; ++p) gpos[p] = static_cast<int>(p) + 1;
  std::vector<double> w(weights.begin(), weights.end());
  if (w.empty()) w.assign(g, 1.0);

  auto inner = pl_loss(gscore, gpos, w);
  out.value = inner.value;
  for (std::size_t p = 0; p < g; ++p)
    for (std::size_t k = 0; k < members[p].size(); ++k)
      out.grad[members[p][k]] += inner.grad[p] * ggrad[p][k];
  return out;
}

double mrf_psi(int r_i, int r_j, double f_i, double f_j, double gamma) {
  if (gamma <= 0.0) throw Error("gamma must be positive");
  return std::exp(gamma * sign_of(r_i, r_j) * (f_i - f_j));
}

std::vector<double> wpll_log_conditionals(std::span<const double> scores,
                                          std::span<const int> ratings,
                                          double gamma, int num_levels) {
  const std::size_t n = scores.size();
  if (num_levels < 1) throw Error("num_levels must be >= 1");
  if (gamma <= 0.0) throw Error("gamma must be positive");
  std::vector<double> out(n);
  std::vector<double> exponents(num_levels);
  for (std::size_t i = 0; i < n; ++i) {
    if (ratings[i] >= num_levels)
      throw Error("rating outside the declared label set");
    for (int v = 0; v < num_levels; ++v) {
      double a = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) a += sign_of(v, ratings[j]) * (scores[i] - scores[j]);
      exponents[v] = gamma * a;
    }
    double mx = *std::max_element(exponents.begin(), exponents.end());
    double z = 0.0;
    for (double e : exponents) z += std::exp(e - mx);
    out[i] = exponents[ratings[i]] - (mx + std::log(z));
  }
  return out;
}

LossValueAndGrad wpll_loss(std::span<const double> scores,
                           std::span<const int> ratings, double gamma,
                           int num_levels, std::span<const double> weights) {
  const std::size_t n = scores.size();
  if (weights.size() != n)
    throw Error("weight vector length must equal the query size");
  if (num_levels < 1) throw Error("num_levels must be >= 1");
  if (gamma <= 0.0) throw Error("gamma must be positive");

  LossValueAndGrad out;
  out.grad.assign(n, 0.0);
  std::vector<double> exponents(num_levels);
  std::vector<double> probs(num_levels);
  for (std::size_t i = 0; i < n; ++i) {
    if (ratings[i] >= num_levels)
      throw Error("rating outside the declared label set");
    // a_i(v) = gamma * sum_{j != i} sign(v - r_j) (f_i - f_j)
    std::vector<int> sign_sum(num_levels, 0);
    for (int v = 0; v < num_levels; ++v) {
      double a = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        int s = sign_of(v, ratings[j]);
        sign_sum[v] += s;
        a += s * (scores[i] - scores[j]);
      }
      exponents[v] = gamma * a;
    }
    double mx = *std::max_element(exponents.begin(), exponents.end());
    double z = 0.0;
    for (int v = 0; v < num_levels; ++v) {
      probs[v] = std::exp(exponents[v] - mx);
      z += probs[v];
    }
    for (int v = 0; v < num_levels; ++v) probs[v] /= z;

    out.value += weights[i] * (mx + std::log(z) - exponents[ratings[i]]);

    double expected_sign_sum = 0.0;
    for (int v = 0; v < num_levels; ++v) expected_sign_sum += probs[v] * sign_sum[v];
    out.grad[i] += weights[i] * gamma * (expected_sign_sum - sign_sum[ratings[i]]);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      double expected = 0.0;
      for (int v = 0; v < num_levels; ++v)
        expected += probs[v] * sign_of(v, ratings[k]);
      out.grad[k] += weights[i] * gamma * (sign_of(ratings[i], ratings[k]) - expected);
    }
  }
  return out;
}

std::size_t pair_flat_index(std::size_t i, std::size_t j, std::size_t n) {
  // Lexicographic over i < j.
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

LossValueAndGrad wub_loss(std::span<const double> scores,
                          std::span<const int> ratings, double gamma,
                          int num_levels, std::span<const double> weights) {
  const std::size_t n = scores.size();
  if (num_levels < 1) throw Error("num_levels must be >= 1");
  if (gamma <= 0.0) throw Error("gamma must be positive");
  const std::size_t n_pairs = n * (n - 1) / 2;
  if (!weights.empty() && weights.size() != n_pairs)
    throw Error("pair-weight vector must have N(N-1)/2 entries");

  const double levels = static_cast<double>(num_levels);
  const double k_off = levels * (levels - 1.0) / 2.0;  // pairs with u > v

  LossValueAndGrad out;
  out.grad.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (ratings[i] >= num_levels)
      throw Error("rating outside the declared label set");
    for (std::size_t j = i + 1; j < n; ++j) {
      double w = weights.empty() ? 1.0 : weights[pair_flat_index(i, j, n)];
      double a = gamma * (scores[i] - scores[j]);
      // Z_ij = |L| + k_off (e^a + e^-a), evaluated with a |a| shift.
      double m = std::fabs(a);
      double z_shifted = levels * std::exp(-m) +
                         k_off * (std::exp(a - m) + std::exp(-a - m));
      double log_z = m + std::log(z_shifted);
      int s = sign_of(ratings[i], ratings[j]);
      out.value += w * (log_z - s * a);
      double dlogz_da = k_off * (std::exp(a - m) - std::exp(-a - m)) / z_shifted;
      double g = w * gamma * (dlogz_da - s);
      out.grad[i] += g;
      out.grad[j] -= g;
    }
  }
  return out;
}

double mrf_exact_logloss(std::span<const double> scores,
                         std::span<const int> ratings, double gamma,
                         int num_levels, std::size_t max_states) {
  const std::size_t n = scores.size();
  if (n == 0) throw Error("empty query");
  if (gamma <= 0.0) throw Error("gamma must be positive");
  double states = std::pow(static_cast<double>(num_levels),
                           static_cast<double>(n));
  if (states > static_cast<double>(max_states))
    throw Error("enumeration budget exceeded: " + std::to_string(num_levels) +
                "^" + std::to_string(n) +
                " states; use the pseudo-likelihood or pairwise bound");

  auto joint_exponent = [&](const std::vector<int>& r) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        e += sign_of(r[i], r[j]) * (scores[i] - scores[j]);
    return gamma * e;
  };

  std::vector<int> assign(n, 0);
  std::vector<double> exponents;
  exponents.reserve(static_cast<std::size_t>(states));
  while (true) {
    exponents.push_back(joint_exponent(assign));
    std::size_t k = 0;
    while (k < n && ++assign[k] == num_levels) assign[k++] = 0;
    if (k == n) break;
  }
  double mx = *std::max_element(exponents.begin(), exponents.end());
  double z = 0.0;
  for (double e : exponents) z += std::exp(e - mx);
  double log_z = mx + std::log(z);

  std::vector<int> observed(ratings.begin(), ratings.end());
  for (int r : observed)
    if (r >= num_levels) throw Error("rating outside the declared label set");
  return log_z - joint_exponent(observed);
}

}  // namespace rankforge::probmodels
