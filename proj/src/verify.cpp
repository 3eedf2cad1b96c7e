#include "rankforge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankforge/probmodels.hpp"
#include "rankforge/rng.hpp"

namespace rankforge::verify {

namespace {

std::vector<double> random_scores(Rng& rng, int n) {
  std::vector<double> f(n);
  for (double& x : f) x = rng.normal();
  return f;
}

std::vector<int> random_ratings(Rng& rng, int n, int levels) {
  std::vector<int> r(n);
  for (int& x : r) x = static_cast<int>(rng.below(levels));
  return r;
}

}  // namespace

std::vector<BoundTrial> wub_bound_fuzz(int trials, int n, int levels,
                                       std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BoundTrial> out;
  out.reserve(trials);
  const double constant = (n - 2) * std::log(static_cast<double>(levels));
  for (int t = 0; t < trials; ++t) {
    auto scores = random_scores(rng, n);
    auto ratings = random_ratings(rng, n, levels);
    double gamma = 0.1 + 2.0 * rng.uniform();
    BoundTrial trial;
    trial.exact =
        probmodels::mrf_exact_logloss(scores, ratings, gamma, levels);
    trial.bound =
        probmodels::wub_loss(scores, ratings, gamma, levels).value + constant;
    out.push_back(trial);
  }
  return out;
}

namespace {

// Sums exp(-loss) over every permutation fed in as the true ordering.
template <typename LossFn>
double normalization_error(int n, int trials, std::uint64_t seed, LossFn loss) {
  Rng rng(seed);
  double worst = 0.0;
  std::vector<double> weights(n, 1.0);
  for (int t = 0; t < trials; ++t) {
    auto scores = random_scores(rng, n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    double total = 0.0;
    std::vector<int> positions(n);
    do {
      for (int p = 0; p < n; ++p) positions[order[p]] = p + 1;
      total += std::exp(-loss(scores, positions, weights).value);
    } while (std::next_permutation(order.begin(), order.end()));
    worst = std::max(worst, std::fabs(1.0 - total));
  }
  return worst;
}

}  // namespace

double pl_normalization_error(int n, int trials, std::uint64_t seed) {
  return normalization_error(n, trials, seed,
                             [](auto&& s, auto&& p, auto&& w) {
                               return probmodels::pl_loss(s, p, w);
                             });
}

double rpl_normalization_error(int n, int trials, std::uint64_t seed) {
  return normalization_error(n, trials, seed,
                             [](auto&& s, auto&& p, auto&& w) {
                               return probmodels::reverse_pl_loss(s, p, w);
                             });
}

double wpll_consistency_error(int trials, std::uint64_t seed) {
  constexpr int n = 3;
  constexpr int levels = 3;
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto scores = random_scores(rng, n);
    auto ratings = random_ratings(rng, n, levels);
    double gamma = 0.1 + 2.0 * rng.uniform();
    auto conditionals =
        probmodels::wpll_log_conditionals(scores, ratings, gamma, levels);
    for (int i = 0; i < n; ++i) {
      // log P(r_i | r_-i) = log P(r) - log sum_v P(r with r_i := v),
      // both sides from the enumerated joint.
      double joint = -probmodels::mrf_exact_logloss(scores, ratings, gamma,
                                                    levels);
      std::vector<double> alternatives(levels);
      auto varied = std::vector<int>(ratings.begin(), ratings.end());
      for (int v = 0; v < levels; ++v) {
        varied[i] = v;
        alternatives[v] =
            -probmodels::mrf_exact_logloss(scores, varied, gamma, levels);
      }
      double mx = *std::max_element(alternatives.begin(), alternatives.end());
      double z = 0.0;
      for (double a : alternatives) z += std::exp(a - mx);
      double reference = joint - (mx + std::log(z));
      worst = std::max(worst, std::fabs(conditionals[i] - reference));
    }
  }
  return worst;
}

}  // namespace rankforge::verify
