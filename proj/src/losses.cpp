#include "rankforge/losses.hpp"

#include <algorithm>
#include <cmath>

#include "rankforge/error.hpp"

namespace rankforge::losses {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Exponent clamp keeping exp() finite on badly scaled inputs.
constexpr double kExpClamp = 500.0;

double logsumexp(std::span<const double> v) {
  double mx = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double gain(int rating) { return std::exp2(rating) - 1.0; }

double stop_probability(int rating, int num_levels) {
  return gain(rating) / std::exp2(num_levels - 1);
}

}  // namespace

LossValueAndGrad multiclass_logistic(std::span<const double> scores,
                                     const std::vector<int>& best_set) {
  if (best_set.empty()) throw Error("multiclass logistic requires a nonempty best set");
  const std::size_t n = scores.size();
  std::vector<bool> is_best(n, false);
  for (int b : best_set) {
    if (b < 0 || b >= static_cast<int>(n))
      throw Error("best-set index out of range");
    is_best[b] = true;
  }

  double lse_all = logsumexp(scores);
  std::vector<double> best_scores;
  best_scores.reserve(best_set.size());
  for (int b : best_set) best_scores.push_back(scores[b]);
  double lse_best = logsumexp(best_scores);

  LossValueAndGrad out;
  out.value = lse_all - lse_best;
  out.grad.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.grad[k] = std::exp(scores[k] - lse_all);
    if (is_best[k]) out.grad[k] -= std::exp(scores[k] - lse_best);
  }
  return out;
}

double smooth_step(double fi, double fj, double scale) {
  return 1.0 / (1.0 + std::exp(-scale * (fi - fj)));
}

LossValueAndGrad smooth_metric_loss(SmoothMetricKind kind,
                                    std::span<const double> scores,
                                    std::span<const int> ratings,
                                    int num_levels, double scale) {
  const std::size_t n = scores.size();
  if (n == 0 || ratings.size() != n)
    throw Error("smooth metric loss requires matching nonempty scores and ratings");

  // s[i][j] = probability that j outranks i.
  std::vector<std::vector<double>> s(n, std::vector<double>(n, 0.0));
  std::vector<double> soft_pos(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      s[i][j] = smooth_step(scores[j], scores[i], scale);
      soft_pos[i] += s[i][j];
    }

  LossValueAndGrad out;
  out.grad.assign(n, 0.0);

  // d soft_pos[i] / d f was needed by every branch below; express it through
  // u_ij = scale * s_ij (1 - s_ij): +u toward f_j, -u toward f_i.
  auto step_slope = [&](std::size_t i, std::size_t j) {
    return scale * s[i][j] * (1.0 - s[i][j]);
  };

  switch (kind) {
    case SmoothMetricKind::mrr: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (ratings[i] > ratings[best]) best = i;
      out.value = 1.0 - 1.0 / soft_pos[best];
      double c = 1.0 / (soft_pos[best] * soft_pos[best]);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == best) continue;
        double u = step_slope(best, j);
        out.grad[j] += c * u;
        out.grad[best] -= c * u;
      }
      break;
    }
    case SmoothMetricKind::ndcg: {
      std::vector<int> rsorted(ratings.begin(), ratings.end());
      std::sort(rsorted.begin(), rsorted.end(), std::greater<int>());
      double ideal = 0.0;
      for (std::size_t p = 0; p < n; ++p)
        ideal += gain(rsorted[p]) / std::log2(2.0 + static_cast<double>(p));
      if (ideal == 0.0) {
        out.value = 0.0;  // metric convention: nothing to get wrong
        break;
      }
      double sum = 0.0;
      std::vector<double> dloss_dpos(n);
      for (std::size_t i = 0; i < n; ++i) {
        double l2 = std::log2(1.0 + soft_pos[i]);
        sum += gain(ratings[i]) / l2;
        dloss_dpos[i] =
            gain(ratings[i]) / (ideal * (1.0 + soft_pos[i]) * kLn2 * l2 * l2);
      }
      out.value = 1.0 - sum / ideal;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          double u = step_slope(i, j);
          out.grad[j] += dloss_dpos[i] * u;
          out.grad[i] -= dloss_dpos[i] * u;
        }
      break;
    }
    case SmoothMetricKind::err: {
      std::vector<double> stop(n);
      for (std::size_t i = 0; i < n; ++i)
        stop[i] = stop_probability(ratings[i], num_levels);
      // term_i = (R_i / soft_pos_i) * prod_{j != i} (1 - s_ij R_j); every
      // factor is >= 1 - R_max > 0, so dividing factors back out is safe.
      std::vector<double> prod(n, 1.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (i != j) prod[i] *= 1.0 - s[i][j] * stop[j];
      double metric = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        metric += stop[i] / soft_pos[i] * prod[i];
      out.value = 1.0 - metric;
      for (std::size_t i = 0; i < n; ++i) {
        double term = stop[i] / soft_pos[i] * prod[i];
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          double u = step_slope(i, j);
          // Through the soft position of i.
          double via_pos = term / soft_pos[i];
          out.grad[j] += via_pos * u;  // -d term = +d loss
          out.grad[i] -= via_pos * u;
          // Through the cascade factor (1 - s_ij R_j).
          double via_prod = term * stop[j] / (1.0 - s[i][j] * stop[j]);
          out.grad[j] += via_prod * u;
          out.grad[i] -= via_prod * u;
        }
      }
      break;
    }
  }
  return out;
}

double element_weight(ElementWeightScheme scheme, int rating,
                      int true_position, int num_levels) {
  if (true_position < 1) throw Error("true position must be >= 1");
  switch (scheme) {
    case ElementWeightScheme::unit: return 1.0;
    case ElementWeightScheme::rating: return static_cast<double>(rating);
    case ElementWeightScheme::sqrt_rating: return std::sqrt(static_cast<double>(rating));
    case ElementWeightScheme::exp_rating:
      return std::exp2(rating - 1) / std::exp2(num_levels - 1);
    case ElementWeightScheme::reciprocal_position:
      return 1.0 / static_cast<double>(true_position);
    case ElementWeightScheme::log_discount:
      return 1.0 / std::log(1.0 + static_cast<double>(true_position));
  }
  throw Error("unknown element weighting scheme");
}

double pair_weight(PairWeightScheme scheme, int r_i, int r_j, int pos_i,
                   int pos_j, int n_query, int num_levels, double ideal_dcg) {
  if (r_i <= r_j)
    throw Error("pair weights require the preferred-first orientation r_i > r_j");
  auto eta = [](int pos) { return 1.0 / std::log(1.0 + static_cast<double>(pos)); };
  switch (scheme) {
    case PairWeightScheme::unit: return 1.0;
    case PairWeightScheme::inv_qlen: return 1.0 / n_query;
    case PairWeightScheme::rating_diff: return static_cast<double>(r_i - r_j);
    case PairWeightScheme::rating_diff_norm:
      return static_cast<double>(r_i - r_j) / n_query;
    case PairWeightScheme::gain_discount_norm:
      return (stop_probability(r_i, num_levels) - stop_probability(r_j, num_levels)) *
             (eta(pos_i) - eta(pos_j)) / ideal_dcg;
    case PairWeightScheme::gain_discount:
      return (stop_probability(r_i, num_levels) - stop_probability(r_j, num_levels)) *
             (eta(pos_i) - eta(pos_j));
    case PairWeightScheme::gain_diff:
      return stop_probability(r_i, num_levels) - stop_probability(r_j, num_levels);
    case PairWeightScheme::gain_diff_norm:
      return (stop_probability(r_i, num_levels) - stop_probability(r_j, num_levels)) /
             n_query;
    case PairWeightScheme::eta_diff: return eta(pos_i) - eta(pos_j);
  }
  throw Error("unknown pair weighting scheme");
}

double pair_phi(PairLossKind kind, double d) {
  switch (kind) {
    case PairLossKind::quadratic: {
      double m = 1.0 - d;
      return m * m;
    }
    case PairLossKind::hinge: return std::max(0.0, 1.0 - d);
    case PairLossKind::exponential:
      return std::exp(std::min(-d, kExpClamp));
    case PairLossKind::logistic: {
      // softplus(-d), overflow-safe
      double x = -d;
      return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
  }
  throw Error("unknown pairwise loss kind");
}

double pair_phi_deriv(PairLossKind kind, double d) {
  switch (kind) {
    case PairLossKind::quadratic: return -2.0 * (1.0 - d);
    case PairLossKind::hinge: return d < 1.0 ? -1.0 : 0.0;
    case PairLossKind::exponential:
      return -std::exp(std::min(-d, kExpClamp));
    case PairLossKind::logistic:
      // -sigmoid(-d)
      return -1.0 / (1.0 + std::exp(std::max(std::min(d, kExpClamp), -kExpClamp)));
  }
  throw Error("unknown pairwise loss kind");
}

std::vector<WeightedPair> oriented_pairs(PairWeightScheme scheme,
                                         std::span<const int> ratings,
                                         std::span<const int> true_pos,
                                         int num_levels, double ideal_dcg) {
  const int n = static_cast<int>(ratings.size());
  std::vector<WeightedPair> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (ratings[i] == ratings[j]) continue;
      int hi = ratings[i] > ratings[j] ? i : j;
      int lo = hi == i ? j : i;
      pairs.push_back({hi, lo,
                       pair_weight(scheme, ratings[hi], ratings[lo], true_pos[hi],
                                   true_pos[lo], n, num_levels, ideal_dcg)});
    }
  return pairs;
}

LossValueAndGrad pairwise_loss(PairLossKind kind,
                               std::span<const double> scores,
                               std::span<const WeightedPair> pairs) {
  LossValueAndGrad out;
  out.grad.assign(scores.size(), 0.0);
  for (const auto& p : pairs) {
    double d = scores[p.i] - scores[p.j];
    out.value += p.weight * pair_phi(kind, d);
    double g = p.weight * pair_phi_deriv(kind, d);
    out.grad[p.i] += g;
    out.grad[p.j] -= g;
  }
  return out;
}

LossValueAndGrad pairwise_loss(PairLossKind kind, PairWeightScheme scheme,
                               std::span<const double> scores,
                               std::span<const int> ratings,
                               std::span<const int> true_pos, int num_levels,
                               double ideal_dcg) {
  auto pairs = oriented_pairs(scheme, ratings, true_pos, num_levels, ideal_dcg);
  return pairwise_loss(kind, scores, pairs);
}

}  // namespace rankforge::losses
