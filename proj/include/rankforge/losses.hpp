#ifndef RANKFORGE_LOSSES_HPP
#define RANKFORGE_LOSSES_HPP

#include <span>
#include <vector>

namespace rankforge::losses {

// Loss value plus its gradient with respect to the per-object scores of one
// query.
struct LossValueAndGrad {
  double value = 0.0;
  std::vector<double> grad;
};

// Softmax cross-entropy against a set of equally-acceptable best objects:
// -log sum_{i in best} exp(f_i) / sum_j exp(f_j), max-shifted.
LossValueAndGrad multiclass_logistic(std::span<const double> scores,
                                     const std::vector<int>& best_set);

// Sigmoid step surrogate: 1 / (1 + exp(-scale * (fi - fj))).
double smooth_step(double fi, double fj, double scale = 1.0);

enum class SmoothMetricKind { mrr, ndcg, err };

// 1 - M(soft positions), where the soft position of object i is
// 1 + sum_{j != i} smooth_step(f_j, f_i). NDCG is untruncated and normalized
// by the discrete ideal DCG; ERR smooths the cascade ordering condition with
// the same step. All-zero-rating queries cost 0 under NDCG.
LossValueAndGrad smooth_metric_loss(SmoothMetricKind kind,
                                    std::span<const double> scores,
                                    std::span<const int> ratings,
                                    int num_levels, double scale = 1.0);

enum class ElementWeightScheme {
  unit,                 // 1
  rating,               // r_i
  sqrt_rating,          // sqrt(r_i)
  exp_rating,           // 2^(r_i - 1) / 2^(|L| - 1)
  reciprocal_position,  // 1 / pi_i
  log_discount,         // 1 / log(1 + pi_i)
};

double element_weight(ElementWeightScheme scheme, int rating,
                      int true_position, int num_levels);

// Pair weights are oriented preferred-first (r_i > r_j), so every row is
// nonnegative. R_i = (2^r_i - 1) / 2^(|L|-1), eta_i = 1 / log(1 + pi_i).
enum class PairWeightScheme {
  unit,                // 1
  inv_qlen,            // 1 / N_q
  rating_diff,         // |r_i - r_j|
  rating_diff_norm,    // |r_i - r_j| / N_q
  gain_discount_norm,  // (R_i - R_j)(eta_i - eta_j) / idealDCG
  gain_discount,       // (R_i - R_j)(eta_i - eta_j)
  gain_diff,           // R_i - R_j
  gain_diff_norm,      // (R_i - R_j) / N_q
  eta_diff,            // eta_i - eta_j (rating-free, for the MRF pair bound)
};

double pair_weight(PairWeightScheme scheme, int r_i, int r_j, int pos_i,
                   int pos_j, int n_query, int num_levels, double ideal_dcg);

enum class PairLossKind { quadratic, hinge, exponential, logistic };

// phi(d) and phi'(d) for d = f_i - f_j.
double pair_phi(PairLossKind kind, double d);
double pair_phi_deriv(PairLossKind kind, double d);

// sum over pairs with r_i > r_j of V_ij * phi(f_i - f_j). Queries without a
// validly-oriented pair contribute zero loss and zero gradient.
LossValueAndGrad pairwise_loss(PairLossKind kind, PairWeightScheme scheme,
                               std::span<const double> scores,
                               std::span<const int> ratings,
                               std::span<const int> true_pos, int num_levels,
                               double ideal_dcg);

// Same decomposition with caller-supplied weights: triples (i, j, V_ij)
// already oriented r_i > r_j.
struct WeightedPair {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

LossValueAndGrad pairwise_loss(PairLossKind kind,
                               std::span<const double> scores,
                               std::span<const WeightedPair> pairs);

// Oriented pair list for a rating vector under one weighting scheme.
std::vector<WeightedPair> oriented_pairs(PairWeightScheme scheme,
                                         std::span<const int> ratings,
                                         std::span<const int> true_pos,
                                         int num_levels, double ideal_dcg);

}  // namespace rankforge::losses

#endif  // RANKFORGE_LOSSES_HPP
