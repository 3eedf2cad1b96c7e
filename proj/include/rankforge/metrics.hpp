#ifndef RANKFORGE_METRICS_HPP
#define RANKFORGE_METRICS_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rankforge/dataset.hpp"

namespace rankforge::metrics {

// Positions 1..N from a stable sort by descending score, ties broken by
// ascending index. With distinct scores this matches the indicator-count
// definition of the predicted position.
std::vector<int> predicted_positions(std::span<const double> scores);

// DCG with the 2^r - 1 gain and log2(1 + position) discount, restricted to
// positions 1..T (T = 0 means no cutoff).
double dcg(std::span<const int> ratings, std::span<const int> positions,
           int cutoff = 0);

// Ideal (rating-descending) DCG at the same cutoff.
double ideal_dcg(std::span<const int> ratings, int cutoff = 0);

// NDCG@T; queries whose ratings are all zero score 1 by convention.
double ndcg_at(std::span<const int> ratings, std::span<const int> positions,
               int cutoff);

// Expected reciprocal rank under the cascade model with stopping
// probability R(r) = (2^r - 1) / 2^(num_levels - 1).
double err(std::span<const int> ratings, std::span<const int> positions,
           int num_levels);

// Reciprocal predicted position of the best object (ties on the top rating
// resolve to the lowest-index top-rated object).
double reciprocal_rank(std::span<const int> ratings,
                       std::span<const int> positions);

struct QueryMetrics {
  std::string qid;
  double mrr = 0.0;
  std::map<int, double> ndcg_at;
  double err = 0.0;
};

struct RankMetricReport {
  double mrr = 0.0;
  std::map<int, double> ndcg_at;
  double err = 0.0;
  std::vector<QueryMetrics> per_query;
};

// Averages each metric over queries; scores_per_query is parallel to
// ds.queries.
RankMetricReport evaluate(const data::Dataset& ds,
                          const std::vector<std::vector<double>>& scores_per_query,
                          const std::vector<int>& ndcg_cutoffs = {1, 5, 10});

double mrr(const data::Dataset& ds,
           const std::vector<std::vector<double>>& scores_per_query);

}  // namespace rankforge::metrics

#endif  // RANKFORGE_METRICS_HPP
