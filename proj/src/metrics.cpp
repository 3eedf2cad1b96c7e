#include "rankforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankforge/error.hpp"

namespace rankforge::metrics {

namespace {

double gain(int rating) { return std::exp2(rating) - 1.0; }

void check_permutation(std::span<const int> positions) {
  std::vector<bool> seen(positions.size(), false);
  for (int p : positions) {
    if (p < 1 || p > static_cast<int>(positions.size()) || seen[p - 1])
      throw Error("positions must form a permutation of 1..N");
    seen[p - 1] = true;
  }
}

}  // namespace

std::vector<int> predicted_positions(std::span<const double> scores) {
  if (scores.empty()) throw Error("predicted_positions requires a nonempty score list");
  for (double s : scores)
    if (!std::isfinite(s)) throw NumericError("non-finite score");
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  std::vector<int> pos(scores.size());
  for (std::size_t p = 0; p < idx.size(); ++p)
    pos[idx[p]] = static_cast<int>(p) + 1;
  return pos;
}

double dcg(std::span<const int> ratings, std::span<const int> positions,
           int cutoff) {
  const int n = static_cast<int>(ratings.size());
  int t = (cutoff <= 0 || cutoff > n) ? n : cutoff;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    if (positions[i] <= t)
      sum += gain(ratings[i]) / std::log2(1.0 + positions[i]);
  return sum;
}

double ideal_dcg(std::span<const int> ratings, int cutoff) {
  std::vector<int> sorted(ratings.begin(), ratings.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<int>());
  const int n = static_cast<int>(sorted.size());
  int t = (cutoff <= 0 || cutoff > n) ? n : cutoff;
  double sum = 0.0;
  for (int p = 1; p <= t; ++p)
    sum += gain(sorted[p - 1]) / std::log2(1.0 + p);
  return sum;
}

double ndcg_at(std::span<const int> ratings, std::span<const int> positions,
               int cutoff) {
  if (cutoff < 1) throw Error("NDCG cutoff must be >= 1");
  check_permutation(positions);
  double max = ideal_dcg(ratings, cutoff);
  if (max == 0.0) return 1.0;  // nothing to get wrong
  return dcg(ratings, positions, cutoff) / max;
}

double err(std::span<const int> ratings, std::span<const int> positions,
           int num_levels) {
  if (num_levels < 1) throw Error("num_levels must be >= 1");
  check_permutation(positions);
  const int n = static_cast<int>(ratings.size());
  const double denom = std::exp2(num_levels - 1);
  std::vector<int> at_rank(n);
  for (int i = 0; i < n; ++i) {
    if (ratings[i] >= num_levels)
      throw Error("rating " + std::to_string(ratings[i]) +
                  " outside label-set size " + std::to_string(num_levels));
    at_rank[positions[i] - 1] = i;
  }
  double result = 0.0;
  double not_stopped = 1.0;
  for (int p = 1; p <= n; ++p) {
    double r = gain(ratings[at_rank[p - 1]]) / denom;
    result += not_stopped * r / static_cast<double>(p);
    not_stopped *= 1.0 - r;
  }
  return result;
}

double reciprocal_rank(std::span<const int> ratings,
                       std::span<const int> positions) {
  if (ratings.empty()) throw Error("empty query");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ratings.size(); ++i)
    if (ratings[i] > ratings[best]) best = i;
  return 1.0 / positions[best];
}

RankMetricReport evaluate(const data::Dataset& ds,
                          const std::vector<std::vector<double>>& scores_per_query,
                          const std::vector<int>& ndcg_cutoffs) {
  if (ds.queries.empty()) throw Error("cannot evaluate an empty dataset");
  if (scores_per_query.size() != ds.queries.size())
    throw Error("scores_per_query does not match the dataset");

  RankMetricReport report;
  for (std::size_t qi = 0; qi < ds.queries.size(); ++qi) {
    const auto& q = ds.queries[qi];
    std::vector<int> ratings(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) ratings[i] = q.instances[i].rating;
    auto positions = predicted_positions(scores_per_query[qi]);

    QueryMetrics qm;
    qm.qid = q.id;
    qm.mrr = reciprocal_rank(ratings, positions);
    for (int t : ndcg_cutoffs) qm.ndcg_at[t] = ndcg_at(ratings, positions, t);
    qm.err = err(ratings, positions, ds.num_levels);
    report.per_query.push_back(std::move(qm));
  }

  const double d = static_cast<double>(report.per_query.size());
  for (const auto& qm : report.per_query) {
    report.mrr += qm.mrr / d;
    report.err += qm.err / d;
    for (const auto& [t, v] : qm.ndcg_at) report.ndcg_at[t] += v / d;
  }
  return report;
}

double mrr(const data::Dataset& ds,
           const std::vector<std::vector<double>>& scores_per_query) {
  if (ds.queries.empty()) throw Error("cannot evaluate an empty dataset");
  double sum = 0.0;
  for (std::size_t qi = 0; qi < ds.queries.size(); ++qi) {
    const auto& q = ds.queries[qi];
    std::vector<int> ratings(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) ratings[i] = q.instances[i].rating;
    sum += reciprocal_rank(ratings, predicted_positions(scores_per_query[qi]));
  }
  return sum / static_cast<double>(ds.queries.size());
}

}  // namespace rankforge::metrics
