#include "rankforge/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rankforge/error.hpp"
#include "support/random_data.hpp"

using namespace rankforge;
using namespace rankforge::metrics;

TEST_CASE("predicted_positions sorts descending with index tie-break") {
  CHECK(predicted_positions(std::vector<double>{0.1, 0.9, 0.5}) ==
        std::vector<int>{3, 1, 2});
  CHECK(predicted_positions(std::vector<double>{0.5, 0.5}) ==
        std::vector<int>{1, 2});
  CHECK(predicted_positions(std::vector<double>{1, 2, 3, 4}) ==
        std::vector<int>{4, 3, 2, 1});
  CHECK_THROWS_AS(
      predicted_positions(std::vector<double>{0.1, std::nan("")}),
      NumericError);
}

TEST_CASE("predicted_positions equals the indicator count on distinct scores") {
  Rng rng(7);
  for (int t = 0; t < 30; ++t) {
    auto scores = testsupport::random_scores(rng, 6);
    auto pos = predicted_positions(scores);
    for (int i = 0; i < 6; ++i) {
      int count = 1;
      for (int j = 0; j < 6; ++j)
        if (j != i && scores[j] > scores[i]) ++count;
      CHECK(pos[i] == count);
    }
  }
}

TEST_CASE("ndcg golden values") {
  std::vector<int> ratings{3, 2, 1, 0};
  SUBCASE("ideal order scores exactly 1") {
    std::vector<int> pos{1, 2, 3, 4};
    CHECK(ndcg_at(ratings, pos, 4) == 1.0);
  }
  SUBCASE("fully reversed") {
    std::vector<int> pos{4, 3, 2, 1};
    // N = 7/log2(5) + 3/2 + 1/log2(3), Nmax = 7 + 3/log2(3) + 1/2
    CHECK(ndcg_at(ratings, pos, 4) == doctest::Approx(0.5478).epsilon(1e-3));
  }
  SUBCASE("all-zero ratings score 1 by convention") {
    std::vector<int> zeros{0, 0, 0};
    std::vector<int> pos{2, 1, 3};
    CHECK(ndcg_at(zeros, pos, 3) == 1.0);
  }
  SUBCASE("cutoff larger than N truncates") {
    std::vector<int> pos{1, 2, 3, 4};
    CHECK(ndcg_at(ratings, pos, 100) == doctest::Approx(1.0));
  }
}

TEST_CASE("err golden values") {
  SUBCASE("top document rated 4 dominates") {
    std::vector<int> ratings{4, 0};
    std::vector<int> pos{1, 2};
    CHECK(err(ratings, pos, 5) == 0.9375);
  }
  SUBCASE("single documents") {
    std::vector<int> four{4}, one{1};
    std::vector<int> pos{1};
    CHECK(err(four, pos, 5) == 0.9375);
    CHECK(err(one, pos, 5) == doctest::Approx(1.0 / 16.0));
  }
  SUBCASE("all zeros give zero") {
    std::vector<int> ratings{0, 0, 0};
    std::vector<int> pos{1, 2, 3};
    CHECK(err(ratings, pos, 5) == 0.0);
  }
  SUBCASE("rating outside the label set is rejected") {
    std::vector<int> ratings{5};
    std::vector<int> pos{1};
    CHECK_THROWS_AS(err(ratings, pos, 5), Error);
  }
}

TEST_CASE("err cascade matches a direct product evaluation") {
  Rng rng(19);
  for (int t = 0; t < 40; ++t) {
    int n = 1 + static_cast<int>(rng.below(6));
    auto ratings = testsupport::random_ratings(rng, n, 5);
    auto scores = testsupport::random_scores(rng, n);
    auto pos = predicted_positions(scores);
    double direct = 0.0;
    for (int i = 0; i < n; ++i) {
      double r_i = (std::exp2(ratings[i]) - 1.0) / 16.0;
      double blocked = 1.0;
      for (int j = 0; j < n; ++j)
        if (pos[j] < pos[i])
          blocked *= 1.0 - (std::exp2(ratings[j]) - 1.0) / 16.0;
      direct += r_i * blocked / pos[i];
    }
    CHECK(err(ratings, pos, 5) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("err drops when a preferred pair is swapped downward") {
  // Exhaustive over all rating vectors and adjacent transpositions, N <= 5.
  for (int n = 2; n <= 5; ++n) {
    std::vector<int> ratings(n, 0);
    while (true) {
      std::vector<int> ident(n);
      for (int i = 0; i < n; ++i) ident[i] = i + 1;
      for (int p = 0; p + 1 < n; ++p) {
        // Objects currently at positions p+1 and p+2.
        int a = -1, b = -1;
        for (int i = 0; i < n; ++i) {
          if (ident[i] == p + 1) a = i;
          if (ident[i] == p + 2) b = i;
        }
        if (ratings[a] > ratings[b]) {
          auto swapped = ident;
          std::swap(swapped[a], swapped[b]);
          CHECK(err(ratings, swapped, 3) <= err(ratings, ident, 3) + 1e-12);
        }
      }
      int k = 0;
      while (k < n && ++ratings[k] == 3) ratings[k++] = 0;
      if (k == n) break;
    }
  }
}

TEST_CASE("metrics are invariant under monotone score transforms") {
  Rng rng(29);
  for (int t = 0; t < 100; ++t) {
    int n = 2 + static_cast<int>(rng.below(7));
    auto ratings = testsupport::random_ratings(rng, n, 5);
    auto scores = testsupport::random_scores(rng, n);
    auto pos = predicted_positions(scores);
    auto transformed = scores;
    for (double& s : transformed) s = std::exp(0.5 * s) + 3.0;  // monotone
    CHECK(predicted_positions(transformed) == pos);
  }
}

TEST_CASE("evaluate averages per-query metrics") {
  data::Dataset ds;
  ds.num_levels = 5;
  for (int qi = 0; qi < 2; ++qi) {
    data::Query q;
    q.id = "q" + std::to_string(qi);
    for (int r : {2, 0, 1}) {
      data::Instance inst;
      inst.rating = r;
      q.instances.push_back(inst);
    }
    ds.queries.push_back(q);
  }
  // First query ranked ideally; second puts the best object at position 2.
  std::vector<std::vector<double>> scores{{3.0, 1.0, 2.0}, {2.0, 3.0, 1.0}};
  auto report = evaluate(ds, scores, {1, 3});
  REQUIRE(report.per_query.size() == 2);
  CHECK(report.per_query[0].mrr == doctest::Approx(1.0));
  CHECK(report.per_query[1].mrr == doctest::Approx(0.5));
  CHECK(report.mrr == doctest::Approx(0.75));
  CHECK(report.ndcg_at.at(3) ==
        doctest::Approx((report.per_query[0].ndcg_at.at(3) +
                         report.per_query[1].ndcg_at.at(3)) /
                        2.0));
  CHECK(report.err >= 0.0);
  CHECK(report.err <= 1.0);
}

TEST_CASE("mrr golden cases") {
  data::Dataset ds;
  ds.num_levels = 2;
  data::Query q;
  q.id = "a";
  for (int r : {1, 0, 0}) {
    data::Instance inst;
    inst.rating = r;
    q.instances.push_back(inst);
  }
  ds.queries.push_back(q);
  // Best object lands at predicted position 3.
  CHECK(mrr(ds, {{0.0, 2.0, 1.0}}) == doctest::Approx(1.0 / 3.0));
  CHECK(mrr(ds, {{5.0, 2.0, 1.0}}) == doctest::Approx(1.0));
  data::Dataset empty;
  CHECK_THROWS_AS(mrr(empty, {}), Error);
}

TEST_CASE("metric ranges hold on random queries") {
  Rng rng(31);
  for (int t = 0; t < 100; ++t) {
    int n = 1 + static_cast<int>(rng.below(8));
    auto ratings = testsupport::random_ratings(rng, n, 5);
    auto scores = testsupport::random_scores(rng, n);
    auto pos = predicted_positions(scores);
    double nd = ndcg_at(ratings, pos, std::min(n, 5));
    double er = err(ratings, pos, 5);
    double rr = reciprocal_rank(ratings, pos);
    CHECK(nd >= 0.0);
    CHECK(nd <= 1.0 + 1e-12);
    CHECK(er >= 0.0);
    CHECK(er <= 1.0);
    CHECK(rr > 0.0);
    CHECK(rr <= 1.0);
  }
}
