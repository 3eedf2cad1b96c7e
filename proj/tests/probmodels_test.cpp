#include "rankforge/probmodels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "rankforge/error.hpp"
#include "support/finite_diff.hpp"
#include "support/random_data.hpp"

using namespace rankforge;
using namespace rankforge::probmodels;

namespace {

std::vector<double> unit_weights(std::size_t n) {
  return std::vector<double>(n, 1.0);
}

std::vector<int> identity_positions(int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 1);
  return p;
}

// Test-local joint of the pairwise random field, enumerated directly from
// the potential definition. Kept independent of the library's evaluation
// path on purpose.
double oracle_joint_logprob(const std::vector<double>& f,
                            const std::vector<int>& r, double gamma,
                            int levels, double psi_sign = 1.0) {
  const int n = static_cast<int>(f.size());
  auto log_psi_product = [&](const std::vector<int>& cfg) {
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        int s = cfg[i] > cfg[j] ? 1 : cfg[i] < cfg[j] ? -1 : 0;
        e += gamma * psi_sign * s * (f[i] - f[j]);
      }
    return e;
  };
  double z = 0.0;
  std::vector<int> cfg(n, 0);
  while (true) {
    z += std::exp(log_psi_product(cfg));
    int k = 0;
    while (k < n && ++cfg[k] == levels) cfg[k++] = 0;
    if (k == n) break;
  }
  return log_psi_product(r) - std::log(z);
}

}  // namespace

TEST_CASE("pl_loss golden values") {
  SUBCASE("two tied scores") {
    std::vector<double> f{0.0, 0.0};
    auto lv = pl_loss(f, identity_positions(2), unit_weights(2));
    CHECK(lv.value == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("three objects, one strong") {
    std::vector<double> f{1.0, 0.0, 0.0};
    auto lv = pl_loss(f, identity_positions(3), unit_weights(3));
    // -log(e/(e+2)) - log(1/2)
    CHECK(lv.value == doctest::Approx(1.2447).epsilon(1e-4));
  }
}

TEST_CASE("pl_loss equals the direct log-sum-exp evaluation") {
  // Independent second route: sum over chosen positions of
  // LSE(remaining scores) - chosen score.
  Rng rng(211);
  for (int t = 0; t < 30; ++t) {
    int n = 2 + static_cast<int>(rng.below(5));
    auto f = testsupport::random_scores(rng, n);
    auto lv = pl_loss(f, identity_positions(n), unit_weights(n));
    double direct = 0.0;
    for (int p = 0; p < n; ++p) {
      double sum = 0.0;
      for (int q = p; q < n; ++q) sum += std::exp(f[q]);
      direct += std::log(sum) - f[p];
    }
    CHECK(lv.value == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("PL and reverse PL normalize over every ordering") {
  Rng rng(223);
  for (int n = 2; n <= 5; ++n) {
    for (int t = 0; t < 10; ++t) {
      auto f = testsupport::random_scores(rng, n);
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      double pl_total = 0.0, rpl_total = 0.0;
      std::vector<int> pos(n);
      do {
        for (int p = 0; p < n; ++p) pos[order[p]] = p + 1;
        pl_total += std::exp(-pl_loss(f, pos, unit_weights(n)).value);
        rpl_total += std::exp(-reverse_pl_loss(f, pos, unit_weights(n)).value);
      } while (std::next_permutation(order.begin(), order.end()));
      CHECK(pl_total == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(rpl_total == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("reverse PL golden value and divergence from forward PL") {
  std::vector<double> equal{0.0, 0.0};
  CHECK(reverse_pl_loss(equal, identity_positions(2), unit_weights(2)).value ==
        doctest::Approx(std::log(2.0)));
  // Regression fixture: the two factorizations assign different likelihoods.
  std::vector<double> f{1.0, 0.3, -0.5};
  double pl = pl_loss(f, identity_positions(3), unit_weights(3)).value;
  double rpl = reverse_pl_loss(f, identity_positions(3), unit_weights(3)).value;
  CHECK(pl == doctest::Approx(0.913078).epsilon(1e-5));
  CHECK(rpl == doctest::Approx(0.917487).epsilon(1e-5));
  CHECK(std::fabs(pl - rpl) > 1e-3);
}

TEST_CASE("PL family gradients match finite differences") {
  Rng rng(227);
  for (int t = 0; t < 25; ++t) {
    int n = 2 + static_cast<int>(rng.below(6));
    auto f = testsupport::random_scores(rng, n);
    std::vector<double> w(n);
    for (double& x : w) x = rng.uniform();
    // Random true ordering.
    std::vector<int> pos(n);
    std::iota(pos.begin(), pos.end(), 1);
    for (int i = n - 1; i > 0; --i)
      std::swap(pos[i], pos[rng.below(i + 1)]);

    for (auto* fn : {&pl_loss, &reverse_pl_loss}) {
      auto lv = (*fn)(f, pos, w);
      auto fd = testsupport::fd_gradient(
          [&](const std::vector<double>& x) { return (*fn)(x, pos, w).value; },
          f);
      CHECK(testsupport::max_rel_error(lv.grad, fd) < 1e-5);
    }
  }
}

TEST_CASE("group PL with singleton groups equals plain PL") {
  Rng rng(229);
  for (int t = 0; t < 20; ++t) {
    int n = 2 + static_cast<int>(rng.below(4));
    auto f = testsupport::random_scores(rng, n);
    // Distinct ratings so each group is a singleton.
    std::vector<int> ratings(n);
    std::iota(ratings.begin(), ratings.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(ratings[i], ratings[rng.below(i + 1)]);
    data::Query q;
    for (int r : ratings) {
      data::Instance inst;
      inst.rating = r;
      q.instances.push_back(inst);
    }
    auto pos = data::true_positions(q);
    for (auto agg : {functionals::Aggregation::min, functionals::Aggregation::max,
                     functionals::Aggregation::arithmetic_mean,
                     functionals::Aggregation::geometric_mean}) {
      auto grouped = group_pl_loss(f, ratings, agg);
      auto plain = pl_loss(f, pos, unit_weights(n));
      CHECK(grouped.value == doctest::Approx(plain.value).epsilon(1e-12));
      for (int i = 0; i < n; ++i)
        CHECK(grouped.grad[i] == doctest::Approx(plain.grad[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("group PL golden value: two equal-worth groups") {
  std::vector<double> f{0.7, 0.7, 0.7};
  std::vector<int> r{1, 0, 0};
  auto lv = group_pl_loss(f, r, functionals::Aggregation::geometric_mean);
  CHECK(lv.value == doctest::Approx(std::log(2.0)));
}

TEST_CASE("group PL with one group carries no information") {
  std::vector<double> f{0.3, -0.2};
  std::vector<int> r{2, 2};
  auto lv = group_pl_loss(f, r, functionals::Aggregation::max);
  CHECK(lv.value == 0.0);
  CHECK(lv.grad == std::vector<double>{0.0, 0.0});
}

TEST_CASE("group PL gradients match finite differences") {
  Rng rng(233);
  for (auto agg : {functionals::Aggregation::arithmetic_mean,
                   functionals::Aggregation::geometric_mean,
                   functionals::Aggregation::min, functionals::Aggregation::max}) {
    int checked = 0;
    while (checked < 15) {
      int n = 3 + static_cast<int>(rng.below(4));
      auto f = testsupport::random_scores(rng, n);
      auto ratings = testsupport::random_ratings(rng, n, 3);
      if (agg == functionals::Aggregation::min ||
          agg == functionals::Aggregation::max) {
        // Keep away from argmin/argmax switches.
        bool close = false;
        for (int i = 0; i < n && !close; ++i)
          for (int j = i + 1; j < n && !close; ++j)
            if (ratings[i] == ratings[j] && std::fabs(f[i] - f[j]) < 5e-3)
              close = true;
        if (close) continue;
      }
      auto lv = group_pl_loss(f, ratings, agg);
      auto fd = testsupport::fd_gradient(
          [&](const std::vector<double>& x) {
            return group_pl_loss(x, ratings, agg).value;
          },
          f, 1e-6);
      CHECK(testsupport::max_rel_error(lv.grad, fd) < 1e-5);
      ++checked;
    }
  }
}

TEST_CASE("mrf_psi follows the potential definition") {
  CHECK(mrf_psi(2, 2, 0.4, -1.0, 1.0) == doctest::Approx(1.0));
  CHECK(mrf_psi(3, 1, 1.0, 0.0, 1.0) == doctest::Approx(std::exp(1.0)));
  Rng rng(239);
  for (int t = 0; t < 50; ++t) {
    int ri = static_cast<int>(rng.below(5)), rj = static_cast<int>(rng.below(5));
    double fi = rng.normal(), fj = rng.normal();
    double gamma = 0.1 + rng.uniform();
    CHECK(mrf_psi(ri, rj, fi, fj, gamma) * mrf_psi(rj, ri, fj, fi, gamma) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(mrf_psi(1, 0, 0.0, 0.0, 0.0), Error);
}

TEST_CASE("wpll golden value: two tied scores, binary labels") {
  std::vector<double> f{0.4, 0.4};
  std::vector<int> r{1, 0};
  auto lv = wpll_loss(f, r, 1.0, 2, unit_weights(2));
  CHECK(lv.value == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("wpll conditionals are normalized distributions") {
  Rng rng(241);
  for (int t = 0; t < 20; ++t) {
    int n = 2 + static_cast<int>(rng.below(4));
    int levels = 2 + static_cast<int>(rng.below(3));
    auto f = testsupport::random_scores(rng, n);
    auto r = testsupport::random_ratings(rng, n, levels);
    double gamma = 0.2 + rng.uniform();
    for (int i = 0; i < n; ++i) {
      double total = 0.0;
      auto varied = r;
      for (int v = 0; v < levels; ++v) {
        varied[i] = v;
        total += std::exp(wpll_log_conditionals(f, varied, gamma, levels)[i]);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("wpll conditionals equal brute-force joint ratios") {
  Rng rng(251);
  for (int t = 0; t < 50; ++t) {
    constexpr int n = 3, levels = 3;
    auto f = testsupport::random_scores(rng, n);
    auto r = testsupport::random_ratings(rng, n, levels);
    double gamma = 0.2 + rng.uniform();
    auto cond = wpll_log_conditionals(f, r, gamma, levels);
    for (int i = 0; i < n; ++i) {
      double joint = oracle_joint_logprob(f, r, gamma, levels);
      double denom = 0.0;
      auto varied = r;
      for (int v = 0; v < levels; ++v) {
        varied[i] = v;
        denom += std::exp(oracle_joint_logprob(f, varied, gamma, levels));
      }
      CHECK(cond[i] == doctest::Approx(joint - std::log(denom)).epsilon(1e-10));
    }
  }
}

TEST_CASE("wpll gradient matches finite differences") {
  Rng rng(257);
  for (int t = 0; t < 25; ++t) {
    int n = 2 + static_cast<int>(rng.below(5));
    int levels = 2 + static_cast<int>(rng.below(3));
    auto f = testsupport::random_scores(rng, n);
    auto r = testsupport::random_ratings(rng, n, levels);
    std::vector<double> w(n);
    for (double& x : w) x = rng.uniform();
    double gamma = 0.2 + rng.uniform();
    auto lv = wpll_loss(f, r, gamma, levels, w);
    auto fd = testsupport::fd_gradient(
        [&](const std::vector<double>& x) {
          return wpll_loss(x, r, gamma, levels, w).value;
        },
        f);
    CHECK(testsupport::max_rel_error(lv.grad, fd) < 1e-5);
  }
}

TEST_CASE("wub closed form matches the explicit double sum over labels") {
  Rng rng(263);
  for (int t = 0; t < 40; ++t) {
    int levels = 2 + static_cast<int>(rng.below(4));
    std::vector<double> f{rng.normal(), rng.normal()};
    std::vector<int> r{static_cast<int>(rng.below(levels)),
                       static_cast<int>(rng.below(levels))};
    double gamma = 0.2 + rng.uniform();
    // Z_ij by brute force over |L|^2 rating pairs.
    double z = 0.0;
    for (int u = 0; u < levels; ++u)
      for (int v = 0; v < levels; ++v) z += mrf_psi(u, v, f[0], f[1], gamma);
    double expected = std::log(z) -
                      std::log(mrf_psi(r[0], r[1], f[0], f[1], gamma));
    CHECK(wub_loss(f, r, gamma, levels).value ==
          doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("wub golden value at zero score difference") {
  std::vector<double> f{0.3, 0.3};
  for (int ri = 0; ri < 5; ++ri)
    for (int rj = 0; rj < 5; ++rj) {
      std::vector<int> r{ri, rj};
      // Z = 5 + 10 * 2 = 25 and psi = 1, so every pair costs log 25.
      CHECK(wub_loss(f, r, 1.0, 5).value == doctest::Approx(std::log(25.0)));
    }
}

TEST_CASE("wub tied-rating pairs still pay the normalizer") {
  std::vector<double> f{1.5, -0.5};
  std::vector<int> r{2, 2};
  auto lv = wub_loss(f, r, 0.7, 4);
  CHECK(lv.value > 0.0);
}

TEST_CASE("wub gradient matches finite differences") {
  Rng rng(269);
  for (int t = 0; t < 25; ++t) {
    int n = 2 + static_cast<int>(rng.below(5));
    int levels = 2 + static_cast<int>(rng.below(4));
    auto f = testsupport::random_scores(rng, n);
    auto r = testsupport::random_ratings(rng, n, levels);
    std::vector<double> w(n * (n - 1) / 2);
    for (double& x : w) x = rng.uniform();
    double gamma = 0.2 + rng.uniform();
    auto lv = wub_loss(f, r, gamma, levels, w);
    auto fd = testsupport::fd_gradient(
        [&](const std::vector<double>& x) {
          return wub_loss(x, r, gamma, levels, w).value;
        },
        f);
    CHECK(testsupport::max_rel_error(lv.grad, fd) < 1e-5);
  }
}

TEST_CASE("exact MRF log-loss golden values") {
  SUBCASE("uniform when all scores are equal") {
    std::vector<double> f{0.5, 0.5, 0.5};
    std::vector<int> r{2, 0, 1};
    CHECK(mrf_exact_logloss(f, r, 1.0, 3) ==
          doctest::Approx(3.0 * std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("matches the test-local joint") {
    Rng rng(271);
    for (int t = 0; t < 30; ++t) {
      int n = 2 + static_cast<int>(rng.below(3));
      int levels = 2 + static_cast<int>(rng.below(3));
      auto f = testsupport::random_scores(rng, n);
      auto r = testsupport::random_ratings(rng, n, levels);
      double gamma = 0.2 + rng.uniform();
      CHECK(mrf_exact_logloss(f, r, gamma, levels) ==
            doctest::Approx(-oracle_joint_logprob(f, r, gamma, levels))
                .epsilon(1e-10));
    }
  }
  SUBCASE("budget guard") {
    std::vector<double> f(30, 0.0);
    std::vector<int> r(30, 0);
    CHECK_THROWS_AS(mrf_exact_logloss(f, r, 1.0, 5), Error);
  }
}

TEST_CASE("pairwise bound holds with slack zero at N = 2") {
  Rng rng(277);
  for (int t = 0; t < 100; ++t) {
    int levels = 2 + static_cast<int>(rng.below(4));
    std::vector<double> f{rng.normal(), rng.normal()};
    std::vector<int> r{static_cast<int>(rng.below(levels)),
                       static_cast<int>(rng.below(levels))};
    double gamma = 0.1 + 2.0 * rng.uniform();
    double exact = mrf_exact_logloss(f, r, gamma, levels);
    double bound = wub_loss(f, r, gamma, levels).value;  // C = 0 here
    CHECK(std::fabs(exact - bound) < 1e-12);
  }
}

TEST_CASE("pairwise bound holds at larger N") {
  Rng rng(281);
  for (auto [n, levels] : std::vector<std::pair<int, int>>{{3, 2}, {4, 3}, {5, 2}}) {
    for (int t = 0; t < 40; ++t) {
      auto f = testsupport::random_scores(rng, n);
      auto r = testsupport::random_ratings(rng, n, levels);
      double gamma = 0.1 + 2.0 * rng.uniform();
      double exact = mrf_exact_logloss(f, r, gamma, levels);
      double bound = wub_loss(f, r, gamma, levels).value +
                     (n - 2) * std::log(static_cast<double>(levels));
      CHECK(exact <= bound + 1e-9);
    }
  }
}

TEST_CASE("a sign error in the potential breaks the bound") {
  // Mutation check: flipping the sign inside the joint makes the enumerated
  // log-loss exceed the pairwise bound, so a violation must be detectable.
  Rng rng(283);
  int violations = 0;
  for (int t = 0; t < 60; ++t) {
    constexpr int n = 4, levels = 3;
    auto f = testsupport::random_scores(rng, n, 2.0);
    auto r = testsupport::random_ratings(rng, n, levels);
    double gamma = 0.5 + 2.0 * rng.uniform();
    double mutated_exact = -oracle_joint_logprob(f, r, gamma, levels, -1.0);
    double bound = wub_loss(f, r, gamma, levels).value +
                   (n - 2) * std::log(static_cast<double>(levels));
    if (mutated_exact > bound + 1e-9) ++violations;
  }
  CHECK(violations > 0);
}

TEST_CASE("probabilistic losses are shift invariant") {
  Rng rng(293);
  for (int t = 0; t < 20; ++t) {
    int n = 3 + static_cast<int>(rng.below(3));
    int levels = 3;
    auto f = testsupport::random_scores(rng, n);
    auto r = testsupport::random_ratings(rng, n, levels);
    auto w = unit_weights(n);
    std::vector<double> wp(n * (n - 1) / 2, 1.0);
    auto pos = identity_positions(n);
    double c = rng.normal(0.0, 2.0);
    auto shifted = f;
    for (double& x : shifted) x += c;
    double gamma = 0.3;

    CHECK(pl_loss(f, pos, w).value ==
          doctest::Approx(pl_loss(shifted, pos, w).value).epsilon(1e-9));
    CHECK(reverse_pl_loss(f, pos, w).value ==
          doctest::Approx(reverse_pl_loss(shifted, pos, w).value).epsilon(1e-9));
    CHECK(group_pl_loss(f, r, functionals::Aggregation::geometric_mean).value ==
          doctest::Approx(
              group_pl_loss(shifted, r, functionals::Aggregation::geometric_mean)
                  .value)
              .epsilon(1e-9));
    CHECK(wpll_loss(f, r, gamma, levels, w).value ==
          doctest::Approx(wpll_loss(shifted, r, gamma, levels, w).value)
              .epsilon(1e-9));
    CHECK(wub_loss(f, r, gamma, levels, wp).value ==
          doctest::Approx(wub_loss(shifted, r, gamma, levels, wp).value)
              .epsilon(1e-9));
    CHECK(mrf_exact_logloss(f, r, gamma, levels) ==
          doctest::Approx(mrf_exact_logloss(shifted, r, gamma, levels))
              .epsilon(1e-9));
  }
}

TEST_CASE("weight length mismatches are rejected") {
  std::vector<double> f{0.0, 1.0};
  std::vector<double> bad{1.0};
  CHECK_THROWS_AS(pl_loss(f, identity_positions(2), bad), Error);
  CHECK_THROWS_AS(reverse_pl_loss(f, identity_positions(2), bad), Error);
  std::vector<int> r{1, 0};
  CHECK_THROWS_AS(wpll_loss(f, r, 1.0, 2, bad), Error);
}
