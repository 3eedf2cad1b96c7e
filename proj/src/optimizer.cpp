#include "rankforge/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <thread>

#include "rankforge/error.hpp"
#include "rankforge/rng.hpp"

namespace rankforge::optimizer {

namespace {

constexpr double kWolfeC1 = 1e-4;
constexpr double kWolfeC2 = 0.9;
constexpr int kMaxLineSearchEvals = 60;
constexpr std::size_t kChunk = 256;  // queries per reduction block

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Minimizer of the cubic through (a, fa, ga) and (b, fb, gb); NaN on
// degenerate geometry.
double cubic_minimizer(double a, double fa, double ga, double b, double fb,
                       double gb) {
  double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  double disc = d1 * d1 - ga * gb;
  if (disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  double d2 = std::sqrt(disc);
  if (b < a) d2 = -d2;
  return b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
}

struct LinePoint {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;
};

}  // namespace

MinimizeResult lbfgs_minimize(
    Objective& objective, std::vector<double> x0, const TrainConfig& cfg,
    const std::function<void(int, double, std::span<const double>)>&
        on_iteration) {
  const std::size_t n = x0.size();
  if (cfg.memory < 1) throw ConfigError("L-BFGS memory must be >= 1");
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!all_finite(x0)) throw NumericError("non-finite initial parameters", x0);

  std::vector<double> x = std::move(x0);
  std::vector<double> g(n), x_trial(n), g_trial(n);
  double f = objective.eval(x, g);
  if (!std::isfinite(f) || !all_finite(g))
    throw NumericError("non-finite objective at the initial point", x);

  MinimizeResult result;
  result.report.risk_trace.push_back(f);

  std::deque<std::pair<std::vector<double>, std::vector<double>>> history;  // (s, y)
  std::vector<double> direction(n), alpha_coef;

  auto eval_at = [&](double alpha) -> LinePoint {
    for (std::size_t i = 0; i < n; ++i) x_trial[i] = x[i] + alpha * direction[i];
    double ft = objective.eval(x_trial, g_trial);
    if (!std::isfinite(ft) || !all_finite(g_trial))
      throw NumericError("non-finite loss or gradient during line search",
                         x_trial);
    return {alpha, ft, dot(g_trial, direction)};
  };

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    result.report.grad_norm = inf_norm(g);
    if (result.report.grad_norm <= cfg.grad_tol) {
      result.report.converged = true;
      break;
    }

    // Two-loop recursion for d = -H g.
    for (std::size_t i = 0; i < n; ++i) direction[i] = -g[i];
    alpha_coef.assign(history.size(), 0.0);
    for (std::size_t h = history.size(); h-- > 0;) {
      const auto& [s, y] = history[h];
      double rho = 1.0 / dot(s, y);
      alpha_coef[h] = rho * dot(s, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha_coef[h] * y[i];
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      double scaling = dot(s, y) / dot(y, y);
      for (std::size_t i = 0; i < n; ++i) direction[i] *= scaling;
    }
    for (std::size_t h = 0; h < history.size(); ++h) {
      const auto& [s, y] = history[h];
      double rho = 1.0 / dot(s, y);
      double beta = rho * dot(y, direction);
      for (std::size_t i = 0; i < n; ++i)
        direction[i] += (alpha_coef[h] - beta) * s[i];
    }

    double slope0 = dot(g, direction);
    if (slope0 >= 0.0) {
      // The approximation lost positive definiteness; restart.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) direction[i] = -g[i];
      slope0 = dot(g, direction);
      if (slope0 >= 0.0) break;  // gradient numerically zero
    }

    // Strong Wolfe search: bracket then zoom.
    LinePoint best{0.0, f, slope0};
    bool accepted = false;
    int evals = 0;

    auto zoom = [&](LinePoint lo, LinePoint hi) {
      while (evals < kMaxLineSearchEvals) {
        double width = std::fabs(hi.alpha - lo.alpha);
        if (width < 1e-14 * std::max(1.0, std::fabs(lo.alpha))) break;
        double at = cubic_minimizer(lo.alpha, lo.f, lo.slope, hi.alpha, hi.f,
                                    hi.slope);
        double left = std::min(lo.alpha, hi.alpha);
        if (!std::isfinite(at) || at <= left + 0.1 * width ||
            at >= left + 0.9 * width)
          at = left + 0.5 * width;
        LinePoint p = eval_at(at);
        ++evals;
        if (p.f > f + kWolfeC1 * p.alpha * slope0 || p.f >= lo.f) {
          hi = p;
          continue;
        }
        if (std::fabs(p.slope) <= -kWolfeC2 * slope0) {
          best = p;
          accepted = true;
          return;
        }
        if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = p;
      }
      // Fall back to the best sufficient-decrease point seen.
      if (lo.alpha > 0.0 && lo.f < f) {
        best = eval_at(lo.alpha);
        accepted = true;
      }
    };

    double alpha = iter == 0 ? std::min(1.0, 1.0 / std::max(1e-12, inf_norm(g)))
                             : 1.0;
    LinePoint prev{0.0, f, slope0};
    while (evals < kMaxLineSearchEvals) {
      LinePoint p = eval_at(alpha);
      ++evals;
      if (p.f > f + kWolfeC1 * p.alpha * slope0 || (evals > 1 && p.f >= prev.f)) {
        zoom(prev, p);
        break;
      }
      if (std::fabs(p.slope) <= -kWolfeC2 * slope0) {
        best = p;
        accepted = true;
        break;
      }
      if (p.slope >= 0.0) {
        zoom(p, prev);
        break;
      }
      prev = p;
      alpha = std::min(alpha * 2.0, 1e8);
    }

    if (!accepted) {
      if (!history.empty()) {
        // Retry from steepest descent before giving up.
        history.clear();
        continue;
      }
      break;
    }

    // Accept the step; x_trial / g_trial hold the last evaluation at best.alpha.
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_trial[i] - x[i];
      y[i] = g_trial[i] - g[i];
    }
    x = x_trial;
    g = g_trial;
    f = best.f;
    result.report.risk_trace.push_back(f);
    if (on_iteration) on_iteration(iter + 1, f, x);

    double sy = dot(s, y);
    if (sy > 1e-10 * std::sqrt(dot(s, s)) * std::sqrt(dot(y, y))) {
      history.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(history.size()) > cfg.memory) history.pop_front();
    }
  }

  result.report.final_risk = f;
  result.report.iterations = iter;
  result.report.grad_norm = inf_norm(g);
  if (result.report.grad_norm <= cfg.grad_tol) result.report.converged = true;
  result.x = std::move(x);
  return result;
}

RiskEvaluator::RiskEvaluator(functionals::Model model_template,
                             const data::Dataset& ds, LossSpec spec,
                             double lambda, bool bit_exact, int threads)
    : model_(std::move(model_template)),
      dataset_(ds),
      spec_(std::move(spec)),
      lambda_(lambda),
      bit_exact_(bit_exact),
      threads_(threads),
      n_params_(functionals::param_count(model_)),
      penalized_(functionals::penalty_mask(model_)) {
  if (lambda_ < 0.0) throw ConfigError("lambda must be nonnegative");
  validate(spec_);
  if (functionals::representation_of(functionals::family_of(model_)) != ds.repr)
    throw ConfigError("model family does not match the dataset representation");
  contexts_.reserve(ds.queries.size());
  for (const auto& q : ds.queries)
    contexts_.push_back(make_query_context(q, ds.num_levels));
}

double RiskEvaluator::eval_query(const functionals::Model& m, std::size_t qi,
                                 std::span<double> grad) const {
  const auto& q = dataset_.queries[qi];
  auto scores = functionals::score_query(m, dataset_, q);
  auto lv = evaluate_query_loss(spec_, scores, contexts_[qi]);
  for (std::size_t i = 0; i < q.size(); ++i)
    if (lv.grad[i] != 0.0)
      functionals::accumulate_score_grad(m, dataset_, q, i, lv.grad[i], grad);
  return lv.value;
}

double RiskEvaluator::eval(std::span<const double> x, std::span<double> grad) {
  functionals::Model m = model_;
  functionals::set_params(m, x);
  std::fill(grad.begin(), grad.end(), 0.0);

  const std::size_t n_queries = dataset_.queries.size();
  const std::size_t n_chunks = (n_queries + kChunk - 1) / kChunk;
  int want = threads_ > 0 ? threads_
                          : static_cast<int>(std::thread::hardware_concurrency());
  const bool parallel = !bit_exact_ && want > 1 && n_chunks > 1;

  double loss_sum = 0.0;
  if (!parallel) {
    for (std::size_t qi = 0; qi < n_queries; ++qi)
      loss_sum += eval_query(m, qi, grad);
  } else {
    std::vector<double> chunk_vals(n_chunks, 0.0);
    std::vector<std::vector<double>> chunk_grads(
        n_chunks, std::vector<double>(n_params_, 0.0));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      functionals::Model local = m;
      for (std::size_t c = next.fetch_add(1); c < n_chunks;
           c = next.fetch_add(1)) {
        std::size_t begin = c * kChunk;
        std::size_t end = std::min(begin + kChunk, n_queries);
        for (std::size_t qi = begin; qi < end; ++qi)
          chunk_vals[c] += eval_query(local, qi, chunk_grads[c]);
      }
    };
    std::vector<std::thread> pool;
    int n_workers = std::min<std::size_t>(want, n_chunks);
    pool.reserve(n_workers);
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    // Ascending-chunk combination keeps the reduction order fixed.
    for (std::size_t c = 0; c < n_chunks; ++c) {
      loss_sum += chunk_vals[c];
      for (std::size_t i = 0; i < n_params_; ++i) grad[i] += chunk_grads[c][i];
    }
  }

  const double inv_d = 1.0 / static_cast<double>(n_queries);
  double value = loss_sum * inv_d;
  for (std::size_t i = 0; i < n_params_; ++i) {
    grad[i] *= inv_d;
    if (penalized_[i]) {
      value += 0.5 * lambda_ * x[i] * x[i];
      grad[i] += lambda_ * x[i];
    }
  }
  return value;
}

bool RiskEvaluator::smooth_at(std::span<const double> x) {
  functionals::Model m = model_;
  functionals::set_params(m, x);
  for (std::size_t qi = 0; qi < dataset_.queries.size(); ++qi) {
    auto scores = functionals::score_query(m, dataset_, dataset_.queries[qi]);
    if (!rankforge::smooth_at(spec_, scores, contexts_[qi])) return false;
  }
  return true;
}

functionals::Model RiskEvaluator::model_at(std::span<const double> x) const {
  functionals::Model m = model_;
  functionals::set_params(m, x);
  return m;
}

double risk(const functionals::Model& model, const data::Dataset& ds,
            const LossSpec& spec, double lambda) {
  RiskEvaluator evaluator(model, ds, spec, lambda, /*bit_exact=*/true);
  std::vector<double> x(evaluator.dim()), g(evaluator.dim());
  functionals::get_params(model, x);
  return evaluator.eval(x, g);
}

std::pair<functionals::Model, TrainReport> train_model(
    functionals::Model initial, const data::Dataset& ds, const LossSpec& spec,
    const TrainConfig& cfg,
    const std::function<void(int, double, const functionals::Model&)>&
        on_iteration) {
  RiskEvaluator evaluator(std::move(initial), ds, spec, cfg.lambda,
                          cfg.bit_exact, cfg.threads);
  std::vector<double> x0(evaluator.dim());
  functionals::get_params(evaluator.model_template(), x0);

  std::function<void(int, double, std::span<const double>)> hook;
  if (on_iteration)
    hook = [&](int iter, double risk_value, std::span<const double> x) {
      on_iteration(iter, risk_value, evaluator.model_at(x));
    };
  auto result = lbfgs_minimize(evaluator, std::move(x0), cfg, hook);
  return {evaluator.model_at(result.x), std::move(result.report)};
}

GradCheckReport grad_check(const functionals::Model& model,
                           const data::Dataset& ds, const LossSpec& spec,
                           double lambda, int num_points, double h,
                           std::uint64_t seed) {
  if (h <= 0.0) throw ConfigError("finite-difference step must be positive");
  RiskEvaluator evaluator(model, ds, spec, lambda, /*bit_exact=*/true);
  const std::size_t n = evaluator.dim();
  Rng rng(seed);

  GradCheckReport report;
  std::vector<double> x(n), g(n), scratch(n);
  for (int p = 0; p < num_points; ++p) {
    for (auto& xi : x) xi = rng.normal(0.0, 0.5);
    std::size_t k = rng.below(n);
    if (!evaluator.smooth_at(x)) {
      ++report.skipped;
      continue;
    }
    double analytic;
    {
      double unused = evaluator.eval(x, g);
      (void)unused;
      analytic = g[k];
    }
    double saved = x[k];
    x[k] = saved + h;
    double fp = evaluator.eval(x, scratch);
    x[k] = saved - h;
    double fm = evaluator.eval(x, scratch);
    x[k] = saved;
    double fd = (fp - fm) / (2.0 * h);
    double rel = std::fabs(fd - analytic) / std::max(1.0, std::fabs(analytic));
    report.max_rel_error = std::max(report.max_rel_error, rel);
    ++report.checked;
  }
  return report;
}

}  // namespace rankforge::optimizer
