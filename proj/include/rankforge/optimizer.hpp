#ifndef RANKFORGE_OPTIMIZER_HPP
#define RANKFORGE_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rankforge/dataset.hpp"
#include "rankforge/functionals.hpp"
#include "rankforge/loss_spec.hpp"

namespace rankforge::optimizer {

struct TrainConfig {
  double lambda = 0.1;      // Gaussian-prior strength (bias exempt)
  int max_iters = 200;
  int memory = 10;          // L-BFGS history length
  double grad_tol = 1e-6;   // infinity-norm stopping threshold
  std::uint64_t seed = 0;   // parameter initialization
  bool bit_exact = false;   // force the sequential reduction order
  int threads = 0;          // 0: hardware concurrency
};

struct TrainReport {
  double final_risk = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  std::vector<double> risk_trace;  // per accepted iteration, non-increasing
};

// Differentiable objective over a flat parameter vector.
class Objective {
 public:
  virtual ~Objective() = default;
  // Returns f(x) and writes df/dx into grad (same length as x).
  virtual double eval(std::span<const double> x, std::span<double> grad) = 0;
};

struct MinimizeResult {
  std::vector<double> x;
  TrainReport report;
};

// Limited-memory BFGS (two-loop recursion) with a strong Wolfe line search
// (c1 = 1e-4, c2 = 0.9, cubic interpolation). Throws NumericError when the
// objective turns non-finite.
MinimizeResult lbfgs_minimize(
    Objective& objective, std::vector<double> x0, const TrainConfig& cfg,
    const std::function<void(int, double, std::span<const double>)>&
        on_iteration = {});

// Regularized empirical risk of one model/loss pair:
//   (1/D) sum_q loss_q + lambda/2 ||theta||^2 (bias excluded).
class RiskEvaluator : public Objective {
 public:
  RiskEvaluator(functionals::Model model_template, const data::Dataset& ds,
                LossSpec spec, double lambda, bool bit_exact = false,
                int threads = 0);

  double eval(std::span<const double> x, std::span<double> grad) override;

  // True when every per-query loss is differentiable in a neighborhood of x.
  bool smooth_at(std::span<const double> x);

  const functionals::Model& model_template() const { return model_; }
  functionals::Model model_at(std::span<const double> x) const;
  std::size_t dim() const { return n_params_; }

 private:
  double eval_query(const functionals::Model& m, std::size_t qi,
                    std::span<double> grad) const;

  functionals::Model model_;
  const data::Dataset& dataset_;
  LossSpec spec_;
  double lambda_;
  bool bit_exact_;
  int threads_;
  std::size_t n_params_;
  std::vector<bool> penalized_;
  std::vector<QueryContext> contexts_;
};

double risk(const functionals::Model& model, const data::Dataset& ds,
            const LossSpec& spec, double lambda);

// Convenience wrapper: random N(0, 0.01) init, minimize, return the model.
std::pair<functionals::Model, TrainReport> train_model(
    functionals::Model initial, const data::Dataset& ds, const LossSpec& spec,
    const TrainConfig& cfg,
    const std::function<void(int, double, const functionals::Model&)>&
        on_iteration = {});

struct GradCheckReport {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;  // coordinates at non-smooth points
};

// Central-difference probe at num_points random (parameter, coordinate)
// draws; relative error uses the max(1, |analytic|) denominator.
GradCheckReport grad_check(const functionals::Model& model,
                           const data::Dataset& ds, const LossSpec& spec,
                           double lambda, int num_points, double h,
                           std::uint64_t seed);

}  // namespace rankforge::optimizer

#endif  // RANKFORGE_OPTIMIZER_HPP
