#ifndef RANKFORGE_FUNCTIONALS_HPP
#define RANKFORGE_FUNCTIONALS_HPP

#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rankforge/dataset.hpp"

namespace rankforge::functionals {

using data::SparseVector;

// f(x) = bias + w'x on the combined representation.
struct LinearModel {
  double bias = 0.0;
  std::vector<double> weights;
};

// f(x) = bias + w'x + sum over selected pairs (a <= b) of c_ab * x_a * x_b.
// The pair support is sparse and fixed at selection time; each selected pair
// contributes exactly once (a == b gives the squared term).
struct QuadraticModel {
  double bias = 0.0;
  std::vector<double> weights;
  std::vector<std::pair<int, int>> pair_index;  // 1-based, a <= b
  std::vector<double> pair_coeffs;              // parallel to pair_index
};

// Dense row-major matrix, just large enough for the embedding models.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

enum class Squash { sigmoid, tanh };

// f(y, z) = squash(A y)' (B z) on the separate representation.
struct BilinearSigmoidModel {
  Matrix A;  // d x n1
  Matrix B;  // d x n2
  Squash squash = Squash::sigmoid;
};

// f(y, z) = -(1/tau) * ||A y - B z||^2. tau is a fixed hyperparameter.
struct MetricModel {
  Matrix A;
  Matrix B;
  double tau = 1.0;
};

using Model = std::variant<LinearModel, QuadraticModel, BilinearSigmoidModel,
                           MetricModel>;

enum class Family { linear, quad, bilinear, metric };

Family family_of(const Model& m);
std::string family_name(Family f);
data::Representation representation_of(Family f);

double score(const LinearModel& m, const SparseVector& x);
double score(const QuadraticModel& m, const SparseVector& x);
double score(const BilinearSigmoidModel& m, const SparseVector& y,
             const SparseVector& z);
double score(const MetricModel& m, const SparseVector& y,
             const SparseVector& z);

// Dispatches on family and validates the representation.
double score(const Model& m, const data::Dataset& ds, const data::Query& q,
             std::size_t instance_idx);
std::vector<double> score_query(const Model& m, const data::Dataset& ds,
                                const data::Query& q);

// Flat parameter vector layout per family:
//   linear:   [bias, w_1..w_m]
//   quad:     [bias, w_1..w_m, c_1..c_P]
//   bilinear: [A row-major, B row-major]
//   metric:   [A row-major, B row-major]          (tau is not trained)
std::size_t param_count(const Model& m);
void get_params(const Model& m, std::span<double> out);
void set_params(Model& m, std::span<const double> in);

// true for parameters subject to the Gaussian penalty (the bias is exempt).
std::vector<bool> penalty_mask(const Model& m);

// Adds weight * d score / d theta for one instance into grad (flat layout).
void accumulate_score_grad(const Model& m, const data::Dataset& ds,
                           const data::Query& q, std::size_t instance_idx,
                           double weight, std::span<double> grad);

// Fresh model with N(0, 0.01) parameters. dims: (m) for combined families,
// (d, n1, n2) for separate ones.
Model init_model(Family family, int m, int embed_dim, int n1, int n2,
                 std::uint64_t seed, Squash squash = Squash::sigmoid,
                 double tau = 1.0,
                 std::vector<std::pair<int, int>> pairs = {});

// Pearson correlation of two equal-length sequences, per the textbook
// centered formula. Throws on constant input.
double pearson(std::span<const double> u, std::span<const double> v);

// Second-order feature selection: all pairs a <= b over nonconstant feature
// columns whose product column has |corr(x_a * x_b, rating)| >= rho.
// Zero-variance product columns are dropped.
std::vector<std::pair<int, int>> select_second_order(const data::Dataset& ds,
                                                     double rho);

enum class Aggregation { min, max, arithmetic_mean, geometric_mean };

// Tie-group score per aggregation kind; geometric_mean is log-mean-exp with
// a max shift.
double group_score(Aggregation kind, std::span<const double> member_scores);

// d group_score / d member. min/max attribute everything to the first
// extremal member.
std::vector<double> group_score_grad(Aggregation kind,
                                     std::span<const double> member_scores);

}  // namespace rankforge::functionals

#endif  // RANKFORGE_FUNCTIONALS_HPP
