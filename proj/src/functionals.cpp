#include "rankforge/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankforge/error.hpp"
#include "rankforge/rng.hpp"

namespace rankforge::functionals {

namespace {

double squash_value(Squash s, double u) {
  return s == Squash::sigmoid ? 1.0 / (1.0 + std::exp(-u)) : std::tanh(u);
}

double squash_deriv(Squash s, double value) {
  // Both derivatives are expressible in the squashed value itself.
  return s == Squash::sigmoid ? value * (1.0 - value) : 1.0 - value * value;
}

// u = M v for sparse v (1-based ids bounded by M.cols).
std::vector<double> matvec(const Matrix& m, const SparseVector& v) {
  std::vector<double> out(m.rows, 0.0);
  for (const auto& [fid, val] : v.entries) {
    if (fid > m.cols)
      throw ConfigError("feature id " + std::to_string(fid) +
                        " exceeds model dimension " + std::to_string(m.cols));
    for (int r = 0; r < m.rows; ++r) out[r] += m.at(r, fid - 1) * val;
  }
  return out;
}

void check_dim(int max_id, int dim, const char* what) {
  if (max_id > dim)
    throw ConfigError(std::string(what) + " dimension mismatch: feature id " +
                      std::to_string(max_id) + " > " + std::to_string(dim));
}

}  // namespace

Family family_of(const Model& m) {
  switch (m.index()) {
    case 0: return Family::linear;
    case 1: return Family::quad;
    case 2: return Family::bilinear;
    default: return Family::metric;
  }
}

std::string family_name(Family f) {
  switch (f) {
    case Family::linear: return "linear";
    case Family::quad: return "quad";
    case Family::bilinear: return "bilinear";
    case Family::metric: return "metric";
  }
  return "?";
}

data::Representation representation_of(Family f) {
  return (f == Family::linear || f == Family::quad)
             ? data::Representation::combined
             : data::Representation::separate;
}

double score(const LinearModel& m, const SparseVector& x) {
  check_dim(x.max_id(), static_cast<int>(m.weights.size()), "linear model");
  double s = m.bias;
  for (const auto& [fid, val] : x.entries) s += m.weights[fid - 1] * val;
  return s;
}

double score(const QuadraticModel& m, const SparseVector& x) {
  check_dim(x.max_id(), static_cast<int>(m.weights.size()), "quadratic model");
  double s = m.bias;
  for (const auto& [fid, val] : x.entries) s += m.weights[fid - 1] * val;
  for (std::size_t k = 0; k < m.pair_index.size(); ++k) {
    const auto& [a, b] = m.pair_index[k];
    s += m.pair_coeffs[k] * x.get(a) * x.get(b);
  }
  return s;
}

double score(const BilinearSigmoidModel& m, const SparseVector& y,
             const SparseVector& z) {
  auto u = matvec(m.A, y);
  auto v = matvec(m.B, z);
  double s = 0.0;
  for (int r = 0; r < m.A.rows; ++r) s += squash_value(m.squash, u[r]) * v[r];
  return s;
}

double score(const MetricModel& m, const SparseVector& y,
             const SparseVector& z) {
  auto u = matvec(m.A, y);
  auto v = matvec(m.B, z);
  double sq = 0.0;
  for (int r = 0; r < m.A.rows; ++r) {
    double e = u[r] - v[r];
    sq += e * e;
  }
  return -sq / m.tau;
}

double score(const Model& m, const data::Dataset& ds, const data::Query& q,
             std::size_t instance_idx) {
  const auto& inst = q.instances[instance_idx];
  Family fam = family_of(m);
  if (representation_of(fam) != ds.repr)
    throw ConfigError(family_name(fam) + " model does not match the dataset representation");
  switch (fam) {
    case Family::linear: return score(std::get<LinearModel>(m), inst.features);
    case Family::quad: return score(std::get<QuadraticModel>(m), inst.features);
    case Family::bilinear:
      return score(std::get<BilinearSigmoidModel>(m), q.query_vec, inst.features);
    case Family::metric:
      return score(std::get<MetricModel>(m), q.query_vec, inst.features);
  }
  return 0.0;
}

std::vector<double> score_query(const Model& m, const data::Dataset& ds,
                                const data::Query& q) {
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = score(m, ds, q, i);
  return out;
}

std::size_t param_count(const Model& m) {
  return std::visit(
      [](const auto& model) -> std::size_t {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LinearModel>)
          return 1 + model.weights.size();
        else if constexpr (std::is_same_v<T, QuadraticModel>)
          return 1 + model.weights.size() + model.pair_coeffs.size();
        else
          return model.A.values.size() + model.B.values.size();
      },
      m);
}

void get_params(const Model& m, std::span<double> out) {
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        std::size_t k = 0;
        if constexpr (std::is_same_v<T, LinearModel>) {
          out[k++] = model.bias;
          for (double w : model.weights) out[k++] = w;
        } else if constexpr (std::is_same_v<T, QuadraticModel>) {
          out[k++] = model.bias;
          for (double w : model.weights) out[k++] = w;
          for (double c : model.pair_coeffs) out[k++] = c;
        } else {
          for (double a : model.A.values) out[k++] = a;
          for (double b : model.B.values) out[k++] = b;
        }
      },
      m);
}

void set_params(Model& m, std::span<const double> in) {
  std::visit(
      [&](auto& model) {
        using T = std::decay_t<decltype(model)>;
        std::size_t k = 0;
        if constexpr (std::is_same_v<T, LinearModel>) {
          model.bias = in[k++];
          for (double& w : model.weights) w = in[k++];
        } else if constexpr (std::is_same_v<T, QuadraticModel>) {
          model.bias = in[k++];
          for (double& w : model.weights) w = in[k++];
          for (double& c : model.pair_coeffs) c = in[k++];
        } else {
          for (double& a : model.A.values) a = in[k++];
          for (double& b : model.B.values) b = in[k++];
        }
      },
      m);
}

std::vector<bool> penalty_mask(const Model& m) {
  std::vector<bool> mask(param_count(m), true);
  Family fam = family_of(m);
  if (fam == Family::linear || fam == Family::quad) mask[0] = false;
  return mask;
}

void accumulate_score_grad(const Model& m, const data::Dataset& ds,
                           const data::Query& q, std::size_t instance_idx,
                           double weight, std::span<double> grad) {
  const auto& inst = q.instances[instance_idx];
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          grad[0] += weight;
          for (const auto& [fid, val] : inst.features.entries)
            grad[fid] += weight * val;
        } else if constexpr (std::is_same_v<T, QuadraticModel>) {
          grad[0] += weight;
          for (const auto& [fid, val] : inst.features.entries)
            grad[fid] += weight * val;
          std::size_t base = 1 + model.weights.size();
          for (std::size_t k = 0; k < model.pair_index.size(); ++k) {
            const auto& [a, b] = model.pair_index[k];
            grad[base + k] += weight * inst.features.get(a) * inst.features.get(b);
          }
        } else if constexpr (std::is_same_v<T, BilinearSigmoidModel>) {
          auto u = matvec(model.A, q.query_vec);
          auto v = matvec(model.B, inst.features);
          const std::size_t a_size = model.A.values.size();
          for (int r = 0; r < model.A.rows; ++r) {
            double s = squash_value(model.squash, u[r]);
            double ds_du = squash_deriv(model.squash, s);
            // dA_{r,l} = squash'(u_r) * v_r * y_l ; dB_{r,l} = squash(u_r) * z_l
            for (const auto& [fid, val] : q.query_vec.entries)
              grad[static_cast<std::size_t>(r) * model.A.cols + fid - 1] +=
                  weight * ds_du * v[r] * val;
            for (const auto& [fid, val] : inst.features.entries)
              grad[a_size + static_cast<std::size_t>(r) * model.B.cols + fid - 1] +=
                  weight * s * val;
          }
        } else {
          auto u = matvec(model.A, q.query_vec);
          auto v = matvec(model.B, inst.features);
          const std::size_t a_size = model.A.values.size();
          const double c = 2.0 / model.tau;
          for (int r = 0; r < model.A.rows; ++r) {
            double e = u[r] - v[r];
            for (const auto& [fid, val] : q.query_vec.entries)
              grad[static_cast<std::size_t>(r) * model.A.cols + fid - 1] -=
                  weight * c * e * val;
            for (const auto& [fid, val] : inst.features.entries)
              grad[a_size + static_cast<std::size_t>(r) * model.B.cols + fid - 1] +=
                  weight * c * e * val;
          }
        }
      },
      m);
  (void)ds;
}

Model init_model(Family family, int m, int embed_dim, int n1, int n2,
                 std::uint64_t seed, Squash squash, double tau,
                 std::vector<std::pair<int, int>> pairs) {
  Rng rng(seed);
  auto draw = [&] { return rng.normal(0.0, 0.01); };
  switch (family) {
    case Family::linear: {
      LinearModel model;
      model.bias = draw();
      model.weights.resize(m);
      for (double& w : model.weights) w = draw();
      return model;
    }
    case Family::quad: {
      QuadraticModel model;
      model.bias = draw();
      model.weights.resize(m);
      for (double& w : model.weights) w = draw();
      model.pair_index = std::move(pairs);
      model.pair_coeffs.resize(model.pair_index.size());
      for (double& c : model.pair_coeffs) c = draw();
      return model;
    }
    case Family::bilinear: {
      BilinearSigmoidModel model;
      model.A = Matrix(embed_dim, n1);
      model.B = Matrix(embed_dim, n2);
      model.squash = squash;
      for (double& a : model.A.values) a = draw();
      for (double& b : model.B.values) b = draw();
      return model;
    }
    case Family::metric: {
      MetricModel model;
      model.A = Matrix(embed_dim, n1);
      model.B = Matrix(embed_dim, n2);
      if (tau <= 0.0) throw ConfigError("tau must be positive");
      model.tau = tau;
      for (double& a : model.A.values) a = draw();
      for (double& b : model.B.values) b = draw();
      return model;
    }
  }
  throw ConfigError("unknown model family");
}

double pearson(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw ConfigError("pearson requires equal-length sequences");
  if (u.size() < 2)
    throw ConfigError("pearson requires at least two observations");
  const double n = static_cast<double>(u.size());
  double mu = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    mu += u[i];
    mv += v[i];
  }
  mu /= n;
  mv /= n;
  double suv = 0.0, suu = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double du = u[i] - mu;
    double dv = v[i] - mv;
    suv += du * dv;
    suu += du * du;
    svv += dv * dv;
  }
  if (suu <= 0.0 || svv <= 0.0)
    throw Error("pearson correlation undefined for constant input");
  return suv / (std::sqrt(suu) * std::sqrt(svv));
}

std::vector<std::pair<int, int>> select_second_order(const data::Dataset& ds,
                                                     double rho) {
  if (ds.repr != data::Representation::combined)
    throw ConfigError("second-order selection requires the combined representation");
  if (rho < 0.0 || rho >= 1.0)
    throw ConfigError("rho must lie in [0, 1)");

  const int m = ds.feature_dim;
  const std::size_t n = ds.total_instances();

  // Dense column matrix; desk-scale datasets keep this small.
  std::vector<std::vector<double>> cols(m, std::vector<double>(n, 0.0));
  std::vector<double> ratings(n);
  std::size_t row = 0;
  for (const auto& q : ds.queries)
    for (const auto& inst : q.instances) {
      for (const auto& [fid, val] : inst.features.entries)
        cols[fid - 1][row] = val;
      ratings[row] = inst.rating;
      ++row;
    }

  auto variance_positive = [&](const std::vector<double>& c) {
    double mean = 0.0;
    for (double x : c) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : c) ss += (x - mean) * (x - mean);
    return ss > 0.0;
  };
  if (!variance_positive(ratings)) return {};

  std::vector<bool> live(m, false);
  for (int a = 0; a < m; ++a) live[a] = variance_positive(cols[a]);

  std::vector<std::pair<int, int>> selected;
  std::vector<double> product(n);
  for (int a = 0; a < m; ++a) {
    if (!live[a]) continue;
    for (int b = a; b < m; ++b) {
      if (!live[b]) continue;
      for (std::size_t i = 0; i < n; ++i) product[i] = cols[a][i] * cols[b][i];
      if (!variance_positive(product)) continue;
      double c = pearson(product, ratings);
      if (std::abs(c) >= rho) selected.emplace_back(a + 1, b + 1);
    }
  }
  return selected;
}

double group_score(Aggregation kind, std::span<const double> member_scores) {
  if (member_scores.empty()) throw Error("group_score requires a nonempty group");
  switch (kind) {
    case Aggregation::min:
      return *std::min_element(member_scores.begin(), member_scores.end());
    case Aggregation::max:
      return *std::max_element(member_scores.begin(), member_scores.end());
    case Aggregation::arithmetic_mean: {
      double s = 0.0;
      for (double f : member_scores) s += f;
      return s / static_cast<double>(member_scores.size());
    }
    case Aggregation::geometric_mean: {
      // log((1/K) sum exp f_j), max-shifted.
      double mx = *std::max_element(member_scores.begin(), member_scores.end());
      double s = 0.0;
      for (double f : member_scores) s += std::exp(f - mx);
      return mx + std::log(s / static_cast<double>(member_scores.size()));
    }
  }
  throw Error("unknown aggregation kind");
}

std::vector<double> group_score_grad(Aggregation kind,
                                     std::span<const double> member_scores) {
  if (member_scores.empty()) throw Error("group_score requires a nonempty group");
  const std::size_t k = member_scores.size();
  std::vector<double> g(k, 0.0);
  switch (kind) {
    case Aggregation::min:
      g[std::min_element(member_scores.begin(), member_scores.end()) -
        member_scores.begin()] = 1.0;
      break;
    case Aggregation::max:
      g[std::max_element(member_scores.begin(), member_scores.end()) -
        member_scores.begin()] = 1.0;
      break;
    case Aggregation::arithmetic_mean:
      std::fill(g.begin(), g.end(), 1.0 / static_cast<double>(k));
      break;
    case Aggregation::geometric_mean: {
      double mx = *std::max_element(member_scores.begin(), member_scores.end());
      double denom = 0.0;
      for (double f : member_scores) denom += std::exp(f - mx);
      for (std::size_t j = 0; j < k; ++j)
        g[j] = std::exp(member_scores[j] - mx) / denom;
      break;
    }
  }
  return g;
}

}  // namespace rankforge::functionals
