#include "rankforge/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rankforge/error.hpp"

namespace rankforge::model_io {

namespace {

using functionals::BilinearSigmoidModel;
using functionals::LinearModel;
using functionals::Matrix;
using functionals::MetricModel;
using functionals::Model;
using functionals::QuadraticModel;
using functionals::Squash;

double read_value(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw ParseError(std::string("model file truncated at ") + what);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("bad numeric value '" + tok + "' in model file");
  return v;
}

int read_int(std::istream& in, const char* what) {
  int v = 0;
  if (!(in >> v)) throw ParseError(std::string("model file truncated at ") + what);
  return v;
}

void write_matrix(const Matrix& m, std::ostream& out) {
  for (double v : m.values) out << format_double(v) << '\n';
}

Matrix read_matrix(std::istream& in, int rows, int cols) {
  Matrix m(rows, cols);
  for (double& v : m.values) v = read_value(in, "matrix entry");
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_model(const Model& m, std::ostream& out) {
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          out << "rankforge-model v1 linear " << model.weights.size() << '\n';
          out << format_double(model.bias) << '\n';
          for (double w : model.weights) out << format_double(w) << '\n';
        } else if constexpr (std::is_same_v<T, QuadraticModel>) {
          out << "rankforge-model v1 quad " << model.weights.size() << ' '
              << model.pair_index.size() << '\n';
          out << format_double(model.bias) << '\n';
          for (double w : model.weights) out << format_double(w) << '\n';
          for (std::size_t k = 0; k < model.pair_index.size(); ++k)
            out << model.pair_index[k].first << ' ' << model.pair_index[k].second
                << ' ' << format_double(model.pair_coeffs[k]) << '\n';
        } else if constexpr (std::is_same_v<T, BilinearSigmoidModel>) {
          out << "rankforge-model v1 bilinear " << model.A.rows << ' '
              << model.A.cols << ' ' << model.B.cols << ' '
              << (model.squash == Squash::sigmoid ? "sigmoid" : "tanh") << '\n';
          write_matrix(model.A, out);
          write_matrix(model.B, out);
        } else {
          out << "rankforge-model v1 metric " << model.A.rows << ' '
              << model.A.cols << ' ' << model.B.cols << ' '
              << format_double(model.tau) << '\n';
          write_matrix(model.A, out);
          write_matrix(model.B, out);
        }
      },
      m);
}

Model read_model(std::istream& in) {
  std::string magic, version, family;
  if (!(in >> magic >> version >> family) || magic != "rankforge-model")
    throw ParseError("not a rankforge model file");
  if (version != "v1")
    throw ParseError("unsupported model version '" + version + "'");

  if (family == "linear") {
    int m = read_int(in, "dimension");
    LinearModel model;
    model.bias = read_value(in, "bias");
    model.weights.resize(m);
    for (double& w : model.weights) w = read_value(in, "weight");
    return model;
  }
  if (family == "quad") {
    int m = read_int(in, "dimension");
    int p = read_int(in, "pair count");
    QuadraticModel model;
    model.bias = read_value(in, "bias");
    model.weights.resize(m);
    for (double& w : model.weights) w = read_value(in, "weight");
    model.pair_index.resize(p);
    model.pair_coeffs.resize(p);
    for (int k = 0; k < p; ++k) {
      int a = read_int(in, "pair index");
      int b = read_int(in, "pair index");
      if (a < 1 || b < a || b > m)
        throw ParseError("invalid feature pair (" + std::to_string(a) + ", " +
                         std::to_string(b) + ")");
      model.pair_index[k] = {a, b};
      model.pair_coeffs[k] = read_value(in, "pair coefficient");
    }
    return model;
  }
  if (family == "bilinear") {
    int d = read_int(in, "embedding dim");
    int n1 = read_int(in, "query dim");
    int n2 = read_int(in, "object dim");
    std::string squash;
    if (!(in >> squash) || (squash != "sigmoid" && squash != "tanh"))
      throw ParseError("bad squash kind in model header");
    BilinearSigmoidModel model;
    model.squash = squash == "sigmoid" ? Squash::sigmoid : Squash::tanh;
    model.A = read_matrix(in, d, n1);
    model.B = read_matrix(in, d, n2);
    return model;
  }
  if (family == "metric") {
    int d = read_int(in, "embedding dim");
    int n1 = read_int(in, "query dim");
    int n2 = read_int(in, "object dim");
    MetricModel model;
    model.tau = read_value(in, "tau");
    if (model.tau <= 0.0) throw ParseError("tau must be positive");
    model.A = read_matrix(in, d, n1);
    model.B = read_matrix(in, d, n2);
    return model;
  }
  throw ParseError("unknown model family '" + family + "'");
}

void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_model(m, out);
  if (!out) throw Error("failed writing model to '" + path + "'");
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  return read_model(in);
}

}  // namespace rankforge::model_io
