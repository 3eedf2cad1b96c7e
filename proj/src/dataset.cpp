#include "rankforge/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "rankforge/error.hpp"
#include "rankforge/rng.hpp"

namespace rankforge::data {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& msg) {
  throw ParseError("line " + std::to_string(line_no) + ": " + msg);
}

// Splits on runs of spaces/tabs, dropping everything from '#' on.
std::vector<std::string> tokenize(const std::string& raw) {
  std::string line = raw;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (auto hash = line.find('#'); hash != std::string::npos)
    line.erase(hash);
  std::vector<std::string> toks;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) toks.push_back(line.substr(start, i - start));
  }
  return toks;
}

int parse_int(const std::string& tok, std::size_t line_no, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    fail_line(line_no, std::string("expected ") + what + ", got '" + tok + "'");
  return value;
}

double parse_real(const std::string& tok, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    fail_line(line_no, "expected real value, got '" + tok + "'");
  return value;
}

// Parses `<fid>:<val>` tokens into a sparse vector, rejecting duplicates.
SparseVector parse_features(const std::vector<std::string>& toks,
                            std::size_t first, std::size_t line_no) {
  SparseVector vec;
  for (std::size_t t = first; t < toks.size(); ++t) {
    auto colon = toks[t].find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == toks[t].size())
      fail_line(line_no, "malformed feature token '" + toks[t] + "'");
    int fid = parse_int(toks[t].substr(0, colon), line_no, "feature id");
    if (fid <= 0) fail_line(line_no, "feature ids must be positive");
    double val = parse_real(toks[t].substr(colon + 1), line_no);
    vec.push(fid, val);
  }
  std::stable_sort(vec.entries.begin(), vec.entries.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < vec.entries.size(); ++i)
    if (vec.entries[i].first == vec.entries[i - 1].first)
      fail_line(line_no, "duplicate feature id " +
                             std::to_string(vec.entries[i].first));
  return vec;
}

struct InstanceLine {
  std::string qid;
  Instance inst;
};

// One `<rating> qid:<qid> <fid>:<val>...` line, or nullopt for blank lines.
std::optional<InstanceLine> parse_instance_line(const std::string& raw,
                                                std::size_t line_no) {
  auto toks = tokenize(raw);
  if (toks.empty()) return std::nullopt;
  if (toks.size() < 2) fail_line(line_no, "expected '<rating> qid:<qid> ...'");
  InstanceLine out;
  out.inst.rating = parse_int(toks[0], line_no, "integer rating");
  if (out.inst.rating < 0) fail_line(line_no, "ratings must be non-negative");
  if (toks[1].rfind("qid:", 0) != 0 || toks[1].size() == 4)
    fail_line(line_no, "expected qid:<id>, got '" + toks[1] + "'");
  out.qid = toks[1].substr(4);
  out.inst.features = parse_features(toks, 2, line_no);
  return out;
}

void finalize_levels(Dataset& ds, int max_rating, int override_levels) {
  if (override_levels > 0) {
    if (max_rating >= override_levels)
      throw ParseError("rating " + std::to_string(max_rating) +
                       " exceeds declared label-set size " +
                       std::to_string(override_levels));
    ds.num_levels = override_levels;
  } else {
    ds.num_levels = max_rating + 1;
  }
}

}  // namespace

double SparseVector::get(int id) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), id,
      [](const auto& e, int key) { return e.first < key; });
  return (it != entries.end() && it->first == id) ? it->second : 0.0;
}

std::size_t Dataset::total_instances() const {
  std::size_t n = 0;
  for (const auto& q : queries) n += q.size();
  return n;
}

Dataset parse_combined(std::istream& in, int num_levels_override) {
  Dataset ds;
  ds.repr = Representation::combined;
  std::unordered_map<std::string, std::size_t> qindex;
  std::string raw;
  std::size_t line_no = 0;
  int max_rating = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto parsed = parse_instance_line(raw, line_no);
    if (!parsed) continue;
    auto [it, fresh] = qindex.try_emplace(parsed->qid, ds.queries.size());
    if (fresh) ds.queries.push_back(Query{parsed->qid, {}, {}});
    ds.feature_dim = std::max(ds.feature_dim, parsed->inst.features.max_id());
    max_rating = std::max(max_rating, parsed->inst.rating);
    ds.queries[it->second].instances.push_back(std::move(parsed->inst));
  }
  if (ds.queries.empty()) throw ParseError("empty dataset stream");
  finalize_levels(ds, max_rating, num_levels_override);
  return ds;
}

Dataset parse_separate(std::istream& query_file, std::istream& triples,
                       int num_levels_override) {
  std::unordered_map<std::string, SparseVector> qvecs;
  std::string raw;
  std::size_t line_no = 0;
  int query_dim = 0;
  while (std::getline(query_file, raw)) {
    ++line_no;
    auto toks = tokenize(raw);
    if (toks.empty()) continue;
    const std::string& qid = toks[0];
    if (qid.find(':') != std::string::npos)
      fail_line(line_no, "expected '<qid> <fid>:<val>...'");
    SparseVector vec = parse_features(toks, 1, line_no);
    query_dim = std::max(query_dim, vec.max_id());
    if (!qvecs.emplace(qid, std::move(vec)).second)
      fail_line(line_no, "duplicate query definition '" + qid + "'");
  }
  if (qvecs.empty()) throw ParseError("empty query-vector stream");

  Dataset ds;
  ds.repr = Representation::separate;
  ds.query_dim = query_dim;
  std::unordered_map<std::string, std::size_t> qindex;
  line_no = 0;
  int max_rating = 0;
  while (std::getline(triples, raw)) {
    ++line_no;
    auto parsed = parse_instance_line(raw, line_no);
    if (!parsed) continue;
    auto vec_it = qvecs.find(parsed->qid);
    if (vec_it == qvecs.end())
      fail_line(line_no, "unknown query id '" + parsed->qid + "'");
    auto [it, fresh] = qindex.try_emplace(parsed->qid, ds.queries.size());
    if (fresh) ds.queries.push_back(Query{parsed->qid, vec_it->second, {}});
    ds.feature_dim = std::max(ds.feature_dim, parsed->inst.features.max_id());
    max_rating = std::max(max_rating, parsed->inst.rating);
    ds.queries[it->second].instances.push_back(std::move(parsed->inst));
  }
  if (ds.queries.empty()) throw ParseError("empty triples stream");
  finalize_levels(ds, max_rating, num_levels_override);
  return ds;
}

namespace {

void write_feature_tokens(const SparseVector& vec, std::ostream& out) {
  for (const auto& [fid, val] : vec.entries)
    out << ' ' << fid << ':' << format_double(val);
}

void write_instance_lines(const Dataset& ds, std::ostream& out) {
  for (const auto& q : ds.queries) {
    for (const auto& inst : q.instances) {
      out << inst.rating << " qid:" << q.id;
      write_feature_tokens(inst.features, out);
      out << '\n';
    }
  }
}

}  // namespace

void write_combined(const Dataset& ds, std::ostream& out) {
  if (ds.repr != Representation::combined)
    throw ConfigError("write_combined requires the combined representation");
  write_instance_lines(ds, out);
}

void write_separate(const Dataset& ds, std::ostream& query_file,
                    std::ostream& triples) {
  if (ds.repr != Representation::separate)
    throw ConfigError("write_separate requires the separate representation");
  for (const auto& q : ds.queries) {
    query_file << q.id;
    write_feature_tokens(q.query_vec, query_file);
    query_file << '\n';
  }
  write_instance_lines(ds, triples);
}

NormalizationStats zscore_normalize(Dataset& ds) {
  if (ds.repr != Representation::combined)
    throw ConfigError("z-score normalization requires the combined representation");
  if (ds.queries.empty()) throw ConfigError("cannot normalize an empty dataset");
  const int m = ds.feature_dim;
  const double n = static_cast<double>(ds.total_instances());

  std::vector<double> sum(m, 0.0), sumsq(m, 0.0);
  for (const auto& q : ds.queries)
    for (const auto& inst : q.instances)
      for (const auto& [fid, val] : inst.features.entries) {
        sum[fid - 1] += val;
        sumsq[fid - 1] += val * val;
      }

  NormalizationStats stats;
  stats.mean.resize(m);
  stats.stddev.resize(m);
  for (int j = 0; j < m; ++j) {
    stats.mean[j] = sum[j] / n;
    double var = sumsq[j] / n - stats.mean[j] * stats.mean[j];
    stats.stddev[j] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  apply_normalization(ds, stats);
  return stats;
}

void apply_normalization(Dataset& ds, const NormalizationStats& stats) {
  if (ds.repr != Representation::combined)
    throw ConfigError("normalization requires the combined representation");
  const int m = static_cast<int>(stats.mean.size());
  if (ds.feature_dim > m)
    throw ConfigError("dataset has feature id " + std::to_string(ds.feature_dim) +
                      " beyond the normalization statistics (" +
                      std::to_string(m) + ")");
  for (auto& q : ds.queries)
    for (auto& inst : q.instances) {
      // Zeros shift to -mean/std, so normalized instances go dense.
      SparseVector dense;
      dense.entries.reserve(m);
      auto it = inst.features.entries.begin();
      for (int fid = 1; fid <= m; ++fid) {
        double raw = 0.0;
        if (it != inst.features.entries.end() && it->first == fid)
          raw = (it++)->second;
        double z = stats.stddev[fid - 1] > 0.0
                       ? (raw - stats.mean[fid - 1]) / stats.stddev[fid - 1]
                       : 0.0;
        dense.push(fid, z);
      }
      inst.features = std::move(dense);
    }
  ds.feature_dim = m;
  ds.norm_stats = stats;
}

void write_stats(const NormalizationStats& stats, std::ostream& out) {
  out << "rankforge-stats v1 " << stats.mean.size() << '\n';
  for (std::size_t j = 0; j < stats.mean.size(); ++j)
    out << format_double(stats.mean[j]) << ' ' << format_double(stats.stddev[j])
        << '\n';
}

NormalizationStats read_stats(std::istream& in) {
  std::string word, version;
  std::size_t m = 0;
  in >> word >> version >> m;
  if (!in || word != "rankforge-stats" || version != "v1")
    throw ParseError("bad normalization-stats header");
  NormalizationStats stats;
  stats.mean.resize(m);
  stats.stddev.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    in >> stats.mean[j] >> stats.stddev[j];
    if (!in) throw ParseError("truncated normalization-stats file");
  }
  return stats;
}

std::vector<int> true_positions(const Query& q) {
  const std::size_t n = q.size();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return q.instances[a].rating > q.instances[b].rating;
  });
  std::vector<int> pos(n);
  for (std::size_t p = 0; p < n; ++p) pos[idx[p]] = static_cast<int>(p) + 1;
  return pos;
}

std::vector<int> order_from_positions(const std::vector<int>& positions) {
  std::vector<int> order(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    order[positions[i] - 1] = static_cast<int>(i);
  return order;
}

namespace {

Dataset synth_sample(const PlantedModel& planted, int num_queries,
                     int docs_per_query, int dim, double noise_sd,
                     std::uint64_t seed, int num_levels) {
  if (num_queries <= 0 || docs_per_query <= 0)
    throw ConfigError("synthesize requires positive counts");
  if (dim <= 0) throw ConfigError("synthesize requires dim >= 1");
  if (num_levels < 1) throw ConfigError("synthesize requires num_levels >= 1");

  Rng rng(seed);
  Dataset ds;
  ds.repr = Representation::combined;
  ds.feature_dim = dim;
  ds.num_levels = num_levels;
  ds.queries.reserve(num_queries);

  for (int qi = 0; qi < num_queries; ++qi) {
    Query q;
    q.id = "q" + std::to_string(qi + 1);
    std::vector<double> latent(docs_per_query);
    for (int di = 0; di < docs_per_query; ++di) {
      Instance inst;
      inst.features.entries.reserve(dim);
      double score = 0.0;
      for (int f = 0; f < dim; ++f) {
        double v = rng.normal();
        inst.features.push(f + 1, v);
        score += planted.weights[f] * v;
      }
      for (const auto& [a, b, c] : planted.pair_terms)
        score += c * inst.features.get(a) * inst.features.get(b);
      if (noise_sd > 0.0) score += rng.normal(0.0, noise_sd);
      latent[di] = score;
      q.instances.push_back(std::move(inst));
    }
    // Quantile binning: ascending-latent rank p gets level p*L/N.
    std::vector<int> idx(docs_per_query);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return latent[a] < latent[b]; });
    for (int p = 0; p < docs_per_query; ++p)
      q.instances[idx[p]].rating =
          static_cast<int>((static_cast<long long>(p) * num_levels) /
                           docs_per_query);
    ds.queries.push_back(std::move(q));
  }
  return ds;
}

}  // namespace

std::pair<Dataset, PlantedModel> synthesize(const SynthConfig& cfg) {
  if (cfg.dim <= 0) throw ConfigError("synthesize requires dim >= 1");
  PlantedModel planted;
  Rng rng(cfg.seed);
  planted.weights.resize(cfg.dim);
  for (auto& w : planted.weights) w = rng.normal();
  for (int k = 0; k < cfg.interaction_pairs; ++k) {
    if (cfg.dim < 2) throw ConfigError("interaction pairs require dim >= 2");
    int a = 0, b = 0;
    do {
      a = static_cast<int>(rng.below(cfg.dim)) + 1;
      b = static_cast<int>(rng.below(cfg.dim)) + 1;
    } while (a == b);
    if (a > b) std::swap(a, b);
    planted.pair_terms.emplace_back(a, b, rng.normal() * cfg.interaction_scale);
  }
  // Separate stream for the samples keeps the planted model stable under
  // resampling with a shifted seed.
  Dataset ds = synth_sample(planted, cfg.num_queries, cfg.docs_per_query,
                            cfg.dim, cfg.noise_sd, cfg.seed + 0x9e3779b97f4a7c15ULL,
                            cfg.num_levels);
  return {std::move(ds), std::move(planted)};
}

Dataset synthesize_with_planted(const PlantedModel& planted, int num_queries,
                                int docs_per_query, double noise_sd,
                                std::uint64_t seed, int num_levels) {
  return synth_sample(planted, num_queries, docs_per_query,
                      static_cast<int>(planted.weights.size()), noise_sd,
                      seed + 0x9e3779b97f4a7c15ULL, num_levels);
}

}  // namespace rankforge::data
