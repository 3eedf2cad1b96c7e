#ifndef RANKFORGE_DATASET_HPP
#define RANKFORGE_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rankforge::data {

// Sparse real vector with strictly positive, strictly increasing feature ids
// (LETOR convention: ids are 1-based).
struct SparseVector {
  std::vector<std::pair<int, double>> entries;

  double get(int id) const;
  int max_id() const { return entries.empty() ? 0 : entries.back().first; }
  void push(int id, double value) { entries.emplace_back(id, value); }

  bool operator==(const SparseVector&) const = default;
};

// One rated object. In the combined representation `features` holds the
// query-object vector x; in the separate representation it holds the object
// vector z_o and the owning Query carries the query vector y_q.
struct Instance {
  SparseVector features;
  int rating = 0;

  bool operator==(const Instance&) const = default;
};

struct Query {
  std::string id;
  SparseVector query_vec;  // separate representation only
  std::vector<Instance> instances;

  std::size_t size() const { return instances.size(); }
  bool operator==(const Query&) const = default;
};

enum class Representation { combined, separate };

// Per-feature column statistics, indexed by feature id - 1. Absent features
// count as zeros when the statistics are computed.
struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std; 0 marks a constant column

  bool operator==(const NormalizationStats&) const = default;
};

struct Dataset {
  Representation repr = Representation::combined;
  std::vector<Query> queries;
  int num_levels = 1;
  int feature_dim = 0;  // m (combined) or n2, the object dimension (separate)
  int query_dim = 0;    // n1 (separate only)
  std::optional<NormalizationStats> norm_stats;

  std::size_t num_queries() const { return queries.size(); }
  std::size_t total_instances() const;
};

// Parses the combined one-line-per-instance format:
//   <rating> qid:<qid> <fid>:<val> ... [# comment]
// Lines are grouped into queries by qid in order of first appearance,
// preserving instance file order. num_levels_override = 0 infers
// max rating + 1.
Dataset parse_combined(std::istream& in, int num_levels_override = 0);

// Parses the separate representation: `query_file` lines are
// `<qid> <fid>:<val> ...`; `triples` uses the combined line format and
// supplies the object vectors.
Dataset parse_separate(std::istream& query_file, std::istream& triples,
                       int num_levels_override = 0);

// Writes the canonical combined form (features ordered by id, shortest
// round-trip decimal values). parse(write(parse(text))) == parse(text).
void write_combined(const Dataset& ds, std::ostream& out);
void write_separate(const Dataset& ds, std::ostream& query_file,
                    std::ostream& triples);

// In-place z-scoring of every feature column to mean 0 / population std 1
// over all training instances; constant columns map to 0. Normalized
// datasets store every feature id explicitly. Combined representation only.
NormalizationStats zscore_normalize(Dataset& ds);

// Applies training statistics to held-out data.
void apply_normalization(Dataset& ds, const NormalizationStats& stats);

void write_stats(const NormalizationStats& stats, std::ostream& out);
NormalizationStats read_stats(std::istream& in);

// Positions 1..N from a stable sort by descending rating, ties broken by
// ascending instance index. result[i] is the position of instance i.
std::vector<int> true_positions(const Query& q);

// Inverse of a 1-based position vector: result[p] = index ranked at p+1.
std::vector<int> order_from_positions(const std::vector<int>& positions);

struct SynthConfig {
  int num_queries = 0;
  int docs_per_query = 0;
  int dim = 0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  int num_levels = 5;
  // Optional planted pairwise interactions x_a * x_b in the latent score.
  int interaction_pairs = 0;
  double interaction_scale = 2.0;
};

struct PlantedModel {
  std::vector<double> weights;
  // (a, b, coefficient) with 1 <= a < b <= dim.
  std::vector<std::tuple<int, int, double>> pair_terms;
};

// Draws a planted model from the seed, then samples standard-normal features
// and bins each query's latent scores into num_levels rating quantiles.
// Identical configs produce bit-identical datasets.
std::pair<Dataset, PlantedModel> synthesize(const SynthConfig& cfg);

// Samples a dataset under an existing planted model (held-out splits).
Dataset synthesize_with_planted(const PlantedModel& planted, int num_queries,
                                int docs_per_query, double noise_sd,
                                std::uint64_t seed, int num_levels = 5);

}  // namespace rankforge::data

#endif  // RANKFORGE_DATASET_HPP
