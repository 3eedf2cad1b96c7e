#ifndef RANKFORGE_VERIFY_HPP
#define RANKFORGE_VERIFY_HPP

#include <cstdint>
#include <vector>

namespace rankforge::verify {

struct BoundTrial {
  double exact = 0.0;  // enumerated -log P(r)
  double bound = 0.0;  // unit-weight pairwise bound + (N-2) log |L|
  double slack() const { return bound - exact; }
};

// Random (scores, ratings, gamma) instances comparing the enumerated
// log-loss against the pairwise upper bound.
std::vector<BoundTrial> wub_bound_fuzz(int trials, int n, int levels,
                                       std::uint64_t seed);

// max |1 - sum over all N! orderings of P(ordering)| across `trials` random
// score vectors.
double pl_normalization_error(int n, int trials, std::uint64_t seed);
double rpl_normalization_error(int n, int trials, std::uint64_t seed);

// max |log conditional - log joint ratio| over random instances (N=3, L=3).
double wpll_consistency_error(int trials, std::uint64_t seed);

}  // namespace rankforge::verify

#endif  // RANKFORGE_VERIFY_HPP
