#ifndef RANKFORGE_PROBMODELS_HPP
#define RANKFORGE_PROBMODELS_HPP

#include <span>
#include <vector>

#include "rankforge/functionals.hpp"
#include "rankforge/losses.hpp"

namespace rankforge::probmodels {

using losses::LossValueAndGrad;

// Default per-query scale for the pairwise random-field potentials.
double default_gamma(std::size_t n_objects);

// Weighted Plackett-Luce negative log-likelihood over the true ordering.
// positions[i] is the 1-based true position of object i (data::true_positions);
// weights[p] multiplies the log factor of rank position p+1. Unit weights
// give the plain sequential-choice likelihood.
LossValueAndGrad pl_loss(std::span<const double> scores,
                         std::span<const int> positions,
                         std::span<const double> weights);

// Sequential-elimination variant: objects leave the list worst-to-best with
// probability proportional to exp(-f).
LossValueAndGrad reverse_pl_loss(std::span<const double> scores,
                                 std::span<const int> positions,
                                 std::span<const double> weights);

// Plackett-Luce over rating tie-groups. Each group's worth is
// exp(group_score(agg, member scores)); groups are ordered by descending
// rating. weights has one entry per group in that order (empty = unit).
// A single group carries no ordering information: zero loss, zero gradient.
LossValueAndGrad group_pl_loss(std::span<const double> scores,
                               std::span<const int> ratings,
                               functionals::Aggregation agg,
                               std::span<const double> weights = {});

// Pairwise potential exp(gamma * sign(r_i - r_j) * (f_i - f_j)).
double mrf_psi(int r_i, int r_j, double f_i, double f_j, double gamma);

// log P(r_i | r_not_i) for every i, each normalized over the num_levels
// candidate values of r_i.
std::vector<double> wpll_log_conditionals(std::span<const double> scores,
                                          std::span<const int> ratings,
                                          double gamma, int num_levels);

// Weighted pseudo-likelihood: -sum_i W_i log P(r_i | r_not_i).
LossValueAndGrad wpll_loss(std::span<const double> scores,
                           std::span<const int> ratings, double gamma,
                           int num_levels, std::span<const double> weights);

// Index of the unordered pair (i, j), i < j, in lexicographic order.
std::size_t pair_flat_index(std::size_t i, std::size_t j, std::size_t n);

// Weighted pairwise upper bound on the random-field log-loss:
// -sum_{i<j} W_ij log Q(r_i, r_j) with Q = psi / Z_ij and
// Z_ij = |L| + (|L|(|L|-1)/2)(e^{gamma d} + e^{-gamma d}). weights is the
// flat i<j vector (empty = unit).
LossValueAndGrad wub_loss(std::span<const double> scores,
                          std::span<const int> ratings, double gamma,
                          int num_levels,
                          std::span<const double> weights = {});

// Exact -log P(r) by full enumeration of the |L|^N partition sum.
// Throws when |L|^N exceeds max_states.
double mrf_exact_logloss(std::span<const double> scores,
                         std::span<const int> ratings, double gamma,
                         int num_levels,
                         std::size_t max_states = 1'000'000);

}  // namespace rankforge::probmodels

#endif  // RANKFORGE_PROBMODELS_HPP
