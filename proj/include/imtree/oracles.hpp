#pragma once

// Brute-force references, independent of the message-passing engine.

#include <cstdint>
#include <span>
#include <vector>

#include "imtree/tree.hpp"

namespace imtree {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

/// Exact Bayes posterior expectation of g on `target` for a tree whose local
/// models all have a single vertex, by enumerating the joint configurations
/// consistent with the evidence.
double enumerate_joint_precise(const Tree& tree, NodeIndex target, const Evidence& ev, std::span<const double> g,
                               std::uint64_t budget = kDefaultEnumerationBudget);

struct StrongInterval {
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t selections = 0;  // Bayesian trees examined
  std::uint64_t feasible = 0;    // those giving the evidence positive probability
};

/// Envelope of the posterior expectation over every Bayesian tree obtained by
/// picking one vertex per node and parent state (strong extension).
StrongInterval strong_posterior_enumeration(const Tree& tree, NodeIndex target, const Evidence& ev,
                                            std::span<const double> g,
                                            std::uint64_t budget = kDefaultEnumerationBudget);

/// Strong-extension posterior of the root of a binary chain, exact for any
/// length. Propagates the convex hull of the achievable likelihood vectors
/// from the leaf up; the posterior is linear-fractional in that vector, so
/// its extremes sit at hull vertices.
StrongInterval strong_chain_root_interval(const Tree& tree, const Evidence& ev, std::span<const double> g);

/// Minimum of E[I_{x_E}(g - mu)] over all history-dependent selections on a
/// chain: the vertex used at node k may depend on the whole configuration of
/// the nodes above k. One value per entry of `mus`.
std::vector<double> epistemic_chain_rho_oracle(const Tree& chain, NodeIndex target, const Evidence& ev,
                                               std::span<const double> g, std::span<const double> mus,
                                               std::uint64_t budget = kDefaultEnumerationBudget);

double epistemic_chain_rho_oracle(const Tree& chain, NodeIndex target, const Evidence& ev,
                                  std::span<const double> g, double mu,
                                  std::uint64_t budget = kDefaultEnumerationBudget);

struct RandomTreeShape {
  std::size_t nodes = 6;
  std::size_t max_children = 3;
  std::size_t min_states = 2;
  std::size_t max_states = 3;
  std::size_t vertices_per_set = 2;
  /// 0 gives precise models; 1 draws every vertex independently.
  double imprecision = 0.5;
  /// Lower bound on every vertex probability.
  double floor = 0.01;
};

/// Deterministic per seed. Node ids are "1".."n" in document order, node 1
/// is the root; each vertex is (1 - imprecision) * centre + imprecision *
/// (random mass function), all floored, so every model is strictly positive.
Tree random_tree(const RandomTreeShape& shape, std::uint64_t seed);

}  // namespace imtree
