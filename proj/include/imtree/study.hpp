#pragma once

// Random binary chains with the leaf observed and the root queried: interval
// widths under epistemic irrelevance versus strong independence.

#include <cstdint>
#include <vector>

#include "imtree/oracles.hpp"
#include "imtree/tree.hpp"

namespace imtree {

struct ChainStudyOptions {
  std::size_t runs = 200;
  std::uint64_t seed = 1;
  /// Mixing weight towards a random vertex, see RandomTreeShape.
  double imprecision = 1.0;
  double floor = 0.01;
  double tol = 1e-9;
};

struct ChainRun {
  double epistemic_lower = 0.0;
  double epistemic_upper = 0.0;
  double strong_lower = 0.0;
  double strong_upper = 0.0;
  double precise = 0.0;  // posterior of the centre model
};

struct ChainStudyRow {
  std::size_t length = 0;
  std::size_t runs = 0;
  double mean_epistemic_width = 0.0;
  double mean_strong_width = 0.0;
  double mean_difference = 0.0;
  std::size_t containment_violations = 0;  // strong not inside epistemic (1e-9 slack)
};

/// Chain for one run: binary nodes "1".."length", two vertices per set.
Tree study_chain(std::size_t length, const ChainStudyOptions& opt, std::size_t run);

/// Evidence for one run: the leaf of `chain`, in a state drawn from the
/// per-run seed.
Evidence study_evidence(const Tree& chain, const ChainStudyOptions& opt, std::size_t run);

/// P(root = s0 | leaf) bounds for one run; the observed leaf state is drawn
/// from the same per-run seed.
ChainRun study_run(std::size_t length, const ChainStudyOptions& opt, std::size_t run);

ChainStudyRow chain_study(std::size_t length, const ChainStudyOptions& opt);

}  // namespace imtree
