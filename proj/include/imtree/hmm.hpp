#pragma once

// Stationary imprecise hidden Markov models learned with the imprecise
// Dirichlet model, on-line recognition of the last hidden state by
// maximality, and set-valued prediction metrics.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imtree/credal.hpp"
#include "imtree/propagation.hpp"
#include "imtree/tree.hpp"
#include "imtree/tree_io.hpp"

namespace imtree {

/// Hidden (generative) and observed sequences of equal length over one
/// alphabet, as state indices.
struct SequencePair {
  std::vector<std::size_t> generative;
  std::vector<std::size_t> observed;
};

class ImpreciseHMM {
 public:
  ImpreciseHMM(SpacePtr alphabet, double s, std::vector<std::uint64_t> initial,
               std::vector<std::vector<std::uint64_t>> transition, std::vector<std::vector<std::uint64_t>> emission);

  const SpacePtr& alphabet() const { return alphabet_; }
  std::size_t size() const { return alphabet_->size(); }
  double hyper_s() const { return s_; }

  const CountTable& initial_counts() const { return initial_; }
  const CountTable& transition_counts(std::size_t from) const { return transition_.at(from); }
  const CountTable& emission_counts(std::size_t hidden) const { return emission_.at(hidden); }

  const CredalSet& initial() const { return initial_set_; }
  const CredalSet& transition(std::size_t from) const { return transition_sets_.at(from); }
  const CredalSet& emission(std::size_t hidden) const { return emission_sets_.at(hidden); }

  /// Same counts with another s.
  ImpreciseHMM with_s(double s) const;

 private:
  SpacePtr alphabet_;
  double s_;
  CountTable initial_;
  std::vector<CountTable> transition_;
  std::vector<CountTable> emission_;
  CredalSet initial_set_;
  std::vector<CredalSet> transition_sets_;
  std::vector<CredalSet> emission_sets_;
};

/// Interior mass function of an IDM credal set: (n_x + s/|X|) / (N + s).
std::vector<double> precise_companion(const CountTable& t);

/// Counts first hidden symbols, hidden-to-hidden transitions and
/// hidden-to-observed matchings, then applies the IDM with parameter s.
ImpreciseHMM learn_hmm(const std::vector<SequencePair>& corpus, const SpacePtr& alphabet, double s);

/// Chain s1 -> s2 -> ... -> sn with an emission child ok under every sk.
/// Document order is s1, o1, s2, o2, ...
Tree hmm_to_tree(const ImpreciseHMM& hmm, std::size_t n);

struct PredictOptions {
  double tol = kDefaultTolerance;
  /// x dominates z when the posterior lower prevision of I_x - I_z exceeds
  /// threshold_factor times the absolute root-finding tolerance.
  double threshold_factor = 10.0;
};

struct PredictionSet {
  std::vector<std::size_t> maximal_states;  // ascending
  std::size_t precise_state = 0;
  /// Posterior under the precise companion model, per state.
  std::vector<double> precise_posterior;
  /// dominance[x * |X| + z] = lower prevision of I_x - I_z, NaN when skipped.
  std::vector<double> dominance;
  std::size_t evaluations = 0;

  bool determinate() const { return maximal_states.size() == 1; }
  bool contains(std::size_t x) const;
};

PredictionSet predict_maximal(const ImpreciseHMM& hmm, std::span<const std::size_t> observed,
                              const PredictOptions& opt = {});

/// Precise-model posterior of the last hidden state (normalized forward pass).
std::vector<double> precise_last_state_posterior(const ImpreciseHMM& hmm, std::span<const std::size_t> observed);

struct EvalMetrics {
  std::size_t instances = 0;
  std::size_t determinate = 0;
  std::size_t determinate_correct = 0;
  std::size_t indeterminate = 0;
  std::size_t indeterminate_containing = 0;
  std::size_t indeterminate_size_sum = 0;
  std::size_t precise_correct = 0;
  std::size_t precise_correct_on_indeterminate = 0;
  std::size_t precise_in_maximal = 0;
  std::size_t alphabet_size = 0;

  double determinacy = 0.0;
  double set_accuracy = 0.0;     // 0 when there are no indeterminate predictions
  double single_accuracy = 0.0;  // 0 when there are no determinate predictions
  std::optional<double> indeterminate_output_size;
  double precise_accuracy = 0.0;
  double precise_accuracy_on_indeterminate = 0.0;
};

EvalMetrics score_predictions(std::span<const PredictionSet> predictions, std::span<const std::size_t> truth,
                              std::size_t alphabet_size);

/// Predicts the last hidden symbol of every test pair from its observed
/// sequence and scores against the last generative symbol.
EvalMetrics evaluate(const ImpreciseHMM& hmm, const std::vector<SequencePair>& test, const PredictOptions& opt = {});

/// Each symbol is independently replaced, with probability epsilon, by a
/// uniformly drawn different symbol.
std::vector<SequencePair> corrupt_corpus(const std::vector<std::vector<std::size_t>>& text, std::size_t alphabet_size,
                                         double epsilon, std::uint64_t seed);

/// Every window of length n (ending at positions n-1, n, ...) of each pair.
std::vector<SequencePair> sliding_windows(const std::vector<SequencePair>& pairs, std::size_t n);

Json hmm_to_json(const ImpreciseHMM& hmm);
ImpreciseHMM hmm_from_json(const Json& doc);

Json metrics_to_json(const EvalMetrics& m);

/// Corpus files: one sequence per line, one symbol per character.
std::vector<std::string> read_lines(const std::filesystem::path& path);
/// Sorted distinct characters of all lines.
SpacePtr alphabet_of(const std::vector<std::string>& lines);
std::vector<std::size_t> encode(const StateSpace& alphabet, const std::string& line);
std::vector<SequencePair> paired_corpus(const StateSpace& alphabet, const std::vector<std::string>& generative,
                                        const std::vector<std::string>& observed);

}  // namespace imtree
