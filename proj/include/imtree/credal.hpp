#pragma once

// Finite-space gambles and coherent lower previsions, represented as the
// lower envelope of a finite set of mass functions (the vertices of a
// credal set).

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imtree/errors.hpp"

namespace imtree {

/// Ordered list of distinct state labels. Positions are stable indices.
class StateSpace {
 public:
  explicit StateSpace(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::optional<std::size_t> find(std::string_view label) const;
  /// Index of `label`; throws StructuralError if absent.
  std::size_t index(std::string_view label) const;

  bool operator==(const StateSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
};

using SpacePtr = std::shared_ptr<const StateSpace>;

SpacePtr make_space(std::vector<std::string> labels);

/// True when both pointers denote the same labels (identity or equality).
bool same_space(const SpacePtr& a, const SpacePtr& b);

/// Real-valued map on a state space.
class Gamble {
 public:
  Gamble(SpacePtr space, std::vector<double> values);

  /// Indicator of a single state.
  static Gamble indicator(SpacePtr space, std::size_t state);
  static Gamble constant(SpacePtr space, double c);

  const SpacePtr& space() const { return space_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double min() const;
  double max() const;

  Gamble operator-() const;

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

/// Probability mass function. Inputs whose total is within 1e-12 of one are
/// renormalized; anything further off is rejected.
class MassFunction {
 public:
  MassFunction(SpacePtr space, std::vector<double> probs);

  const SpacePtr& space() const { return space_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  SpacePtr space_;
  std::vector<double> probs_;
};

inline constexpr double kNormalizationTolerance = 1e-12;

/// Finitely generated credal set. Vertices are stored row-major; duplicates
/// are kept as given (they do not change any envelope).
class CredalSet {
 public:
  CredalSet(SpacePtr space, std::vector<MassFunction> vertices);
  /// Builds from raw rows; each row is validated like a MassFunction.
  CredalSet(SpacePtr space, const std::vector<std::vector<double>>& rows);

  const SpacePtr& space() const { return space_; }
  std::size_t num_states() const { return space_->size(); }
  std::size_t num_vertices() const { return num_vertices_; }
  std::span<const double> vertex(std::size_t k) const {
    return {data_.data() + k * num_states(), num_states()};
  }
  std::vector<std::vector<double>> vertex_rows() const;

  /// Minimum over vertices of the expectation of `g`. No space check beyond size.
  double lower(std::span<const double> g) const;
  double upper(std::span<const double> g) const;

  double lower_probability(std::size_t state) const;
  double upper_probability(std::size_t state) const;

  /// Single-vertex set.
  bool is_precise() const { return num_vertices_ == 1; }

 private:
  void check_size(std::span<const double> g) const;

  SpacePtr space_;
  std::size_t num_vertices_ = 0;
  std::vector<double> data_;
};

double lower_expectation(const CredalSet& c, const Gamble& g);
double upper_expectation(const CredalSet& c, const Gamble& g);

/// Counts per state plus the IDM caution parameter s.
struct CountTable {
  SpacePtr space;
  std::vector<std::uint64_t> counts;
  double hyper_s = 2.0;

  std::uint64_t total() const;
};

/// Imprecise Dirichlet model: one vertex per state z, with
/// p_z(x) = (n_x + s [x = z]) / (s + N).
CredalSet idm_from_counts(const CountTable& t);

CredalSet linear_model(const MassFunction& p);
CredalSet vacuous_model(const SpacePtr& space);

/// Two-vertex set {(l, 1-l), (u, 1-u)} for a binary space given bounds on
/// the probability of each state. Larger spaces are rejected.
CredalSet binary_interval_model(const SpacePtr& space, std::span<const double> lower,
                                std::span<const double> upper);

struct CredalReport {
  bool valid = true;
  std::vector<std::string> problems;
  bool strictly_positive = true;
  /// States whose upper probability is zero.
  std::vector<std::size_t> null_states;
};

CredalReport check_credal_set(const StateSpace& space, const std::vector<std::vector<double>>& rows);
CredalReport check_credal_set(const CredalSet& c);

}  // namespace imtree
