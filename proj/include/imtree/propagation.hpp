#pragma once

// Updating an imprecise Markov tree by regular extension.
//
// The posterior lower prevision of a gamble g on the target is the largest mu
// for which the joint lower prevision of I_{x_E} (g - mu) is non-negative.
// That joint value is obtained by passing messages towards the root: nodes off
// the root-to-target path send mu-independent lower/upper messages, nodes on
// the path send messages that depend on mu. Only the sign matters, so the
// path can be cut at the greatest instantiated ancestor of the target (the
// trunk) whenever the local models are strictly positive.
//
// All message vectors are kept as mantissas scaled by powers of two. Scaling
// by a positive constant changes neither signs nor roots, and powers of two
// are exact, so the true values are recovered bit for bit with std::ldexp.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "imtree/credal.hpp"
#include "imtree/rootfind.hpp"
#include "imtree/tree.hpp"

namespace imtree {

/// Lower and upper message of one off-path node, indexed by its parent's
/// states. True values are lower[i] * 2^exponent (likewise upper).
struct MessagePair {
  std::vector<double> lower;
  std::vector<double> upper;
  int exponent = 0;
};

/// Messages that do not depend on mu for one query path.
class MessageTable {
 public:
  MessageTable() = default;
  MessageTable(std::size_t tree_size) : messages_(tree_size), aggregates_(tree_size) {}

  /// Off-path node message, or nullptr when the node is on the path or
  /// outside the subtree the path starts.
  const MessagePair* message(NodeIndex n) const { return messages_[n] ? &*messages_[n] : nullptr; }
  /// Pointwise products of the messages sent to a path node by its off-path
  /// children, indexed by the path node's own states (empty product = 1).
  const MessagePair* aggregate(NodeIndex n) const { return aggregates_[n] ? &*aggregates_[n] : nullptr; }

  /// Unscaled copies, for inspection.
  std::vector<double> lower_message(NodeIndex n) const;
  std::vector<double> upper_message(NodeIndex n) const;
  std::vector<double> lower_aggregate(NodeIndex n) const;
  std::vector<double> upper_aggregate(NodeIndex n) const;

 private:
  friend MessageTable mu_free_messages(const Tree&, const Evidence&, std::span<const NodeIndex>);
  std::vector<std::optional<MessagePair>> messages_;
  std::vector<std::optional<MessagePair>> aggregates_;
};

/// Messages for every node below path.front() that is not on `path`, plus
/// the aggregates on the path nodes. `path` must be a parent-to-child chain.
MessageTable mu_free_messages(const Tree& tree, const Evidence& ev, std::span<const NodeIndex> path);

/// Overload for a computed trunk.
MessageTable mu_free_messages(const Tree& tree, const TrunkInfo& trunk, const Evidence& ev);

/// Which sign function to evaluate.
enum class Route {
  /// Cut at the greatest instantiated ancestor (requires strictly positive
  /// local models to give the right root).
  trunk,
  /// Full root-to-target path: the sign function is the joint lower
  /// prevision itself.
  full,
  /// `trunk` for strictly positive trees, `full` otherwise.
  automatic,
};

/// A real number represented as mantissa * 2^exponent.
struct ScaledValue {
  double mantissa = 0.0;
  int exponent = 0;
  double value() const;
};

/// Lower and upper probability of the evidence, by message passing over the
/// whole tree.
ScaledValue upper_evidence_probability_scaled(const Tree& tree, const Evidence& ev);
ScaledValue lower_evidence_probability_scaled(const Tree& tree, const Evidence& ev);
double upper_evidence_probability(const Tree& tree, const Evidence& ev);
double lower_evidence_probability(const Tree& tree, const Evidence& ev);

/// The mu -> sigma(mu) function for one (tree, target, evidence). Messages are
/// computed once at construction and shared by all gambles on the target.
/// The tree must outlive the evaluator.
class BackboneEvaluator {
 public:
  BackboneEvaluator(const Tree& tree, NodeIndex target, Evidence ev, Route route = Route::automatic);

  const Tree& tree() const { return *tree_; }
  NodeIndex target() const { return target_; }
  const Evidence& evidence() const { return ev_; }
  const TrunkInfo& trunk_info() const { return trunk_; }
  /// Nodes whose messages depend on mu, from the top down to the target.
  const std::vector<NodeIndex>& path() const { return path_; }
  bool uses_trunk() const { return uses_trunk_; }
  const MessageTable& messages() const { return messages_; }

  /// sigma(mu) * 2^-scale_exponent(). Same sign and roots as sigma.
  double scaled_value(std::span<const double> g, double mu) const;
  /// sigma(mu): the joint lower prevision of I_{x_E}(g - mu) on the full
  /// route, or the trunk message m_{s_t}(x_{e_t}) on the trunk route.
  double value(std::span<const double> g, double mu) const;
  int scale_exponent() const { return scale_exponent_; }

  /// Lower/upper probability of the evidence seen by sigma: sigma(-1) and
  /// -sigma(1) for the zero gamble. On the full route these are the joint
  /// lower and upper probabilities of x_E.
  double lower_evidence() const;
  double upper_evidence() const;

  /// Upper probability of all of x_E under the joint (computed on every route).
  const ScaledValue& global_upper_evidence() const { return global_upper_; }

 private:
  const Tree* tree_;
  NodeIndex target_;
  Evidence ev_;
  TrunkInfo trunk_;
  std::vector<NodeIndex> path_;
  bool uses_trunk_ = false;
  std::size_t start_row_ = 0;
  MessageTable messages_;
  std::vector<int> step_exponents_;  // per path position
  int scale_exponent_ = 0;
  ScaledValue global_upper_;
};

struct PosteriorResult {
  double value = 0.0;                     // lower expectation
  std::optional<double> conjugate_value;  // upper expectation, when computed
  std::size_t evaluations = 0;            // sigma evaluations
  bool vacuous = false;                   // upper evidence probability is zero
  double evidence_upper_prob = 0.0;
  double tol = 0.0;                       // absolute tolerance used
  bool bisection_fallback = false;
};

/// Default tolerance, relative to max g - min g.
inline constexpr double kDefaultTolerance = 1e-9;

/// Posterior lower prevision of g; `tol` is relative to the range of g.
PosteriorResult posterior_lower(const BackboneEvaluator& be, std::span<const double> g,
                                double tol = kDefaultTolerance);
/// Posterior upper prevision, through lower(-g).
PosteriorResult posterior_upper(const BackboneEvaluator& be, std::span<const double> g,
                                double tol = kDefaultTolerance);

PosteriorResult posterior_lower(const Tree& tree, NodeIndex target, const Evidence& ev, const Gamble& g,
                                double tol = kDefaultTolerance);
PosteriorResult posterior_upper(const Tree& tree, NodeIndex target, const Evidence& ev, const Gamble& g,
                                double tol = kDefaultTolerance);

struct EventInterval {
  double lower = 0.0;
  double upper = 1.0;
  bool vacuous = false;
  std::size_t evaluations = 0;
};

EventInterval posterior_interval_event(const BackboneEvaluator& be, std::size_t state,
                                       double tol = kDefaultTolerance);
EventInterval posterior_interval_event(const Tree& tree, NodeIndex target, const Evidence& ev,
                                       std::size_t state, double tol = kDefaultTolerance);

}  // namespace imtree
