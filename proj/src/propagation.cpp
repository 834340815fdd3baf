#include "imtree/propagation.hpp"

#include <algorithm>
#include <cmath>

namespace imtree {

namespace {

// Exponent e with max(v) in [0.5, 1) * 2^e; zero when v is all zero.
int normalizing_exponent(std::span<const double> v) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  if (mx == 0.0 || !std::isfinite(mx)) return 0;
  int e = 0;
  std::frexp(mx, &e);
  return e;
}

void scale_by(std::vector<double>& v, int e) {
  if (e == 0) return;
  for (double& x : v) x = std::ldexp(x, -e);
}

std::vector<double> unscaled(const MessagePair* m, bool lower) {
  if (!m) return {};
  std::vector<double> v = lower ? m->lower : m->upper;
  for (double& x : v) x = std::ldexp(x, m->exponent);
  return v;
}

// Product of the messages sent by `children` (skipping `skip`), indexed by
// the states of their common parent.
MessagePair child_product(const MessageTable& table, const Tree& tree, NodeIndex parent,
                          std::optional<NodeIndex> skip) {
  const std::size_t n = tree.space(parent)->size();
  MessagePair prod{std::vector<double>(n, 1.0), std::vector<double>(n, 1.0), 0};
  for (NodeIndex c : tree.node(parent).children) {
    if (skip && c == *skip) continue;
    const MessagePair* m = table.message(c);
    for (std::size_t x = 0; x < n; ++x) {
      prod.lower[x] *= m->lower[x];
      prod.upper[x] *= m->upper[x];
    }
    prod.exponent += m->exponent;
    // Renormalize as we go so long products of small messages stay in range.
    int e = normalizing_exponent(prod.upper);
    scale_by(prod.lower, e);
    scale_by(prod.upper, e);
    prod.exponent += e;
  }
  return prod;
}

}  // namespace

double ScaledValue::value() const { return std::ldexp(mantissa, exponent); }

std::vector<double> MessageTable::lower_message(NodeIndex n) const { return unscaled(message(n), true); }
std::vector<double> MessageTable::upper_message(NodeIndex n) const { return unscaled(message(n), false); }
std::vector<double> MessageTable::lower_aggregate(NodeIndex n) const { return unscaled(aggregate(n), true); }
std::vector<double> MessageTable::upper_aggregate(NodeIndex n) const { return unscaled(aggregate(n), false); }

MessageTable mu_free_messages(const Tree& tree, const Evidence& ev, std::span<const NodeIndex> path) {
  if (path.empty()) throw StructuralError("message computation needs a non-empty path");
  MessageTable table(tree.size());
  std::vector<bool> on_path(tree.size(), false);
  for (std::size_t k = 0; k < path.size(); ++k) {
    on_path[path[k]] = true;
    if (k > 0 && tree.node(path[k]).parent != path[k - 1])
      throw StructuralError("message path is not a parent-to-child chain");
  }

  // Children before parents.
  auto order = tree.subtree(path.front());
  std::reverse(order.begin(), order.end());
  for (NodeIndex s : order) {
    if (on_path[s]) continue;
    const auto& node = tree.node(s);
    const std::size_t rows = node.model.rows.size();
    MessagePair prod = child_product(table, tree, s, std::nullopt);
    MessagePair out{std::vector<double>(rows), std::vector<double>(rows), prod.exponent};
    if (auto xs = ev.observed(s)) {
      // Non-negative homogeneity: Q(I_{x_s} * c) = c * Q({x_s}).
      for (std::size_t r = 0; r < rows; ++r) {
        out.lower[r] = prod.lower[*xs] * tree.model(s, r).lower_probability(*xs);
        out.upper[r] = prod.upper[*xs] * tree.model(s, r).upper_probability(*xs);
      }
    } else {
      for (std::size_t r = 0; r < rows; ++r) {
        out.lower[r] = tree.model(s, r).lower(prod.lower);
        out.upper[r] = tree.model(s, r).upper(prod.upper);
      }
    }
    int e = normalizing_exponent(out.upper);
    scale_by(out.lower, e);
    scale_by(out.upper, e);
    out.exponent += e;
    table.messages_[s] = std::move(out);
  }

  for (std::size_t k = 0; k < path.size(); ++k) {
    std::optional<NodeIndex> next;
    if (k + 1 < path.size()) next = path[k + 1];
    table.aggregates_[path[k]] = child_product(table, tree, path[k], next);
  }
  return table;
}

MessageTable mu_free_messages(const Tree& tree, const TrunkInfo& trunk, const Evidence& ev) {
  return mu_free_messages(tree, ev, trunk.nodes);
}

namespace {

ScaledValue evidence_probability(const Tree& tree, const Evidence& ev, bool upper) {
  const NodeIndex root = tree.root();
  const std::vector<NodeIndex> path{root};
  auto table = mu_free_messages(tree, ev, path);
  const MessagePair* agg = table.aggregate(root);
  std::vector<double> h = upper ? agg->upper : agg->lower;
  if (auto x = ev.observed(root))
    for (std::size_t i = 0; i < h.size(); ++i)
      if (i != *x) h[i] = 0.0;
  const auto& q = tree.model(root, 0);
  return {upper ? q.upper(h) : q.lower(h), agg->exponent};
}

}  // namespace

ScaledValue upper_evidence_probability_scaled(const Tree& tree, const Evidence& ev) {
  return evidence_probability(tree, ev, true);
}
ScaledValue lower_evidence_probability_scaled(const Tree& tree, const Evidence& ev) {
  return evidence_probability(tree, ev, false);
}
double upper_evidence_probability(const Tree& tree, const Evidence& ev) {
  return upper_evidence_probability_scaled(tree, ev).value();
}
double lower_evidence_probability(const Tree& tree, const Evidence& ev) {
  return lower_evidence_probability_scaled(tree, ev).value();
}

BackboneEvaluator::BackboneEvaluator(const Tree& tree, NodeIndex target, Evidence ev, Route route)
    : tree_(&tree), target_(target), ev_(std::move(ev)) {
  if (ev_.tree_size() == 0) ev_ = Evidence(tree);
  trunk_ = trunk(tree, target, ev_);
  uses_trunk_ = route == Route::trunk || (route == Route::automatic && tree.strictly_positive());
  if (uses_trunk_) {
    path_ = trunk_.nodes;
    start_row_ = trunk_.instantiated_ancestor ? *ev_.observed(*trunk_.instantiated_ancestor) : 0;
  } else {
    path_ = tree.path_from_root(target);
    start_row_ = 0;
  }
  messages_ = mu_free_messages(tree, ev_, path_);
  global_upper_ = upper_evidence_probability_scaled(tree, ev_);

  // Per-step scaling of the mu-dependent messages, from the upper messages
  // of the constant gamble along the path: |m_s| <= range * U_s.
  step_exponents_.assign(path_.size(), 0);
  std::vector<double> u, h;
  for (std::size_t k = path_.size(); k-- > 0;) {
    const NodeIndex s = path_[k];
    const MessagePair* agg = messages_.aggregate(s);
    h = agg->upper;
    if (k + 1 < path_.size())
      for (std::size_t x = 0; x < h.size(); ++x) h[x] *= u[x];
    if (auto xs = ev_.observed(s))
      for (std::size_t x = 0; x < h.size(); ++x)
        if (x != *xs) h[x] = 0.0;
    const std::size_t rows = tree.node(s).model.rows.size();
    u.assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) u[r] = tree.model(s, r).upper(h);
    step_exponents_[k] = normalizing_exponent(u);
    scale_by(u, step_exponents_[k]);
    scale_exponent_ += agg->exponent + step_exponents_[k];
  }
}

double BackboneEvaluator::scaled_value(std::span<const double> g, double mu) const {
  const Tree& tree = *tree_;
  if (g.size() != tree.space(target_)->size())
    throw StructuralError("gamble size does not match the target's state space");
  std::vector<double> psi(g.size()), m;
  {
    const MessagePair* agg = messages_.aggregate(target_);
    for (std::size_t x = 0; x < g.size(); ++x) {
      const double d = g[x] - mu;
      psi[x] = d >= 0.0 ? d * agg->lower[x] : d * agg->upper[x];
    }
  }
  for (std::size_t k = path_.size(); k-- > 0;) {
    const NodeIndex s = path_[k];
    const int e = step_exponents_[k];
    if (k == 0) return std::ldexp(tree.model(s, start_row_).lower(psi), -e);
    const std::size_t rows = tree.node(s).model.rows.size();
    m.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) m[r] = std::ldexp(tree.model(s, r).lower(psi), -e);

    const NodeIndex p = path_[k - 1];
    const MessagePair* agg = messages_.aggregate(p);
    psi.resize(rows);
    const auto xp = ev_.observed(p);
    for (std::size_t x = 0; x < rows; ++x) {
      const double v = m[x] >= 0.0 ? m[x] * agg->lower[x] : m[x] * agg->upper[x];
      psi[x] = (xp && x != *xp) ? 0.0 : v;
    }
  }
  return 0.0;  // unreachable: the path is never empty
}

double BackboneEvaluator::value(std::span<const double> g, double mu) const {
  return std::ldexp(scaled_value(g, mu), scale_exponent_);
}

double BackboneEvaluator::lower_evidence() const {
  std::vector<double> zero(tree_->space(target_)->size(), 0.0);
  return value(zero, -1.0);
}

double BackboneEvaluator::upper_evidence() const {
  std::vector<double> zero(tree_->space(target_)->size(), 0.0);
  return -value(zero, 1.0);
}

PosteriorResult posterior_lower(const BackboneEvaluator& be, std::span<const double> g, double tol) {
  if (!(tol > 0.0)) throw StructuralError("tolerance must be positive");
  if (g.size() != be.tree().space(be.target())->size())
    throw StructuralError("gamble size does not match the target's state space");
  for (double v : g)
    if (!std::isfinite(v)) throw StructuralError("gamble values must be finite");
  const double lo = *std::min_element(g.begin(), g.end());
  const double hi = *std::max_element(g.begin(), g.end());

  PosteriorResult res;
  res.evidence_upper_prob = be.global_upper_evidence().value();
  res.tol = tol * (hi - lo);
  if (be.global_upper_evidence().mantissa == 0.0) {
    res.value = lo;
    res.vacuous = true;
    return res;
  }
  if (lo == hi) {
    res.value = lo;
    return res;
  }
  auto sigma = [&](double mu) { return be.scaled_value(g, mu); };
  auto root = find_rightmost_root(sigma, lo, hi, res.tol);
  res.value = std::clamp(root.root, lo, hi);
  res.evaluations = root.evaluations;
  res.bisection_fallback = root.fell_back;
  return res;
}

PosteriorResult posterior_upper(const BackboneEvaluator& be, std::span<const double> g, double tol) {
  std::vector<double> neg(g.size());
  std::transform(g.begin(), g.end(), neg.begin(), [](double v) { return -v; });
  PosteriorResult res = posterior_lower(be, neg, tol);
  res.value = -res.value;
  return res;
}

namespace {
void check_gamble_space(const Tree& tree, NodeIndex target, const Gamble& g) {
  if (target >= tree.size()) throw StructuralError("unknown target node");
  if (!same_space(tree.space(target), g.space()))
    throw StructuralError("gamble is not defined on the target's state space");
}
}  // namespace

PosteriorResult posterior_lower(const Tree& tree, NodeIndex target, const Evidence& ev, const Gamble& g,
                                double tol) {
  check_gamble_space(tree, target, g);
  BackboneEvaluator be(tree, target, ev);
  return posterior_lower(be, g.values(), tol);
}

PosteriorResult posterior_upper(const Tree& tree, NodeIndex target, const Evidence& ev, const Gamble& g,
                                double tol) {
  check_gamble_space(tree, target, g);
  BackboneEvaluator be(tree, target, ev);
  return posterior_upper(be, g.values(), tol);
}

EventInterval posterior_interval_event(const BackboneEvaluator& be, std::size_t state, double tol) {
  const std::size_t n = be.tree().space(be.target())->size();
  if (state >= n) throw StructuralError("unknown state index for the target");
  std::vector<double> ind(n, 0.0);
  ind[state] = 1.0;
  auto lo = posterior_lower(be, ind, tol);
  auto up = posterior_upper(be, ind, tol);
  return {std::clamp(lo.value, 0.0, 1.0), std::clamp(up.value, 0.0, 1.0), lo.vacuous,
          lo.evaluations + up.evaluations};
}

EventInterval posterior_interval_event(const Tree& tree, NodeIndex target, const Evidence& ev,
                                       std::size_t state, double tol) {
  BackboneEvaluator be(tree, target, ev);
  return posterior_interval_event(be, state, tol);
}

}  // namespace imtree
