#include "imtree/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>

namespace imtree {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

void check_target(const Tree& tree, NodeIndex target, const Evidence& ev, std::span<const double> g) {
  if (target >= tree.size()) throw StructuralError("unknown target node");
  if (ev.contains(target)) throw StructuralError("target node is instantiated");
  if (g.size() != tree.space(target)->size()) throw StructuralError("gamble size does not match the target");
}

// Depth-first walk over every joint configuration consistent with the
// evidence, in topological order, with the chain-rule probability.
class JointWalk {
 public:
  using PmfFor = std::function<std::span<const double>(NodeIndex node, std::size_t row)>;
  using Visit = std::function<void(const std::vector<std::size_t>& x, double prob)>;

  JointWalk(const Tree& tree, const Evidence& ev, PmfFor pmf)
      : tree_(tree), ev_(ev), pmf_(std::move(pmf)), x_(tree.size(), 0) {}

  void run(const Visit& visit) {
    visit_ = &visit;
    step(0, 1.0);
  }

 private:
  void step(std::size_t k, double prob) {
    const auto& order = tree_.topological_order();
    if (k == order.size()) {
      (*visit_)(x_, prob);
      return;
    }
    const NodeIndex s = order[k];
    const auto& parent = tree_.node(s).parent;
    auto p = pmf_(s, parent ? x_[*parent] : 0);
    if (auto obs = ev_.observed(s)) {
      x_[s] = *obs;
      step(k + 1, prob * p[*obs]);
      return;
    }
    for (std::size_t v = 0; v < p.size(); ++v) {
      x_[s] = v;
      step(k + 1, prob * p[v]);
    }
  }

  const Tree& tree_;
  const Evidence& ev_;
  PmfFor pmf_;
  std::vector<std::size_t> x_;
  const Visit* visit_ = nullptr;
};

std::uint64_t configuration_count(const Tree& tree, const Evidence& ev) {
  std::uint64_t n = 1;
  for (NodeIndex i = 0; i < tree.size(); ++i)
    if (!ev.contains(i)) n = saturating_mul(n, tree.space(i)->size());
  return n;
}

// Sum-product on one Bayesian tree: returns sum over x of P(x) I_E(x) f(x_t)
// where f is g when `with_gamble` and 1 otherwise.
double bayes_tree_sum(const Tree& tree, const Evidence& ev, NodeIndex target, std::span<const double> g,
                      const std::vector<std::vector<std::size_t>>& choice, bool with_gamble,
                      std::vector<std::vector<double>>& up) {
  const auto& order = tree.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeIndex s = *it;
    const std::size_t n = tree.space(s)->size();
    std::vector<double> beta(n, 1.0);
    if (auto obs = ev.observed(s))
      for (std::size_t x = 0; x < n; ++x)
        if (x != *obs) beta[x] = 0.0;
    if (with_gamble && s == target)
      for (std::size_t x = 0; x < n; ++x) beta[x] *= g[x];
    for (NodeIndex c : tree.node(s).children)
      for (std::size_t x = 0; x < n; ++x) beta[x] *= up[c][x];
    const std::size_t rows = tree.node(s).model.rows.size();
    up[s].assign(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      auto v = tree.model(s, r).vertex(choice[s][r]);
      double acc = 0.0;
      for (std::size_t x = 0; x < n; ++x) acc += v[x] * beta[x];
      up[s][r] = acc;
    }
  }
  return up[tree.root()][0];
}

}  // namespace

double enumerate_joint_precise(const Tree& tree, NodeIndex target, const Evidence& ev, std::span<const double> g,
                               std::uint64_t budget) {
  check_target(tree, target, ev, g);
  for (const auto& n : tree.nodes())
    for (const auto& row : n.model.rows)
      if (!row.is_precise())
        throw StructuralError("node '" + n.id + "' has an imprecise local model; precise enumeration needs one vertex");
  if (configuration_count(tree, ev) > budget) throw PreconditionError("joint enumeration exceeds the budget");

  double num = 0.0, den = 0.0;
  JointWalk walk(tree, ev, [&](NodeIndex s, std::size_t r) { return tree.model(s, r).vertex(0); });
  walk.run([&](const std::vector<std::size_t>& x, double prob) {
    num += prob * g[x[target]];
    den += prob;
  });
  if (!(den > 0.0)) throw PreconditionError("the evidence has zero probability");
  return num / den;
}

StrongInterval strong_posterior_enumeration(const Tree& tree, NodeIndex target, const Evidence& ev,
                                            std::span<const double> g, std::uint64_t budget) {
  check_target(tree, target, ev, g);
  struct Slot {
    NodeIndex node;
    std::size_t row;
    std::size_t options;
  };
  std::vector<Slot> slots;
  std::uint64_t total = 1;
  for (NodeIndex s = 0; s < tree.size(); ++s)
    for (std::size_t r = 0; r < tree.node(s).model.rows.size(); ++r) {
      const std::size_t k = tree.model(s, r).num_vertices();
      total = saturating_mul(total, k);
      if (k > 1) slots.push_back({s, r, k});
    }
  if (total > budget)
    throw PreconditionError("strong enumeration needs " +
                            (total == std::numeric_limits<std::uint64_t>::max() ? std::string("too many")
                                                                                 : std::to_string(total)) +
                            " selections, over the budget of " + std::to_string(budget));

  std::vector<std::vector<std::size_t>> choice(tree.size());
  for (NodeIndex s = 0; s < tree.size(); ++s) choice[s].assign(tree.node(s).model.rows.size(), 0);
  std::vector<std::vector<double>> scratch(tree.size());

  StrongInterval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0, 0};
  for (;;) {
    ++out.selections;
    const double den = bayes_tree_sum(tree, ev, target, g, choice, false, scratch);
    if (den > 0.0) {
      const double num = bayes_tree_sum(tree, ev, target, g, choice, true, scratch);
      const double v = num / den;
      out.lower = std::min(out.lower, v);
      out.upper = std::max(out.upper, v);
      ++out.feasible;
    }
    std::size_t i = 0;
    for (; i < slots.size(); ++i) {
      auto& d = choice[slots[i].node][slots[i].row];
      if (++d < slots[i].options) break;
      d = 0;
    }
    if (i == slots.size()) break;
  }
  if (out.feasible == 0) throw PreconditionError("every selection gives the evidence zero probability");
  return out;
}

namespace {

using Point = std::array<double, 2>;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; collinear points are dropped.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace

StrongInterval strong_chain_root_interval(const Tree& tree, const Evidence& ev, std::span<const double> g) {
  if (!tree.is_chain()) throw StructuralError("strong chain interval needs a chain");
  for (const auto& n : tree.nodes())
    if (n.space->size() != 2) throw StructuralError("strong chain interval needs binary nodes");
  const NodeIndex root = tree.root();
  check_target(tree, root, ev, g);
  const auto& order = tree.topological_order();

  std::vector<Point> hull{{1.0, 1.0}};
  for (std::size_t k = order.size(); k-- > 1;) {
    const NodeIndex s = order[k];
    const auto obs = ev.observed(s);
    const auto& q0 = tree.model(s, 0);
    const auto& q1 = tree.model(s, 1);
    std::vector<Point> next;
    for (const auto& h : hull) {
      Point w = h;
      if (obs) w[1 - *obs] = 0.0;
      for (std::size_t i = 0; i < q0.num_vertices(); ++i) {
        auto v0 = q0.vertex(i);
        const double e0 = v0[0] * w[0] + v0[1] * w[1];
        for (std::size_t j = 0; j < q1.num_vertices(); ++j) {
          auto v1 = q1.vertex(j);
          next.push_back({e0, v1[0] * w[0] + v1[1] * w[1]});
        }
      }
    }
    hull = convex_hull(std::move(next));
  }

  const auto& q = tree.model(root, 0);
  StrongInterval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0, 0};
  for (std::size_t i = 0; i < q.num_vertices(); ++i) {
    auto v = q.vertex(i);
    for (const auto& h : hull) {
      ++out.selections;
      const double den = v[0] * h[0] + v[1] * h[1];
      if (!(den > 0.0)) continue;
      const double val = (v[0] * h[0] * g[0] + v[1] * h[1] * g[1]) / den;
      out.lower = std::min(out.lower, val);
      out.upper = std::max(out.upper, val);
      ++out.feasible;
    }
  }
  if (out.feasible == 0) throw PreconditionError("every selection gives the evidence zero probability");
  return out;
}

std::vector<double> epistemic_chain_rho_oracle(const Tree& chain, NodeIndex target, const Evidence& ev,
                                               std::span<const double> g, std::span<const double> mus,
                                               std::uint64_t budget) {
  if (!chain.is_chain()) throw StructuralError("history-dependent oracle needs a chain");
  check_target(chain, target, ev, g);
  const auto& order = chain.topological_order();
  const std::size_t len = order.size();

  // Node k has one context per configuration of nodes 0..k-1; the context
  // code is ctx_k = ctx_{k-1} * n_{k-1} + x_{k-1}.
  std::vector<std::size_t> offset(len + 1, 0), contexts(len, 1);
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < len; ++k) {
    if (k > 0) contexts[k] = contexts[k - 1] * chain.space(order[k - 1])->size();
    offset[k + 1] = offset[k] + contexts[k];
  }
  std::vector<std::size_t> options(offset[len]);
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t n_prev = k > 0 ? chain.space(order[k - 1])->size() : 1;
    for (std::size_t c = 0; c < contexts[k]; ++c) {
      options[offset[k] + c] = chain.model(order[k], c % n_prev).num_vertices();
      total = saturating_mul(total, options[offset[k] + c]);
    }
  }
  if (total > budget) throw PreconditionError("history-dependent enumeration exceeds the budget");

  std::vector<std::size_t> digit(options.size(), 0);
  std::vector<double> best(mus.size(), std::numeric_limits<double>::infinity());
  std::size_t target_pos = 0;
  for (std::size_t k = 0; k < len; ++k)
    if (order[k] == target) target_pos = k;

  double a = 0.0, b = 0.0;
  std::function<void(std::size_t, std::size_t, double, std::size_t)> walk =
      [&](std::size_t k, std::size_t ctx, double prob, std::size_t xt) {
        if (k == len) {
          a += prob * g[xt];
          b += prob;
          return;
        }
        const NodeIndex s = order[k];
        const std::size_t n_prev = k > 0 ? chain.space(order[k - 1])->size() : 1;
        const std::size_t slot = offset[k] + ctx;
        auto v = chain.model(s, ctx % n_prev).vertex(digit[slot]);
        const std::size_t n = v.size();
        auto obs = ev.observed(s);
        for (std::size_t x = 0; x < n; ++x) {
          if (obs && x != *obs) continue;
          walk(k + 1, ctx * n + x, prob * v[x], k == target_pos ? x : xt);
        }
      };

  for (;;) {
    a = b = 0.0;
    walk(0, 0, 1.0, 0);
    for (std::size_t i = 0; i < mus.size(); ++i) best[i] = std::min(best[i], a - mus[i] * b);
    std::size_t i = 0;
    for (; i < digit.size(); ++i) {
      if (++digit[i] < options[i]) break;
      digit[i] = 0;
    }
    if (i == digit.size()) break;
  }
  return best;
}

double epistemic_chain_rho_oracle(const Tree& chain, NodeIndex target, const Evidence& ev,
                                  std::span<const double> g, double mu, std::uint64_t budget) {
  const double mus[1] = {mu};
  return epistemic_chain_rho_oracle(chain, target, ev, g, mus, budget).front();
}

Tree random_tree(const RandomTreeShape& shape, std::uint64_t seed) {
  if (shape.nodes == 0) throw StructuralError("random tree needs at least one node");
  if (shape.nodes > 1 && shape.max_children == 0) throw StructuralError("max_children must be positive");
  if (shape.min_states == 0 || shape.min_states > shape.max_states) throw StructuralError("bad state size range");
  if (shape.vertices_per_set == 0) throw StructuralError("vertices_per_set must be positive");
  if (!(shape.imprecision >= 0.0 && shape.imprecision <= 1.0)) throw StructuralError("imprecision must be in [0,1]");
  if (!(shape.floor >= 0.0) || shape.floor * static_cast<double>(shape.max_states) >= 1.0)
    throw StructuralError("probability floor too large for the state count");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> states_dist(shape.min_states, shape.max_states);
  std::exponential_distribution<double> expo(1.0);

  auto random_pmf = [&](std::size_t k) {
    std::vector<double> p(k);
    double sum = 0.0;
    for (auto& v : p) sum += (v = expo(rng));
    const double free = 1.0 - shape.floor * static_cast<double>(k);
    for (auto& v : p) v = shape.floor + free * v / sum;
    return p;
  };
  auto random_set = [&](const SpacePtr& space) {
    const std::size_t k = space->size();
    auto centre = random_pmf(k);
    std::vector<std::vector<double>> rows;
    const std::size_t nv = shape.imprecision == 0.0 ? 1 : shape.vertices_per_set;
    for (std::size_t j = 0; j < nv; ++j) {
      auto r = random_pmf(k);
      for (std::size_t x = 0; x < k; ++x) r[x] = (1.0 - shape.imprecision) * centre[x] + shape.imprecision * r[x];
      rows.push_back(std::move(r));
    }
    return CredalSet(space, rows);
  };

  std::vector<NodeSpec> specs;
  std::vector<std::size_t> child_count;
  std::vector<SpacePtr> spaces;
  for (std::size_t i = 0; i < shape.nodes; ++i) {
    const std::size_t k = states_dist(rng);
    std::vector<std::string> labels;
    for (std::size_t x = 0; x < k; ++x) labels.push_back("s" + std::to_string(x));
    auto space = make_space(labels);
    NodeSpec spec{std::to_string(i + 1), labels, std::nullopt, {}};
    if (i == 0) {
      spec.model.rows.push_back(random_set(space));
    } else {
      std::vector<std::size_t> open;
      for (std::size_t j = 0; j < i; ++j)
        if (child_count[j] < shape.max_children) open.push_back(j);
      std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
      const std::size_t parent = open[pick(rng)];
      ++child_count[parent];
      spec.parent = std::to_string(parent + 1);
      for (std::size_t r = 0; r < spaces[parent]->size(); ++r) spec.model.rows.push_back(random_set(space));
    }
    child_count.push_back(0);
    spaces.push_back(space);
    specs.push_back(std::move(spec));
  }
  return Tree::build(std::move(specs));
}

}  // namespace imtree
