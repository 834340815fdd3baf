#include "imtree/tree.hpp"

#include <algorithm>

namespace imtree {

Tree Tree::build(std::vector<NodeSpec> specs) {
  if (specs.empty()) throw StructuralError("tree has no nodes");
  Tree t;
  t.nodes_.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!t.index_.emplace(specs[i].id, i).second)
      throw StructuralError("duplicate node id '" + specs[i].id + "'");
  }

  std::optional<NodeIndex> root;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& s = specs[i];
    Node n;
    n.id = s.id;
    try {
      // Reuse the models' space object when it carries the same labels.
      if (!s.model.rows.empty() && s.model.rows.front().space()->labels() == s.states)
        n.space = s.model.rows.front().space();
      else
        n.space = make_space(s.states);
    } catch (const StructuralError& e) {
      throw StructuralError("node '" + s.id + "': " + e.what());
    }
    if (s.parent) {
      auto it = t.index_.find(*s.parent);
      if (it == t.index_.end())
        throw StructuralError("node '" + s.id + "' names unknown parent '" + *s.parent + "'");
      if (it->second == i) throw StructuralError("node '" + s.id + "' is its own parent (cycle)");
      n.parent = it->second;
    } else {
      if (root) throw StructuralError("multiple roots: '" + specs[*root].id + "' and '" + s.id + "'");
      root = i;
    }
    n.model = std::move(s.model);
    t.nodes_.push_back(std::move(n));
  }
  if (!root) throw StructuralError("no root node (every node has a parent, so the parent links form a cycle)");
  t.root_ = *root;

  for (std::size_t i = 0; i < t.nodes_.size(); ++i)
    if (auto p = t.nodes_[i].parent) t.nodes_[*p].children.push_back(i);

  // Breadth-first from the root; anything unreached sits on a cycle.
  t.topo_.reserve(t.nodes_.size());
  t.topo_.push_back(t.root_);
  for (std::size_t k = 0; k < t.topo_.size(); ++k)
    for (NodeIndex c : t.nodes_[t.topo_[k]].children) t.topo_.push_back(c);
  if (t.topo_.size() != t.nodes_.size()) {
    std::vector<bool> seen(t.nodes_.size(), false);
    for (auto i : t.topo_) seen[i] = true;
    auto it = std::find(seen.begin(), seen.end(), false);
    throw StructuralError("node '" + t.nodes_[it - seen.begin()].id +
                          "' is not reachable from the root (cycle in parent links)");
  }

  for (const auto& n : t.nodes_) {
    const std::size_t want = n.parent ? t.nodes_[*n.parent].space->size() : 1;
    if (n.model.rows.size() != want)
      throw StructuralError("node '" + n.id + "' has " + std::to_string(n.model.rows.size()) +
                            " local model entries, expected " + std::to_string(want));
    for (const auto& row : n.model.rows) {
      if (!same_space(row.space(), n.space))
        throw StructuralError("node '" + n.id + "' has a local model on a different state space");
      if (!check_credal_set(row).strictly_positive) t.strictly_positive_ = false;
    }
  }
  return t;
}

std::optional<NodeIndex> Tree::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex Tree::index(const std::string& id) const {
  if (auto i = find(id)) return *i;
  throw StructuralError("unknown node '" + id + "'");
}

std::vector<NodeIndex> Tree::path_from_root(NodeIndex i) const {
  std::vector<NodeIndex> path;
  for (std::optional<NodeIndex> cur = i; cur; cur = nodes_.at(*cur).parent) path.push_back(*cur);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<NodeIndex> Tree::subtree(NodeIndex i) const {
  std::vector<NodeIndex> out;
  std::vector<NodeIndex> stack{i};
  while (!stack.empty()) {
    NodeIndex n = stack.back();
    stack.pop_back();
    out.push_back(n);
    const auto& ch = nodes_[n].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool Tree::is_chain() const {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.children.size() <= 1; });
}

bool operator==(const Tree& a, const Tree& b) {
  if (a.size() != b.size() || a.root() != b.root()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.node(i);
    const auto& y = b.node(i);
    if (x.id != y.id || !(*x.space == *y.space) || x.parent != y.parent || x.children != y.children) return false;
    if (x.model.rows.size() != y.model.rows.size()) return false;
    for (std::size_t r = 0; r < x.model.rows.size(); ++r)
      if (x.model.rows[r].vertex_rows() != y.model.rows[r].vertex_rows()) return false;
  }
  return true;
}

Evidence Evidence::from_labels(const Tree& tree, const std::map<std::string, std::string>& assignments) {
  Evidence ev(tree);
  for (const auto& [id, label] : assignments) {
    NodeIndex n = tree.index(id);
    auto s = tree.space(n)->find(label);
    if (!s) throw StructuralError("state '" + label + "' is not a state of node '" + id + "'");
    ev.set(n, *s);
  }
  return ev;
}

void Evidence::set(NodeIndex node, std::size_t state) {
  if (node >= observed_.size()) throw StructuralError("evidence names a node outside the tree");
  if (!observed_[node]) ++count_;
  observed_[node] = state;
}

std::map<std::string, std::string> Evidence::to_labels(const Tree& tree) const {
  std::map<std::string, std::string> out;
  for (NodeIndex i = 0; i < observed_.size(); ++i)
    if (observed_[i]) out[tree.node(i).id] = tree.space(i)->label(*observed_[i]);
  return out;
}

TrunkInfo trunk(const Tree& tree, NodeIndex target, const Evidence& ev) {
  if (target >= tree.size()) throw StructuralError("unknown target node");
  if (ev.tree_size() != 0 && ev.tree_size() != tree.size())
    throw StructuralError("evidence was built for a different tree");
  if (ev.contains(target))
    throw StructuralError("target node '" + tree.node(target).id + "' is instantiated");
  auto path = tree.path_from_root(target);
  TrunkInfo info{std::nullopt, path.front(), {}};
  // The greatest instantiated ancestor is the last one on the root path.
  std::size_t first = 0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k)
    if (ev.contains(path[k])) {
      info.instantiated_ancestor = path[k];
      first = k + 1;
    }
  info.start = path[first];
  info.nodes.assign(path.begin() + static_cast<std::ptrdiff_t>(first), path.end());
  return info;
}

TreeReport validate_tree(const Tree& tree) {
  TreeReport rep;
  for (const auto& n : tree.nodes()) {
    for (std::size_t r = 0; r < n.model.rows.size(); ++r) {
      auto c = check_credal_set(n.model.rows[r]);
      if (c.strictly_positive) continue;
      PositivityIssue issue{n.id, std::nullopt, {}};
      if (n.parent) issue.parent_state = tree.space(*n.parent)->label(r);
      for (auto x : c.null_states) issue.null_states.push_back(n.space->label(x));
      rep.issues.push_back(std::move(issue));
      rep.preconditions_met = false;
    }
  }
  return rep;
}

}  // namespace imtree
