#pragma once

// Rooted directed tree of discrete variables with local credal models,
// evidence assignments, and the trunk of an updating query.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "imtree/credal.hpp"

namespace imtree {

using NodeIndex = std::size_t;

/// Local uncertainty model of a node: one credal set for the root, or one
/// credal set per state of the parent.
struct LocalModel {
  std::vector<CredalSet> rows;

  bool is_marginal() const { return rows.size() == 1; }
};

/// Input description of one node, in document order.
struct NodeSpec {
  std::string id;
  std::vector<std::string> states;
  std::optional<std::string> parent;
  LocalModel model;  // rows indexed by parent state (one row for the root)
};

class Tree {
 public:
  struct Node {
    std::string id;
    SpacePtr space;
    std::optional<NodeIndex> parent;
    LocalModel model;
    std::vector<NodeIndex> children;  // document order
  };

  /// Validates structure: unique ids, a single root, parents exist, no
  /// cycles, one conditional row per parent state on the node's space.
  static Tree build(std::vector<NodeSpec> specs);

  std::size_t size() const { return nodes_.size(); }
  NodeIndex root() const { return root_; }
  const Node& node(NodeIndex i) const { return nodes_.at(i); }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::optional<NodeIndex> find(const std::string& id) const;
  NodeIndex index(const std::string& id) const;

  /// Parents before children; root first.
  const std::vector<NodeIndex>& topological_order() const { return topo_; }

  const CredalSet& model(NodeIndex i, std::size_t parent_state) const {
    return nodes_[i].model.rows[parent_state];
  }
  const SpacePtr& space(NodeIndex i) const { return nodes_[i].space; }

  /// Nodes from the root down to `i`, inclusive.
  std::vector<NodeIndex> path_from_root(NodeIndex i) const;
  /// Preorder listing of the subtree rooted at `i`.
  std::vector<NodeIndex> subtree(NodeIndex i) const;
  bool is_chain() const;

  /// Every local credal set gives every singleton positive upper probability.
  bool strictly_positive() const { return strictly_positive_; }

 private:
  std::vector<Node> nodes_;
  NodeIndex root_ = 0;
  std::vector<NodeIndex> topo_;
  std::unordered_map<std::string, NodeIndex> index_;
  bool strictly_positive_ = true;
};

bool operator==(const Tree& a, const Tree& b);

/// Instantiated nodes and their observed states.
class Evidence {
 public:
  Evidence() = default;
  explicit Evidence(const Tree& tree) : observed_(tree.size()) {}

  /// Resolves ids and state labels against `tree`.
  static Evidence from_labels(const Tree& tree, const std::map<std::string, std::string>& assignments);

  void set(NodeIndex node, std::size_t state);
  std::optional<std::size_t> observed(NodeIndex node) const {
    return node < observed_.size() ? observed_[node] : std::nullopt;
  }
  bool contains(NodeIndex node) const { return observed(node).has_value(); }
  bool empty() const { return count_ == 0; }
  std::size_t count() const { return count_; }
  std::size_t tree_size() const { return observed_.size(); }

  std::map<std::string, std::string> to_labels(const Tree& tree) const;

 private:
  std::vector<std::optional<std::size_t>> observed_;
  std::size_t count_ = 0;
};

/// The trunk of a query: the chain of ancestors of the target that strictly
/// follow its greatest instantiated ancestor.
struct TrunkInfo {
  std::optional<NodeIndex> instantiated_ancestor;  // e_t
  NodeIndex start;                                 // s_t
  std::vector<NodeIndex> nodes;                    // s_t ... target
};

TrunkInfo trunk(const Tree& tree, NodeIndex target, const Evidence& ev);

struct PositivityIssue {
  std::string node;
  std::optional<std::string> parent_state;  // absent for the root marginal
  std::vector<std::string> null_states;
};

struct TreeReport {
  bool preconditions_met = true;
  std::vector<PositivityIssue> issues;
};

TreeReport validate_tree(const Tree& tree);

}  // namespace imtree
