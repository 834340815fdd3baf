#include "imtree/study.hpp"

#include <random>

#include "imtree/errors.hpp"
#include "imtree/propagation.hpp"

namespace imtree {

namespace {

std::uint64_t run_seed(const ChainStudyOptions& opt, std::size_t length, std::size_t run) {
  std::seed_seq seq{opt.seed, static_cast<std::uint64_t>(length), static_cast<std::uint64_t>(run)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

constexpr double kSlack = 1e-9;

}  // namespace

Tree study_chain(std::size_t length, const ChainStudyOptions& opt, std::size_t run) {
  if (length < 2) throw PreconditionError("chain length must be at least 2");
  RandomTreeShape shape;
  shape.nodes = length;
  shape.max_children = 1;
  shape.min_states = shape.max_states = 2;
  shape.vertices_per_set = 2;
  shape.imprecision = opt.imprecision;
  shape.floor = opt.floor;
  return random_tree(shape, run_seed(opt, length, run));
}

Evidence study_evidence(const Tree& chain, const ChainStudyOptions& opt, std::size_t run) {
  const std::size_t length = chain.size();
  Evidence ev(chain);
  ev.set(chain.index(std::to_string(length)), static_cast<std::size_t>(run_seed(opt, length, run) >> 63));
  return ev;
}

ChainRun study_run(std::size_t length, const ChainStudyOptions& opt, std::size_t run) {
  const Tree tree = study_chain(length, opt, run);
  const NodeIndex leaf = tree.index(std::to_string(length));
  const Evidence ev = study_evidence(tree, opt, run);

  ChainRun r;
  const auto epi = posterior_interval_event(tree, tree.root(), ev, 0, opt.tol);
  r.epistemic_lower = epi.lower;
  r.epistemic_upper = epi.upper;
  const std::vector<double> g{1.0, 0.0};
  const auto strong = strong_chain_root_interval(tree, ev, g);
  r.strong_lower = strong.lower;
  r.strong_upper = strong.upper;

  // Centre model: average of the two vertices of every set.
  std::vector<NodeSpec> specs;
  for (NodeIndex n = 0; n < tree.size(); ++n) {
    const auto& node = tree.node(n);
    NodeSpec s{node.id, node.space->labels(),
               node.parent ? std::optional<std::string>(tree.node(*node.parent).id) : std::nullopt, {}};
    for (const auto& row : node.model.rows) {
      std::vector<double> mid(2, 0.0);
      for (std::size_t k = 0; k < row.num_vertices(); ++k)
        for (std::size_t x = 0; x < 2; ++x) mid[x] += row.vertex(k)[x] / static_cast<double>(row.num_vertices());
      s.model.rows.push_back(CredalSet(node.space, std::vector<std::vector<double>>{mid}));
    }
    specs.push_back(std::move(s));
  }
  const Tree centre = Tree::build(std::move(specs));
  Evidence cev(centre);
  cev.set(centre.index(std::to_string(length)), *ev.observed(leaf));
  r.precise = strong_chain_root_interval(centre, cev, g).lower;
  return r;
}

ChainStudyRow chain_study(std::size_t length, const ChainStudyOptions& opt) {
  ChainStudyRow row;
  row.length = length;
  row.runs = opt.runs;
  for (std::size_t i = 0; i < opt.runs; ++i) {
    const ChainRun r = study_run(length, opt, i);
    const double we = r.epistemic_upper - r.epistemic_lower;
    const double ws = r.strong_upper - r.strong_lower;
    row.mean_epistemic_width += we;
    row.mean_strong_width += ws;
    if (r.strong_lower < r.epistemic_lower - kSlack || r.strong_upper > r.epistemic_upper + kSlack)
      ++row.containment_violations;
  }
  if (opt.runs > 0) {
    row.mean_epistemic_width /= static_cast<double>(opt.runs);
    row.mean_strong_width /= static_cast<double>(opt.runs);
  }
  row.mean_difference = row.mean_epistemic_width - row.mean_strong_width;
  return row;
}

}  // namespace imtree
