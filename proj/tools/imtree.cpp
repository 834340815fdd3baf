// imtree: command-line front end.
//
// Exit codes: 0 success, 1 validation failure, 2 usage error,
// 3 numerical precondition failure (e.g. enumeration budget).

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "imtree/errors.hpp"
#include "imtree/hmm.hpp"
#include "imtree/oracles.hpp"
#include "imtree/propagation.hpp"
#include "imtree/study.hpp"
#include "imtree/tree_io.hpp"

using namespace imtree;

namespace {

constexpr int kValidationFailure = 1;
constexpr int kUsageError = 2;
constexpr int kPreconditionFailure = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool g_table = false;

void emit(const Json& j) {
  if (!g_table || !j.is_object()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::size_t width = 0;
  for (const auto& [k, v] : j.items()) width = std::max(width, k.size());
  for (const auto& [k, v] : j.items()) {
    std::cout << k << std::string(width - k.size() + 2, ' ');
    if (v.is_string())
      std::cout << v.get<std::string>();
    else
      std::cout << v.dump();
    std::cout << '\n';
  }
}

int fail(int code, const std::string& kind, const std::string& message) {
  Json e = Json::object();
  e["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << e.dump() << '\n';
  return code;
}

double default_tol() {
  if (const char* env = std::getenv("IMTREE_TOL")) {
    try {
      std::size_t used = 0;
      const double v = std::stod(env, &used);
      if (used == std::string(env).size() && v > 0.0) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("IMTREE_TOL must be a positive number");
  }
  return kDefaultTolerance;
}

struct EvidenceArgs {
  std::string file;
  std::vector<std::string> assignments;  // id=label

  void add_to(CLI::App* cmd) {
    cmd->add_option("--evidence", file, "Evidence JSON file (object of id: label)");
    cmd->add_option("--observe", assignments, "Inline evidence id=label (repeatable)");
  }

  Evidence load(const Tree& tree) const {
    Json doc = Json::object();
    if (!file.empty()) doc = read_json_file(file);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--observe expects id=label, got '" + a + "'");
      doc[a.substr(0, eq)] = a.substr(eq + 1);
    }
    return evidence_from_json(tree, doc);
  }
};

struct GambleArgs {
  std::string values;
  std::string event;

  void add_to(CLI::App* cmd) {
    auto* g = cmd->add_option("--gamble", values, "Gamble values in state order, comma separated");
    auto* e = cmd->add_option("--event", event, "Indicator of one target state");
    g->excludes(e);
  }

  std::vector<double> load(const StateSpace& space) const {
    if (!event.empty()) {
      std::vector<double> g(space.size(), 0.0);
      g[space.index(event)] = 1.0;
      return g;
    }
    if (values.empty()) throw UsageError("one of --gamble or --event is required");
    std::vector<double> g;
    std::stringstream ss(values);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        g.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw UsageError("bad gamble entry '" + item + "'");
      }
    }
    if (g.size() != space.size())
      throw UsageError("gamble has " + std::to_string(g.size()) + " values, target has " +
                       std::to_string(space.size()) + " states");
    return g;
  }
};

Route parse_route(const std::string& r) {
  if (r == "auto") return Route::automatic;
  if (r == "trunk") return Route::trunk;
  if (r == "full") return Route::full;
  throw UsageError("route must be auto, trunk or full");
}

std::vector<std::size_t> parse_lengths(const std::string& spec) {
  std::vector<std::size_t> out;
  auto number = [&](const std::string& s, long long min = 2) -> std::size_t {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size() || v < min) throw std::invalid_argument(s);
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw UsageError("bad length spec '" + s + "'");
    }
  };
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(item));
      continue;
    }
    std::string rest = item.substr(dots + 2);
    std::size_t step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = number(rest.substr(colon + 1), 1);
      rest = rest.substr(0, colon);
    }
    const std::size_t a = number(item.substr(0, dots)), b = number(rest);
    if (a > b) throw UsageError("empty length range '" + item + "'");
    for (std::size_t l = a; l <= b; l += step) out.push_back(l);
  }
  if (out.empty()) throw UsageError("no lengths given");
  return out;
}

Json interval_json(double lo, double hi) { return Json::array({lo, hi}); }

// --- subcommands ------------------------------------------------------------

int cmd_validate(const std::string& path) {
  const Tree tree = read_tree_file(path);
  const TreeReport rep = validate_tree(tree);
  Json j = Json::object();
  j["nodes"] = tree.size();
  j["root"] = tree.node(tree.root()).id;
  j["is_chain"] = tree.is_chain();
  j["preconditions_met"] = rep.preconditions_met;
  j["issues"] = Json::array();
  for (const auto& is : rep.issues) {
    Json i = Json::object();
    i["node"] = is.node;
    if (is.parent_state)
      i["parent_state"] = *is.parent_state;
    else
      i["parent_state"] = nullptr;
    i["null_states"] = is.null_states;
    j["issues"].push_back(i);
  }
  emit(j);
  return rep.preconditions_met ? 0 : kValidationFailure;
}

int cmd_query(const std::string& path, const std::string& target_id, const EvidenceArgs& ea, const GambleArgs& ga,
              double tol, const std::string& route) {
  const Tree tree = read_tree_file(path);
  const NodeIndex target = tree.index(target_id);
  const Evidence ev = ea.load(tree);
  const auto g = ga.load(*tree.space(target));
  const BackboneEvaluator be(tree, target, ev, parse_route(route));
  const auto lo = posterior_lower(be, g, tol);
  const auto hi = posterior_upper(be, g, tol);
  Json j = Json::object();
  j["target"] = target_id;
  j["lower"] = lo.value;
  j["upper"] = hi.value;
  j["evidence_upper_prob"] = lo.evidence_upper_prob;
  j["evaluations"] = lo.evaluations + hi.evaluations;
  j["vacuous"] = lo.vacuous;
  j["route"] = be.uses_trunk() ? "trunk" : "full";
  j["tol"] = tol;
  emit(j);
  return 0;
}

int cmd_evidence_prob(const std::string& path, const EvidenceArgs& ea) {
  const Tree tree = read_tree_file(path);
  const Evidence ev = ea.load(tree);
  Json j = Json::object();
  j["upper"] = upper_evidence_probability(tree, ev);
  j["lower"] = lower_evidence_probability(tree, ev);
  emit(j);
  return 0;
}

int cmd_compare(const std::string& path, const std::string& target_id, const EvidenceArgs& ea, const GambleArgs& ga,
                double tol, std::uint64_t budget) {
  const Tree tree = read_tree_file(path);
  const NodeIndex target = tree.index(target_id);
  const Evidence ev = ea.load(tree);
  const auto g = ga.load(*tree.space(target));
  const BackboneEvaluator be(tree, target, ev);
  const auto lo = posterior_lower(be, g, tol);
  const auto hi = posterior_upper(be, g, tol);
  const auto strong = strong_posterior_enumeration(tree, target, ev, g, budget);

  Json j = Json::object();
  j["target"] = target_id;
  j["epistemic"] = interval_json(lo.value, hi.value);
  j["epistemic_width"] = hi.value - lo.value;
  j["vacuous"] = lo.vacuous;
  j["selections"] = strong.selections;
  j["feasible_selections"] = strong.feasible;
  bool contained = true;
  if (strong.feasible > 0) {
    j["strong"] = interval_json(strong.lower, strong.upper);
    j["strong_width"] = strong.upper - strong.lower;
    j["width_difference"] = (hi.value - lo.value) - (strong.upper - strong.lower);
    const double slack = 1e-9 + 2.0 * lo.tol;
    contained = strong.lower >= lo.value - slack && strong.upper <= hi.value + slack;
  } else {
    j["strong"] = nullptr;
    j["strong_width"] = nullptr;
    j["width_difference"] = nullptr;
  }
  j["strong_contained"] = contained;
  emit(j);
  if (!contained) return fail(kValidationFailure, "containment", "strong interval is not inside the epistemic one");
  return 0;
}

int cmd_hmm_train(const std::string& corpus, const std::string& observed, double s, const std::string& out) {
  const auto gen = read_lines(corpus);
  const auto obs = read_lines(observed);
  std::vector<std::string> all = gen;
  all.insert(all.end(), obs.begin(), obs.end());
  const SpacePtr alphabet = alphabet_of(all);
  const auto pairs = paired_corpus(*alphabet, gen, obs);
  const ImpreciseHMM hmm = learn_hmm(pairs, alphabet, s);
  write_json_file(out, hmm_to_json(hmm));
  Json j = Json::object();
  j["model"] = out;
  j["alphabet_size"] = alphabet->size();
  j["sequences"] = pairs.size();
  std::size_t symbols = 0;
  for (const auto& p : pairs) symbols += p.generative.size();
  j["symbols"] = symbols;
  j["s"] = s;
  emit(j);
  return 0;
}

int cmd_hmm_predict(const std::string& model, const std::string& sequence, double tol, double factor) {
  const ImpreciseHMM hmm = hmm_from_json(read_json_file(model));
  if (sequence.empty()) throw UsageError("--sequence must be non-empty");
  const auto obs = encode(*hmm.alphabet(), sequence);
  const auto p = predict_maximal(hmm, obs, PredictOptions{tol, factor});
  Json j = Json::object();
  Json maximal = Json::array();
  for (auto x : p.maximal_states) maximal.push_back(hmm.alphabet()->label(x));
  j["maximal_states"] = maximal;
  j["precise_state"] = hmm.alphabet()->label(p.precise_state);
  j["determinate"] = p.determinate();
  j["evaluations"] = p.evaluations;
  emit(j);
  return 0;
}

int cmd_hmm_eval(const std::string& model, const std::string& test, const std::string& observed, std::size_t window,
                 double tol, double factor) {
  const ImpreciseHMM hmm = hmm_from_json(read_json_file(model));
  auto pairs = paired_corpus(*hmm.alphabet(), read_lines(test), read_lines(observed));
  std::erase_if(pairs, [](const SequencePair& p) { return p.generative.empty(); });
  if (window > 0) pairs = sliding_windows(pairs, window);
  if (pairs.empty()) throw UsageError("no test instances");
  emit(metrics_to_json(evaluate(hmm, pairs, PredictOptions{tol, factor})));
  return 0;
}

int cmd_bench(const std::string& lengths, std::size_t runs, std::uint64_t seed, double imprecision, double tol) {
  ChainStudyOptions opt;
  opt.runs = runs;
  opt.seed = seed;
  opt.imprecision = imprecision;
  opt.tol = tol;
  if (!(imprecision >= 0.0 && imprecision <= 1.0)) throw UsageError("--imprecision must lie in [0, 1]");
  std::cout << "length,runs,mean_epistemic_width,mean_strong_width,mean_difference,containment_violations\n";
  std::cout.precision(12);
  for (auto len : parse_lengths(lengths)) {
    const auto r = chain_study(len, opt);
    std::cout << r.length << ',' << r.runs << ',' << r.mean_epistemic_width << ',' << r.mean_strong_width << ','
              << r.mean_difference << ',' << r.containment_violations << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact inference in imprecise Markov trees"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--table", g_table, "Human-readable key/value output instead of JSON");

  double tol = 0.0;
  int code = 0;
  try {
    tol = default_tol();
  } catch (const UsageError& e) {
    return fail(kUsageError, "usage", e.what());
  }

  std::string tree_path, target, route = "auto";
  EvidenceArgs ev_args;
  GambleArgs g_args;
  std::uint64_t budget = kDefaultEnumerationBudget;

  auto* validate = app.add_subcommand("validate", "Structural and positivity report; exit 0 iff preconditions hold");
  validate->add_option("tree", tree_path, "Tree JSON file")->required();

  auto* query = app.add_subcommand("query", "Posterior lower and upper prevision of a gamble on the target");
  query->add_option("tree", tree_path, "Tree JSON file")->required();
  query->add_option("--target", target, "Target node id")->required();
  ev_args.add_to(query);
  g_args.add_to(query);
  query->add_option("--tol", tol, "Root-finding tolerance, relative to the gamble range");
  query->add_option("--route", route, "auto, trunk or full");

  auto* eprob = app.add_subcommand("evidence-prob", "Lower and upper probability of the evidence");
  eprob->add_option("tree", tree_path, "Tree JSON file")->required();
  ev_args.add_to(eprob);

  auto* compare = app.add_subcommand("compare", "Epistemic interval versus strong-extension enumeration");
  compare->add_option("tree", tree_path, "Tree JSON file")->required();
  compare->add_option("--target", target, "Target node id")->required();
  ev_args.add_to(compare);
  g_args.add_to(compare);
  compare->add_option("--tol", tol, "Root-finding tolerance");
  compare->add_option("--budget", budget, "Maximum number of vertex selections");

  std::string corpus, observed, model_out, model, sequence;
  double s = 2.0, factor = 10.0;
  std::size_t window = 0;
  auto* train = app.add_subcommand("hmm-train", "Learn an imprecise HMM from paired corpus files");
  train->add_option("--corpus", corpus, "Generative sequences, one per line")->required();
  train->add_option("--observed", observed, "Observed sequences, line-aligned with --corpus")->required();
  train->add_option("--s", s, "IDM parameter")->check(CLI::PositiveNumber);
  train->add_option("--out", model_out, "Model JSON output path")->required();

  auto* predict = app.add_subcommand("hmm-predict", "Maximal states for the last hidden symbol");
  predict->add_option("--model", model, "Model JSON")->required();
  predict->add_option("--sequence", sequence, "Observed symbols")->required();
  predict->add_option("--tol", tol, "Root-finding tolerance");
  predict->add_option("--threshold-factor", factor, "Dominance threshold in units of the absolute tolerance");

  auto* heval = app.add_subcommand("hmm-eval", "Set-valued recognition metrics on a test corpus");
  heval->add_option("--model", model, "Model JSON")->required();
  heval->add_option("--test", corpus, "Generative test sequences")->required();
  heval->add_option("--observed", observed, "Observed test sequences")->required();
  heval->add_option("--window", window, "Split into sliding windows of this length (0 = whole lines)");
  heval->add_option("--tol", tol, "Root-finding tolerance");
  heval->add_option("--threshold-factor", factor, "Dominance threshold in units of the absolute tolerance");

  std::string lengths = "5..100:5";
  std::size_t runs = 200;
  std::uint64_t seed = 1;
  double imprecision = ChainStudyOptions{}.imprecision;
  auto* bench = app.add_subcommand("bench", "Width difference on random binary chains, as CSV");
  bench->add_option("--lengths", lengths, "Comma list of lengths or ranges a..b[:step]");
  bench->add_option("--runs", runs, "Monte Carlo runs per length");
  bench->add_option("--seed", seed, "Random seed");
  bench->add_option("--imprecision", imprecision, "Vertex spread of the random local models");
  bench->add_option("--tol", tol, "Root-finding tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsageError, "usage", e.what());
  }

  try {
    if (!(tol > 0.0)) throw UsageError("--tol must be positive");
    if (*validate) code = cmd_validate(tree_path);
    else if (*query) code = cmd_query(tree_path, target, ev_args, g_args, tol, route);
    else if (*eprob) code = cmd_evidence_prob(tree_path, ev_args);
    else if (*compare) code = cmd_compare(tree_path, target, ev_args, g_args, tol, budget);
    else if (*train) code = cmd_hmm_train(corpus, observed, s, model_out);
    else if (*predict) code = cmd_hmm_predict(model, sequence, tol, factor);
    else if (*heval) code = cmd_hmm_eval(model, corpus, observed, window, tol, factor);
    else if (*bench) code = cmd_bench(lengths, runs, seed, imprecision, tol);
  } catch (const UsageError& e) {
    return fail(kUsageError, "usage", e.what());
  } catch (const StructuralError& e) {
    return fail(kValidationFailure, "structural", e.what());
  } catch (const PreconditionError& e) {
    return fail(kPreconditionFailure, "precondition", e.what());
  } catch (const std::exception& e) {
    return fail(kPreconditionFailure, "numerical", e.what());
  }
  return code;
}
