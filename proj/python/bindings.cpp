// Python module imtree._core. Trees and models cross the boundary as the same
// JSON documents the CLI reads; results come back as dicts.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imtree/errors.hpp"
#include "imtree/hmm.hpp"
#include "imtree/oracles.hpp"
#include "imtree/propagation.hpp"
#include "imtree/rootfind.hpp"
#include "imtree/study.hpp"
#include "imtree/tree_io.hpp"

namespace py = pybind11;
using namespace imtree;

namespace {

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_py(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Evidence make_evidence(const Tree& t, const std::map<std::string, std::string>& ev) {
  return Evidence::from_labels(t, ev);
}

std::vector<double> make_gamble(const Tree& t, NodeIndex target, const std::optional<std::vector<double>>& gamble,
                                const std::optional<std::string>& event) {
  const auto& space = *t.space(target);
  if (gamble && event) throw PreconditionError("give either a gamble or an event, not both");
  if (event) {
    std::vector<double> g(space.size(), 0.0);
    g[space.index(*event)] = 1.0;
    return g;
  }
  if (!gamble) throw PreconditionError("a gamble or an event is required");
  if (gamble->size() != space.size()) throw StructuralError("gamble size does not match the target's states");
  return *gamble;
}

Route parse_route(const std::string& r) {
  if (r == "auto") return Route::automatic;
  if (r == "trunk") return Route::trunk;
  if (r == "full") return Route::full;
  throw PreconditionError("route must be auto, trunk or full");
}

py::dict posterior(const Tree& t, const std::string& target, const std::map<std::string, std::string>& evidence,
                   const std::optional<std::vector<double>>& gamble, const std::optional<std::string>& event,
                   double tol, const std::string& route) {
  const NodeIndex n = t.index(target);
  const auto g = make_gamble(t, n, gamble, event);
  const BackboneEvaluator be(t, n, make_evidence(t, evidence), parse_route(route));
  const auto lo = posterior_lower(be, g, tol);
  const auto up = posterior_upper(be, g, tol);
  py::dict d;
  d["lower"] = lo.value;
  d["upper"] = up.value;
  d["vacuous"] = lo.vacuous;
  d["evidence_upper_prob"] = lo.evidence_upper_prob;
  d["evaluations"] = lo.evaluations + up.evaluations;
  d["route"] = be.uses_trunk() ? "trunk" : "full";
  return d;
}

py::dict prediction_dict(const PredictionSet& p, const StateSpace& alphabet) {
  py::list maximal;
  for (auto x : p.maximal_states) maximal.append(alphabet.label(x));
  py::dict d;
  d["maximal_states"] = maximal;
  d["precise_state"] = alphabet.label(p.precise_state);
  d["precise_posterior"] = p.precise_posterior;
  d["determinate"] = p.determinate();
  d["evaluations"] = p.evaluations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact inference in imprecise Markov trees under epistemic irrelevance";

  py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);

  m.attr("DEFAULT_TOLERANCE") = kDefaultTolerance;

  py::class_<Tree>(m, "Tree")
      .def_static("from_json", [](const py::object& doc) { return tree_from_json(from_py(doc)); }, py::arg("doc"))
      .def_static("from_file", [](const std::string& path) { return read_tree_file(path); }, py::arg("path"))
      .def("to_json", [](const Tree& t) { return to_py(tree_to_json(t)); })
      .def("__len__", &Tree::size)
      .def_property_readonly("ids",
                             [](const Tree& t) {
                               std::vector<std::string> ids;
                               for (const auto& n : t.nodes()) ids.push_back(n.id);
                               return ids;
                             })
      .def_property_readonly("root", [](const Tree& t) { return t.node(t.root()).id; })
      .def("states", [](const Tree& t, const std::string& id) { return t.space(t.index(id))->labels(); })
      .def("parent",
           [](const Tree& t, const std::string& id) -> std::optional<std::string> {
             const auto p = t.node(t.index(id)).parent;
             return p ? std::optional<std::string>(t.node(*p).id) : std::nullopt;
           })
      .def_property_readonly("is_chain", &Tree::is_chain)
      .def_property_readonly("strictly_positive", &Tree::strictly_positive)
      .def("__eq__", [](const Tree& a, const Tree& b) { return a == b; });

  m.def(
      "validate",
      [](const Tree& t) {
        const auto r = validate_tree(t);
        py::list issues;
        for (const auto& is : r.issues) {
          py::dict d;
          d["node"] = is.node;
          d["parent_state"] = is.parent_state;
          d["null_states"] = is.null_states;
          issues.append(d);
        }
        py::dict out;
        out["preconditions_met"] = r.preconditions_met;
        out["issues"] = issues;
        return out;
      },
      py::arg("tree"));

  m.def("posterior", &posterior, py::arg("tree"), py::arg("target"), py::arg("evidence") = std::map<std::string, std::string>{},
        py::arg("gamble") = std::nullopt, py::arg("event") = std::nullopt, py::arg("tol") = kDefaultTolerance,
        py::arg("route") = "auto",
        "Posterior lower and upper prevision of a gamble (or event indicator) on the target.");

  m.def(
      "evidence_probability",
      [](const Tree& t, const std::map<std::string, std::string>& evidence) {
        const auto ev = make_evidence(t, evidence);
        return std::pair<double, double>(lower_evidence_probability(t, ev), upper_evidence_probability(t, ev));
      },
      py::arg("tree"), py::arg("evidence"), "(lower, upper) probability of the evidence.");

  m.def(
      "strong_interval",
      [](const Tree& t, const std::string& target, const std::map<std::string, std::string>& evidence,
         const std::optional<std::vector<double>>& gamble, const std::optional<std::string>& event,
         std::uint64_t budget) {
        const NodeIndex n = t.index(target);
        const auto s = strong_posterior_enumeration(t, n, make_evidence(t, evidence), make_gamble(t, n, gamble, event),
                                                    budget);
        py::dict d;
        d["lower"] = s.lower;
        d["upper"] = s.upper;
        d["selections"] = s.selections;
        return d;
      },
      py::arg("tree"), py::arg("target"), py::arg("evidence") = std::map<std::string, std::string>{},
      py::arg("gamble") = std::nullopt, py::arg("event") = std::nullopt,
      py::arg("budget") = kDefaultEnumerationBudget,
      "Strong-extension posterior envelope by vertex enumeration (small trees only).");

  m.def(
      "random_tree",
      [](std::size_t nodes, std::size_t max_children, std::size_t min_states, std::size_t max_states,
         std::size_t vertices, double imprecision, double floor, std::uint64_t seed) {
        RandomTreeShape s;
        s.nodes = nodes;
        s.max_children = max_children;
        s.min_states = min_states;
        s.max_states = max_states;
        s.vertices_per_set = vertices;
        s.imprecision = imprecision;
        s.floor = floor;
        return random_tree(s, seed);
      },
      py::arg("nodes") = 6, py::arg("max_children") = 3, py::arg("min_states") = 2, py::arg("max_states") = 3,
      py::arg("vertices_per_set") = 2, py::arg("imprecision") = 0.5, py::arg("floor") = 0.01, py::arg("seed") = 0);

  m.def(
      "find_rightmost_root",
      [](const std::function<double(double)>& f, double lo, double hi, double tol, bool bisection) {
        const auto r = bisection ? bisect_rightmost_root(f, lo, hi, tol) : find_rightmost_root(f, lo, hi, tol);
        py::dict d;
        d["root"] = r.root;
        d["evaluations"] = r.evaluations;
        d["fell_back"] = r.fell_back;
        d["bracket"] = std::make_pair(r.bracket_lo, r.bracket_hi);
        return d;
      },
      py::arg("f"), py::arg("lo"), py::arg("hi"), py::arg("tol") = kDefaultTolerance, py::arg("bisection") = false);

  m.def(
      "chain_study",
      [](std::size_t length, std::size_t runs, std::uint64_t seed, double imprecision) {
        ChainStudyOptions opt;
        opt.runs = runs;
        opt.seed = seed;
        opt.imprecision = imprecision;
        const auto r = chain_study(length, opt);
        py::dict d;
        d["length"] = r.length;
        d["runs"] = r.runs;
        d["mean_epistemic_width"] = r.mean_epistemic_width;
        d["mean_strong_width"] = r.mean_strong_width;
        d["mean_difference"] = r.mean_difference;
        d["containment_violations"] = r.containment_violations;
        return d;
      },
      py::arg("length"), py::arg("runs") = 200, py::arg("seed") = 1, py::arg("imprecision") = 1.0);

  py::class_<ImpreciseHMM>(m, "HMM")
      .def_static(
          "learn",
          [](const std::vector<std::string>& generative, const std::vector<std::string>& observed, double s) {
            std::vector<std::string> all = generative;
            all.insert(all.end(), observed.begin(), observed.end());
            const auto alphabet = alphabet_of(all);
            return learn_hmm(paired_corpus(*alphabet, generative, observed), alphabet, s);
          },
          py::arg("generative"), py::arg("observed"), py::arg("s") = 2.0)
      .def_static("from_json", [](const py::object& doc) { return hmm_from_json(from_py(doc)); }, py::arg("doc"))
      .def("to_json", [](const ImpreciseHMM& h) { return to_py(hmm_to_json(h)); })
      .def_property_readonly("alphabet", [](const ImpreciseHMM& h) { return h.alphabet()->labels(); })
      .def_property_readonly("s", &ImpreciseHMM::hyper_s)
      .def("with_s", &ImpreciseHMM::with_s, py::arg("s"))
      .def("tree", &hmm_to_tree, py::arg("length"))
      .def(
          "predict",
          [](const ImpreciseHMM& h, const std::string& observed, double tol, double factor) {
            const auto seq = encode(*h.alphabet(), observed);
            return prediction_dict(predict_maximal(h, seq, PredictOptions{tol, factor}), *h.alphabet());
          },
          py::arg("observed"), py::arg("tol") = kDefaultTolerance, py::arg("threshold_factor") = 10.0)
      .def(
          "evaluate",
          [](const ImpreciseHMM& h, const std::vector<std::string>& generative,
             const std::vector<std::string>& observed, std::size_t window) {
            auto pairs = paired_corpus(*h.alphabet(), generative, observed);
            if (window > 0) pairs = sliding_windows(pairs, window);
            return to_py(metrics_to_json(evaluate(h, pairs)));
          },
          py::arg("generative"), py::arg("observed"), py::arg("window") = 0);
}
