#include "imtree/tree_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace imtree {

namespace {

std::string id_string(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return j.dump();
  throw StructuralError("node ids must be strings or integers, got " + j.dump());
}

std::vector<double> number_list(const Json& j, const char* what) {
  if (!j.is_array()) throw StructuralError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw StructuralError(std::string(what) + " must contain numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

CredalSet credal_from_json(const SpacePtr& space, const Json& j) {
  if (!j.is_object() || j.size() != 1)
    throw StructuralError("model entry must be an object with exactly one of 'vertices', 'idm', 'interval'");
  if (auto it = j.find("vertices"); it != j.end()) {
    if (!it->is_array() || it->empty()) throw StructuralError("'vertices' must be a non-empty array");
    std::vector<std::vector<double>> rows;
    for (const auto& r : *it) rows.push_back(number_list(r, "vertex"));
    auto rep = check_credal_set(*space, rows);
    if (!rep.valid) throw StructuralError("invalid vertices: " + rep.problems.front());
    return CredalSet(space, rows);
  }
  if (auto it = j.find("idm"); it != j.end()) {
    CountTable t{space, {}, 0.0};
    if (!it->contains("counts") || !it->contains("s")) throw StructuralError("'idm' needs 'counts' and 's'");
    for (const auto& c : (*it)["counts"]) {
      if (!c.is_number_integer() || c.get<long long>() < 0)
        throw StructuralError("IDM counts must be non-negative integers");
      t.counts.push_back(c.get<std::uint64_t>());
    }
    if (!(*it)["s"].is_number()) throw StructuralError("IDM 's' must be a number");
    t.hyper_s = (*it)["s"].get<double>();
    return idm_from_counts(t);
  }
  if (auto it = j.find("interval"); it != j.end()) {
    if (!it->contains("lower") || !it->contains("upper"))
      throw StructuralError("'interval' needs 'lower' and 'upper'");
    auto lo = number_list((*it)["lower"], "interval lower");
    auto hi = number_list((*it)["upper"], "interval upper");
    return binary_interval_model(space, lo, hi);
  }
  throw StructuralError("model entry must contain 'vertices', 'idm' or 'interval'");
}

Json credal_to_json(const CredalSet& c) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < c.num_vertices(); ++k) {
    Json r = Json::array();
    for (double p : c.vertex(k)) r.push_back(p);
    rows.push_back(std::move(r));
  }
  return Json{{"vertices", std::move(rows)}};
}

Tree tree_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw StructuralError("tree document must be an object with a 'nodes' array");
  const auto& nodes = doc["nodes"];

  // Parent spaces are needed to key conditional tables, so collect states first.
  std::map<std::string, std::vector<std::string>> states_of;
  std::vector<NodeSpec> specs;
  for (const auto& n : nodes) {
    if (!n.is_object() || !n.contains("id") || !n.contains("states") || !n.contains("model"))
      throw StructuralError("every node needs 'id', 'states' and 'model'");
    NodeSpec s;
    s.id = id_string(n["id"]);
    if (!n["states"].is_array()) throw StructuralError("node '" + s.id + "': 'states' must be an array");
    for (const auto& l : n["states"]) {
      if (l.is_string()) s.states.push_back(l.get<std::string>());
      else if (l.is_number_integer()) s.states.push_back(l.dump());
      else throw StructuralError("node '" + s.id + "': state labels must be strings");
    }
    if (n.contains("parent") && !n["parent"].is_null()) s.parent = id_string(n["parent"]);
    states_of.emplace(s.id, s.states);
    specs.push_back(std::move(s));
  }

  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto& s = specs[i];
    const auto& m = nodes[i]["model"];
    SpacePtr space;
    try {
      space = make_space(s.states);
    } catch (const StructuralError& e) {
      throw StructuralError("node '" + s.id + "': " + e.what());
    }
    try {
      if (!s.parent) {
        s.model.rows.push_back(credal_from_json(space, m));
        continue;
      }
      auto ps = states_of.find(*s.parent);
      if (ps == states_of.end())
        throw StructuralError("names unknown parent '" + *s.parent + "'");
      if (!m.is_object()) throw StructuralError("conditional model must map parent states to entries");
      for (const auto& [key, _] : m.items())
        if (std::find(ps->second.begin(), ps->second.end(), key) == ps->second.end())
          throw StructuralError("conditional entry for unknown parent state '" + key + "'");
      for (const auto& label : ps->second) {
        auto it = m.find(label);
        if (it == m.end()) throw StructuralError("missing conditional entry for parent state '" + label + "'");
        s.model.rows.push_back(credal_from_json(space, *it));
      }
    } catch (const StructuralError& e) {
      throw StructuralError("node '" + s.id + "': " + e.what());
    }
  }

  return Tree::build(std::move(specs));
}

Json tree_to_json(const Tree& tree) {
  Json nodes = Json::array();
  for (const auto& n : tree.nodes()) {
    Json j;
    j["id"] = n.id;
    j["states"] = n.space->labels();
    if (n.parent) {
      j["parent"] = tree.node(*n.parent).id;
      Json m = Json::object();
      const auto& ps = tree.space(*n.parent);
      for (std::size_t r = 0; r < n.model.rows.size(); ++r) m[ps->label(r)] = credal_to_json(n.model.rows[r]);
      j["model"] = std::move(m);
    } else {
      j["parent"] = nullptr;
      j["model"] = credal_to_json(n.model.rows.front());
    }
    nodes.push_back(std::move(j));
  }
  return Json{{"nodes", std::move(nodes)}};
}

Evidence evidence_from_json(const Tree& tree, const Json& doc) {
  if (!doc.is_object()) throw StructuralError("evidence must be an object mapping node ids to states");
  std::map<std::string, std::string> m;
  for (const auto& [k, v] : doc.items()) {
    if (v.is_string()) m[k] = v.get<std::string>();
    else if (v.is_number_integer()) m[k] = v.dump();
    else throw StructuralError("evidence for node '" + k + "' must be a state label");
  }
  return Evidence::from_labels(tree, m);
}

Json evidence_to_json(const Tree& tree, const Evidence& ev) {
  Json j = Json::object();
  for (const auto& [k, v] : ev.to_labels(tree)) j[k] = v;
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw StructuralError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

Tree read_tree_file(const std::filesystem::path& path) { return tree_from_json(read_json_file(path)); }

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace imtree
