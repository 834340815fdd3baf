#pragma once

// Text format for trees and evidence.
//
//   { "nodes": [ { "id": "1", "states": ["a","b"], "parent": null,
//                  "model": { "vertices": [[0.5, 0.5]] } },
//                { "id": "2", "states": ["u","v"], "parent": "1",
//                  "model": { "a": { "vertices": [[0.5, 0.5]] },
//                             "b": { "idm": { "counts": [3, 1], "s": 2 } } } } ] }
//
// A model entry is one of {"vertices": [[...]...]}, {"idm": {"counts", "s"}}
// or, on binary spaces only, {"interval": {"lower": [..], "upper": [..]}}.
// The root's model is a single entry; other nodes map each parent state
// label to an entry. Evidence is an object mapping node ids to state labels.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "imtree/tree.hpp"

namespace imtree {

using Json = nlohmann::ordered_json;

/// Parses one model entry ({"vertices"} / {"idm"} / {"interval"}).
CredalSet credal_from_json(const SpacePtr& space, const Json& j);
Json credal_to_json(const CredalSet& c);

Tree tree_from_json(const Json& doc);
/// Canonical form: vertex lists, document order, shortest round-trip numbers.
Json tree_to_json(const Tree& tree);

Evidence evidence_from_json(const Tree& tree, const Json& doc);
Json evidence_to_json(const Tree& tree, const Evidence& ev);

Json read_json_file(const std::filesystem::path& path);
Tree read_tree_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

}  // namespace imtree
