#include "imtree/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>

#include "imtree/errors.hpp"

namespace imtree {

namespace {

CountTable table(const SpacePtr& space, std::vector<std::uint64_t> counts, double s) {
  if (counts.size() != space->size()) throw StructuralError("count table size does not match the alphabet");
  return CountTable{space, std::move(counts), s};
}

std::vector<CredalSet> idm_sets(const std::vector<CountTable>& tables) {
  std::vector<CredalSet> out;
  out.reserve(tables.size());
  for (const auto& t : tables) out.push_back(idm_from_counts(t));
  return out;
}

std::vector<CountTable> tables(const SpacePtr& space, std::vector<std::vector<std::uint64_t>> rows, double s) {
  if (rows.size() != space->size()) throw StructuralError("need one count row per hidden symbol");
  std::vector<CountTable> out;
  for (auto& r : rows) out.push_back(table(space, std::move(r), s));
  return out;
}

std::vector<std::vector<std::uint64_t>> counts_of(const std::vector<CountTable>& t) {
  std::vector<std::vector<std::uint64_t>> out;
  for (const auto& x : t) out.push_back(x.counts);
  return out;
}

Json idm_block(const CountTable& t) {
  Json b = Json::object();
  b["idm"] = Json::object();
  b["idm"]["counts"] = t.counts;
  b["idm"]["s"] = t.hyper_s;
  return b;
}

std::vector<std::uint64_t> counts_from_block(const Json& j, std::size_t size) {
  if (!j.is_object() || !j.contains("idm") || !j["idm"].contains("counts"))
    throw StructuralError("expected an {\"idm\": {\"counts\": ...}} block");
  auto c = j["idm"]["counts"].get<std::vector<std::uint64_t>>();
  if (c.size() != size) throw StructuralError("count block size does not match the alphabet");
  return c;
}

void check_symbols(std::span<const std::size_t> seq, std::size_t size) {
  for (auto x : seq)
    if (x >= size) throw StructuralError("symbol index outside the alphabet");
}

}  // namespace

ImpreciseHMM::ImpreciseHMM(SpacePtr alphabet, double s, std::vector<std::uint64_t> initial,
                           std::vector<std::vector<std::uint64_t>> transition,
                           std::vector<std::vector<std::uint64_t>> emission)
    : alphabet_(std::move(alphabet)),
      s_(s),
      initial_(table(alphabet_, std::move(initial), s)),
      transition_(tables(alphabet_, std::move(transition), s)),
      emission_(tables(alphabet_, std::move(emission), s)),
      initial_set_(idm_from_counts(initial_)),
      transition_sets_(idm_sets(transition_)),
      emission_sets_(idm_sets(emission_)) {
  if (!(s > 0.0) || !std::isfinite(s)) throw StructuralError("IDM parameter s must be positive");
}

ImpreciseHMM ImpreciseHMM::with_s(double s) const {
  return ImpreciseHMM(alphabet_, s, initial_.counts, counts_of(transition_), counts_of(emission_));
}

std::vector<double> precise_companion(const CountTable& t) {
  const double n = static_cast<double>(t.total());
  const double share = t.hyper_s / static_cast<double>(t.counts.size());
  std::vector<double> p(t.counts.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = (static_cast<double>(t.counts[i]) + share) / (n + t.hyper_s);
  return p;
}

ImpreciseHMM learn_hmm(const std::vector<SequencePair>& corpus, const SpacePtr& alphabet, double s) {
  const std::size_t k = alphabet->size();
  std::vector<std::uint64_t> init(k, 0);
  std::vector<std::vector<std::uint64_t>> trans(k, std::vector<std::uint64_t>(k, 0));
  std::vector<std::vector<std::uint64_t>> emit(k, std::vector<std::uint64_t>(k, 0));
  for (const auto& p : corpus) {
    if (p.generative.size() != p.observed.size())
      throw StructuralError("generative and observed sequences differ in length");
    check_symbols(p.generative, k);
    check_symbols(p.observed, k);
    if (p.generative.empty()) continue;
    ++init[p.generative.front()];
    for (std::size_t i = 0; i + 1 < p.generative.size(); ++i) ++trans[p.generative[i]][p.generative[i + 1]];
    for (std::size_t i = 0; i < p.generative.size(); ++i) ++emit[p.generative[i]][p.observed[i]];
  }
  return ImpreciseHMM(alphabet, s, std::move(init), std::move(trans), std::move(emit));
}

Tree hmm_to_tree(const ImpreciseHMM& hmm, std::size_t n) {
  if (n == 0) throw PreconditionError("sequence length must be positive");
  const auto& labels = hmm.alphabet()->labels();
  const std::size_t k = hmm.size();
  LocalModel trans, emit;
  for (std::size_t x = 0; x < k; ++x) {
    trans.rows.push_back(hmm.transition(x));
    emit.rows.push_back(hmm.emission(x));
  }
  std::vector<NodeSpec> specs;
  specs.reserve(2 * n);
  for (std::size_t i = 1; i <= n; ++i) {
    const std::string s = "s" + std::to_string(i);
    if (i == 1)
      specs.push_back({s, labels, std::nullopt, LocalModel{{hmm.initial()}}});
    else
      specs.push_back({s, labels, "s" + std::to_string(i - 1), trans});
    specs.push_back({"o" + std::to_string(i), labels, s, emit});
  }
  return Tree::build(std::move(specs));
}

bool PredictionSet::contains(std::size_t x) const {
  return std::binary_search(maximal_states.begin(), maximal_states.end(), x);
}

std::vector<double> precise_last_state_posterior(const ImpreciseHMM& hmm, std::span<const std::size_t> observed) {
  if (observed.empty()) throw PreconditionError("empty observation sequence");
  const std::size_t k = hmm.size();
  check_symbols(observed, k);
  std::vector<std::vector<double>> trans(k), emit(k);
  for (std::size_t x = 0; x < k; ++x) {
    trans[x] = precise_companion(hmm.transition_counts(x));
    emit[x] = precise_companion(hmm.emission_counts(x));
  }
  auto normalize = [](std::vector<double>& v) {
    double z = 0.0;
    for (double a : v) z += a;
    if (!(z > 0.0)) throw PreconditionError("observation sequence has zero probability under the precise model");
    for (double& a : v) a /= z;
  };
  std::vector<double> alpha = precise_companion(hmm.initial_counts());
  for (std::size_t x = 0; x < k; ++x) alpha[x] *= emit[x][observed[0]];
  normalize(alpha);
  for (std::size_t t = 1; t < observed.size(); ++t) {
    std::vector<double> next(k, 0.0);
    for (std::size_t x = 0; x < k; ++x)
      for (std::size_t y = 0; y < k; ++y) next[y] += alpha[x] * trans[x][y];
    for (std::size_t y = 0; y < k; ++y) next[y] *= emit[y][observed[t]];
    normalize(next);
    alpha = std::move(next);
  }
  return alpha;
}

PredictionSet predict_maximal(const ImpreciseHMM& hmm, std::span<const std::size_t> observed,
                              const PredictOptions& opt) {
  const std::size_t n = observed.size();
  const std::size_t k = hmm.size();
  check_symbols(observed, k);
  const Tree tree = hmm_to_tree(hmm, n);
  Evidence ev(tree);
  for (std::size_t i = 1; i <= n; ++i) ev.set(tree.index("o" + std::to_string(i)), observed[i - 1]);
  const BackboneEvaluator be(tree, tree.index("s" + std::to_string(n)), ev);

  PredictionSet out;
  out.precise_posterior = precise_last_state_posterior(hmm, observed);
  out.precise_state = static_cast<std::size_t>(
      std::max_element(out.precise_posterior.begin(), out.precise_posterior.end()) - out.precise_posterior.begin());
  out.dominance.assign(k * k, std::numeric_limits<double>::quiet_NaN());

  // I_x - I_z has range 2, so the absolute tolerance is 2 * tol.
  const double threshold = opt.threshold_factor * 2.0 * opt.tol;
  std::vector<double> g(k, 0.0);
  for (std::size_t z = 0; z < k; ++z) {
    bool dominated = false;
    for (std::size_t x = 0; x < k && !dominated; ++x) {
      if (x == z) continue;
      std::fill(g.begin(), g.end(), 0.0);
      g[x] = 1.0;
      g[z] = -1.0;
      const auto r = posterior_lower(be, g, opt.tol);
      out.evaluations += r.evaluations;
      out.dominance[x * k + z] = r.value;
      dominated = r.value > threshold;
    }
    if (!dominated) out.maximal_states.push_back(z);
  }
  return out;
}

EvalMetrics score_predictions(std::span<const PredictionSet> predictions, std::span<const std::size_t> truth,
                              std::size_t alphabet_size) {
  if (predictions.size() != truth.size()) throw PreconditionError("one truth value per prediction is required");
  EvalMetrics m;
  m.alphabet_size = alphabet_size;
  m.instances = predictions.size();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& p = predictions[i];
    const bool precise_ok = p.precise_state == truth[i];
    if (precise_ok) ++m.precise_correct;
    if (p.contains(p.precise_state)) ++m.precise_in_maximal;
    if (p.determinate()) {
      ++m.determinate;
      if (p.maximal_states.front() == truth[i]) ++m.determinate_correct;
    } else {
      ++m.indeterminate;
      m.indeterminate_size_sum += p.maximal_states.size();
      if (p.contains(truth[i])) ++m.indeterminate_containing;
      if (precise_ok) ++m.precise_correct_on_indeterminate;
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
  m.determinacy = ratio(m.determinate, m.instances);
  m.single_accuracy = ratio(m.determinate_correct, m.determinate);
  m.set_accuracy = ratio(m.indeterminate_containing, m.indeterminate);
  if (m.indeterminate > 0) m.indeterminate_output_size = ratio(m.indeterminate_size_sum, m.indeterminate);
  m.precise_accuracy = ratio(m.precise_correct, m.instances);
  m.precise_accuracy_on_indeterminate = ratio(m.precise_correct_on_indeterminate, m.indeterminate);
  return m;
}

EvalMetrics evaluate(const ImpreciseHMM& hmm, const std::vector<SequencePair>& test, const PredictOptions& opt) {
  std::vector<PredictionSet> preds;
  std::vector<std::size_t> truth;
  preds.reserve(test.size());
  truth.reserve(test.size());
  for (const auto& p : test) {
    if (p.observed.empty() || p.generative.size() != p.observed.size())
      throw PreconditionError("test pairs must be non-empty and of equal length");
    preds.push_back(predict_maximal(hmm, p.observed, opt));
    truth.push_back(p.generative.back());
  }
  return score_predictions(preds, truth, hmm.size());
}

std::vector<SequencePair> corrupt_corpus(const std::vector<std::vector<std::size_t>>& text, std::size_t alphabet_size,
                                         double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw PreconditionError("epsilon must lie in [0, 1]");
  if (alphabet_size < 2 && epsilon > 0.0) throw PreconditionError("corruption needs at least two symbols");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(epsilon);
  std::uniform_int_distribution<std::size_t> other(0, alphabet_size >= 2 ? alphabet_size - 2 : 0);
  std::vector<SequencePair> out;
  out.reserve(text.size());
  for (const auto& line : text) {
    check_symbols(line, alphabet_size);
    SequencePair p{line, line};
    for (auto& x : p.observed) {
      if (!flip(rng)) continue;
      const std::size_t y = other(rng);
      x = y >= x ? y + 1 : y;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<SequencePair> sliding_windows(const std::vector<SequencePair>& pairs, std::size_t n) {
  if (n == 0) throw PreconditionError("window length must be positive");
  std::vector<SequencePair> out;
  for (const auto& p : pairs) {
    if (p.generative.size() != p.observed.size())
      throw StructuralError("generative and observed sequences differ in length");
    for (std::size_t end = n; end <= p.generative.size(); ++end) {
      const auto b = static_cast<std::ptrdiff_t>(end - n), e = static_cast<std::ptrdiff_t>(end);
      out.push_back({{p.generative.begin() + b, p.generative.begin() + e},
                     {p.observed.begin() + b, p.observed.begin() + e}});
    }
  }
  return out;
}

Json hmm_to_json(const ImpreciseHMM& hmm) {
  const auto& labels = hmm.alphabet()->labels();
  Json j = Json::object();
  j["alphabet"] = labels;
  j["s"] = hmm.hyper_s();
  j["initial"] = idm_block(hmm.initial_counts());
  j["transition"] = Json::object();
  j["emission"] = Json::object();
  for (std::size_t x = 0; x < labels.size(); ++x) {
    j["transition"][labels[x]] = idm_block(hmm.transition_counts(x));
    j["emission"][labels[x]] = idm_block(hmm.emission_counts(x));
  }
  return j;
}

ImpreciseHMM hmm_from_json(const Json& doc) {
  try {
    const auto labels = doc.at("alphabet").get<std::vector<std::string>>();
    auto space = make_space(labels);
    const double s = doc.at("s").get<double>();
    auto rows = [&](const char* key) {
      const Json& m = doc.at(key);
      if (!m.is_object() || m.size() != labels.size())
        throw StructuralError(std::string("\"") + key + "\" needs one entry per symbol");
      std::vector<std::vector<std::uint64_t>> out;
      for (const auto& l : labels) {
        if (!m.contains(l)) throw StructuralError(std::string("\"") + key + "\" lacks symbol '" + l + "'");
        out.push_back(counts_from_block(m[l], labels.size()));
      }
      return out;
    };
    return ImpreciseHMM(space, s, counts_from_block(doc.at("initial"), labels.size()), rows("transition"),
                        rows("emission"));
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("malformed HMM model: ") + e.what());
  }
}

Json metrics_to_json(const EvalMetrics& m) {
  Json j = Json::object();
  j["instances"] = m.instances;
  j["determinacy"] = m.determinacy;
  j["set_accuracy"] = m.set_accuracy;
  j["single_accuracy"] = m.single_accuracy;
  j["indeterminate_output_size"] = m.indeterminate_output_size ? Json(*m.indeterminate_output_size) : Json(nullptr);
  j["precise_accuracy"] = m.precise_accuracy;
  j["precise_accuracy_on_indeterminate"] = m.precise_accuracy_on_indeterminate;
  j["counts"] = {{"determinate", m.determinate},
                 {"determinate_correct", m.determinate_correct},
                 {"indeterminate", m.indeterminate},
                 {"indeterminate_containing", m.indeterminate_containing},
                 {"indeterminate_size_sum", m.indeterminate_size_sum},
                 {"precise_correct", m.precise_correct},
                 {"precise_correct_on_indeterminate", m.precise_correct_on_indeterminate},
                 {"precise_in_maximal", m.precise_in_maximal}};
  j["alphabet_size"] = m.alphabet_size;
  return j;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

SpacePtr alphabet_of(const std::vector<std::string>& lines) {
  std::set<char> chars;
  for (const auto& l : lines) chars.insert(l.begin(), l.end());
  std::vector<std::string> labels;
  for (char c : chars) labels.emplace_back(1, c);
  if (labels.empty()) throw StructuralError("empty alphabet");
  return make_space(std::move(labels));
}

std::vector<std::size_t> encode(const StateSpace& alphabet, const std::string& line) {
  std::vector<std::size_t> out;
  out.reserve(line.size());
  for (char c : line) out.push_back(alphabet.index(std::string(1, c)));
  return out;
}

std::vector<SequencePair> paired_corpus(const StateSpace& alphabet, const std::vector<std::string>& generative,
                                        const std::vector<std::string>& observed) {
  if (generative.size() != observed.size()) throw StructuralError("corpus files differ in line count");
  std::vector<SequencePair> out;
  for (std::size_t i = 0; i < generative.size(); ++i) {
    if (generative[i].size() != observed[i].size())
      throw StructuralError("line " + std::to_string(i + 1) + " differs in length between corpus files");
    out.push_back({encode(alphabet, generative[i]), encode(alphabet, observed[i])});
  }
  return out;
}

}  // namespace imtree
