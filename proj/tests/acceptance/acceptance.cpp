// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "imtree/credal.hpp"
#include "imtree/errors.hpp"
#include "imtree/hmm.hpp"
#include "imtree/oracles.hpp"
#include "imtree/propagation.hpp"
#include "imtree/rootfind.hpp"
#include "imtree/study.hpp"
#include "imtree/tree.hpp"

using namespace imtree;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool ok = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Evidence random_evidence(const Tree& t, NodeIndex target, std::mt19937_64& rng, double p) {
  Evidence ev(t);
  std::bernoulli_distribution obs(p);
  for (NodeIndex n = 0; n < t.size(); ++n)
    if (n != target && obs(rng)) ev.set(n, rng() % t.space(n)->size());
  return ev;
}

std::vector<double> random_gamble(std::size_t k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> g(k);
  for (auto& v : g) v = u(rng);
  return g;
}

// Copy of `t` with every vertex passed through `edit(node, vertex)`.
Tree respecify(const Tree& t, const std::function<void(NodeIndex, std::vector<double>&)>& edit) {
  std::vector<NodeSpec> specs;
  for (NodeIndex n = 0; n < t.size(); ++n) {
    const auto& node = t.node(n);
    NodeSpec s{node.id, node.space->labels(),
               node.parent ? std::optional<std::string>(t.node(*node.parent).id) : std::nullopt, {}};
    for (const auto& row : node.model.rows) {
      auto v = row.vertex_rows();
      for (auto& p : v) edit(n, p);
      s.model.rows.push_back(CredalSet(node.space, v));
    }
    specs.push_back(std::move(s));
  }
  return Tree::build(std::move(specs));
}

// ---------------------------------------------------------------------------

Outcome dilation() {
  auto s1 = make_space({"a", "b"}), s2 = make_space({"x2", "y2"}), s3 = make_space({"x3", "y3"});
  auto build = [&](double qa, double x2a, double x2b, double klo, double khi) {
    using R = std::vector<std::vector<double>>;
    return Tree::build({NodeSpec{"1", {"a", "b"}, std::nullopt, {{CredalSet(s1, R{{qa, 1 - qa}})}}},
                        NodeSpec{"2", {"x2", "y2"}, "1",
                                 {{CredalSet(s2, R{{x2a, 1 - x2a}}), CredalSet(s2, R{{x2b, 1 - x2b}})}}},
                        NodeSpec{"3", {"x3", "y3"}, "2",
                                 {{CredalSet(s3, R{{klo, 1 - klo}, {khi, 1 - khi}}), CredalSet(s3, R{{0.5, 0.5}})}}}});
  };
  auto evidence = [](const Tree& t) { return Evidence::from_labels(t, {{"2", "x2"}, {"3", "x3"}}); };

  Outcome o;
  double worst = 0.0;
  std::mt19937_64 rng(601);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int it = 0; it < 100; ++it) {
    const double qa = u(rng), x2a = u(rng), x2b = u(rng);
    double klo = u(rng), khi = u(rng);
    if (klo > khi) std::swap(klo, khi);
    if (klo == khi) khi = std::min(0.99, klo + 0.01);
    const Tree t = build(qa, x2a, x2b, klo, khi);
    const auto iv = posterior_interval_event(t, 0, evidence(t), 0);
    const double alpha = qa * x2a, beta = (1 - qa) * x2b;
    const double lo = alpha * klo / (alpha * klo + beta * khi), hi = alpha * khi / (alpha * khi + beta * klo);
    worst = std::max({worst, std::abs(iv.lower - lo), std::abs(iv.upper - hi)});
  }
  const Tree sym = build(0.5, 0.5, 0.5, 0.4, 0.6);
  const auto s = posterior_interval_event(sym, 0, evidence(sym), 0);
  const double sym_err = std::max(std::abs(s.lower - 0.4), std::abs(s.upper - 0.6));
  o.ok = worst <= 1e-9 && sym_err <= 1e-9;
  o.detail = "max error " + fmt("%.2e", worst) + ", symmetric [" + fmt("%.10f", s.lower) + ", " +
             fmt("%.10f", s.upper) + "]";
  return o;
}

Outcome precise_degeneration() {
  Outcome o;
  double worst = 0.0;
  std::mt19937_64 rng(602);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomTreeShape shape;
    shape.nodes = 1 + seed % 10;
    shape.max_states = 4;
    shape.imprecision = 0.0;
    const Tree t = random_tree(shape, 1000 + seed);
    const NodeIndex target = rng() % t.size();
    const Evidence ev = random_evidence(t, target, rng, 0.4);
    const auto g = random_gamble(t.space(target)->size(), rng);
    const double exact = enumerate_joint_precise(t, target, ev, g);
    const BackboneEvaluator be(t, target, ev);
    const double lo = posterior_lower(be, g).value, up = posterior_upper(be, g).value;
    worst = std::max({worst, std::abs(lo - exact), std::abs(up - exact)});
  }
  o.ok = worst <= 1e-9;
  o.detail = "200 trees, max error " + fmt("%.2e", worst);
  return o;
}

Outcome chain_envelope() {
  Outcome o;
  double worst = 0.0;
  std::mt19937_64 rng(603);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomTreeShape shape;
    shape.nodes = 1 + seed % 4;
    shape.max_children = 1;
    shape.min_states = shape.max_states = 2;
    shape.vertices_per_set = 2;
    shape.imprecision = 1.0;
    const Tree t = random_tree(shape, 2000 + seed);
    const NodeIndex target = rng() % t.size();
    const Evidence ev = random_evidence(t, target, rng, 0.6);
    const auto g = random_gamble(2, rng);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> mus(20);
    for (auto& m : mus) m = u(rng);
    const auto oracle = epistemic_chain_rho_oracle(t, target, ev, g, mus);
    const BackboneEvaluator be(t, target, ev, Route::full);
    for (std::size_t i = 0; i < mus.size(); ++i) worst = std::max(worst, std::abs(oracle[i] - be.value(g, mus[i])));
  }
  o.ok = worst <= 1e-9;
  o.detail = "100 chains x 20 mu, max error " + fmt("%.2e", worst);
  return o;
}

Outcome strong_trend() {
  Outcome o;
  ChainStudyOptions opt;
  opt.runs = 200;
  const double slack = 1e-9;
  std::vector<double> lengths, diffs;
  std::size_t hull_violations = 0, precise_outside = 0, enumerated = 0;
  double enum_err = 0.0;
  bool all_positive = true;
  for (std::size_t len = 5; len <= 20; ++len) {
    double we = 0.0, ws = 0.0;
    // Enumeration gets expensive fast (2 * 4^(len-1) selections).
    const std::size_t enum_runs = len <= 8 ? opt.runs : len <= 10 ? 20 : len <= 12 ? 3 : 0;
    for (std::size_t run = 0; run < opt.runs; ++run) {
      const ChainRun r = study_run(len, opt, run);
      we += r.epistemic_upper - r.epistemic_lower;
      ws += r.strong_upper - r.strong_lower;
      if (r.strong_lower < r.epistemic_lower - slack || r.strong_upper > r.epistemic_upper + slack) ++hull_violations;
      if (r.precise < r.strong_lower - slack || r.precise > r.strong_upper + slack) ++precise_outside;
      if (run < enum_runs) {
        const Tree t = study_chain(len, opt, run);
        const std::vector<double> g{1.0, 0.0};
        const auto e = strong_posterior_enumeration(t, 0, study_evidence(t, opt, run), g);
        enum_err = std::max({enum_err, std::abs(e.lower - r.strong_lower), std::abs(e.upper - r.strong_upper)});
        if (e.lower < r.epistemic_lower - slack || e.upper > r.epistemic_upper + slack) ++hull_violations;
        ++enumerated;
      }
    }
    const double d = (we - ws) / static_cast<double>(opt.runs);
    all_positive = all_positive && d > 0.0;
    lengths.push_back(static_cast<double>(len));
    diffs.push_back(d);
  }
  // Stabilization: least-squares slope of the mean difference over lengths 10-20.
  double mx = 0.0, my = 0.0;
  const std::size_t first = 5;  // index of length 10
  const double m = static_cast<double>(lengths.size() - first);
  for (std::size_t i = first; i < lengths.size(); ++i) mx += lengths[i] / m, my += diffs[i] / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = first; i < lengths.size(); ++i) {
    sxy += (lengths[i] - mx) * (diffs[i] - my);
    sxx += (lengths[i] - mx) * (lengths[i] - mx);
  }
  const double slope = sxy / sxx;
  o.ok = hull_violations == 0 && precise_outside == 0 && enum_err <= 1e-9 && all_positive &&
         std::abs(slope) <= 0.005 && std::abs(my - 0.3) <= 0.15;
  o.detail = "violations " + std::to_string(hull_violations) + ", centre outside " + std::to_string(precise_outside) +
             ", enumerated " + std::to_string(enumerated) + " (max error " + fmt("%.1e", enum_err) +
             "), mean diff " + fmt("%.3f", diffs.front()) + " at 5, " + fmt("%.3f", my) + " over 10-20, slope " +
             fmt("%.4f", slope);
  return o;
}

Outcome linearity() {
  Outcome o;
  std::vector<double> per_query;
  std::string detail;
  for (std::size_t len : {100u, 1000u, 10000u}) {
    RandomTreeShape shape;
    shape.nodes = len;
    shape.max_children = 1;
    shape.min_states = shape.max_states = 2;
    shape.imprecision = 1.0;
    const Tree t = random_tree(shape, 5000 + len);
    Evidence ev(t);
    ev.set(t.size() - 1, 0);
    const std::vector<double> g{1.0, 0.0};
    const std::size_t reps = std::max<std::size_t>(3, 2'000'000 / (len * 20));
    double best = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 3; ++trial) {
      const auto t0 = Clock::now();
      double sink = 0.0;
      for (std::size_t r = 0; r < reps; ++r) sink += posterior_lower(t, t.root(), ev, Gamble(t.space(0), g), 1e-9).value;
      best = std::min(best, seconds_since(t0) / static_cast<double>(reps));
      if (!std::isfinite(sink)) o.ok = false;
    }
    per_query.push_back(best);
    detail += std::to_string(len) + ": " + fmt("%.3g s", best) + "  ";
  }
  const double r1 = per_query[1] / per_query[0], r2 = per_query[2] / per_query[1];
  o.ok = o.ok && r1 <= 15.0 && r2 <= 15.0;
  o.detail = detail + "ratios " + fmt("%.2f", r1) + ", " + fmt("%.2f", r2);
  return o;
}

Outcome root_finder() {
  Outcome o;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int cases = 1000;
  int fewer = 0, wrong = 0;
  for (int it = 0; it < cases; ++it) {
    const double lo = -5.0 + 10.0 * u(rng), hi = lo + 0.1 + 10.0 * u(rng);
    const double root = lo + (hi - lo) * u(rng);
    const int pieces = 1 + static_cast<int>(u(rng) * 6);
    std::vector<double> slopes, roots{root};
    for (int i = 0; i < pieces; ++i) slopes.push_back(0.05 + 5.0 * u(rng));
    for (int i = 1; i < pieces; ++i) roots.push_back(root + (hi - lo) * u(rng));
    auto f = [&](double mu) {
      double v = INFINITY;
      for (int i = 0; i < pieces; ++i) v = std::min(v, slopes[i] * (roots[i] - mu));
      return v;
    };
    const double tol = 1e-9;
    const auto a = find_rightmost_root(f, lo, hi, tol);
    const auto b = bisect_rightmost_root(f, lo, hi, tol);
    if (std::abs(a.root - b.root) > tol) ++wrong;
    if (a.evaluations < b.evaluations) ++fewer;
  }
  o.ok = wrong == 0 && fewer * 10 >= cases * 9;
  o.detail = "disagreements " + std::to_string(wrong) + ", fewer evaluations on " + std::to_string(fewer) + "/" +
             std::to_string(cases);
  return o;
}

Outcome sigma_analytics() {
  Outcome o;
  std::mt19937_64 rng(607);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t lipschitz = 0, concavity = 0, bracketing = 0, monotone = 0;
  for (std::uint64_t q = 0; q < 500; ++q) {
    RandomTreeShape shape;
    shape.nodes = 2 + q % 11;
    shape.floor = q % 3 == 0 ? 0.0 : 0.01;
    const Tree t = random_tree(shape, 7000 + q);
    const NodeIndex target = rng() % t.size();
    const Evidence ev = random_evidence(t, target, rng, 0.5);
    const auto g = random_gamble(t.space(target)->size(), rng);
    const double mn = *std::min_element(g.begin(), g.end()), mx = *std::max_element(g.begin(), g.end());
    const BackboneEvaluator full(t, target, ev, Route::full);
    const double pbar = upper_evidence_probability(t, ev);
    const double eps = 1e-12 * pbar * (mx - mn) + 1e-300;
    if (full.value(g, mn) < -eps || full.value(g, mx) > eps) ++bracketing;
    for (int k = 0; k < 10; ++k) {
      double m[3] = {mn + (mx - mn) * u(rng), mn + (mx - mn) * u(rng), mn + (mx - mn) * u(rng)};
      std::sort(m, m + 3);
      const double s0 = full.value(g, m[0]), s1 = full.value(g, m[1]), s2 = full.value(g, m[2]);
      if (std::abs(s0 - s2) > (m[2] - m[0]) * pbar + eps) ++lipschitz;
      if (s0 < s2 - eps) ++monotone;
      if (m[2] > m[0]) {
        const double w = (m[1] - m[0]) / (m[2] - m[0]);
        if (s1 < (1 - w) * s0 + w * s2 - eps) ++concavity;
      }
    }
  }
  o.ok = lipschitz == 0 && concavity == 0 && bracketing == 0 && monotone == 0;
  o.detail = "500 queries; failures: Lipschitz " + std::to_string(lipschitz) + ", concavity " +
             std::to_string(concavity) + ", bracketing " + std::to_string(bracketing) + ", monotonicity " +
             std::to_string(monotone);
  return o;
}

Outcome separate_coherence() {
  Outcome o;
  std::mt19937_64 rng(608);
  std::uniform_int_distribution<int> size(2, 6), verts(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0), lam(0.0, 10.0);
  std::size_t sc1 = 0, sc2 = 0, sc3 = 0;
  double sc3_err = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const int k = size(rng);
    std::vector<std::string> labels;
    for (int i = 0; i < k; ++i) labels.push_back("s" + std::to_string(i));
    const auto space = make_space(labels);
    std::vector<std::vector<double>> rows(verts(rng));
    for (auto& r : rows) {
      r.resize(k);
      double sum = 0.0;
      for (auto& v : r) sum += (v = -std::log(1.0 - u(rng)));
      for (auto& v : r) v /= sum;
      double total = 0.0;
      for (int i = 0; i + 1 < k; ++i) total += r[i];
      r[k - 1] = std::max(0.0, 1.0 - total);
    }
    const CredalSet c(space, rows);
    const auto g1 = random_gamble(k, rng), g2 = random_gamble(k, rng);
    std::vector<double> sum(k), scaled(k);
    const double l = lam(rng);
    for (int i = 0; i < k; ++i) {
      sum[i] = g1[i] + g2[i];
      scaled[i] = l * g1[i];
    }
    if (c.lower(g1) < *std::min_element(g1.begin(), g1.end()) - 1e-12) ++sc1;
    if (c.lower(sum) < c.lower(g1) + c.lower(g2) - 1e-12) ++sc2;
    const double e = std::abs(c.lower(scaled) - l * c.lower(g1));
    sc3_err = std::max(sc3_err, e);
    if (e > 1e-12) ++sc3;
  }
  o.ok = sc1 == 0 && sc2 == 0 && sc3 == 0;
  o.detail = "1000 sets; failures SC1 " + std::to_string(sc1) + ", SC2 " + std::to_string(sc2) + ", SC3 " +
             std::to_string(sc3) + " (max SC3 error " + fmt("%.1e", sc3_err) + ")";
  return o;
}

Outcome vacuity() {
  Outcome o;
  std::size_t bad = 0, queries = 0;
  std::mt19937_64 rng(609);
  // Hand-built: the only root state rules out the observed child state.
  {
    auto ab = make_space({"a", "b"}), uv = make_space({"u", "v"});
    using R = std::vector<std::vector<double>>;
    const Tree t = Tree::build({NodeSpec{"1", {"a", "b"}, std::nullopt, {{CredalSet(ab, R{{1.0, 0.0}})}}},
                                NodeSpec{"2", {"u", "v"}, "1",
                                         {{CredalSet(uv, R{{1.0, 0.0}}), CredalSet(uv, R{{0.3, 0.7}})}}}});
    const auto ev = Evidence::from_labels(t, {{"2", "v"}});
    const Gamble g(ab, {3.0, -2.0});
    const auto lo = posterior_lower(t, 0, ev, g), up = posterior_upper(t, 0, ev, g);
    ++queries;
    if (!(lo.vacuous && up.vacuous && lo.value == -2.0 && up.value == 3.0)) ++bad;
  }
  // Random trees in which one observed node cannot take its observed state.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomTreeShape shape;
    shape.nodes = 2 + seed % 9;
    const Tree base = random_tree(shape, 9000 + seed);
    const NodeIndex blocked = 1 + rng() % (base.size() - 1);
    const Tree t = respecify(base, [&](NodeIndex n, std::vector<double>& p) {
      if (n != blocked) return;
      const double z = p[0];
      p[0] = 0.0;
      p[1] += z;
    });
    NodeIndex target = rng() % t.size();
    if (target == blocked) target = t.node(blocked).parent.value_or(0);
    Evidence ev = random_evidence(t, target, rng, 0.3);
    ev.set(blocked, 0);
    const auto g = random_gamble(t.space(target)->size(), rng);
    const double mn = *std::min_element(g.begin(), g.end()), mx = *std::max_element(g.begin(), g.end());
    const Gamble gg(t.space(target), g);
    const auto lo = posterior_lower(t, target, ev, gg), up = posterior_upper(t, target, ev, gg);
    const auto iv = posterior_interval_event(t, target, ev, 0);
    ++queries;
    if (!(lo.vacuous && up.vacuous && lo.value == mn && up.value == mx && iv.vacuous && iv.lower == 0.0 &&
          iv.upper == 1.0 && lo.evidence_upper_prob == 0.0))
      ++bad;
  }
  o.ok = bad == 0;
  o.detail = std::to_string(queries) + " queries, " + std::to_string(bad) + " not vacuous";
  return o;
}

// Markov text over k letters with a peaked random transition matrix.
std::vector<std::vector<std::size_t>> markov_text(std::size_t k, std::size_t lines, std::size_t len,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> trans(k, std::vector<double>(k));
  std::exponential_distribution<double> e(1.0);
  for (auto& row : trans)
    for (auto& v : row) v = std::pow(e(rng), 3.0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t l = 0; l < lines; ++l) {
    std::vector<std::size_t> s{rng() % k};
    while (s.size() < len) {
      std::discrete_distribution<std::size_t> d(trans[s.back()].begin(), trans[s.back()].end());
      s.push_back(d(rng));
    }
    out.push_back(std::move(s));
  }
  return out;
}

Outcome hmm_properties() {
  Outcome o;
  const std::size_t k = 8;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < k; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i)));
  const auto alphabet = make_space(labels);

  // One source text: the first 150 lines train, the rest give test prefixes.
  const auto text = markov_text(k, 175, 40, 610);
  const auto corpus = corrupt_corpus(text, k, 0.1, 611);
  const std::vector<SequencePair> train(corpus.begin(), corpus.begin() + 150);
  const ImpreciseHMM hmm = learn_hmm(train, alphabet, 2.0);

  std::vector<SequencePair> test;
  for (std::size_t l = 150; l < corpus.size() && test.size() < 500; ++l)
    for (std::size_t n = 1; n <= 20 && test.size() < 500; ++n)
      test.push_back(SequencePair{{corpus[l].generative.begin(), corpus[l].generative.begin() + n},
                                  {corpus[l].observed.begin(), corpus[l].observed.begin() + n}});

  std::vector<PredictionSet> preds;
  std::vector<std::size_t> truth;
  double slowest = 0.0;
  std::size_t contained = 0, truth_in_set = 0;
  for (const auto& p : test) {
    const auto t0 = Clock::now();
    preds.push_back(predict_maximal(hmm, p.observed));
    slowest = std::max(slowest, seconds_since(t0));
    truth.push_back(p.generative.back());
    if (preds.back().contains(preds.back().precise_state)) ++contained;
    if (preds.back().contains(truth.back())) ++truth_in_set;
  }
  const EvalMetrics m = score_predictions(preds, truth, k);
  const double n = static_cast<double>(m.instances);
  const double lhs = m.determinacy * m.single_accuracy * n + (1 - m.determinacy) * m.set_accuracy * n;
  const bool identity = m.determinate_correct + m.indeterminate_containing == truth_in_set &&
                        std::llround(lhs) == static_cast<long long>(truth_in_set) &&
                        std::abs(lhs - static_cast<double>(truth_in_set)) <= 1e-9;
  o.ok = test.size() == 500 && contained == test.size() && m.precise_in_maximal == m.instances && identity &&
         slowest < 1.0;
  o.detail = std::to_string(test.size()) + " instances, precise in maximal " + std::to_string(contained) +
             ", identity " + (identity ? "holds" : "broken") + " (" + fmt("%.12g", lhs) + " vs " +
             std::to_string(truth_in_set) + "), determinacy " + fmt("%.3f", m.determinacy) + ", slowest " +
             fmt("%.4f s", slowest);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "closed-form dilation", 1.0, dilation},
      {2, "precise degeneration", 30.0, precise_degeneration},
      {3, "chain envelope oracle", 60.0, chain_envelope},
      {4, "strong containment and width trend", 600.0, strong_trend},
      {5, "linear complexity on chains", 120.0, linearity},
      {6, "root finder vs bisection", 10.0, root_finder},
      {7, "sigma analytics", 60.0, sigma_analytics},
      {8, "separate coherence", 60.0, separate_coherence},
      {9, "vacuity", 60.0, vacuity},
      {10, "HMM properties", 300.0, hmm_properties},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double t = seconds_since(t0);
    const bool pass = out.ok && t < c.limit_s;
    if (!pass) ++failed;
    std::printf("%s %2d %-36s %8.3f s (limit %g s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, t, c.limit_s,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
