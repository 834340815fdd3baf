#include "imtree/credal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace imtree {

namespace {

// Sums closer to one than this are left untouched so that a renormalized
// row stays bit-identical when it is read back.
constexpr double kExactSlack = 64 * std::numeric_limits<double>::epsilon();

std::string row_problem(std::span<const double> row, std::size_t n) {
  if (row.size() != n) {
    std::ostringstream os;
    os << "has " << row.size() << " entries, expected " << n;
    return os.str();
  }
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p)) return "has a non-finite entry";
    if (p < 0.0) return "has a negative entry";
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "sums to " << sum << " (not normalized)";
    return os.str();
  }
  return {};
}

std::vector<double> normalized(std::vector<double> probs, std::size_t n) {
  if (auto msg = row_problem(probs, n); !msg.empty())
    throw StructuralError("mass function " + msg);
  double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(sum - 1.0) > kExactSlack)
    for (double& p : probs) p /= sum;
  return probs;
}

}  // namespace

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw StructuralError("state space must have at least one state");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_)
    if (!seen.insert(l).second) throw StructuralError("duplicate state label '" + l + "'");
}

std::optional<std::size_t> StateSpace::find(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t StateSpace::index(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw StructuralError("unknown state '" + std::string(label) + "'");
}

SpacePtr make_space(std::vector<std::string> labels) {
  return std::make_shared<const StateSpace>(std::move(labels));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
  return a == b || (a && b && *a == *b);
}

Gamble::Gamble(SpacePtr space, std::vector<double> values)
    : space_(std::move(space)), values_(std::move(values)) {
  if (!space_) throw StructuralError("gamble without a state space");
  if (values_.size() != space_->size())
    throw StructuralError("gamble has " + std::to_string(values_.size()) + " values for " +
                          std::to_string(space_->size()) + " states");
  for (double v : values_)
    if (!std::isfinite(v)) throw StructuralError("gamble values must be finite");
}

Gamble Gamble::indicator(SpacePtr space, std::size_t state) {
  std::vector<double> v(space->size(), 0.0);
  v.at(state) = 1.0;
  return Gamble(std::move(space), std::move(v));
}

Gamble Gamble::constant(SpacePtr space, double c) {
  std::vector<double> v(space->size(), c);
  return Gamble(std::move(space), std::move(v));
}

double Gamble::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Gamble::max() const { return *std::max_element(values_.begin(), values_.end()); }

Gamble Gamble::operator-() const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(), [](double x) { return -x; });
  return Gamble(space_, std::move(v));
}

MassFunction::MassFunction(SpacePtr space, std::vector<double> probs) : space_(std::move(space)) {
  if (!space_) throw StructuralError("mass function without a state space");
  probs_ = normalized(std::move(probs), space_->size());
}

CredalSet::CredalSet(SpacePtr space, std::vector<MassFunction> vertices) : space_(std::move(space)) {
  if (!space_) throw StructuralError("credal set without a state space");
  if (vertices.empty()) throw StructuralError("credal set needs at least one vertex");
  data_.reserve(vertices.size() * space_->size());
  for (const auto& v : vertices) {
    if (!same_space(v.space(), space_)) throw StructuralError("credal set vertex on a different space");
    data_.insert(data_.end(), v.probs().begin(), v.probs().end());
  }
  num_vertices_ = vertices.size();
}

CredalSet::CredalSet(SpacePtr space, const std::vector<std::vector<double>>& rows)
    : space_(std::move(space)) {
  if (!space_) throw StructuralError("credal set without a state space");
  if (rows.empty()) throw StructuralError("credal set needs at least one vertex");
  data_.reserve(rows.size() * space_->size());
  for (const auto& r : rows) {
    auto p = normalized(r, space_->size());
    data_.insert(data_.end(), p.begin(), p.end());
  }
  num_vertices_ = rows.size();
}

std::vector<std::vector<double>> CredalSet::vertex_rows() const {
  std::vector<std::vector<double>> rows;
  rows.reserve(num_vertices_);
  for (std::size_t k = 0; k < num_vertices_; ++k) {
    auto v = vertex(k);
    rows.emplace_back(v.begin(), v.end());
  }
  return rows;
}

void CredalSet::check_size(std::span<const double> g) const {
  if (g.size() != num_states())
    throw StructuralError("gamble of size " + std::to_string(g.size()) +
                          " evaluated on a space of size " + std::to_string(num_states()));
}

double CredalSet::lower(std::span<const double> g) const {
  check_size(g);
  const std::size_t n = num_states();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < num_vertices_; ++k) {
    const double* v = data_.data() + k * n;
    double e = 0.0;
    for (std::size_t x = 0; x < n; ++x) e += v[x] * g[x];
    best = std::min(best, e);
  }
  return best;
}

double CredalSet::upper(std::span<const double> g) const {
  check_size(g);
  const std::size_t n = num_states();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < num_vertices_; ++k) {
    const double* v = data_.data() + k * n;
    double e = 0.0;
    for (std::size_t x = 0; x < n; ++x) e += v[x] * g[x];
    best = std::max(best, e);
  }
  return best;
}

double CredalSet::lower_probability(std::size_t state) const {
  const std::size_t n = num_states();
  double best = 1.0;
  for (std::size_t k = 0; k < num_vertices_; ++k) best = std::min(best, data_[k * n + state]);
  return best;
}

double CredalSet::upper_probability(std::size_t state) const {
  const std::size_t n = num_states();
  double best = 0.0;
  for (std::size_t k = 0; k < num_vertices_; ++k) best = std::max(best, data_[k * n + state]);
  return best;
}

double lower_expectation(const CredalSet& c, const Gamble& g) {
  if (!same_space(c.space(), g.space())) throw StructuralError("gamble and credal set live on different spaces");
  return c.lower(g.values());
}

double upper_expectation(const CredalSet& c, const Gamble& g) {
  if (!same_space(c.space(), g.space())) throw StructuralError("gamble and credal set live on different spaces");
  return c.upper(g.values());
}

std::uint64_t CountTable::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

CredalSet idm_from_counts(const CountTable& t) {
  if (!t.space) throw StructuralError("count table without a state space");
  if (t.counts.size() != t.space->size()) throw StructuralError("count table size does not match its space");
  if (!(t.hyper_s > 0.0) || !std::isfinite(t.hyper_s)) throw StructuralError("IDM parameter s must be positive");
  const std::size_t n = t.space->size();
  const double denom = t.hyper_s + static_cast<double>(t.total());
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t z = 0; z < n; ++z)
    for (std::size_t x = 0; x < n; ++x)
      rows[z][x] = (static_cast<double>(t.counts[x]) + (x == z ? t.hyper_s : 0.0)) / denom;
  return CredalSet(t.space, rows);
}

CredalSet linear_model(const MassFunction& p) { return CredalSet(p.space(), {p}); }

CredalSet vacuous_model(const SpacePtr& space) {
  std::vector<std::vector<double>> rows(space->size(), std::vector<double>(space->size(), 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i][i] = 1.0;
  return CredalSet(space, rows);
}

CredalSet binary_interval_model(const SpacePtr& space, std::span<const double> lower,
                                std::span<const double> upper) {
  if (space->size() != 2)
    throw StructuralError("interval specifications are only supported on binary spaces");
  if (lower.size() != 2 || upper.size() != 2) throw StructuralError("interval bounds need two entries");
  for (std::size_t i = 0; i < 2; ++i)
    if (!(0.0 <= lower[i] && lower[i] <= upper[i] && upper[i] <= 1.0))
      throw StructuralError("interval bounds must satisfy 0 <= lower <= upper <= 1");
  // Bounds on the second state tighten those implied for the first one.
  const double lo = std::max(lower[0], 1.0 - upper[1]);
  const double hi = std::min(upper[0], 1.0 - lower[1]);
  if (lo > hi + kNormalizationTolerance) throw StructuralError("interval bounds are incoherent (empty credal set)");
  if (hi - lo <= 0.0) return CredalSet(space, std::vector<std::vector<double>>{{lo, 1.0 - lo}});
  return CredalSet(space, std::vector<std::vector<double>>{{lo, 1.0 - lo}, {hi, 1.0 - hi}});
}

CredalReport check_credal_set(const StateSpace& space, const std::vector<std::vector<double>>& rows) {
  CredalReport r;
  const std::size_t n = space.size();
  if (rows.empty()) {
    r.valid = false;
    r.problems.push_back("no vertices");
  }
  std::vector<double> up(n, 0.0);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (auto msg = row_problem(rows[k], n); !msg.empty()) {
      r.valid = false;
      r.problems.push_back("vertex " + std::to_string(k) + " " + msg);
      continue;
    }
    for (std::size_t x = 0; x < n; ++x) up[x] = std::max(up[x], rows[k][x]);
  }
  for (std::size_t x = 0; x < n; ++x)
    if (!(up[x] > 0.0)) r.null_states.push_back(x);
  r.strictly_positive = r.valid && r.null_states.empty();
  return r;
}

CredalReport check_credal_set(const CredalSet& c) { return check_credal_set(*c.space(), c.vertex_rows()); }

}  // namespace imtree
