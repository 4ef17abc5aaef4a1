#include "concdiam/spaces.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "concdiam/diagnostics.hpp"
#include "concdiam/errors.hpp"
#include "format.hpp"

namespace concdiam {

using nlohmann::json;

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) {
      throw ValidationError("matrix rows have unequal lengths");
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    out[i].assign(r.begin(), r.end());
  }
  return out;
}

std::vector<double> checked_probabilities(std::vector<double> prob, std::string_view what) {
  if (prob.empty()) {
    throw ValidationError(std::string(what) + ": probability vector is empty");
  }
  for (std::size_t i = 0; i < prob.size(); ++i) {
    if (!std::isfinite(prob[i]) || prob[i] < 0.0) {
      throw ValidationError(std::string(what) + ": probability at index " + std::to_string(i) +
                            " is negative or not finite");
    }
  }
  const double sum = std::accumulate(prob.begin(), prob.end(), 0.0);
  if (std::abs(sum - 1.0) > kLoadTolerance) {
    throw ValidationError(std::string(what) + ": probabilities sum to " + detail::format_g(sum, 12));
  }
  // Sums already equal to one up to accumulation roundoff are kept verbatim,
  // which makes loading idempotent.
  const double roundoff = 4.0 * static_cast<double>(prob.size()) * std::numeric_limits<double>::epsilon();
  if (std::abs(sum - 1.0) > roundoff) {
    for (double& p : prob) p /= sum;
  }
  return prob;
}

namespace {

void validate_metric(const std::vector<std::string>& labels, Matrix& metric) {
  const std::size_t n = labels.size();
  if (metric.rows() != n || metric.cols() != n) {
    throw ValidationError("metric must be " + std::to_string(n) + "x" + std::to_string(n) +
                          " to match the label count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (metric(i, i) != 0.0) {
      throw ValidationError("metric is not zero on the diagonal at " + labels[i]);
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = metric(i, j);
      const double b = metric(j, i);
      if (!std::isfinite(a) || !std::isfinite(b)) {
        throw ValidationError("metric entry d(" + labels[i] + "," + labels[j] + ") is not finite");
      }
      if (std::abs(a - b) > kLoadTolerance) {
        throw ValidationError("metric is not symmetric: d(" + labels[i] + "," + labels[j] +
                              ")=" + detail::format_g(a, 12) + " but d(" + labels[j] + "," +
                              labels[i] + ")=" + detail::format_g(b, 12));
      }
      if (a <= 0.0 || b <= 0.0) {
        throw ValidationError("metric is not positive off the diagonal: d(" + labels[i] + "," +
                              labels[j] + ")=" + detail::format_g(std::min(a, b), 12));
      }
      metric(j, i) = a;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto row_i = metric.row(i);
    for (std::size_t k = 0; k < n; ++k) {
      const double dik = row_i[k];
      const auto row_k = metric.row(k);
      for (std::size_t j = 0; j < n; ++j) {
        if (row_i[j] > dik + row_k[j] + kLoadTolerance) {
          throw ValidationError("metric violates the triangle inequality: d(" + labels[i] + "," +
                                labels[j] + ")=" + detail::format_g(row_i[j], 12) + " > d(" +
                                labels[i] + "," + labels[k] + ")+d(" + labels[k] + "," +
                                labels[j] + ")=" + detail::format_g(dik + row_k[j], 12));
        }
      }
    }
  }
}

void warn_zero_probability(const std::vector<std::string>& labels, const std::vector<double>& prob) {
  std::size_t zeros = 0;
  for (double p : prob) zeros += (p == 0.0);
  if (zeros > 0) {
    std::string msg = std::to_string(zeros) + " point(s) carry zero probability (first: ";
    const auto it = std::find(prob.begin(), prob.end(), 0.0);
    msg += labels[static_cast<std::size_t>(it - prob.begin())] + ")";
    diag::warn(msg);
  }
}

}  // namespace

FiniteMetricSpace::FiniteMetricSpace(std::vector<std::string> labels, Matrix metric,
                                     std::vector<double> prob) {
  if (labels.empty()) throw ValidationError("a finite space needs at least one point");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw ValidationError("duplicate label '" + l + "'");
  }
  if (prob.size() != labels.size()) {
    throw ValidationError("prob has " + std::to_string(prob.size()) + " entries but there are " +
                          std::to_string(labels.size()) + " labels");
  }
  validate_metric(labels, metric);
  prob = checked_probabilities(std::move(prob), "prob");
  warn_zero_probability(labels, prob);
  labels_ = std::move(labels);
  metric_ = std::move(metric);
  prob_ = std::move(prob);
}

FiniteMetricSpace::FiniteMetricSpace(Trusted, std::vector<std::string> labels, Matrix metric,
                                     std::vector<double> prob)
    : labels_(std::move(labels)), metric_(std::move(metric)), prob_(std::move(prob)) {}

std::size_t FiniteMetricSpace::index_of(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ValidationError("unknown point label '" + std::string(label) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

std::optional<double> FiniteMetricSpace::numeric_value(std::size_t i) const {
  return detail::parse_double(labels_.at(i));
}

FiniteMetricSpace FiniteMetricSpace::with_prob(std::vector<double> prob) const {
  if (prob.size() != size()) throw ValidationError("probability vector has the wrong dimension");
  prob = checked_probabilities(std::move(prob), "prob");
  return FiniteMetricSpace(Trusted{}, labels_, metric_, std::move(prob));
}

GaussianLineSpace::GaussianLineSpace(double mean, double stddev) : mean_(mean), stddev_(stddev) {
  if (!std::isfinite(mean)) throw ValidationError("gaussian mean must be finite");
  if (!(stddev > 0.0) || !std::isfinite(stddev)) {
    throw ValidationError("gaussian stddev must be positive and finite");
  }
}

ProductSpec::ProductSpec(std::vector<Component> components) : components_(std::move(components)) {
  if (components_.empty()) throw ValidationError("a product needs at least one component");
}

ProductSpec ProductSpec::power(const Component& base, std::size_t n) {
  if (n == 0) throw ValidationError("power exponent n must be at least 1");
  return ProductSpec(std::vector<Component>(n, base));
}

double ProductSpec::distance(Coordinates x, Coordinates y) const {
  if (x.size() != size() || y.size() != size()) {
    throw ValidationError("point dimension does not match the product (expected " +
                          std::to_string(size()) + ")");
  }
  double d = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (const auto* f = std::get_if<FiniteMetricSpace>(&components_[i])) {
      d += f->distance(static_cast<std::size_t>(x[i]), static_cast<std::size_t>(y[i]));
    } else {
      d += std::abs(x[i] - y[i]);
    }
  }
  return d;
}

double ProductSpec::value(std::size_t i, double coordinate) const {
  if (const auto* f = std::get_if<FiniteMetricSpace>(&components_.at(i))) {
    const auto idx = static_cast<std::size_t>(coordinate);
    if (auto v = f->numeric_value(idx)) return *v;
    throw ValidationError("label '" + f->labels()[idx] + "' of component " + std::to_string(i) +
                          " is not numeric");
  }
  return coordinate;
}

std::vector<double> ProductSpec::encode(std::span<const std::string> labels) const {
  if (labels.size() != size()) {
    throw ValidationError("point has " + std::to_string(labels.size()) +
                          " coordinates but the product has " + std::to_string(size()));
  }
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    if (const auto* f = std::get_if<FiniteMetricSpace>(&components_[i])) {
      out[i] = static_cast<double>(f->index_of(labels[i]));
    } else {
      auto v = detail::parse_double(labels[i]);
      if (!v) throw ValidationError("'" + labels[i] + "' is not a real coordinate");
      out[i] = *v;
    }
  }
  return out;
}

std::optional<std::size_t> ProductSpec::finite_point_count(std::size_t cap) const {
  std::size_t count = 1;
  for (const auto& c : components_) {
    const auto* f = std::get_if<FiniteMetricSpace>(&c);
    if (f == nullptr) return std::nullopt;
    if (count > cap / f->size()) return std::nullopt;
    count *= f->size();
  }
  return count;
}

MarkovProcessSpec::MarkovProcessSpec(FiniteMetricSpace states, std::vector<double> initial,
                                     Matrix transition, std::size_t horizon)
    : states_(std::move(states)), horizon_(horizon) {
  const std::size_t n = states_.size();
  if (horizon == 0) throw ValidationError("horizon must be at least 1");
  if (initial.size() != n) throw ValidationError("initial law has the wrong dimension");
  initial_ = checked_probabilities(std::move(initial), "initial");
  if (transition.rows() != n || transition.cols() != n) {
    throw ValidationError("transition matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  for (std::size_t s = 0; s < n; ++s) {
    auto r = transition.row(s);
    auto checked = checked_probabilities(std::vector<double>(r.begin(), r.end()),
                                         "transition row " + states_.labels()[s]);
    std::copy(checked.begin(), checked.end(), r.begin());
  }
  transition_ = std::move(transition);
}

std::vector<double> MarkovProcessSpec::marginal(std::size_t step) const {
  if (step == 0 || step > horizon_) throw DomainError("step must lie in [1, horizon]");
  std::vector<double> law = initial_;
  const std::size_t n = states_.size();
  for (std::size_t k = 1; k < step; ++k) {
    std::vector<double> next(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      if (law[s] == 0.0) continue;
      for (std::size_t t = 0; t < n; ++t) next[t] += law[s] * transition_(s, t);
    }
    law = std::move(next);
  }
  return law;
}

ProductSpec MarkovProcessSpec::trajectory_space() const {
  return ProductSpec::power(states_, horizon_);
}

// ---------------------------------------------------------------------------
// Definition documents

namespace {

std::vector<double> read_vector(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(std::string("field '") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Matrix read_matrix(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : v) {
    if (!r.is_array()) throw ParseError(std::string("field '") + key + "' must be an array of rows");
    std::vector<double> row;
    for (const auto& x : r) {
      if (!x.is_number()) throw ParseError(std::string("field '") + key + "' must hold numbers");
      row.push_back(x.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

double read_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ParseError(std::string("field '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

std::string type_of(const json& j) {
  if (!j.is_object()) throw ParseError("a space definition must be a JSON object");
  if (j.contains("type")) {
    if (!j.at("type").is_string()) throw ParseError("field 'type' must be a string");
    return j.at("type").get<std::string>();
  }
  // {"gaussian": {...}} shorthand
  if (j.contains("gaussian")) return "gaussian";
  throw ParseError("missing field 'type'");
}

FiniteMetricSpace parse_finite(const json& j) {
  if (!j.contains("labels") || !j.at("labels").is_array()) {
    throw ParseError("field 'labels' must be an array");
  }
  std::vector<std::string> labels;
  for (const auto& l : j.at("labels")) {
    if (l.is_string()) {
      labels.push_back(l.get<std::string>());
    } else if (l.is_number()) {
      labels.push_back(l.dump());
    } else {
      throw ParseError("labels must be strings or numbers");
    }
  }
  return FiniteMetricSpace(std::move(labels), read_matrix(j, "metric"), read_vector(j, "prob"));
}

GaussianLineSpace parse_gaussian(const json& j) {
  const json& body = j.contains("gaussian") && j.at("gaussian").is_object() ? j.at("gaussian") : j;
  return GaussianLineSpace(read_number(body, "mean"), read_number(body, "stddev"));
}

Space parse_space(const json& j);

void append_components(const Space& s, std::vector<Component>& out) {
  if (const auto* f = std::get_if<FiniteMetricSpace>(&s)) {
    out.emplace_back(*f);
  } else if (const auto* g = std::get_if<GaussianLineSpace>(&s)) {
    out.emplace_back(*g);
  } else if (const auto* p = std::get_if<ProductSpec>(&s)) {
    out.insert(out.end(), p->components().begin(), p->components().end());
  } else {
    throw ValidationError("a Markov process cannot be a product component");
  }
}

Space parse_space(const json& j) {
  const std::string type = type_of(j);
  if (type == "finite") return parse_finite(j);
  if (type == "gaussian") return parse_gaussian(j);
  if (type == "product") {
    if (!j.contains("components") || !j.at("components").is_array()) {
      throw ParseError("field 'components' must be an array");
    }
    std::vector<Component> comps;
    for (const auto& c : j.at("components")) append_components(parse_space(c), comps);
    return ProductSpec(std::move(comps));
  }
  if (type == "power") {
    if (!j.contains("base")) throw ParseError("missing field 'base'");
    if (!j.contains("n") || !j.at("n").is_number_integer() || j.at("n").get<long long>() < 1) {
      throw ParseError("field 'n' must be a positive integer");
    }
    std::vector<Component> base;
    append_components(parse_space(j.at("base")), base);
    const auto n = static_cast<std::size_t>(j.at("n").get<long long>());
    std::vector<Component> comps;
    comps.reserve(base.size() * n);
    for (std::size_t k = 0; k < n; ++k) comps.insert(comps.end(), base.begin(), base.end());
    return ProductSpec(std::move(comps));
  }
  if (type == "markov") {
    if (!j.contains("states")) throw ParseError("missing field 'states'");
    Space states = parse_space(j.at("states"));
    auto* f = std::get_if<FiniteMetricSpace>(&states);
    if (f == nullptr) throw ValidationError("markov 'states' must be a finite space");
    if (!j.contains("horizon") || !j.at("horizon").is_number_integer() ||
        j.at("horizon").get<long long>() < 1) {
      throw ParseError("field 'horizon' must be a positive integer");
    }
    return MarkovProcessSpec(std::move(*f), read_vector(j, "initial"), read_matrix(j, "transition"),
                             static_cast<std::size_t>(j.at("horizon").get<long long>()));
  }
  throw ParseError("unknown space type '" + type + "'");
}

json finite_to_json(const FiniteMetricSpace& f) {
  return json{{"type", "finite"},
              {"labels", f.labels()},
              {"metric", f.metric().to_rows()},
              {"prob", f.prob()}};
}

json component_to_json(const Component& c) {
  if (const auto* f = std::get_if<FiniteMetricSpace>(&c)) return finite_to_json(*f);
  const auto& g = std::get<GaussianLineSpace>(c);
  return json{{"type", "gaussian"}, {"mean", g.mean()}, {"stddev", g.stddev()}};
}

json space_to_json(const Space& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FiniteMetricSpace> || std::is_same_v<T, GaussianLineSpace>) {
          return component_to_json(v);
        } else if constexpr (std::is_same_v<T, ProductSpec>) {
          json comps = json::array();
          for (const auto& c : v.components()) comps.push_back(component_to_json(c));
          return json{{"type", "product"}, {"components", comps}};
        } else {
          return json{{"type", "markov"},
                      {"states", finite_to_json(v.states())},
                      {"initial", v.initial()},
                      {"transition", v.transition().to_rows()},
                      {"horizon", v.horizon()}};
        }
      },
      s);
}

}  // namespace

Space load_space(std::string_view document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed space document: ") + e.what());
  }
  try {
    return parse_space(j);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed space document: ") + e.what());
  }
}

Space load_space_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open space file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_space(buf.str());
}

std::string serialize_space(const Space& space) { return space_to_json(space).dump(); }

double product_distance(const ProductSpec& spec, std::span<const std::string> x,
                        std::span<const std::string> y) {
  const auto cx = spec.encode(x);
  const auto cy = spec.encode(y);
  return spec.distance(cx, cy);
}

double metric_diameter(const FiniteMetricSpace& space) {
  const auto d = space.metric().data();
  return d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
}

double metric_diameter(const Component& component) {
  if (const auto* f = std::get_if<FiniteMetricSpace>(&component)) return metric_diameter(*f);
  return std::numeric_limits<double>::infinity();
}

FiniteMetricSpace equilateral_space(std::size_t n) {
  if (n == 0) throw ValidationError("a finite space needs at least one point");
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = "p" + std::to_string(i);
  Matrix metric(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) metric(i, i) = 0.0;
  return FiniteMetricSpace(std::move(labels), std::move(metric),
                           std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FiniteMetricSpace line_space(std::span<const double> positions, std::vector<double> prob) {
  const std::size_t n = positions.size();
  std::vector<std::string> labels(n);
  Matrix metric(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = detail::shortest_repr(positions[i]);
    for (std::size_t j = 0; j < n; ++j) metric(i, j) = std::abs(positions[i] - positions[j]);
  }
  return FiniteMetricSpace(std::move(labels), std::move(metric), std::move(prob));
}

}  // namespace concdiam
