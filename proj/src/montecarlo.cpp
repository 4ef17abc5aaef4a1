#include "concdiam/montecarlo.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "concdiam/diagnostics.hpp"
#include "concdiam/diameter.hpp"
#include "concdiam/errors.hpp"
#include "format.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "sampling.hpp"

namespace concdiam {

using nlohmann::json;

namespace {

template <class Sampler>
Matrix sample_rows(const Sampler& sampler, std::size_t count, std::size_t dim, std::uint64_t seed,
                   unsigned threads) {
  Matrix out(count, dim);
  detail::parallel_chunks(count, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream rng(seed, r);
      sampler.draw(rng, out.row(r));
    }
  });
  return out;
}

}  // namespace

Matrix sample_product(const ProductSpec& spec, std::size_t count, std::uint64_t seed,
                      unsigned threads) {
  return sample_rows(detail::ProductSampler(spec), count, spec.size(), seed, threads);
}

Matrix sample_markov(const MarkovProcessSpec& chain, std::size_t count, std::uint64_t seed,
                     unsigned threads) {
  return sample_rows(detail::MarkovSampler(chain), count, chain.horizon(), seed, threads);
}

std::vector<double> empirical_tail(std::span<const double> values, double center,
                                   std::span<const double> t_grid) {
  if (values.empty()) throw DomainError("empirical_tail needs at least one value");
  std::vector<double> deviation(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) deviation[k] = std::abs(values[k] - center);
  std::sort(deviation.begin(), deviation.end());
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const auto above = deviation.end() - std::upper_bound(deviation.begin(), deviation.end(), t);
    out.push_back(static_cast<double>(above) / static_cast<double>(values.size()));
  }
  return out;
}

std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials, double alpha) {
  if (trials == 0) throw DomainError("Clopper-Pearson needs at least one trial");
  if (successes > trials) throw DomainError("successes exceed trials");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  double lower = 0.0;
  double upper = 1.0;
  if (successes > 0) {
    lower = boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1.0), alpha);
  }
  if (successes < trials) {
    upper = boost::math::quantile(boost::math::beta_distribution<>(k + 1.0, n - k), 1.0 - alpha);
  }
  return {lower, upper};
}

namespace {

/// Numeric value of every point of every finite component; empty for Gaussian
/// components (their coordinate is the value).
std::vector<std::vector<double>> value_tables(const ProductSpec& points, const std::string& stat) {
  std::vector<std::vector<double>> tables;
  for (const auto& c : points.components()) {
    std::vector<double> table;
    if (const auto* f = std::get_if<FiniteMetricSpace>(&c)) {
      for (std::size_t k = 0; k < f->size(); ++k) {
        const auto v = f->numeric_value(k);
        if (!v) {
          throw ValidationError("statistic '" + stat + "' needs numeric labels, got '" +
                                f->labels()[k] + "'");
        }
        table.push_back(*v);
      }
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

double lookup(const std::vector<std::vector<double>>& tables, std::size_t i, double x) {
  const auto& t = tables[i];
  return t.empty() ? x : t[static_cast<std::size_t>(x)];
}

}  // namespace

NamedStatistic make_statistic(const ProductSpec& points, const StatisticSpec& spec) {
  const std::size_t n = points.size();
  NamedStatistic out;
  out.name = spec.name;
  if (spec.name == "mean" || spec.name == "sum" || spec.name == "max") {
    auto tables = value_tables(points, spec.name);
    if (spec.name == "max") {
      out.fn = [tables](Coordinates x) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, lookup(tables, i, x[i]));
        return m;
      };
      out.lipschitz = 1.0;
    } else {
      const double scale = spec.name == "mean" ? 1.0 / static_cast<double>(n) : 1.0;
      out.fn = [tables, scale](Coordinates x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += lookup(tables, i, x[i]);
        return s * scale;
      };
      out.lipschitz = scale;
    }
  } else if (spec.name == "linear") {
    if (spec.weights.size() != n) {
      throw ValidationError("statistic 'linear' needs " + std::to_string(n) + " weights, got " +
                            std::to_string(spec.weights.size()));
    }
    auto tables = value_tables(points, spec.name);
    double lip = 0.0;
    for (double w : spec.weights) {
      if (!std::isfinite(w)) throw ValidationError("linear weights must be finite");
      lip = std::max(lip, std::abs(w));
    }
    out.fn = [tables, w = spec.weights](Coordinates x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * lookup(tables, i, x[i]);
      return s;
    };
    out.lipschitz = lip;
  } else if (spec.name == "dist_sum") {
    std::vector<std::vector<double>> rows;
    for (const auto& c : points.components()) {
      const auto* f = std::get_if<FiniteMetricSpace>(&c);
      if (f == nullptr) {
        throw ValidationError("statistic 'dist_sum' needs finite components");
      }
      const auto r = f->metric().row(f->index_of(spec.reference));
      rows.emplace_back(r.begin(), r.end());
    }
    out.fn = [rows](Coordinates x) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += rows[i][static_cast<std::size_t>(x[i])];
      return s;
    };
    out.lipschitz = 1.0;
  } else {
    throw ValidationError("unknown statistic '" + spec.name +
                          "' (expected mean, sum, max, dist_sum or linear)");
  }
  if (spec.lipschitz) {
    if (!(*spec.lipschitz > 0.0) || !std::isfinite(*spec.lipschitz)) {
      throw ValidationError("statistic lipschitz must be positive and finite");
    }
    out.lipschitz = *spec.lipschitz;
  }
  if (!(out.lipschitz > 0.0)) throw ValidationError("statistic has Lipschitz constant 0");
  return out;
}

ProductSpec point_space(const Model& model) {
  if (const auto* p = std::get_if<ProductSpec>(&model)) return *p;
  return std::get<MarkovProcessSpec>(model).trajectory_space();
}

void ExperimentConfig::validate() const {
  if (samples < 1) throw ValidationError("samples must be at least 1");
  if (t_grid.empty()) throw ValidationError("t_grid must not be empty");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] >= 0.0) || !std::isfinite(t_grid[k])) {
      throw ValidationError("t_grid entries must be finite and nonnegative");
    }
    if (k > 0 && !(t_grid[k] > t_grid[k - 1])) {
      throw ValidationError("t_grid must be strictly increasing");
    }
  }
  if (!(confidence_slack > 0.0 && confidence_slack < 1.0)) {
    throw ValidationError("confidence_slack must lie in (0, 1)");
  }
  if (!statistic.fn) throw ValidationError("statistic is not set");
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& expected) {
  throw ParseError("field '" + field + "' must be " + expected);
}

double get_real(const json& j, const std::string& field) {
  if (!j.at(field).is_number()) bad_field(field, "a number");
  return j.at(field).get<double>();
}

std::size_t get_count(const json& j, const std::string& field) {
  const auto& v = j.at(field);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad_field(field, "a nonnegative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

std::vector<double> get_reals(const json& j, const std::string& field) {
  const auto& v = j.at(field);
  if (!v.is_array()) bad_field(field, "an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) bad_field(field, "an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Model to_model(Space space) {
  return std::visit(
      [](auto&& s) -> Model {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ProductSpec> || std::is_same_v<T, MarkovProcessSpec>) {
          return std::move(s);
        } else {
          return ProductSpec({Component(std::move(s))});
        }
      },
      std::move(space));
}

BoundRequest parse_bound(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ParseError("each bound needs a string field 'kind'");
  }
  BoundRequest r;
  r.kind = bound_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("name")) {
    if (!j.at("name").is_string()) bad_field("name", "a string");
    r.name = j.at("name").get<std::string>();
  }
  if (j.contains("deltas")) r.deltas = get_reals(j, "deltas");
  if (j.contains("widths")) r.deltas = get_reals(j, "widths");
  if (j.contains("tau_bar")) r.tau_bar = get_reals(j, "tau_bar");
  if (j.contains("p")) r.p = get_real(j, "p");
  if (j.contains("beta")) r.beta = get_real(j, "beta");
  if (j.contains("delta_sg")) r.delta_sg = get_real(j, "delta_sg");
  if (j.contains("n")) r.n = get_count(j, "n");
  return r;
}

}  // namespace

ExperimentConfig load_experiment(std::string_view document, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::exception& e) {
    throw ParseError(std::string("experiment is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("experiment must be a JSON object");
  try {
    const char* model_key = j.contains("space") ? "space" : "chain";
    if (!j.contains(model_key)) throw ParseError("experiment needs a 'space' or 'chain' field");
    const auto& m = j.at(model_key);
    ExperimentConfig cfg{[&] {
      if (!m.is_string()) return to_model(load_space(m.dump()));
      std::filesystem::path p = m.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      return to_model(load_space_file(p));
    }()};
    const ProductSpec points = point_space(cfg.model);

    StatisticSpec stat;
    if (j.contains("statistic")) {
      const auto& s = j.at("statistic");
      if (s.is_string()) {
        stat.name = s.get<std::string>();
      } else if (s.is_object()) {
        if (!s.contains("name") || !s.at("name").is_string()) bad_field("statistic.name", "a string");
        stat.name = s.at("name").get<std::string>();
        if (s.contains("reference")) {
          const auto& ref = s.at("reference");
          stat.reference = ref.is_string() ? ref.get<std::string>() : ref.dump();
        }
        if (s.contains("weights")) stat.weights = get_reals(s, "weights");
        if (s.contains("lipschitz")) stat.lipschitz = get_real(s, "lipschitz");
      } else {
        bad_field("statistic", "a name or an object");
      }
    }
    cfg.statistic = make_statistic(points, stat);

    if (!j.contains("samples")) throw ParseError("experiment needs 'samples'");
    cfg.samples = get_count(j, "samples");
    if (!j.contains("t_grid")) throw ParseError("experiment needs 't_grid'");
    cfg.t_grid = get_reals(j, "t_grid");
    if (j.contains("seed")) {
      const auto& s = j.at("seed");
      if (s.is_number_unsigned()) {
        cfg.seed = s.get<std::uint64_t>();
      } else if (s.is_number_integer() && s.get<long long>() >= 0) {
        cfg.seed = static_cast<std::uint64_t>(s.get<long long>());
      } else {
        bad_field("seed", "a nonnegative 64-bit integer");
      }
    }
    if (j.contains("confidence_slack")) cfg.confidence_slack = get_real(j, "confidence_slack");
    if (j.contains("lipschitz_trials")) cfg.lipschitz_trials = get_count(j, "lipschitz_trials");
    if (j.contains("bounds")) {
      if (!j.at("bounds").is_array()) bad_field("bounds", "an array");
      for (const auto& b : j.at("bounds")) cfg.bounds.push_back(parse_bound(b));
    }
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed experiment: ") + e.what());
  }
}

ExperimentConfig load_experiment_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open experiment file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_experiment(buffer.str(), path.parent_path());
}

namespace {

double component_orlicz(const Component& c, double p) {
  if (const auto* f = std::get_if<FiniteMetricSpace>(&c)) return orlicz_p_diameter(*f, p);
  // Xi ~ N(0, 2 s^2) has log MGF s^2 lambda^2: finite only for p = 2.
  const auto& g = std::get<GaussianLineSpace>(c);
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  if (g.stddev() == 0.0) return 0.0;
  return p == 2.0 ? g.stddev() * std::sqrt(2.0) : std::numeric_limits<double>::infinity();
}

TailBound derive_one(const ExperimentConfig& cfg, const BoundRequest& r) {
  BoundParams params;
  const auto* product = std::get_if<ProductSpec>(&cfg.model);
  const auto* chain = std::get_if<MarkovProcessSpec>(&cfg.model);
  const std::string kind(to_string(r.kind));

  auto per_component = [&](auto&& f) {
    std::vector<double> out;
    for (const auto& c : product->components()) out.push_back(f(c));
    return out;
  };
  auto need_product = [&] {
    if (product == nullptr) {
      throw ValidationError("bound '" + kind +
                            "' assumes independent coordinates; give explicit deltas or use "
                            "'mixing' for a chain");
    }
  };

  switch (r.kind) {
    case BoundKind::mcdiarmid:
      if (!r.deltas) {
        need_product();
        params.deltas = per_component([](const Component& c) { return metric_diameter(c); });
      }
      break;
    case BoundKind::subgaussian:
      if (!r.deltas) {
        need_product();
        params.deltas = per_component(
            [](const Component& c) { return subgaussian_diameter(c).sigma_star; });
      }
      break;
    case BoundKind::orlicz:
      if (!r.p) throw ValidationError("bound 'orlicz' needs p");
      params.p = *r.p;
      if (!r.deltas) {
        need_product();
        params.deltas = per_component([&](const Component& c) { return component_orlicz(c, *r.p); });
      }
      break;
    case BoundKind::mixing:
      if (product != nullptr) {
        if (!r.deltas) {
          params.deltas = per_component(
              [](const Component& c) { return subgaussian_diameter(c).sigma_star; });
        }
        if (!r.tau_bar) params.tau_bar.assign(product->size(), 0.0);
      } else {
        if (!r.deltas) params.deltas = conditional_subgaussian_diameters(*chain);
        if (!r.tau_bar) {
          try {
            params.tau_bar = tau_coefficients(*chain, MixingMode::exact, cfg.threads).tau_bar;
          } catch (const CapacityError&) {
            diag::note("tail enumeration too large; using upper_bound mixing coefficients");
            params.tau_bar = tau_coefficients(*chain, MixingMode::upper_bound, cfg.threads).tau_bar;
          }
        }
      }
      break;
    case BoundKind::stability:
      if (!r.beta || !r.delta_sg || !r.n) {
        throw ValidationError("bound 'stability' needs explicit beta, delta_sg and n");
      }
      params.beta = *r.beta;
      params.delta_sg = *r.delta_sg;
      params.n = *r.n;
      break;
  }
  if (r.deltas) params.deltas = *r.deltas;
  if (r.tau_bar) params.tau_bar = *r.tau_bar;
  return TailBound(r.kind, std::move(params), cfg.statistic.lipschitz, r.name);
}

}  // namespace

std::vector<TailBound> derive_bounds(const ExperimentConfig& config) {
  std::vector<TailBound> out;
  out.reserve(config.bounds.size());
  for (const auto& r : config.bounds) out.push_back(derive_one(config, r));
  return out;
}

std::optional<double> exact_expectation(const Model& model, const Statistic& phi) {
  detail::PointList points;
  if (const auto* product = std::get_if<ProductSpec>(&model)) {
    if (!product->finite_point_count(kExhaustivePointCap)) return std::nullopt;
    points = detail::enumerate_points(*product);
  } else {
    const auto& chain = std::get<MarkovProcessSpec>(model);
    std::size_t bound = 1;
    for (std::size_t k = 0; k < chain.horizon(); ++k) {
      if (bound > kExhaustivePointCap / chain.states().size()) return std::nullopt;
      bound *= chain.states().size();
    }
    points = detail::enumerate_trajectories(chain);
  }
  double e = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points.prob[k] > 0.0) e += points.prob[k] * phi(points.point(k));
  }
  return e;
}

namespace {

std::vector<double> sample_statistic(const ExperimentConfig& cfg) {
  std::vector<double> values(cfg.samples);
  const auto run = [&](const auto& sampler, std::size_t dim) {
    detail::parallel_chunks(cfg.samples, cfg.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> row(dim);
      for (std::size_t r = begin; r < end; ++r) {
        RandomStream rng(cfg.seed, r);
        sampler.draw(rng, row);
        values[r] = cfg.statistic.fn(row);
      }
    });
  };
  if (const auto* product = std::get_if<ProductSpec>(&cfg.model)) {
    run(detail::ProductSampler(*product), product->size());
  } else {
    const auto& chain = std::get<MarkovProcessSpec>(cfg.model);
    run(detail::MarkovSampler(chain), chain.horizon());
  }
  return values;
}

std::vector<std::string> unique_names(const std::vector<TailBound>& bounds) {
  std::vector<std::string> names;
  for (const auto& b : bounds) {
    std::string name = b.name();
    int suffix = 2;
    while (std::find(names.begin(), names.end(), name) != names.end()) {
      name = b.name() + "_" + std::to_string(suffix++);
    }
    names.push_back(name);
  }
  return names;
}

}  // namespace

TailReport certify_bounds(const ExperimentConfig& config, const std::vector<TailBound>& bounds) {
  config.validate();
  const ProductSpec points = point_space(config.model);

  TailReport report;
  report.lipschitz = lipschitz_check(points, config.statistic.fn, config.statistic.lipschitz,
                                     config.lipschitz_trials, config.seed, config.threads);
  if (!report.lipschitz.passed) {
    throw CertificationRefused("statistic '" + config.statistic.name + "' is not " +
                               detail::format_g(config.statistic.lipschitz, 12) +
                               "-Lipschitz (observed ratio " +
                               detail::format_g(report.lipschitz.worst_ratio, 12) +
                               "); refusing to certify");
  }

  const auto values = sample_statistic(config);
  if (const auto exact = exact_expectation(config.model, config.statistic.fn)) {
    report.centering = Centering::exact;
    report.center = *exact;
  } else {
    report.centering = Centering::empirical;
    double s = 0.0;
    for (double v : values) s += v;
    report.center = s / static_cast<double>(values.size());
  }

  report.t = config.t_grid;
  report.samples = config.samples;
  report.confidence_slack = config.confidence_slack;
  report.empirical = empirical_tail(values, report.center, config.t_grid);
  for (double f : report.empirical) {
    const auto k = static_cast<std::size_t>(std::llround(f * static_cast<double>(config.samples)));
    const auto [lo, hi] = clopper_pearson(k, config.samples, config.confidence_slack);
    report.ci_lower.push_back(lo);
    report.ci_upper.push_back(std::max(hi, f));
  }

  report.bound_names = unique_names(bounds);
  report.row_pass.assign(report.t.size(), true);
  for (const auto& b : bounds) {
    std::vector<double> column;
    bool ok = true;
    for (std::size_t k = 0; k < report.t.size(); ++k) {
      const double v = b.evaluate(report.t[k]);
      column.push_back(v);
      if (v < report.ci_lower[k]) {
        ok = false;
        report.row_pass[k] = false;
      }
    }
    report.bound_values.push_back(std::move(column));
    report.bound_pass.push_back(ok);
    report.passed = report.passed && ok;
  }
  return report;
}

std::string TailReport::to_csv(int digits) const {
  std::string out = "t,empirical,ci_upper";
  for (const auto& name : bound_names) out += "," + name;
  out += ",verdict\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    out += detail::format_real(t[k], digits);
    out += "," + detail::format_real(empirical[k], digits);
    out += "," + detail::format_real(ci_upper[k], digits);
    for (const auto& column : bound_values) out += "," + detail::format_real(column[k], digits);
    out += row_pass[k] ? ",pass\n" : ",fail\n";
  }
  return out;
}

BetaEstimate estimate_beta(const Statistic& loss, const ProductSpec& spec, std::size_t trials,
                           std::uint64_t seed, unsigned threads) {
  const std::size_t dim = spec.size();
  const detail::ProductSampler sampler(spec);
  const unsigned workers = detail::worker_count(threads, std::max<std::size_t>(trials, 1));
  std::vector<std::vector<double>> partial(workers, std::vector<double>(dim, 0.0));
  const std::size_t per = (trials + workers - 1) / workers;
  detail::parallel_chunks(workers, workers, [&](std::size_t w, std::size_t) {
    auto& best = partial[w];
    std::vector<double> z(dim);
    std::vector<double> z2(dim);
    const std::size_t end = std::min(trials, per * (w + 1));
    for (std::size_t k = per * w; k < end; ++k) {
      RandomStream rng(seed, k);
      sampler.draw(rng, z);
      const double base = loss(z);
      for (std::size_t i = 0; i < dim; ++i) {
        z2 = z;
        z2[i] = sampler.draw_coordinate(i, rng);
        const double rho = spec.distance(z, z2);
        if (rho == 0.0) continue;
        best[i] = std::max(best[i], std::abs(loss(z2) - base) / rho);
      }
    }
  });
  BetaEstimate est;
  est.per_coordinate.assign(dim, 0.0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < dim; ++i) est.per_coordinate[i] = std::max(est.per_coordinate[i], p[i]);
  }
  for (double b : est.per_coordinate) est.beta = std::max(est.beta, b);
  return est;
}

}  // namespace concdiam
