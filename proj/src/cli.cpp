#include "concdiam/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "concdiam/bounds.hpp"
#include "concdiam/diagnostics.hpp"
#include "concdiam/diameter.hpp"
#include "concdiam/errors.hpp"
#include "concdiam/montecarlo.hpp"
#include "concdiam/transport.hpp"
#include "format.hpp"

namespace concdiam::cli {
namespace {

struct Options {
  int digits = 12;
  unsigned threads = 0;
  std::string space;
  std::string config;
  std::string csv;
  double tol = kDefaultTolerance;
  double p = 2.0;
  std::vector<double> mu;
  std::vector<double> nu;
  std::string mode = "exact";
  std::string kind;
  std::vector<double> deltas;
  std::vector<double> tau_bar;
  std::optional<double> beta;
  std::optional<double> delta_sg;
  std::optional<std::size_t> n;
  std::optional<double> epsilon;
  double lipschitz = 1.0;
  std::vector<double> t_grid;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> trials;
};

class Printer {
 public:
  Printer(std::ostream& out, int digits) : out_(out), digits_(digits) {}

  std::string real(double v) const { return detail::format_real(v, digits_); }

  void line(const std::string& name, double v) { out_ << name << " = " << real(v) << '\n'; }
  void line(const std::string& name, const std::string& v) { out_ << name << " = " << v << '\n'; }

  /// Left-aligned columns separated by two spaces.
  void table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    auto emit = [&](const std::vector<std::string>& r) {
      std::string s;
      for (std::size_t c = 0; c < r.size(); ++c) {
        s += r[c];
        if (c + 1 < r.size()) s += std::string(width[c] - r[c].size() + 2, ' ');
      }
      out_ << s << '\n';
    };
    emit(header);
    for (const auto& r : rows) emit(r);
  }

 private:
  std::ostream& out_;
  int digits_;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  f << content;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (c > 0) s += ',';
    s += cells[c];
  }
  return s + '\n';
}

const FiniteMetricSpace& require_finite(const Space& s, const char* command) {
  if (const auto* f = std::get_if<FiniteMetricSpace>(&s)) return *f;
  throw ValidationError(std::string(command) + " needs a finite space");
}

int cmd_diameter(const Options& o, Printer& pr) {
  const Space space = load_space_file(o.space);
  std::vector<std::vector<std::string>> rows;
  if (const auto* chain = std::get_if<MarkovProcessSpec>(&space)) {
    const auto d = conditional_subgaussian_diameters(*chain, o.tol);
    for (std::size_t i = 0; i < d.size(); ++i) {
      pr.line("delta_bar_sg[" + std::to_string(i + 1) + "]", d[i]);
      rows.push_back({std::to_string(i + 1), pr.real(d[i])});
    }
    if (!o.csv.empty()) {
      std::string s = csv_line({"step", "delta_bar_sg"});
      for (const auto& r : rows) s += csv_line(r);
      write_file(o.csv, s);
    }
    return kOk;
  }
  std::vector<Component> parts;
  if (const auto* product = std::get_if<ProductSpec>(&space)) {
    parts = product->components();
  } else if (const auto* f = std::get_if<FiniteMetricSpace>(&space)) {
    parts.emplace_back(*f);
  } else {
    parts.emplace_back(std::get<GaussianLineSpace>(space));
  }
  const bool single = parts.size() == 1;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto est = subgaussian_diameter(parts[i], o.tol);
    const double diam = metric_diameter(parts[i]);
    const std::string suffix = single ? "" : "[" + std::to_string(i + 1) + "]";
    pr.line("delta_sg" + suffix, est.sigma_star);
    pr.line("metric_diameter" + suffix, diam);
    if (single) pr.line("argmax_lambda", est.argmax_lambda);
    rows.push_back({std::to_string(i + 1), pr.real(est.sigma_star), pr.real(diam)});
  }
  if (!o.csv.empty()) {
    std::string s = csv_line({"coordinate", "delta_sg", "metric_diameter"});
    for (const auto& r : rows) s += csv_line(r);
    write_file(o.csv, s);
  }
  return kOk;
}

int cmd_orlicz(const Options& o, Printer& pr) {
  const Space space = load_space_file(o.space);
  pr.line("delta_or", orlicz_p_diameter(require_finite(space, "orlicz"), o.p, o.tol));
  return kOk;
}

int cmd_transport(const Options& o, Printer& pr) {
  const Space space = load_space_file(o.space);
  const auto& f = require_finite(space, "transport");
  const auto mu = checked_probabilities(o.mu, "mu");
  const auto nu = checked_probabilities(o.nu, "nu");
  if (mu.size() != f.size() || nu.size() != f.size()) {
    throw ValidationError("mu and nu need " + std::to_string(f.size()) + " entries");
  }
  const auto result = wasserstein1(f, mu, nu);
  pr.line("w1", result.distance);
  pr.line("tv", tv_distance(mu, nu));
  if (!o.csv.empty()) {
    std::string s = csv_line({"from", "to", "mass"});
    const auto& joint = result.coupling.joint;
    for (std::size_t i = 0; i < joint.rows(); ++i) {
      for (std::size_t j = 0; j < joint.cols(); ++j) {
        if (joint(i, j) > 0.0) s += csv_line({f.labels()[i], f.labels()[j], pr.real(joint(i, j))});
      }
    }
    write_file(o.csv, s);
  }
  return kOk;
}

int cmd_tau(const Options& o, Printer& pr) {
  const Space space = load_space_file(o.space);
  const auto* chain = std::get_if<MarkovProcessSpec>(&space);
  if (chain == nullptr) throw ValidationError("tau needs a markov space");
  const MixingMode mode = o.mode == "exact" ? MixingMode::exact : MixingMode::upper_bound;
  const auto profile = tau_coefficients(*chain, mode, o.threads);
  const bool reach = mode == MixingMode::exact;
  std::string s = reach ? csv_line({"step", "tau_bar", "tau_bar_reachable"})
                        : csv_line({"step", "tau_bar"});
  double total = 0.0;
  for (std::size_t i = 0; i < profile.tau_bar.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    pr.line("tau_bar[" + idx + "]", profile.tau_bar[i]);
    total += profile.tau_bar[i];
    if (reach) {
      pr.line("tau_bar_reachable[" + idx + "]", profile.tau_bar_reachable[i]);
      s += csv_line({idx, pr.real(profile.tau_bar[i]), pr.real(profile.tau_bar_reachable[i])});
    } else {
      s += csv_line({idx, pr.real(profile.tau_bar[i])});
    }
  }
  pr.line("tau_bar_sum", total);
  if (!o.csv.empty()) write_file(o.csv, s);
  return kOk;
}

TailBound bound_from_flags(const Options& o) {
  const BoundKind kind = bound_kind_from_string(o.kind);
  BoundParams params;
  params.deltas = o.deltas;
  params.tau_bar = o.tau_bar;
  params.p = o.p;
  if (kind == BoundKind::stability) {
    if (!o.beta || !o.delta_sg || !o.n) {
      throw ValidationError("--kind stability needs --beta, --delta-sg and --n");
    }
    params.beta = *o.beta;
    params.delta_sg = *o.delta_sg;
    params.n = *o.n;
  } else if (o.deltas.empty()) {
    throw ValidationError("--kind " + o.kind + " needs --deltas");
  }
  if (kind == BoundKind::mixing && o.tau_bar.empty()) {
    params.tau_bar.assign(o.deltas.size(), 0.0);
  }
  return TailBound(kind, std::move(params), o.lipschitz);
}

int cmd_bound(const Options& o, Printer& pr, std::ostream& out) {
  const TailBound bound = bound_from_flags(o);
  std::vector<double> values;
  for (double t : o.t_grid) values.push_back(bound.evaluate(t));
  if (o.t_grid.size() == 1) {
    out << pr.real(values[0]) << '\n';
  } else {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < values.size(); ++k) rows.push_back({pr.real(o.t_grid[k]), pr.real(values[k])});
    pr.table({"t", bound.name()}, rows);
  }
  if (!o.csv.empty()) {
    std::string s = csv_line({"t", bound.name()});
    for (std::size_t k = 0; k < values.size(); ++k) s += csv_line({pr.real(o.t_grid[k]), pr.real(values[k])});
    write_file(o.csv, s);
  }
  return kOk;
}

ExperimentConfig load_config(const Options& o) {
  ExperimentConfig cfg = load_experiment_file(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.samples) cfg.samples = *o.samples;
  if (o.trials) cfg.lipschitz_trials = *o.trials;
  if (!o.t_grid.empty()) cfg.t_grid = o.t_grid;
  cfg.threads = o.threads;
  cfg.validate();
  return cfg;
}

void print_lipschitz(const LipschitzReport& r, Printer& pr) {
  pr.line("lipschitz_check", std::string(r.passed ? "pass" : "fail"));
  pr.line("lipschitz_mode", std::string(r.exhaustive ? "exhaustive" : "sampled"));
  pr.line("pairs_checked", std::to_string(r.pairs_checked));
  pr.line("worst_ratio", r.worst_ratio);
  if (r.violation) {
    auto fmt = [&](const std::vector<double>& x) {
      std::string s = "(";
      for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + pr.real(x[i]);
      return s + ")";
    };
    pr.line("violation", fmt(r.violation->first) + " " + fmt(r.violation->second));
  }
}

int cmd_certify(const Options& o, Printer& pr) {
  const ExperimentConfig cfg = load_config(o);
  const auto bounds = derive_bounds(cfg);
  const TailReport report = certify_bounds(cfg, bounds);

  pr.line("statistic", cfg.statistic.name);
  pr.line("lipschitz", cfg.statistic.lipschitz);
  pr.line("samples", std::to_string(report.samples));
  pr.line("centering", std::string(report.centering == Centering::exact ? "exact" : "empirical"));
  pr.line("center", report.center);
  for (std::size_t b = 0; b < bounds.size(); ++b) {
    const auto& params = bounds[b].params();
    std::string desc;
    auto list = [&](const char* key, const std::vector<double>& v) {
      if (v.empty()) return;
      desc += std::string(desc.empty() ? "" : " ") + key + "=";
      // Runs of equal entries print as value*count.
      for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        desc += (i ? "," : "") + pr.real(v[i]);
        if (j - i > 1) desc += "*" + std::to_string(j - i);
        i = j;
      }
    };
    list("deltas", params.deltas);
    list("tau_bar", params.tau_bar);
    if (bounds[b].kind() == BoundKind::orlicz) desc += " p=" + pr.real(params.p);
    pr.line("bound " + report.bound_names[b], desc.empty() ? std::string("-") : desc);
  }

  std::vector<std::string> header{"t", "empirical", "ci_upper"};
  header.insert(header.end(), report.bound_names.begin(), report.bound_names.end());
  header.push_back("verdict");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < report.t.size(); ++k) {
    std::vector<std::string> r{pr.real(report.t[k]), pr.real(report.empirical[k]),
                               pr.real(report.ci_upper[k])};
    for (const auto& column : report.bound_values) r.push_back(pr.real(column[k]));
    r.push_back(report.row_pass[k] ? "pass" : "fail");
    rows.push_back(std::move(r));
  }
  pr.table(header, rows);
  pr.line("verdict", std::string(report.passed ? "pass" : "fail"));
  if (!o.csv.empty()) write_file(o.csv, report.to_csv(o.digits));
  return report.passed ? kOk : kCertificationFailed;
}

int cmd_lipschitz(const Options& o, Printer& pr) {
  const ExperimentConfig cfg = load_config(o);
  const auto report = lipschitz_check(point_space(cfg.model), cfg.statistic.fn,
                                      cfg.statistic.lipschitz, cfg.lipschitz_trials, cfg.seed,
                                      cfg.threads);
  pr.line("statistic", cfg.statistic.name);
  pr.line("lipschitz", cfg.statistic.lipschitz);
  print_lipschitz(report, pr);
  return kOk;
}

int cmd_stability(const Options& o, Printer& pr) {
  if (!o.beta || !o.delta_sg) throw ValidationError("stability needs --beta and --delta-sg");
  pr.line("bias_bound", stability_bias_bound(*o.beta, *o.delta_sg));
  if (o.n) {
    std::vector<double> eps = o.t_grid;
    if (o.epsilon) eps.insert(eps.begin(), *o.epsilon);
    for (double e : eps) {
      pr.line("excess_risk_tail[epsilon=" + pr.real(e) + "]",
              stability_excess_risk_bound(*o.beta, *o.delta_sg, *o.n, e));
    }
  } else if (o.epsilon || !o.t_grid.empty()) {
    throw ValidationError("the excess-risk tail needs --n");
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Subgaussian diameters, transport distances and concentration bounds", "concdiam"};
  app.require_subcommand(1, 1);
  app.add_option("--digits", o.digits, "Significant digits of printed reals")
      ->check(CLI::Range(1, 17));
  app.add_option("--threads", o.threads, "Worker cap (0 = all cores)");

  auto* diameter = app.add_subcommand("diameter", "Subgaussian and metric diameters of a space");
  diameter->add_option("--space", o.space, "Space definition file")->required()->check(CLI::ExistingFile);
  diameter->add_option("--tol", o.tol, "Relative tolerance of the sigma* search")->check(CLI::PositiveNumber);
  diameter->add_option("--csv", o.csv, "Write a CSV table here");

  auto* orlicz = app.add_subcommand("orlicz", "p-Orlicz diameter of a finite space");
  orlicz->add_option("--space", o.space, "Space definition file")->required()->check(CLI::ExistingFile);
  orlicz->add_option("--p", o.p, "Exponent p > 1")->required();
  orlicz->add_option("--tol", o.tol, "Relative search tolerance")->check(CLI::PositiveNumber);

  auto* transport = app.add_subcommand("transport", "W1 and TV distance between two laws on a finite space");
  transport->add_option("--space", o.space, "Space definition file")->required()->check(CLI::ExistingFile);
  transport->add_option("--mu", o.mu, "First law, comma separated")->required()->delimiter(',');
  transport->add_option("--nu", o.nu, "Second law, comma separated")->required()->delimiter(',');
  transport->add_option("--csv", o.csv, "Write the optimal coupling here");

  auto* tau = app.add_subcommand("tau", "Mixing coefficients of a Markov chain");
  tau->add_option("--space", o.space, "Chain definition file")->required()->check(CLI::ExistingFile);
  tau->add_option("--mode", o.mode, "exact or upper_bound")
      ->check(CLI::IsMember({"exact", "upper_bound"}));
  tau->add_option("--csv", o.csv, "Write a CSV table here");

  auto* bound = app.add_subcommand("bound", "Evaluate a tail bound");
  bound->add_option("--kind", o.kind, "mcdiarmid, subgaussian, mixing, orlicz or stability")
      ->required()
      ->check(CLI::IsMember({"mcdiarmid", "subgaussian", "mixing", "orlicz", "stability"}));
  bound->add_option("--deltas,--widths", o.deltas, "Per-coordinate diameters")->delimiter(',');
  bound->add_option("--tau-bar", o.tau_bar, "Mixing coefficients")->delimiter(',');
  bound->add_option("--p", o.p, "Orlicz exponent");
  bound->add_option("--beta", o.beta, "Stability constant");
  bound->add_option("--delta-sg", o.delta_sg, "Subgaussian diameter");
  bound->add_option("--n", o.n, "Training-set size");
  bound->add_option("--lipschitz", o.lipschitz, "Lipschitz constant of the statistic")
      ->check(CLI::PositiveNumber);
  auto* t_single = bound->add_option("--t", o.t_grid, "Deviation t")->expected(1);
  auto* t_grid = bound->add_option("--t-grid", o.t_grid, "Deviations, comma separated")->delimiter(',');
  t_single->excludes(t_grid);
  bound->add_option("--csv", o.csv, "Write a CSV table here");

  auto* certify = app.add_subcommand("certify", "Monte Carlo check of tail bounds");
  certify->add_option("--config", o.config, "Experiment file")->required()->check(CLI::ExistingFile);
  certify->add_option("--seed", o.seed, "Override the experiment seed");
  certify->add_option("--samples", o.samples, "Override the sample count");
  certify->add_option("--t-grid", o.t_grid, "Override the t grid")->delimiter(',');
  certify->add_option("--trials", o.trials, "Override the Lipschitz-check trial count");
  certify->add_option("--csv", o.csv, "Write the tail report here");

  auto* lipschitz = app.add_subcommand("lipschitz", "Check the Lipschitz constant of an experiment's statistic");
  lipschitz->add_option("--config", o.config, "Experiment file")->required()->check(CLI::ExistingFile);
  lipschitz->add_option("--seed", o.seed, "Override the experiment seed");
  lipschitz->add_option("--trials", o.trials, "Random pairs for infinite or large spaces");

  auto* stability = app.add_subcommand("stability", "Stability bias and excess-risk bounds");
  stability->add_option("--beta", o.beta, "Stability constant")->required();
  stability->add_option("--delta-sg", o.delta_sg, "Subgaussian diameter")->required();
  stability->add_option("--n", o.n, "Training-set size");
  stability->add_option("--epsilon", o.epsilon, "Excess over the bias bound");
  stability->add_option("--t-grid", o.t_grid, "Several epsilons, comma separated")->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << " (run with --help for usage)\n";
    return kUsageError;
  }

  Printer pr(out, o.digits);
  auto previous = diag::set_sink([&err](diag::Level level, std::string_view msg) {
    err << (level == diag::Level::warning ? "warning: " : "note: ") << msg << '\n';
  });
  struct Restore {
    diag::Sink& sink;
    ~Restore() { diag::set_sink(std::move(sink)); }
  } restore{previous};

  try {
    if (*diameter) return cmd_diameter(o, pr);
    if (*orlicz) return cmd_orlicz(o, pr);
    if (*transport) return cmd_transport(o, pr);
    if (*tau) return cmd_tau(o, pr);
    if (*bound) {
      if (o.t_grid.empty()) throw ValidationError("bound needs --t or --t-grid");
      return cmd_bound(o, pr, out);
    }
    if (*certify) return cmd_certify(o, pr);
    if (*lipschitz) return cmd_lipschitz(o, pr);
    if (*stability) return cmd_stability(o, pr);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace concdiam::cli
