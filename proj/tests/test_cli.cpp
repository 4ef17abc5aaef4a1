#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "concdiam/bounds.hpp"
#include "concdiam/cli.hpp"
#include "concdiam/diameter.hpp"
#include "concdiam/transport.hpp"
#include "doctest.h"
#include "format.hpp"

using namespace concdiam;

namespace {

const std::filesystem::path kData = CONCDIAM_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return (kData / name).string(); }

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

const char* kBitsExperiment = R"({
  "space": {"type": "power", "n": 4,
            "base": {"type": "finite", "labels": ["0", "1"], "metric": [[0, 1], [1, 0]], "prob": [0.5, 0.5]}},
  "statistic": STATISTIC,
  "samples": 5000,
  "t_grid": [0.5, 1.5],
  "seed": 3,
  "bounds": [BOUNDS]
})";

std::string bits_experiment(const std::string& bounds, const std::string& statistic = "\"sum\"") {
  std::string s = kBitsExperiment;
  s.replace(s.find("STATISTIC"), 9, statistic);
  s.replace(s.find("BOUNDS"), 6, bounds);
  return s;
}

}  // namespace

TEST_CASE("diameter prints the library values") {
  const auto r = run({"diameter", "--space", data("gauss.json")});
  CHECK(r.code == cli::kOk);
  const auto est = subgaussian_diameter(GaussianLineSpace(0, 1));
  CHECK(r.out == "delta_sg = " + detail::format_real(est.sigma_star, 12) +
                     "\nmetric_diameter = inf\nargmax_lambda = 0.0\n");
  CHECK(r.out.rfind("delta_sg = 1.41421356", 0) == 0);

  const auto four = run({"--digits", "15", "diameter", "--space", data("four_point_n10.json")});
  CHECK(four.code == cli::kOk);
  const auto space = std::get<FiniteMetricSpace>(load_space_file(kData / "four_point_n10.json"));
  CHECK(four.out.find("delta_sg = " + detail::format_real(subgaussian_diameter(space).sigma_star, 15)) == 0);
}

TEST_CASE("diameter of products and chains lists every coordinate") {
  const auto chain = run({"diameter", "--space", data("absorbing.json")});
  CHECK(chain.code == cli::kOk);
  CHECK(chain.out.find("delta_bar_sg[1] = ") != std::string::npos);
  CHECK(chain.out.find("delta_bar_sg[3] = 0.0") != std::string::npos);
}

TEST_CASE("bound") {
  auto r = run({"bound", "--kind", "subgaussian", "--deltas", "1,1", "--t", "0"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out == "1.0\n");
  r = run({"bound", "--kind", "mixing", "--deltas", "1,1", "--tau-bar", "0.5,0", "--t", "2.5"});
  CHECK(r.out == detail::format_real(2 * std::exp(-1.0), 12) + "\n");
  r = run({"bound", "--kind", "orlicz", "--deltas", "1", "--p", "3", "--t", "8"});
  CHECK(r.out == detail::format_real(orlicz_bound(std::vector<double>{1}, 3, 8), 12) + "\n");
  r = run({"bound", "--kind", "mcdiarmid", "--widths", "1,1", "--t-grid", "0", "1", "2"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("mcdiarmid") != std::string::npos);
  r = run({"bound", "--kind", "mcdiarmid", "--widths", "1,inf", "--t", "1"});
  CHECK(r.code == cli::kUsageError);
  CHECK(r.err == "error: metric diameter unbounded; McDiarmid inapplicable\n");
  r = run({"bound", "--kind", "hoeffding", "--deltas", "1", "--t", "1"});
  CHECK(r.code == cli::kUsageError);
}

TEST_CASE("transport and tau") {
  auto r = run({"transport", "--space", data("line3.json"), "--mu", "1,0,0", "--nu", "0,0,1"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out == "w1 = 2.0\ntv = 1.0\n");
  r = run({"tau", "--space", data("absorbing.json")});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.rfind("tau_bar[1] = 2.0\n", 0) == 0);
  CHECK(r.out.find("tau_bar_sum = 3.0") != std::string::npos);
  r = run({"tau", "--space", data("lazy_walk.json"), "--mode", "upper_bound"});
  CHECK(r.code == cli::kOk);
  r = run({"tau", "--space", data("gauss.json")});
  CHECK(r.code == cli::kUsageError);
}

TEST_CASE("stability") {
  const auto r = run({"stability", "--beta", "1", "--delta-sg", "1", "--n", "1", "--epsilon",
                      detail::format_g(std::sqrt(18.0), 17)});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("bias_bound = 0.5\n") != std::string::npos);
  CHECK(r.out.find("= " + detail::format_real(std::exp(-1.0), 12)) != std::string::npos);
}

TEST_CASE("certify exit codes") {
  const auto ok = run({"certify", "--config", data("exp_gaussian_mean.json"), "--samples", "3000",
                       "--trials", "200"});
  CHECK(ok.code == cli::kOk);
  CHECK(ok.out.find("verdict = pass") != std::string::npos);

  const auto csv = std::filesystem::temp_directory_path() / "concdiam_cli_report.csv";
  const auto good = write_temp("concdiam_cli_good.json",
                               bits_experiment(R"({"kind": "subgaussian"}, {"kind": "mcdiarmid"})"));
  const auto g = run({"certify", "--config", good.string(), "--csv", csv.string()});
  CHECK(g.code == cli::kOk);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,empirical,ci_upper,subgaussian,mcdiarmid,verdict");

  const auto forged = write_temp("concdiam_cli_forged.json",
                                 bits_experiment(R"({"kind": "subgaussian", "deltas": [0.07, 0.07, 0.07, 0.07]})"));
  const auto f = run({"certify", "--config", forged.string()});
  CHECK(f.code == cli::kCertificationFailed);
  CHECK(f.out.find("verdict = fail") != std::string::npos);

  const auto refused = write_temp(
      "concdiam_cli_refused.json",
      bits_experiment(R"({"kind": "subgaussian"})", R"({"name": "sum", "lipschitz": 0.5})"));
  const auto x = run({"certify", "--config", refused.string()});
  CHECK(x.code == cli::kUsageError);
  CHECK(x.err.rfind("error: statistic 'sum' is not", 0) == 0);
}

TEST_CASE("lipschitz subcommand") {
  const auto r = run({"lipschitz", "--config", data("exp_four_point.json"), "--trials", "100"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("pass") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kUsageError);
  CHECK(run({"diameter"}).code == cli::kUsageError);
  CHECK(run({"diameter", "--space", data("gauss.json"), "--frobnicate"}).code == cli::kUsageError);
  CHECK(run({"diameter", "--space", "/nonexistent/space.json"}).code == cli::kUsageError);
  CHECK(run({"bound", "--kind", "subgaussian", "--deltas", "1", "--t", "1", "--t-grid", "1", "2"}).code ==
        cli::kUsageError);
  CHECK(run({"--digits", "40", "diameter", "--space", data("gauss.json")}).code == cli::kUsageError);
  const auto help = run({"--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("certify") != std::string::npos);
}
