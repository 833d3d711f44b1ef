#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "modalreg/diagnostics.hpp"
#include "modalreg/posterior.hpp"
#include "modalreg_cli/artifact.hpp"
#include "modalreg_cli/commands.hpp"
#include "modalreg_cli/csv.hpp"

using namespace modalreg;
using namespace modalreg::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("modalreg_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

int run_quiet(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

// y = 1 + 2 x + N(0, 0.5^2)
void write_linear_data(const std::string& path, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  std::ostringstream os;
  os.precision(17);
  os << "x,y\n";
  for (int i = 0; i < n; ++i) {
    const double x = u(rng);
    os << x << ',' << 1.0 + 2.0 * x + 0.5 * z(rng) << '\n';
  }
  write_file(path, os.str());
}

std::vector<std::string> quick_fit(const TempDir& t, const std::string& family, const std::string& out) {
  return {"--threads", "1", "fit", "--data", t / "data.csv", "--response", "y", "--covariates", "x",
          "--family", family, "--warmup", "300", "--samples", "500", "--seed", "7", "--out", t / out};
}

}  // namespace

TEST_CASE("csv reader") {
  std::istringstream in("\xEF\xBB\xBF" "a,\"b, c\",d\r\n1,\"say \"\"hi\"\"\",3\r\n\r\n4,\"multi\nline\",6\n");
  const CsvTable t = read_csv(in, "mem");
  CHECK(t.header == std::vector<std::string>{"a", "b, c", "d"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "say \"hi\"");
  CHECK(t.rows[1][1] == "multi\nline");
  CHECK(t.numeric_column("d") == std::vector<double>{3.0, 6.0});

  std::istringstream ragged("a,b\n1,2\n3,4,5\n");
  try {
    read_csv(ragged, "mem");
    FAIL("ragged rows accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream text("a,b\n1,2\n3,x1\n");
  const CsvTable bad = read_csv(text, "mem");
  try {
    bad.numeric_column("b");
    FAIL("non-numeric cell accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 2, column 'b'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_cell("nan", "m", 1, "c"), DataError);
  CHECK_THROWS_AS(parse_cell("1,5", "m", 1, "c"), DataError);
  CHECK(parse_cell(" -2.5e-3 ", "m", 1, "c") == -2.5e-3);
  std::istringstream dup("a,a\n1,2\n");
  CHECK_THROWS_AS(read_csv(dup, "mem"), DataError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_csv(empty, "mem"), DataError);
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(std::stod(format_double(0.1)) == 0.1);
  CHECK(format_double(std::nan("")) == "NA");
}

TEST_CASE("design loading") {
  std::istringstream in("y,x1,x2\n1,2,3\n4,5,6\n7,8,10\n");
  const CsvTable t = read_csv(in, "mem");
  const Dataset d = load_dataset(t, "y", {"x2"}, true);
  CHECK(d.column_names == std::vector<std::string>{kInterceptName, "x2"});
  CHECK(d.X(2, 1) == 10.0);
  CHECK(d.y(1) == 4.0);
  CHECK_THROWS_AS(load_dataset(t, "y", {"y"}, true), DataError);
  CHECK_THROWS_AS(load_dataset(t, "z", {}, true), DataError);
  CHECK(load_design(t, {"x1"}, false).cols() == 1);
  CHECK(data_fingerprint(d) == data_fingerprint(load_dataset(t, "y", {"x2"}, true)));
  CHECK(data_fingerprint(d) != data_fingerprint(load_dataset(t, "y", {"x1"}, true)));
}

TEST_CASE("spec and loo json round trip") {
  FitSpec s;
  s.model = ModelSpec::with_defaults(Family::lognm);
  s.model.priors["w"] = Prior::uniform();
  s.model.priors["nu1"] = Prior::inverse_gamma(2.5, 0.123456789012345);
  s.response = "y";
  s.covariates = {"a", "b"};
  s.columns = {kInterceptName, "a", "b"};
  s.sampler.seed = 18446744073709551615ULL;
  s.sampler.target_accept = 0.95;
  s.data_fingerprint = "0123456789abcdef";
  s.data_rows = 12;
  const FitSpec r = fit_spec_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK(r.model == s.model);
  CHECK(r.covariates == s.covariates);
  CHECK(r.sampler.seed == s.sampler.seed);
  CHECK(r.sampler.target_accept == 0.95);
  CHECK(r.data_fingerprint == s.data_fingerprint);

  LooResult loo{-3.5, 0.25, {-1.0, -2.5}, {0.1, std::nan("")}};
  const auto j = to_json(loo);
  CHECK(j["pareto_k"][1].is_null());
  const LooResult back = loo_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.pointwise == loo.pointwise);
  CHECK(std::isnan(back.pareto_k[1]));
}

TEST_CASE("fit artifact round trip and prediction") {
  TempDir t;
  write_linear_data(t / "data.csv", 80, 1);
  REQUIRE(run_quiet(quick_fit(t, "normal", "normal")) == kOk);
  for (const char* f : {"draws.csv", "summary.csv", "spec.json", "loo.json"}) CHECK(fs::exists(t.path / "normal" / f));

  const FitArtifact a = read_artifact(t / "normal");
  CHECK(a.draws.chains == 4);
  CHECK(a.draws.samples == 500);
  std::ostringstream summary;
  summarize(a.draws, compute_diagnostics(a.draws)).write_csv(summary);
  CHECK(summary.str() == slurp(t / "normal/summary.csv"));
  CHECK(a.loo.pointwise.size() == 80);

  // reruns with the same seed are bit identical
  REQUIRE(run_quiet(quick_fit(t, "normal", "again")) == kOk);
  CHECK(slurp(t / "normal/draws.csv") == slurp(t / "again/draws.csv"));

  REQUIRE(run_quiet({"predict", "--fit", t / "normal", "--newdata", t / "data.csv", "--out", t / "p90.csv"}) == kOk);
  REQUIRE(run_quiet({"predict", "--fit", t / "normal", "--newdata", t / "data.csv", "--mass", "0.5", "--out",
                     t / "p50.csv"}) == kOk);
  const CsvTable p90 = read_csv_file(t / "p90.csv");
  const CsvTable p50 = read_csv_file(t / "p50.csv");
  const CsvTable data = read_csv_file(t / "data.csv");
  REQUIRE(p90.rows.size() == 80);
  const auto& rows = summarize(a.draws, compute_diagnostics(a.draws));
  const double b0 = rows.row("beta0").mean, b1 = rows.row("beta1").mean, sigma = rows.row("sigma").mean;
  const auto x = data.numeric_column("x");
  const auto lo90 = p90.numeric_column("hdi_lower"), hi90 = p90.numeric_column("hdi_upper");
  const auto lo50 = p50.numeric_column("hdi_lower"), hi50 = p50.numeric_column("hdi_upper");
  const auto med = p90.numeric_column("median");
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double theta = b0 + b1 * x[i];
    // the predictive also carries parameter uncertainty, and each row has only 2000 draws
    CHECK(std::abs(med[i] - theta) < 0.1);
    CHECK(std::abs(lo90[i] - (theta - 1.645 * sigma)) < 0.2);
    CHECK(std::abs(hi90[i] - (theta + 1.645 * sigma)) < 0.2);
    CHECK(hi50[i] - lo50[i] < hi90[i] - lo90[i]);
  }

  write_file(t / "empty.csv", "x\n");
  REQUIRE(run_quiet({"predict", "--fit", t / "normal", "--newdata", t / "empty.csv", "--out", t / "pe.csv"}) == kOk);
  CHECK(slurp(t / "pe.csv") == "row,median,hdi_lower,hdi_upper,mass\n");
  write_file(t / "other.csv", "z\n1\n");
  CHECK(run_quiet({"predict", "--fit", t / "normal", "--newdata", t / "other.csv", "--out", t / "po.csv"}) == kDataError);
}

TEST_CASE("loo comparison") {
  TempDir t;
  write_linear_data(t / "data.csv", 60, 2);
  REQUIRE(run_quiet(quick_fit(t, "normal", "normal")) == kOk);
  REQUIRE(run_quiet(quick_fit(t, "tpsc-t", "tpsc")) == kOk);
  REQUIRE(run_quiet({"loo", "--fits", t / "normal", "--out", t / "one.csv"}) == kOk);
  CHECK(read_csv_file(t / "one.csv").rows.size() == 1);
  REQUIRE(run_quiet({"loo", "--fits", t / "tpsc" + "," + t / "normal", "--out", t / "cmp.csv"}) == kOk);
  const CsvTable cmp = read_csv_file(t / "cmp.csv");
  REQUIRE(cmp.rows.size() == 2);
  const auto elpd = cmp.numeric_column("elpd");
  CHECK(elpd[0] >= elpd[1]);

  write_linear_data(t / "data.csv", 60, 3);
  REQUIRE(run_quiet(quick_fit(t, "normal", "shifted")) == kOk);
  std::string err;
  CHECK(run_quiet({"loo", "--fits", t / "normal" + "," + t / "shifted", "--out", t / "x.csv"}, &err) == kDataError);
  CHECK(err.find("different data") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir t;
  write_linear_data(t / "data.csv", 30, 4);
  CHECK(run_quiet({}) == kUsage);
  CHECK(run_quiet({"--help"}) == kOk);
  CHECK(run_quiet({"fit", "--data", t / "data.csv"}) == kUsage);
  auto args = quick_fit(t, "bogus", "x");
  CHECK(run_quiet(args) == kUsage);
  args = quick_fit(t, "normal", "x");
  args[13] = "10";  // warmup below the adaptation minimum
  CHECK(run_quiet(args) == kUsage);
  CHECK(run_quiet({"fit", "--data", t / "missing.csv", "--response", "y", "--family", "normal", "--out", t / "x"}) ==
        kDataError);
  write_file(t / "ragged.csv", "x,y\n1,2\n3\n");
  CHECK(run_quiet({"fit", "--data", t / "ragged.csv", "--response", "y", "--family", "normal", "--out", t / "x"}) ==
        kDataError);
  write_file(t / "collinear.csv", "x,z,y\n1,2,1\n2,4,3\n3,6,2\n4,8,5\n");
  CHECK(run_quiet({"fit", "--data", t / "collinear.csv", "--response", "y", "--covariates", "x,z", "--family",
                   "normal", "--out", t / "x"}) == kDataError);
  CHECK(run_quiet({"fit", "--data", t / "data.csv", "--response", "y", "--family", "fg", "--prior", "sigma1=flat",
                   "--out", t / "x"}) == kUsage);
  CHECK(run_quiet({"demo-reducible", "--init", "1", "--burn", "9000", "--out", t / "d.csv"}) == kUsage);
}

TEST_CASE("strict mode fails on unconverged chains") {
  TempDir t;
  // two far apart clusters: the modal fit has a mode at each and chains split between them
  std::ostringstream os;
  os << "y\n";
  for (int i = 0; i < 20; ++i) os << (i % 2 == 0 ? -30.0 : 30.0) + 0.01 * i << '\n';
  write_file(t / "data.csv", os.str());
  std::vector<std::string> args{"--threads", "1", "fit", "--data", t / "data.csv", "--response", "y", "--family",
                                "tpsc-t", "--warmup", "300", "--samples", "300", "--seed", "1", "--out", t / "f"};
  std::string err;
  CHECK(run_quiet(args, &err) == kOk);
  CHECK(err.find("rhat") != std::string::npos);
  args.push_back("--strict");
  CHECK(run_quiet(args) == kDiagnosticFailure);
  const auto diag = compute_diagnostics(read_artifact(t / "f").draws);
  CHECK(diag.params[0].rhat > 1.1);
}

TEST_CASE("demo and simulate commands") {
  TempDir t;
  std::ostringstream out, err;
  REQUIRE(run({"demo-reducible", "--init", "8", "--iters", "500", "--burn", "100", "--seed", "2", "--out",
               t / "demo.csv"},
              out, err) == kOk);
  CHECK(out.str().find("verdict: stuck-above") != std::string::npos);
  CHECK(read_csv_file(t / "demo.csv").rows.size() == 500);

  REQUIRE(run_quiet({"--threads", "1", "simulate", "--study", "left-skewed", "--n", "30", "--reps", "2", "--models",
                     "tpsc-t", "--warmup", "200", "--samples", "200", "--seed", "3", "--out", t / "sim"}) == kOk);
  const CsvTable reps = read_csv_file(t / "sim/replicates.csv");
  CHECK(reps.rows.size() == 12);  // 2 replicates x (3 metrics + 3 diagnostics)
  const CsvTable agg = read_csv_file(t / "sim/aggregate.csv");
  CHECK(agg.rows.size() == 6);
  CHECK(run_quiet({"simulate", "--study", "sideways", "--out", t / "sim2"}) == kUsage);
}
