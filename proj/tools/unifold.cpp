// unifold: command-line front end for the folding tests of unimodality.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "unifold/unifold.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kMismatch = 1, kUsage = 2, kNumeric = 3 };

constexpr std::uint64_t kDefaultSeed = 42;
constexpr const char* kDefaultCacheDir = ".unifold-cache";
constexpr const char* kFigureFamily = "gauss:0.3@-2.8:1,0.7@1.2:1";

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cache_dir;
  std::string format;
  unsigned workers = 1;

  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("UNIFOLD_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used == std::string(env).size()) return v;
      } catch (const std::exception&) {
      }
      throw unifold::InvalidParameter(std::string("UNIFOLD_SEED is not an integer: ") + env);
    }
    return kDefaultSeed;
  }

  fs::path resolved_cache_dir() const {
    if (cache_dir) return *cache_dir;
    if (const char* env = std::getenv("UNIFOLD_CACHE_DIR"); env && *env) return env;
    return kDefaultCacheDir;
  }
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format) {
  c.format = default_format;
  cmd->add_option("--seed", c.seed, "RNG seed (default: $UNIFOLD_SEED or 42)");
  cmd->add_option("--cache-dir", c.cache_dir,
                  "Critical-value cache (default: $UNIFOLD_CACHE_DIR or .unifold-cache)");
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json", "md"}))
      ->capture_default_str();
  cmd->add_option("--workers", c.workers, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Flattens nested objects to dotted keys for the tabular formats.
void flatten(const json& j, const std::string& prefix,
             std::vector<std::pair<std::string, json>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (j.is_array() && !j.empty() && j.front().is_object()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    }
  } else {
    out.emplace_back(prefix, j);
  }
}

void print_record(const json& j, const std::string& format) {
  if (format == "json") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::vector<std::pair<std::string, json>> rows;
  flatten(j, "", rows);
  if (format == "csv") {
    std::cout << "field,value\n";
    for (const auto& [k, v] : rows) std::cout << k << ',' << cell(v) << '\n';
  } else {
    std::cout << "| field | value |\n|---|---|\n";
    for (const auto& [k, v] : rows) std::cout << "| " << k << " | " << cell(v) << " |\n";
  }
}

// ---------------------------------------------------------------- test

struct TestArgs {
  Common common;
  std::string input;
  std::string test = "dftu";
  std::string pivot = "exact";
  double alpha = 0.05;
  double alpha1 = 0.03;
  std::size_t reps = unifold::kDefaultReplicates;
  std::size_t column = 1;
  bool unconditional = false;
  std::optional<std::string> expect;
};

int run_test(const TestArgs& a) {
  const std::vector<double> data = unifold::read_column(fs::path(a.input), a.column);
  // Rejects fewer than two distinct values before any calibration work.
  const unifold::WeightedSample sample = unifold::WeightedSample::from_data(data);
  const unifold::CalibrationCache cache(a.common.resolved_cache_dir());
  const std::uint64_t seed = a.common.resolved_seed();

  unifold::Decision d;
  json cv;
  if (a.test == "dftu") {
    const unifold::CriticalValues c = cache.get_or_calibrate(
        data.size(), a.alpha, a.alpha1, a.reps, seed, !a.unconditional, a.common.workers);
    d = unifold::dftu(sample, c);
    d.n = data.size();
    cv = c;
  } else {
    const auto kind =
        a.pivot == "exact" ? unifold::PivotKind::Exact : unifold::PivotKind::Approximate;
    const unifold::FtuCriticalValue c =
        cache.get_or_calibrate_ftu(data.size(), a.alpha, kind, a.reps, seed, a.common.workers);
    d = unifold::ftu(data, kind, c.q);
    cv = c;
  }
  json out = d;
  out["critical_values"] = cv;
  print_record(out, a.common.format);

  if (a.expect) {
    const bool want_uni = *a.expect == "unimodal";
    const bool got_uni = d.verdict == unifold::Verdict::Unimodal;
    if (want_uni != got_uni) {
      std::cerr << "expected " << *a.expect << ", got " << unifold::to_string(d.verdict)
                << '\n';
      return kMismatch;
    }
  }
  return kOk;
}

// ------------------------------------------------------------ simulate

struct SimulateArgs {
  Common common;
  std::size_t n = 1000;
  std::size_t datasets = 100;
  std::size_t calibration_reps = unifold::kDefaultReplicates;
  double alpha = 0.05;
  double alpha1 = 0.03;
  bool unconditional = false;
  bool variants = false;
  std::vector<std::string> distributions;
  std::optional<std::string> out;
  std::optional<std::string> dump;
};

int run_simulate(const SimulateArgs& a) {
  unifold::SimulationPlan plan;
  if (!a.distributions.empty()) {
    plan.distributions.clear();
    for (const auto& spec : a.distributions) {
      plan.distributions.push_back({spec, unifold::parse_mixture(spec)});
    }
  } else if (a.variants) {
    plan.distributions = unifold::benchmark_registry();
  }
  plan.n = a.n;
  plan.datasets_per_distribution = a.datasets;
  plan.calibration_replicates = a.calibration_reps;
  plan.alpha = a.alpha;
  plan.alpha1 = a.alpha1;
  plan.conditional_q2 = !a.unconditional;
  plan.seed = a.common.resolved_seed();
  plan.workers = a.common.workers;
  plan.cache_dir = a.common.resolved_cache_dir();
  if (a.dump) plan.dump_dir = fs::path(*a.dump);

  const unifold::ResultTable table = unifold::run_simulation(plan);
  if (a.out) {
    fs::path csv = *a.out;
    fs::path md = csv;
    md.replace_extension(".md");
    if (csv.extension() != ".csv") csv.replace_extension(".csv");
    std::error_code ec;
    if (csv.has_parent_path()) fs::create_directories(csv.parent_path(), ec);
    std::ofstream(csv) << table.to_csv();
    std::ofstream(md) << table.to_markdown();
    if (!fs::exists(csv) || !fs::exists(md)) {
      throw unifold::IoError("cannot write " + csv.string());
    }
  }
  if (a.common.format == "csv") {
    std::cout << table.to_csv();
  } else if (a.common.format == "json") {
    std::cout << json(table).dump(2) << '\n';
  } else {
    std::cout << table.to_markdown();
  }
  for (const auto& row : table.rows) {
    for (const auto& e : row.errors) std::cerr << row.distribution << ": " << e << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------- scan-sigma

struct ScanArgs {
  Common common;
  std::string family = kFigureFamily;
  double lo = 0.05;
  double hi = 2.5;
  std::size_t steps = 50;
};

int run_scan(const ScanArgs& a) {
  if (a.steps < 2) throw unifold::InvalidParameter("need at least 2 grid points");
  if (!(a.lo > 0.0) || !(a.hi > a.lo)) {
    throw unifold::InvalidParameter("sigma^2 range must satisfy 0 < lo < hi");
  }
  const unifold::GaussianMixture family = unifold::parse_mixture(a.family).to_gaussian_mixture();

  struct Point {
    double variance, sfr, pivot;
  };
  std::vector<Point> points;
  for (std::size_t i = 0; i < a.steps; ++i) {
    const double v = a.lo + (a.hi - a.lo) * static_cast<double>(i) /
                                static_cast<double>(a.steps - 1);
    const unifold::GaussianSfr r = unifold::gaussian_sfr_exact(family.with_common_variance(v));
    points.push_back({v, r.sfr, r.pivot});
  }
  std::optional<double> crossing;
  std::string no_crossing;
  try {
    crossing = unifold::find_sfr_crossing(family, a.lo, a.hi);
  } catch (const unifold::NoCrossing& e) {
    no_crossing = e.what();
  }

  if (a.common.format == "json") {
    json j;
    j["family"] = a.family;
    j["points"] = json::array();
    for (const auto& p : points) {
      j["points"].push_back({{"sigma2", p.variance}, {"sfr", p.sfr}, {"pivot", p.pivot}});
    }
    j["crossing_sigma2"] = crossing ? json(*crossing) : json(nullptr);
    if (!crossing) j["no_crossing"] = no_crossing;
    std::cout << j.dump(2) << '\n';
  } else if (a.common.format == "md") {
    std::cout << "| sigma2 | sfr | pivot |\n|---|---|---|\n";
    for (const auto& p : points) {
      std::cout << "| " << num(p.variance) << " | " << num(p.sfr) << " | " << num(p.pivot)
                << " |\n";
    }
    std::cout << '\n'
              << (crossing ? "crossing sigma2: " + num(*crossing) : no_crossing) << '\n';
  } else {
    std::cout << "sigma2,sfr,pivot\n";
    for (const auto& p : points) {
      std::cout << num(p.variance) << ',' << num(p.sfr) << ',' << num(p.pivot) << '\n';
    }
    std::cout << (crossing ? "# crossing sigma2: " + num(*crossing) : "# " + no_crossing)
              << '\n';
  }
  return kOk;
}

// ------------------------------------------------------------- analyze

int run_analyze(const std::string& spec, const Common& c) {
  const unifold::Mixture m = unifold::parse_mixture(spec);
  json j;
  j["mixture"] = m.to_string();
  if (m.all_dirac()) {
    const unifold::WeightedSample s = m.to_weighted_sample();
    const unifold::FoldingOutcome exact = unifold::exact_pivot(s);
    const unifold::FoldingOutcome approx = unifold::approximate_pivot(s);
    const unifold::FailureVerdict v = unifold::failure_verdict(s);
    const unifold::PopulationDoubleFolding twice = unifold::population_double_folding(s);
    j["kind"] = "dirac";
    j["sfr_exact"] = exact.sfr;
    j["sfr_approx"] = approx.sfr;
    j["pivot_exact"] = exact.pivot;
    j["pivot_approx"] = approx.pivot;
    j["g_star"] = v.g_star;
    j["g_double_star"] = v.g_double_star;
    j["alpha_g"] = v.alpha_g;
    j["eta_g"] = v.eta_g;
    j["alpha_g_approx"] = v.alpha_g_approx;
    j["eta_g_approx"] = v.eta_g_approx;
    j["gamma"] = v.gamma;
    j["exact_fails"] = v.exact_fails;
    j["approx_fails"] = v.approx_fails;
    j["ellipse_residual"] = v.ellipse_residual;
    j["line_residual"] = v.line_residual;
    j["sfr_second"] = twice.sfr2 ? json(*twice.sfr2) : json(nullptr);
  } else if (m.gaussian_family()) {
    const unifold::GaussianMixture g = m.to_gaussian_mixture();
    const unifold::GaussianSfr exact = unifold::gaussian_sfr_exact(g);
    const unifold::GaussianSfr approx = unifold::gaussian_sfr_approx(g);
    j["kind"] = "gaussian";
    j["sfr_exact"] = exact.sfr;
    j["sfr_approx"] = approx.sfr;
    j["pivot_exact"] = exact.pivot;
    j["pivot_approx"] = approx.pivot;
    j["mean"] = g.mean();
    j["variance"] = g.variance();
    const auto snr = g.snr();
    j["snr"] = snr ? json(*snr) : json(nullptr);
  } else {
    throw unifold::InvalidParameter("analyze supports Dirac and Gaussian components only");
  }
  print_record(j, c.format);
  return kOk;
}

// -------------------------------------------------------------- verify

struct VerifyArgs {
  Common common;
  std::size_t grid = 200;
  std::size_t restarts = 100;
  std::size_t trials = 0;
};

int run_verify(const VerifyArgs& a) {
  const unifold::SecondStepReport report = unifold::verify_second_step(a.grid, a.restarts);
  json j = report;
  bool ok = report.all_positive;
  if (a.trials > 0) {
    unifold::Rng rng = unifold::make_stream(a.common.resolved_seed(), {a.trials});
    const unifold::NeverFailsReport nf = unifold::dftu_never_fails_3dirac(a.trials, rng);
    j["random_configurations"] = nf;
    ok = ok && nf.counterexamples == 0;
  }
  print_record(j, a.common.format);
  return ok ? kOk : kMismatch;
}

// ----------------------------------------------------------- calibrate

struct CalibrateArgs {
  Common common;
  std::size_t n = 1000;
  double alpha = 0.05;
  double alpha1 = 0.03;
  std::size_t reps = unifold::kDefaultReplicates;
  bool unconditional = false;
};

int run_calibrate(const CalibrateArgs& a) {
  const unifold::CalibrationCache cache(a.common.resolved_cache_dir());
  const std::uint64_t seed = a.common.resolved_seed();
  unifold::check_calibration_args(a.n, a.alpha, a.alpha1, a.reps);
  const unifold::CriticalValues cv = cache.get_or_calibrate(
      a.n, a.alpha, a.alpha1, a.reps, seed, !a.unconditional, a.common.workers);
  json j = cv;
  j["cache_file"] =
      cache.path_for(a.n, a.alpha, a.alpha1, a.reps, seed, !a.unconditional).string();
  print_record(j, a.common.format);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Folding tests of unimodality"};
  app.require_subcommand(1);

  TestArgs test;
  auto* test_cmd = app.add_subcommand("test", "Run FTU or DFTU on a data file");
  add_common(test_cmd, test.common, "json");
  test_cmd->add_option("input", test.input, "Data file")->required();
  test_cmd->add_option("--test", test.test)
      ->check(CLI::IsMember({"ftu", "dftu"}))
      ->capture_default_str();
  test_cmd->add_option("--pivot", test.pivot, "Pivot for ftu")
      ->check(CLI::IsMember({"exact", "approx"}))
      ->capture_default_str();
  test_cmd->add_option("--alpha", test.alpha)->capture_default_str();
  test_cmd->add_option("--alpha1", test.alpha1)->capture_default_str();
  test_cmd->add_option("--reps", test.reps, "Calibration replicates")->capture_default_str();
  test_cmd->add_option("--column", test.column, "1-based column")->capture_default_str();
  test_cmd->add_flag("--unconditional-q2", test.unconditional);
  test_cmd->add_option("--expect", test.expect, "Exit 1 if the verdict differs")
      ->check(CLI::IsMember({"unimodal", "multimodal"}));

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Benchmark table of Unimodal counts");
  add_common(sim_cmd, sim.common, "md");
  sim_cmd->add_option("--n", sim.n, "Observations per dataset")->capture_default_str();
  sim_cmd->add_option("--reps", sim.datasets, "Datasets per distribution")
      ->capture_default_str();
  sim_cmd->add_option("--calibration-reps", sim.calibration_reps)->capture_default_str();
  sim_cmd->add_option("--alpha", sim.alpha)->capture_default_str();
  sim_cmd->add_option("--alpha1", sim.alpha1)->capture_default_str();
  sim_cmd->add_flag("--unconditional-q2", sim.unconditional);
  sim_cmd->add_flag("--variants", sim.variants, "Add the unequal-weight 3-component rows");
  sim_cmd->add_option("--dist", sim.distributions, "Mixture spec (repeatable)");
  sim_cmd->add_option("--out", sim.out, "Write <out>.csv and <out>.md");
  sim_cmd->add_option("--dump", sim.dump, "Directory for generated datasets");

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan-sigma", "SFR of a Gaussian family over sigma^2");
  add_common(scan_cmd, scan.common, "csv");
  scan_cmd->add_option("--family", scan.family, "Gaussian mixture spec")
      ->capture_default_str();
  scan_cmd->add_option("--lo", scan.lo)->capture_default_str();
  scan_cmd->add_option("--hi", scan.hi)->capture_default_str();
  scan_cmd->add_option("--steps", scan.steps)->capture_default_str();

  std::string spec;
  Common analyze_common;
  auto* analyze_cmd = app.add_subcommand("analyze", "Closed-form analytics of a mixture");
  add_common(analyze_cmd, analyze_common, "json");
  analyze_cmd->add_option("mixture", spec, "Mixture spec")->required();

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Second-step positivity search");
  add_common(verify_cmd, verify.common, "json");
  verify_cmd->add_option("--grid", verify.grid, "Grid points per axis")->capture_default_str();
  verify_cmd->add_option("--restarts", verify.restarts)->capture_default_str();
  verify_cmd->add_option("--trials", verify.trials, "Random three-point configurations")
      ->capture_default_str();

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Compute and cache DFTU critical values");
  add_common(cal_cmd, cal.common, "json");
  cal_cmd->add_option("--n", cal.n)->capture_default_str();
  cal_cmd->add_option("--alpha", cal.alpha)->capture_default_str();
  cal_cmd->add_option("--alpha1", cal.alpha1)->capture_default_str();
  cal_cmd->add_option("--reps", cal.reps)->capture_default_str();
  cal_cmd->add_flag("--unconditional-q2", cal.unconditional);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*test_cmd) return run_test(test);
    if (*sim_cmd) return run_simulate(sim);
    if (*scan_cmd) return run_scan(scan);
    if (*analyze_cmd) return run_analyze(spec, analyze_common);
    if (*verify_cmd) return run_verify(verify);
    if (*cal_cmd) return run_calibrate(cal);
  } catch (const unifold::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const unifold::DegenerateSample& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const unifold::InvalidParameter& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const unifold::InvalidWeight& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const unifold::IoError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kNumeric;
  }
  return kUsage;
}
