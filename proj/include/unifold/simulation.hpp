#ifndef UNIFOLD_SIMULATION_HPP
#define UNIFOLD_SIMULATION_HPP

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "unifold/calibration.hpp"
#include "unifold/data_io.hpp"
#include "unifold/error.hpp"
#include "unifold/mixture.hpp"
#include "unifold/random.hpp"
#include "unifold/unimodality_test.hpp"

namespace unifold {

struct Distribution {
  std::string name;
  Mixture mixture;
};

/*
 * Benchmark distributions. N_a is a normal with mean a and standard
 * deviation 0.5 (variance 0.25). The first eight entries form the default
 * plan; the last two are the unequal-weight (0.2, 0.4, 0.4) variants of the
 * 3-Dirac and 3-Gaussian rows.
 */
inline const std::vector<Distribution>& benchmark_registry() {
  static const std::vector<Distribution> registry = [] {
    const auto m = [](const char* spec) { return parse_mixture(spec); };
    return std::vector<Distribution>{
        {"N(0,1)", m("gauss:1@0:1")},
        {"0.5(N0+N1)", m("gauss:0.5@0:0.25,0.5@1:0.25")},
        {"0.6N0+0.4U[4,8]", m("gauss:0.6@0:0.25+unif:0.4@4:8")},
        {"0.6N0+0.4U[1,4]", m("gauss:0.6@0:0.25+unif:0.4@1:4")},
        {"3-Dirac", m("dirac:1@-2,1@0,1@2")},
        {"3-Gaussian", m("gauss:1@-2:0.25,1@0:0.25,1@2:0.25")},
        {"5-Dirac", m("dirac:0.2@-3,0.2@-1.5,0.2@2.5,0.2@4,0.2@11")},
        {"5-Gaussian", m("gauss:0.2@-3:0.25,0.2@-1.5:0.25,0.2@2.5:0.25,0.2@4:0.25,0.2@11:0.25")},
        {"3-Dirac(0.2,0.4,0.4)", m("dirac:0.2@-2,0.4@0,0.4@2")},
        {"3-Gaussian(0.2,0.4,0.4)", m("gauss:0.2@-2:0.25,0.4@0:0.25,0.4@2:0.25")},
    };
  }();
  return registry;
}

inline constexpr std::size_t kDefaultPlanRows = 8;

inline std::vector<Distribution> default_distributions() {
  const auto& r = benchmark_registry();
  return {r.begin(), r.begin() + kDefaultPlanRows};
}

struct SimulationPlan {
  std::vector<Distribution> distributions = default_distributions();
  std::size_t datasets_per_distribution = 100;
  std::size_t n = 1000;
  double alpha = 0.05;
  double alpha1 = 0.03;
  std::uint64_t seed = 42;
  std::size_t calibration_replicates = kDefaultReplicates;
  bool conditional_q2 = true;
  unsigned workers = 1;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> dump_dir;

  void validate() const {
    if (distributions.empty()) throw InvalidParameter("no distributions in the plan");
    if (datasets_per_distribution == 0) throw InvalidParameter("datasets must be positive");
    check_calibration_args(n, alpha, alpha1, calibration_replicates);
  }
};

enum class TestKind : std::size_t { FtuExact = 0, FtuApprox = 1, Dftu = 2 };
inline constexpr std::array<const char*, 3> kTestNames{"FTU-exact", "FTU-approx", "DFTU"};

struct ResultRow {
  std::string distribution;
  std::array<std::size_t, 3> uni_counts{};
  std::size_t failed_cells = 0;
  std::vector<std::string> errors;
};

struct ResultTable {
  std::size_t datasets_per_distribution = 0;
  std::vector<ResultRow> rows;

  std::size_t count(std::size_t row, TestKind t) const {
    return rows.at(row).uni_counts[static_cast<std::size_t>(t)];
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "distribution,test,uni_count\n";
    for (const auto& r : rows) {
      for (std::size_t t = 0; t < kTestNames.size(); ++t) {
        os << '"' << r.distribution << "\"," << kTestNames[t] << ',' << r.uni_counts[t] << '\n';
      }
    }
    return os.str();
  }

  std::string to_markdown() const {
    std::ostringstream os;
    os << "| Distribution | FTU* | FTU** | DFTU | failed |\n";
    os << "|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      os << "| " << r.distribution << " | " << r.uni_counts[0] << " | " << r.uni_counts[1]
         << " | " << r.uni_counts[2] << " | " << r.failed_cells << " |\n";
    }
    os << "\nCounts of Unimodal verdicts out of " << datasets_per_distribution
       << " datasets.\n";
    return os.str();
  }
};

inline void to_json(nlohmann::json& j, const ResultTable& t) {
  j = nlohmann::json::object();
  j["datasets_per_distribution"] = t.datasets_per_distribution;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row{{"distribution", r.distribution}, {"failed_cells", r.failed_cells}};
    for (std::size_t k = 0; k < kTestNames.size(); ++k) row[kTestNames[k]] = r.uni_counts[k];
    if (!r.errors.empty()) row["errors"] = r.errors;
    j["rows"].push_back(row);
  }
}

// Data streams carry this tag so they never coincide with calibration
// streams keyed by (n, replicate).
inline constexpr std::uint64_t kDataStreamTag = 0x64617461;  // "data"

/// Dataset `replicate` of distribution `index`; depends only on the key.
inline std::vector<double> simulate_dataset(const Mixture& m, std::size_t n, std::uint64_t seed,
                                            std::size_t index, std::size_t replicate) {
  Rng rng = make_stream(seed, {kDataStreamTag, index, replicate});
  return sample(m, n, rng);
}

inline std::size_t stratified_size(const Mixture& m, std::size_t n) {
  std::size_t total = 0;
  for (std::size_t c : stratified_counts(m, n)) total += c;
  return total;
}

inline std::string dump_name(std::size_t index, std::size_t replicate) {
  return "dist" + std::to_string(index) + "_rep" + std::to_string(replicate) + ".csv";
}

/*
 * Runs the three tests on every (distribution, replicate) cell. Critical
 * values are calibrated once per distinct stratified sample size. A cell
 * that throws is counted in `failed_cells` and the run continues.
 */
inline ResultTable run_simulation(const SimulationPlan& plan) {
  plan.validate();
  const std::size_t rows = plan.distributions.size();
  const std::size_t reps = plan.datasets_per_distribution;

  std::map<std::size_t, CalibrationSet> calibration;
  for (const auto& d : plan.distributions) {
    const std::size_t size = stratified_size(d.mixture, plan.n);
    if (calibration.count(size)) continue;
    if (plan.cache_dir) {
      calibration[size] = CalibrationCache(*plan.cache_dir)
                              .get_or_calibrate_all(size, plan.alpha, plan.alpha1,
                                                    plan.calibration_replicates, plan.seed,
                                                    plan.conditional_q2, plan.workers);
    } else {
      calibration[size] = calibrate_all(size, plan.alpha, plan.alpha1,
                                        plan.calibration_replicates, plan.seed,
                                        plan.conditional_q2, plan.workers);
    }
  }

  struct Cell {
    std::array<bool, 3> unimodal{};
    std::optional<std::string> error;
  };
  std::vector<Cell> cells(rows * reps);
  const auto run_cell = [&](std::size_t c) {
    const std::size_t i = c / reps;
    const std::size_t r = c % reps;
    try {
      const Mixture& m = plan.distributions[i].mixture;
      const std::vector<double> data = simulate_dataset(m, plan.n, plan.seed, i, r);
      if (plan.dump_dir) write_column(*plan.dump_dir / dump_name(i, r), data);
      const CalibrationSet& cv = calibration.at(data.size());
      const WeightedSample s = WeightedSample::from_data(data);
      const double sfr_exact = exact_pivot(s).sfr;
      const double sfr_approx = approximate_pivot(s).sfr;
      cells[c].unimodal[0] = sfr_exact >= cv.ftu_exact.q;
      cells[c].unimodal[1] = sfr_approx >= cv.ftu_approx.q;
      cells[c].unimodal[2] = dftu(s, cv.dftu).verdict == Verdict::Unimodal;
    } catch (const std::exception& e) {
      cells[c].error = e.what();
    }
  };

  const unsigned workers = std::max(1u, plan.workers);
  if (workers == 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) run_cell(c);
      });
    }
    for (auto& t : threads) t.join();
  }

  ResultTable table;
  table.datasets_per_distribution = reps;
  for (std::size_t i = 0; i < rows; ++i) {
    ResultRow row;
    row.distribution = plan.distributions[i].name;
    for (std::size_t r = 0; r < reps; ++r) {
      const Cell& cell = cells[i * reps + r];
      if (cell.error) {
        ++row.failed_cells;
        row.errors.push_back("replicate " + std::to_string(r) + ": " + *cell.error);
        continue;
      }
      for (std::size_t t = 0; t < 3; ++t) row.uni_counts[t] += cell.unimodal[t] ? 1 : 0;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace unifold

#endif  // UNIFOLD_SIMULATION_HPP
