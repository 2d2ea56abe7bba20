#ifndef UNIFOLD_CALIBRATION_HPP
#define UNIFOLD_CALIBRATION_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "unifold/critical_values.hpp"
#include "unifold/error.hpp"
#include "unifold/folding.hpp"
#include "unifold/random.hpp"
#include "unifold/unimodality_test.hpp"
#include "unifold/weighted_sample.hpp"

namespace unifold {

inline constexpr std::size_t kDefaultReplicates = 10000;
inline constexpr std::size_t kMinReplicates = 1000;

/// Folding statistics of one uniform replicate under the null.
struct NullReplicate {
  double sfr_exact;   // Phi*_1
  double sfr_approx;  // Phi**_1
  double sfr_second;  // Phi*_2
};

/*
 * Statistics of `replicates` uniform samples of size n. Replicate r draws
 * from make_stream(seed, {n, r}), so the pool depends only on
 * (n, replicates, seed), whatever the worker count.
 */
struct NullPool {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::vector<NullReplicate> replicates;
};

inline NullReplicate null_replicate(std::size_t n, std::uint64_t seed, std::size_t r) {
  Rng rng = make_stream(seed, {n, r});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> data(n);
  for (auto& x : data) x = unit(rng);
  const WeightedSample s = WeightedSample::from_data(data);
  const FoldingOutcome exact = exact_pivot(s);
  const SecondStep step = second_step(s);
  const FoldingOutcome approx = approximate_pivot(s);
  return {exact.sfr, approx.sfr, step.sfr2};
}

inline NullPool simulate_null_pool(std::size_t n, std::size_t replicates,
                                   std::uint64_t seed, unsigned workers = 1) {
  if (n < 2) {
    throw InvalidParameter("calibration sample size must be at least 2");
  }
  NullPool pool;
  pool.n = n;
  pool.seed = seed;
  pool.replicates.resize(replicates);
  workers = std::max(1u, workers);
  if (workers == 1 || replicates < 2) {
    for (std::size_t r = 0; r < replicates; ++r) {
      pool.replicates[r] = null_replicate(n, seed, r);
    }
    return pool;
  }
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t r = w; r < replicates; r += workers) {
        pool.replicates[r] = null_replicate(n, seed, r);
      }
    });
  }
  for (auto& t : threads) t.join();
  return pool;
}

inline std::string pivot_policy(bool conditional_q2) {
  return std::string("exact pivot on X; fold at approximate pivot; exact pivot on folded; q2 ") +
         (conditional_q2 ? "conditional on Phi1 >= q1" : "unconditional");
}

/*
 * q1 is the alpha1-quantile of Phi*_1 over the pool. q2 is the
 * alpha2-quantile of Phi*_2, by default over the replicates that pass step
 * one (Phi*_1 >= q1), which is what P(Phi*_2 < q2 | Phi*_1 >= q1) asks for.
 */
inline CriticalValues critical_values_from_pool(const NullPool& pool, double alpha,
                                                double alpha1, bool conditional_q2 = true) {
  CriticalValues cv;
  cv.alpha = alpha;
  cv.alpha1 = alpha1;
  cv.alpha2 = second_step_level(alpha, alpha1);
  cv.n = pool.n;
  cv.replicates = pool.replicates.size();
  cv.seed = pool.seed;
  cv.pivot_policy = pivot_policy(conditional_q2);

  std::vector<double> first;
  first.reserve(pool.replicates.size());
  for (const auto& r : pool.replicates) first.push_back(r.sfr_exact);
  cv.q1 = quantile(first, alpha1);

  std::vector<double> second;
  for (const auto& r : pool.replicates) {
    if (!conditional_q2 || r.sfr_exact >= cv.q1) second.push_back(r.sfr_second);
  }
  cv.q2 = quantile(second, cv.alpha2);
  return cv;
}

inline FtuCriticalValue ftu_critical_value_from_pool(const NullPool& pool, double alpha,
                                                     PivotKind kind) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidParameter("alpha must lie in (0, 1)");
  }
  FtuCriticalValue cv;
  cv.alpha = alpha;
  cv.n = pool.n;
  cv.replicates = pool.replicates.size();
  cv.seed = pool.seed;
  cv.pivot_policy = std::string(to_string(kind)) + " pivot";
  std::vector<double> values;
  values.reserve(pool.replicates.size());
  for (const auto& r : pool.replicates) {
    values.push_back(kind == PivotKind::Exact ? r.sfr_exact : r.sfr_approx);
  }
  cv.q = quantile(values, alpha);
  return cv;
}

inline void check_calibration_args(std::size_t n, double alpha, double alpha1,
                                   std::size_t replicates) {
  if (n < 2) throw InvalidParameter("sample size must be at least 2");
  if (replicates < kMinReplicates) {
    throw InvalidParameter("at least " + std::to_string(kMinReplicates) +
                           " replicates are required");
  }
  second_step_level(alpha, alpha1);
}

/// Monte Carlo critical values of the two-step test for sample size n.
inline CriticalValues calibrate(std::size_t n, double alpha, double alpha1,
                                std::size_t replicates, std::uint64_t seed,
                                bool conditional_q2 = true, unsigned workers = 1) {
  check_calibration_args(n, alpha, alpha1, replicates);
  const NullPool pool = simulate_null_pool(n, replicates, seed, workers);
  return critical_values_from_pool(pool, alpha, alpha1, conditional_q2);
}

struct CalibrationSet {
  CriticalValues dftu;
  FtuCriticalValue ftu_exact;
  FtuCriticalValue ftu_approx;
};

inline CalibrationSet calibrate_all(std::size_t n, double alpha, double alpha1,
                                    std::size_t replicates, std::uint64_t seed,
                                    bool conditional_q2 = true, unsigned workers = 1) {
  check_calibration_args(n, alpha, alpha1, replicates);
  const NullPool pool = simulate_null_pool(n, replicates, seed, workers);
  return {critical_values_from_pool(pool, alpha, alpha1, conditional_q2),
          ftu_critical_value_from_pool(pool, alpha, PivotKind::Exact),
          ftu_critical_value_from_pool(pool, alpha, PivotKind::Approximate)};
}

/*
 * On-disk cache of critical values, one JSON file per key
 * (n, alpha, alpha1, replicates, seed, q2 mode).
 */
class CalibrationCache {
 public:
  explicit CalibrationCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path path_for(std::size_t n, double alpha, double alpha1,
                                 std::size_t replicates, std::uint64_t seed,
                                 bool conditional_q2) const {
    std::ostringstream name;
    name.precision(17);
    name << "dftu_n" << n << "_a" << alpha << "_a1" << alpha1 << "_r" << replicates << "_s"
         << seed << (conditional_q2 ? "_cond" : "_uncond") << ".json";
    return dir_ / name.str();
  }

  std::filesystem::path ftu_path_for(std::size_t n, double alpha, PivotKind kind,
                                     std::size_t replicates, std::uint64_t seed) const {
    std::ostringstream name;
    name.precision(17);
    name << "ftu_" << to_string(kind) << "_n" << n << "_a" << alpha << "_r" << replicates
         << "_s" << seed << ".json";
    return dir_ / name.str();
  }

  CriticalValues get_or_calibrate(std::size_t n, double alpha, double alpha1,
                                  std::size_t replicates, std::uint64_t seed,
                                  bool conditional_q2 = true, unsigned workers = 1) const {
    const auto path = path_for(n, alpha, alpha1, replicates, seed, conditional_q2);
    if (std::filesystem::exists(path)) {
      return read_json(path).get<CriticalValues>();
    }
    const CriticalValues cv =
        calibrate(n, alpha, alpha1, replicates, seed, conditional_q2, workers);
    write_json(path, cv);
    return cv;
  }

  FtuCriticalValue get_or_calibrate_ftu(std::size_t n, double alpha, PivotKind kind,
                                        std::size_t replicates, std::uint64_t seed,
                                        unsigned workers = 1) const {
    const auto path = ftu_path_for(n, alpha, kind, replicates, seed);
    if (std::filesystem::exists(path)) {
      return read_json(path).get<FtuCriticalValue>();
    }
    if (replicates < kMinReplicates) {
      throw InvalidParameter("at least " + std::to_string(kMinReplicates) +
                             " replicates are required");
    }
    const NullPool pool = simulate_null_pool(n, replicates, seed, workers);
    const FtuCriticalValue cv = ftu_critical_value_from_pool(pool, alpha, kind);
    write_json(path, cv);
    return cv;
  }

  /// All three tests' critical values from one null pool per n.
  CalibrationSet get_or_calibrate_all(std::size_t n, double alpha, double alpha1,
                                      std::size_t replicates, std::uint64_t seed,
                                      bool conditional_q2 = true, unsigned workers = 1) const {
    const auto dftu_path = path_for(n, alpha, alpha1, replicates, seed, conditional_q2);
    const auto exact_path = ftu_path_for(n, alpha, PivotKind::Exact, replicates, seed);
    const auto approx_path = ftu_path_for(n, alpha, PivotKind::Approximate, replicates, seed);
    if (std::filesystem::exists(dftu_path) && std::filesystem::exists(exact_path) &&
        std::filesystem::exists(approx_path)) {
      return {read_json(dftu_path).get<CriticalValues>(),
              read_json(exact_path).get<FtuCriticalValue>(),
              read_json(approx_path).get<FtuCriticalValue>()};
    }
    const CalibrationSet set =
        calibrate_all(n, alpha, alpha1, replicates, seed, conditional_q2, workers);
    write_json(dftu_path, set.dftu);
    write_json(exact_path, set.ftu_exact);
    write_json(approx_path, set.ftu_approx);
    return set;
  }

  static nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
      return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string(e.what()) + " in " + path.string(), 0);
    }
  }

  static void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace unifold

#endif  // UNIFOLD_CALIBRATION_HPP
