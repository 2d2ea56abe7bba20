// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "unifold/unifold.hpp"

namespace {

using namespace unifold;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

// Collects sub-check results for one criterion.
class Criterion {
 public:
  void check(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    notes_ << "    " << (ok ? "ok   " : "FAIL ") << what << '\n';
  }
  bool ok() const { return ok_; }
  std::string notes() const { return notes_.str(); }

 private:
  bool ok_ = true;
  std::ostringstream notes_;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

std::string run_cli(const std::string& args, int& code) {
  const std::string cmd = std::string(UNIFOLD_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  if (!pipe) {
    code = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

WeightedSample random_dirac(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> loc(-5.0, 5.0);
  std::uniform_real_distribution<double> wt(0.05, 1.0);
  std::vector<PointMass> p;
  while (p.size() < k) {
    const double x = loc(rng);
    bool clash = false;
    for (const auto& q : p) clash = clash || std::abs(q.location - x) < 1e-3;
    if (!clash) p.push_back({x, wt(rng)});
  }
  return build_sample(p);
}

// Var|X - s| from the definition, for the brute-force minimizer.
double direct_folded_variance(const WeightedSample& s, double pivot) {
  double m1 = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) m1 += s.weight(i) * std::abs(s.location(i) - pivot);
  double v = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = std::abs(s.location(i) - pivot) - m1;
    v += s.weight(i) * d * d;
  }
  return v;
}

double brute_force_min(const WeightedSample& s) {
  const auto f = [&s](double p) { return direct_folded_variance(s, p); };
  const double lo = s.location(0);
  const double hi = s.location(s.size() - 1);
  const std::size_t grid = 20001;
  double best = f(lo);
  double best_x = lo;
  for (std::size_t i = 1; i < grid; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  // Golden refinement around the best node and inside every gap.
  const double h = (hi - lo) / static_cast<double>(grid - 1);
  best = std::min(best, golden_section_minimize(f, std::max(lo, best_x - h),
                                                std::min(hi, best_x + h), 1e-14)
                            .value);
  for (std::size_t g = 1; g < s.size(); ++g) {
    best = std::min(best,
                    golden_section_minimize(f, s.location(g - 1), s.location(g), 1e-14).value);
  }
  return best;
}

// ---------------------------------------------------------------------------

void criterion_1(Criterion& c) {
  struct Case {
    const char* spec;
    double exact;
    double approx;
  };
  const Case cases[] = {{"dirac:0.2@-2,0.4@0,0.4@2", 0.95, 1.41},
                        {"dirac:0.2@-3,0.2@-1.5,0.2@2.5,0.2@4,0.2@11", 1.07, 1.38}};
  for (const auto& k : cases) {
    int code = 0;
    const std::string out = run_cli(std::string("analyze ") + k.spec, code);
    c.check(code == 0, std::string("analyze ") + k.spec + " exits 0");
    if (code != 0) continue;
    const json j = json::parse(out);
    const double exact = j["sfr_exact"].get<double>();
    const double approx = j["sfr_approx"].get<double>();
    c.check(within(exact, k.exact, 0.01),
            "Phi* = " + fmt(exact) + " vs " + fmt(k.exact) + " +- 0.01");
    c.check(within(approx, k.approx, 0.01),
            "Phi** = " + fmt(approx) + " vs " + fmt(k.approx) + " +- 0.01");

    const WeightedSample s = parse_mixture(k.spec).to_weighted_sample();
    const auto t0 = Clock::now();
    const int reps = 1000;
    double sink = 0.0;
    for (int i = 0; i < reps; ++i) {
      sink += exact_pivot(s).sfr + approximate_pivot(s).sfr + failure_verdict(s).gamma;
    }
    const double per_call = seconds_since(t0) / reps;
    c.check(per_call < 1e-3 && sink > 0.0,
            "library analysis takes " + fmt(per_call * 1e6, 3) + " us < 1 ms");
  }
}

void criterion_2(Criterion& c) {
  const WeightedSample s = standardize(build_sample({{-1.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}}));
  const double exact = exact_pivot(s).sfr;
  const double approx = approximate_pivot(s).sfr;
  const SecondStep second = second_step(s);
  c.check(within(exact, 1.0, 1e-9), "Phi* = " + fmt(exact, 17) + " vs 1 +- 1e-9");
  c.check(within(approx, 4.0 / 3.0, 1e-9), "Phi** = " + fmt(approx, 17) + " vs 4/3 +- 1e-9");
  c.check(within(second.sfr2, 0.0, 1e-9), "Phi*_2 = " + fmt(second.sfr2, 17) + " vs 0 +- 1e-9");
}

void criterion_3(Criterion& c) {
  // Var|U - 1/2| / Var U = (1/48) / (1/12) on [0, 1].
  const double analytic = (1.0 / 48.0) / (1.0 / 12.0);
  c.check(analytic == 0.25, "analytic ratio = " + fmt(analytic, 17));
  Rng rng = make_stream(2024, {100000});
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x(100000);
  for (double& v : x) v = unit(rng);
  const WeightedSample s = WeightedSample::from_data(x);
  const double exact = exact_pivot(s).phi;
  const double approx = approximate_pivot(s).phi;
  c.check(within(exact, 0.25, 0.005), "phi* = " + fmt(exact) + " vs 0.25 +- 0.005");
  c.check(within(approx, 0.25, 0.005), "phi** = " + fmt(approx) + " vs 0.25 +- 0.005");
}

void criterion_4(Criterion& c) {
  const auto t0 = Clock::now();
  int code = 0;
  const std::string out =
      run_cli("scan-sigma --family gauss:0.3@-2.8:1,0.7@1.2:1 --lo 0.05 --hi 2.5 --steps 50 "
              "--format json",
              code);
  const double elapsed = seconds_since(t0);
  c.check(code == 0, "scan-sigma exits 0");
  if (code != 0) return;
  const json j = json::parse(out);
  const bool found = j["crossing_sigma2"].is_number();
  c.check(found, "crossing reported");
  if (found) {
    const double crossing = j["crossing_sigma2"].get<double>();
    c.check(within(crossing, 1.34, 0.02), "sigma^2 = " + fmt(crossing) + " vs 1.34 +- 0.02");
  }
  c.check(elapsed < 5.0, "scan took " + fmt(elapsed, 3) + " s < 5 s");
}

void criterion_5(Criterion& c) {
  SimulationPlan plan;  // 8 benchmark rows, 100 datasets of 1000 points
  plan.seed = 20240101;
  plan.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = Clock::now();
  const ResultTable table = run_simulation(plan);
  const double elapsed = seconds_since(t0);

  struct Expected {
    std::array<int, 3> counts;
    std::array<int, 3> tolerance;
  };
  const Expected expected[] = {
      {{100, 100, 100}, {3, 3, 3}}, {{100, 100, 100}, {3, 3, 3}}, {{0, 0, 0}, {3, 3, 3}},
      {{1, 1, 1}, {3, 3, 3}},       {{100, 100, 0}, {3, 3, 3}},   {{100, 100, 4}, {3, 3, 5}},
      {{100, 100, 0}, {3, 3, 3}},   {{100, 100, 0}, {3, 3, 3}},
  };
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const ResultRow& row = table.rows[i];
    std::ostringstream line;
    line << row.distribution << ": got (" << row.uni_counts[0] << ", " << row.uni_counts[1]
         << ", " << row.uni_counts[2] << ") expected (" << expected[i].counts[0] << ", "
         << expected[i].counts[1] << ", " << expected[i].counts[2] << ")";
    bool ok = row.failed_cells == 0;
    for (std::size_t t = 0; t < 3; ++t) {
      ok = ok && std::abs(static_cast<int>(row.uni_counts[t]) - expected[i].counts[t]) <=
                     expected[i].tolerance[t];
    }
    c.check(ok, line.str());
  }
  const double limit = plan.workers > 1 ? 120.0 : 600.0;
  c.check(elapsed < limit, "run took " + fmt(elapsed, 3) + " s < " + fmt(limit) + " s with " +
                               std::to_string(plan.workers) + " worker(s)");
}

void criterion_6(Criterion& c) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  int pivot_bad = 0;
  int closed_bad = 0;
  double worst_rel = 0.0;
  double worst_closed = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const WeightedSample s = random_dirac(rng, size(rng));
    const double brute = brute_force_min(s);
    const double var = moments(s).variance;
    const double got = exact_pivot(s).folded_variance;
    const double err = std::abs(got - brute);
    const double tolerance = 1e-8 * brute + 1e-14 * var;
    worst_rel = std::max(worst_rel, err / tolerance);
    if (err > tolerance) ++pivot_bad;

    const double d_exact = std::abs(dirac_sfr_exact(s).sfr - exact_pivot(s).sfr);
    const double d_approx = std::abs(dirac_sfr_approx(s).sfr - approximate_pivot(s).sfr);
    worst_closed = std::max({worst_closed, d_exact, d_approx});
    if (d_exact > 1e-10 || d_approx > 1e-10) ++closed_bad;
  }
  c.check(pivot_bad == 0, "exact pivot vs brute force: " + std::to_string(pivot_bad) +
                               " of 1000 beyond 1e-8 relative (worst error " + fmt(worst_rel, 3) +
                              " of the tolerance)");
  c.check(closed_bad == 0, "closed forms vs numerics: " + std::to_string(closed_bad) +
                               " of 1000 beyond 1e-10 (worst " + fmt(worst_closed, 3) + ")");
}

void criterion_7(Criterion& c) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> eps(0.01, 0.99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int done = 0;
  int pivot_agree = 0;
  int failure_agree = 0;
  while (done < 1000) {
    const double e1 = eps(rng);
    const double e3 = eps(rng);
    if (e1 + e3 >= 1.0 - 1e-6) continue;
    const Mu1Range r = admissible_mu1(e1, e3);
    const double mu1 = r.lo + (r.hi - r.lo) * (0.001 + 0.998 * unit(rng));
    ThreeDiracConfig cfg;
    try {
      cfg = reconstruct(mu1, e1, e3);
    } catch (const Infeasible&) {
      continue;
    }
    ++done;
    const Prop3Check check = check_prop3(cfg);
    pivot_agree += check.pivot_agrees ? 1 : 0;
    failure_agree += check.failure_agrees ? 1 : 0;
  }
  c.check(pivot_agree == 1000, "pivot location agreement " + std::to_string(pivot_agree) + "/1000");
  c.check(failure_agree == 1000, "failure agreement " + std::to_string(failure_agree) + "/1000");
}

void criterion_8(Criterion& c) {
  const SecondStepReport coarse = verify_second_step(100);
  const SecondStepReport fine = verify_second_step();  // default resolution
  c.check(fine.resolution == 200, "default resolution 200^3");
  for (std::size_t k = 0; k < kObjectiveCount; ++k) {
    const double m100 = coarse.objectives[k].minimum;
    const double m200 = fine.objectives[k].minimum;
    c.check(m200 > 0.0, fine.objectives[k].name + ": min " + fmt(m200) + " > 0 (grid " +
                            fmt(fine.objectives[k].grid_minimum) + ")");
    c.check(m100 > 0.0 && std::abs(m100 - m200) <= 0.1 * m200,
            fine.objectives[k].name + ": 100^3 min " + fmt(m100) + " within 10% of " +
                fmt(m200));
  }
  c.check(true, "wall time " + fmt(fine.wall_time_seconds, 3) + " s");
}

void criterion_9(Criterion& c) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> slope(-20.0, 20.0);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int affine_bad = 0, order_bad = 0, bounds_bad = 0, vertex_bad = 0, continuity_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const WeightedSample s = random_dirac(rng, 7);
    double a = slope(rng);
    if (std::abs(a) < 1e-2) a = 1.0;
    const WeightedSample t = s.affine(a, shift(rng));
    if (std::abs(exact_pivot(t).sfr - exact_pivot(s).sfr) > 1e-9 ||
        std::abs(approximate_pivot(t).sfr - approximate_pivot(s).sfr) > 1e-9) {
      ++affine_bad;
    }
    if (exact_pivot(s).sfr > approximate_pivot(s).sfr + 1e-12) ++order_bad;
    const double var = moments(s).variance;
    const double p = s.location(0) - 1.0 + unit(rng) * (s.location(6) - s.location(0) + 2.0);
    const double v = var_fold(s, p);
    if (v < 0.0 || v > var) ++bounds_bad;

    const WeightedSample z = standardize(s);
    for (std::size_t g = 1; g < z.size(); ++g) {
      const double al = z.prefix_first_moment(g);
      const double et = z.prefix_weight(g);
      if (g + 1 < z.size()) {
        const double next =
            detail::gap_vertex(z.prefix_first_moment(g + 1), z.prefix_weight(g + 1));
        if (!(detail::gap_vertex(al, et) < next)) ++vertex_bad;
        const double knot = z.location(g);
        const double right =
            detail::gap_parabola(z.prefix_first_moment(g + 1), z.prefix_weight(g + 1), knot);
        if (std::abs(detail::gap_parabola(al, et, knot) - right) > 1e-12) ++continuity_bad;
      }
    }
  }
  c.check(affine_bad == 0, "affine invariance within 1e-9: " + std::to_string(affine_bad) + " violations");
  c.check(order_bad == 0, "Phi* <= Phi**: " + std::to_string(order_bad) + " violations");
  c.check(bounds_bad == 0, "0 <= Var|X-s| <= Var X: " + std::to_string(bounds_bad) + " violations");
  c.check(vertex_bad == 0, "gap vertices strictly increasing: " + std::to_string(vertex_bad) + " violations");
  c.check(continuity_bad == 0, "gap parabolas continuous: " + std::to_string(continuity_bad) + " violations");

  const GaussianMixture families[] = {
      GaussianMixture({{0.2, -2.0, 1.0}, {0.4, 0.0, 1.0}, {0.4, 2.0, 1.0}}),
      GaussianMixture({{0.3, -2.8, 1.0}, {0.7, 1.2, 1.0}}),
      GaussianMixture({{0.2, -3.0, 1.0}, {0.2, -1.5, 1.0}, {0.2, 2.5, 1.0}, {0.2, 4.0, 1.0},
                       {0.2, 11.0, 1.0}}),
  };
  double worst = 0.0;
  for (const auto& f : families) {
    worst = std::max(worst, std::abs(gaussian_sfr_exact(f.with_common_variance(1e-8)).sfr -
                                     dirac_sfr_exact(f.dirac_limit()).sfr));
  }
  c.check(worst <= 1e-3, "Gaussian to Dirac at sigma^2 = 1e-8: worst gap " + fmt(worst, 3));

  const CriticalValues cv = calibrate(1000, 0.05, 0.03, kDefaultReplicates, 99);
  std::size_t rejections = 0;
  for (std::size_t r = 0; r < 2000; ++r) {
    Rng data_rng = make_stream(31337, {r});
    std::vector<double> x(1000);
    for (double& v : x) v = unit(data_rng);
    if (dftu(x, cv).verdict == Verdict::Multimodal) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / 2000.0;
  c.check(within(rate, 0.05, 0.015), "type-I error " + fmt(rate) + " vs 0.05 +- 0.015");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> criteria = {
      {"closed-form reference values", criterion_1},
      {"balanced three-point mixture", criterion_2},
      {"uniform folding ratio", criterion_3},
      {"two-component Gaussian crossing", criterion_4},
      {"benchmark table reproduction", criterion_5},
      {"exact pivot oracle equivalence", criterion_6},
      {"three-point pivot and failure predicates", criterion_7},
      {"second-step positivity", criterion_8},
      {"property suites", criterion_9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Criterion c;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.check(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.ok() ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": "
              << criteria[i].first << " (" << fmt(seconds_since(t0), 3) << " s)\n"
              << c.notes() << std::flush;
    failed += c.ok() ? 0 : 1;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed\n";
  return failed;
}
