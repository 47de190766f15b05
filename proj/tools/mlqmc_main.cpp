// mlqmc: multilevel (quasi-)Monte Carlo experiment runner.
//
//   mlqmc run --config FILE [--check] [--trials N] [--threads N]
//   mlqmc points --kind {lattice|net} --n N --d D [--shift-seed S]
//   mlqmc table1 --problem {asian|lookback|elliptic} [--n N] [--levels L] [--seed S]

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mlqmc/experiment.hpp"
#include "mlqmc/problems.hpp"

namespace {

int cmd_run(const std::string& config_path, bool check, int trials_override,
            int threads_override) {
  auto cfg = mlqmc::parse_config_file(config_path);
  if (trials_override > 0) cfg.trials = trials_override;
  if (threads_override > 0) cfg.threads = threads_override;
  const auto result = mlqmc::run_experiment(cfg);

  for (const auto& s : result.summaries) {
    std::printf("%s %s %s N=%.0f trials=%d", s.problem.c_str(),
                mlqmc::to_string(s.method).c_str(), mlqmc::to_string(s.sequence).c_str(),
                s.budget, s.trials);
    if (!std::isnan(s.median_true_err)) std::printf(" med_err=%.4e", s.median_true_err);
    std::printf(" med_se=%.4e", s.median_std_err);
    if (!std::isnan(s.coverage)) std::printf(" coverage=%.3f", s.coverage);
    std::printf("\n");
  }
  for (const auto& s : result.slopes) {
    std::printf("slope %s", mlqmc::to_string(s.method).c_str());
    if (!std::isnan(s.true_err_slope)) std::printf(" true_err=%.3f", s.true_err_slope);
    std::printf(" std_err=%.3f\n", s.std_err_slope);
  }
  for (const auto& m : result.check_messages) std::printf("check: %s\n", m.c_str());
  if (check && !result.checks_passed) {
    std::fprintf(stderr, "mlqmc: checks failed\n");
    return 1;
  }
  return 0;
}

int cmd_points(const std::string& kind, std::int64_t n, int d, std::int64_t shift_seed) {
  using namespace mlqmc;
  std::vector<double> pts;
  if (kind == "lattice") {
    auto gen = take_dims(default_lattice(), d);
    LatticeShift shift;
    shift.delta.assign(d, 0.0);
    if (shift_seed >= 0) {
      RngStream rng(static_cast<std::uint64_t>(shift_seed));
      shift = random_lattice_shift(d, rng);
    }
    pts = lattice_points(gen, shift, 0, n);
  } else if (kind == "net") {
    auto gen = take_dims(default_net(), d);
    if (shift_seed >= 0) {
      RngStream rng(static_cast<std::uint64_t>(shift_seed));
      auto scrambled = lms_scramble(gen, rng);
      auto shift = random_digital_shift(d, scrambled.t, rng);
      pts = digital_net_points(scrambled, shift, 0, n);
    } else {
      DigitalShift zero;
      zero.t = gen.t;
      zero.bits.assign(d, 0);
      pts = digital_net_points(gen, zero, 0, n);
    }
  } else {
    std::fprintf(stderr, "mlqmc: unknown kind '%s'\n", kind.c_str());
    return 2;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j)
      std::printf("%.17g%c", pts[i * d + j], j + 1 < d ? ',' : '\n');
  }
  return 0;
}

int cmd_table1(const std::string& problem, std::int64_t n, int levels, std::uint64_t seed) {
  using namespace mlqmc;
  ProblemOptions opts;
  opts.levels = levels;
  const auto prob = make_problem(problem, opts);
  RngStream rng = RngStream(seed).child("table1").child(problem);
  std::printf("%-10s %5s %14s %14s\n", "problem", "level", "mean", "std");
  std::vector<double> x(prob.dim_max());
  for (int l = 1; l <= prob.levels; ++l) {
    auto stream = rng.child(l);
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      for (int j = 0; j < prob.dims[l - 1]; ++j) x[j] = stream.next_double();
      const double y = prob.eval(l, x.data());
      sum += y;
      sum_sq += y * y;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(sum_sq - n * mean * mean, 0.0) / (n - 1));
    std::printf("%-10s %5d %14.6e %14.6e\n", problem.c_str(), l, mean, sd);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilevel quasi-Monte Carlo with Bayesian error estimates"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a configured experiment");
  std::string config_path;
  bool check = false;
  int trials_override = 0, threads_override = 0;
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_flag("--check", check, "exit nonzero when configured checks fail");
  run->add_option("--trials", trials_override, "override the configured trial count");
  run->add_option("--threads", threads_override, "override the worker count");

  auto* points = app.add_subcommand("points", "print LD points as CSV");
  std::string kind = "net";
  std::int64_t n = 16, shift_seed = -1;
  int d = 2;
  points->add_option("--kind", kind, "lattice or net");
  points->add_option("--n", n, "number of points")->required();
  points->add_option("--d", d, "dimensions")->required();
  points->add_option("--shift-seed", shift_seed, "randomize with this seed (net also gets LMS)");

  auto* table1 = app.add_subcommand("table1", "per-level means and stds at IID points");
  std::string problem = "asian";
  std::int64_t t1n = 1 << 16;
  int levels = 0;
  std::uint64_t seed = 0;
  table1->add_option("--problem", problem, "asian, lookback, or elliptic")->required();
  table1->add_option("--n", t1n, "IID samples per level");
  table1->add_option("--levels", levels, "level count override");
  table1->add_option("--seed", seed, "PRNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, check, trials_override, threads_override);
    if (points->parsed()) return cmd_points(kind, n, d, shift_seed);
    if (table1->parsed()) return cmd_table1(problem, t1n, levels, seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mlqmc: %s\n", e.what());
    return 1;
  }
  return 0;
}
