#include "mlqmc/estimators.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "mlqmc/fast_transforms.hpp"

namespace mlqmc {

namespace {

constexpr double kBudgetSlack = 1e-9;  // absorbs rounding in cost accumulation

double tent(double x) { return 1.0 - 2.0 * std::abs(x - 0.5); }

struct RunningMoments {
  double sum = 0.0, sum_sq = 0.0;
  std::int64_t n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double var() const {  // unbiased
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(sum_sq - n * m * m, 0.0) / (n - 1);
  }
};

void check_initial_budget(double init_cost, double budget) {
  if (init_cost > budget * (1.0 + kBudgetSlack))
    throw std::invalid_argument("budget cannot cover the initial sample sizes");
}

}  // namespace

MlEstimate run_mc(const MlProblem& problem, double budget, const McOptions& opts,
                  RngStream rng) {
  problem.validate();
  if (opts.n_init < 2) throw std::invalid_argument("initial sample size must be >= 2");
  const int L = problem.levels;
  double init_cost = 0.0;
  for (int l = 0; l < L; ++l) init_cost += opts.n_init * problem.costs[l];
  check_initial_budget(init_cost, budget);

  std::vector<RngStream> streams;
  for (int l = 1; l <= L; ++l) streams.push_back(rng.child("mc-points").child(l));

  std::vector<RunningMoments> mom(L);
  std::vector<std::int64_t> n(L, 0), n_next(L, opts.n_init);
  std::vector<bool> update(L, true);
  double spent = 0.0;
  std::vector<double> x(problem.dim_max());

  while (true) {
    for (int l = 0; l < L; ++l) {
      if (!update[l]) continue;
      const int d = problem.dims[l];
      for (std::int64_t i = n[l]; i < n_next[l]; ++i) {
        for (int j = 0; j < d; ++j) x[j] = streams[l].next_double();
        mom[l].add(problem.eval(l + 1, x.data()));
      }
      spent += (n_next[l] - n[l]) * problem.costs[l];
      n[l] = n_next[l];
    }
    assert(spent <= budget * (1.0 + kBudgetSlack));

    int best = -1;
    double best_utility = -1.0;
    for (int l = 0; l < L; ++l) {
      if (spent + n[l] * problem.costs[l] > budget * (1.0 + kBudgetSlack)) continue;
      const double utility = mom[l].var() / (static_cast<double>(n[l]) * problem.costs[l]);
      if (utility > best_utility) {  // strict: ties go to the lowest level
        best_utility = utility;
        best = l;
      }
    }
    if (best < 0) break;
    std::fill(update.begin(), update.end(), false);
    update[best] = true;
    n_next[best] = 2 * n[best];
  }

  MlEstimate est;
  est.total_cost = spent;
  est.n_per_level.assign(n.begin(), n.end());
  for (int l = 0; l < L; ++l) {
    est.mu_level.push_back(mom[l].mean());
    est.var_level.push_back(mom[l].var());
    est.nu_hat += mom[l].mean();
    est.std_err += mom[l].var() / n[l];
  }
  est.std_err = std::sqrt(est.std_err);
  return est;
}

MlEstimate run_rqmc(const MlProblem& problem, double budget, const RqmcOptions& opts,
                    RngStream rng) {
  problem.validate();
  if (opts.n_init < 1 || !is_pow2(static_cast<std::size_t>(opts.n_init)))
    throw std::invalid_argument("initial sample size must be a power of two");
  const int L = problem.levels;
  const int R = opts.replications;
  if (R < 1) throw std::invalid_argument("replication count must be >= 1");
  double init_cost = 0.0;
  for (int l = 0; l < L; ++l) init_cost += static_cast<double>(R) * opts.n_init * problem.costs[l];
  check_initial_budget(init_cost, budget);

  const bool use_net = opts.kind == SeqKind::net;
  const LatticeGen& lat_base = opts.lattice ? *opts.lattice : default_lattice();
  const DigitalNetGen& net_base = opts.net ? *opts.net : default_net();

  // one independent randomization per (level, replication)
  struct Rand {
    LatticeGen lat;
    LatticeShift lshift;
    DigitalNetGen net;
    DigitalShift dshift;
    RunningMoments mom;  // running mean only; .var unused here
  };
  std::vector<std::vector<Rand>> rands(L);
  for (int l = 0; l < L; ++l) {
    const int d = problem.dims[l];
    rands[l].resize(R);
    for (int r = 0; r < R; ++r) {
      auto stream = rng.child("rqmc-rand").child(l + 1).child(r + 1);
      auto& rd = rands[l][r];
      if (use_net) {
        rd.net = lms_scramble(take_dims(net_base, d), stream);
        rd.dshift = random_digital_shift(d, rd.net.t, stream);
      } else {
        rd.lat = take_dims(lat_base, d);
        rd.lshift = random_lattice_shift(d, stream);
      }
    }
  }

  std::vector<std::int64_t> n(L, 0), n_next(L, opts.n_init);
  std::vector<bool> update(L, true);
  std::vector<double> mu(L, 0.0), var_rep(L, 0.0);
  double spent = 0.0;

  while (true) {
    for (int l = 0; l < L; ++l) {
      if (!update[l]) continue;
      const int d = problem.dims[l];
      for (int r = 0; r < R; ++r) {
        auto& rd = rands[l][r];
        std::vector<double> pts =
            use_net ? digital_net_points(rd.net, rd.dshift, n[l], n_next[l])
                    : lattice_points(rd.lat, rd.lshift, n[l], n_next[l]);
        for (std::int64_t i = 0; i < n_next[l] - n[l]; ++i) {
          double* row = pts.data() + static_cast<std::size_t>(i) * d;
          if (!use_net)
            for (int j = 0; j < d; ++j) row[j] = tent(row[j]);
          rd.mom.add(problem.eval(l + 1, row));
        }
      }
      spent += static_cast<double>(R) * (n_next[l] - n[l]) * problem.costs[l];
      n[l] = n_next[l];
    }
    assert(spent <= budget * (1.0 + kBudgetSlack));

    for (int l = 0; l < L; ++l) {
      if (!update[l]) continue;
      double m = 0.0;
      for (int r = 0; r < R; ++r) m += rands[l][r].mom.mean();
      mu[l] = m / R;
      double v = 0.0;
      for (int r = 0; r < R; ++r) {
        const double dmu = rands[l][r].mom.mean() - mu[l];
        v += dmu * dmu;
      }
      var_rep[l] = R > 1 ? v / (R - 1) : 0.0;
    }

    int best = -1;
    double best_utility = -1.0;
    for (int l = 0; l < L; ++l) {
      if (spent + R * n[l] * problem.costs[l] > budget * (1.0 + kBudgetSlack)) continue;
      const double utility =
          var_rep[l] / (static_cast<double>(R) * static_cast<double>(n[l]) * problem.costs[l]);
      if (utility > best_utility) {
        best_utility = utility;
        best = l;
      }
    }
    if (best < 0) break;
    std::fill(update.begin(), update.end(), false);
    update[best] = true;
    n_next[best] = 2 * n[best];
  }

  MlEstimate est;
  est.total_cost = spent;
  for (int l = 0; l < L; ++l) {
    est.n_per_level.push_back(R * n[l]);
    est.mu_level.push_back(mu[l]);
    est.var_level.push_back(var_rep[l]);
    est.nu_hat += mu[l];
    est.std_err += var_rep[l] / R;
  }
  est.std_err = std::sqrt(est.std_err);
  return est;
}

int level_select_bqmc(std::span<const LevelForSelect> feasible) {
  if (feasible.empty()) throw std::invalid_argument("level selection needs a nonempty set");
  std::vector<const LevelForSelect*> order;
  for (const auto& lv : feasible) order.push_back(&lv);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return static_cast<double>(a->n) * a->cost > static_cast<double>(b->n) * b->cost;
  });

  const LevelForSelect* champ = order[0];
  double champ_decrease = champ->projected_variance(static_cast<double>(champ->n)) -
                          champ->projected_variance(2.0 * static_cast<double>(champ->n));
  for (std::size_t k = 1; k < order.size(); ++k) {
    const LevelForSelect* chall = order[k];
    // spending the champion's doubling cost on the challenger instead
    const double n_hat = static_cast<double>(champ->n) * champ->cost / chall->cost +
                         static_cast<double>(chall->n);
    const double decrease = chall->projected_variance(static_cast<double>(chall->n)) -
                            chall->projected_variance(n_hat);
    if (decrease >= champ_decrease) {  // ties go to the challenger
      champ = chall;
      champ_decrease = champ->projected_variance(static_cast<double>(champ->n)) -
                       champ->projected_variance(2.0 * static_cast<double>(champ->n));
    }
  }
  return champ->level;
}

MlEstimate run_bqmc(const MlProblem& problem, double budget, const BqmcOptions& opts,
                    RngStream rng) {
  problem.validate();
  if (opts.n_init < 1 || !is_pow2(static_cast<std::size_t>(opts.n_init)))
    throw std::invalid_argument("initial sample size must be a power of two");
  const int L = problem.levels;
  double init_cost = 0.0;
  for (int l = 0; l < L; ++l) init_cost += static_cast<double>(opts.n_init) * problem.costs[l];
  check_initial_budget(init_cost, budget);

  const bool use_net = opts.kind == SeqKind::net;
  const LatticeGen& lat_base = opts.lattice ? *opts.lattice : default_lattice();
  const DigitalNetGen& net_base = opts.net ? *opts.net : default_net();

  // net: one linear matrix scramble shared by all levels (the scramble is
  // part of the sequence the kernel column follows; the per-level
  // randomization is the digital shift)
  DigitalNetGen scrambled;
  if (use_net) {
    auto lms_stream = rng.child("bqmc-lms");
    scrambled = lms_scramble(take_dims(net_base, problem.dim_max()), lms_stream);
  }

  struct Level {
    std::shared_ptr<const LatticeGen> lat;
    std::shared_ptr<const DigitalNetGen> net;
    LatticeShift lshift;
    DigitalShift dshift;
    std::unique_ptr<GpLevelState> state;
  };
  std::vector<Level> levels(L);
  for (int l = 0; l < L; ++l) {
    const int d = problem.dims[l];
    auto shift_stream = rng.child("bqmc-shift").child(l + 1);
    KernelParams params;
    // dimension-normalized lengthscales keep the product kernel's dynamic
    // range representable (diagonal factors (1 + eta R(0))^d stay moderate)
    params.eta.assign(d, 1.0 / d);
    auto& lv = levels[l];
    if (use_net) {
      lv.net = std::make_shared<DigitalNetGen>(take_dims(scrambled, d));
      lv.dshift = opts.fixed_digital_shifts
                      ? opts.fixed_digital_shifts->at(l)
                      : random_digital_shift(d, lv.net->t, shift_stream);
      params.family = KernelFamily::dsi_weighted;
      lv.state = std::make_unique<GpLevelState>(lv.net, params);
    } else {
      lv.lat = std::make_shared<LatticeGen>(take_dims(lat_base, d));
      lv.lshift = opts.fixed_lattice_shifts ? opts.fixed_lattice_shifts->at(l)
                                            : random_lattice_shift(d, shift_stream);
      params.family = KernelFamily::si;
      params.alpha = 1;
      lv.state = std::make_unique<GpLevelState>(lv.lat, params);
    }
  }

  std::vector<std::int64_t> n(L, 0), n_next(L, opts.n_init);
  std::vector<bool> update(L, true);
  std::vector<double> mu(L, 0.0), vhat(L, 0.0);
  double spent = 0.0;

  while (true) {
    for (int l = 0; l < L; ++l) {
      if (!update[l]) continue;
      auto& lv = levels[l];
      const int d = problem.dims[l];
      std::vector<double> pts = use_net
                                    ? digital_net_points(*lv.net, lv.dshift, n[l], n_next[l])
                                    : lattice_points(*lv.lat, lv.lshift, n[l], n_next[l]);
      std::vector<double> y(n_next[l] - n[l]);
      for (std::int64_t i = 0; i < n_next[l] - n[l]; ++i) {
        double* row = pts.data() + static_cast<std::size_t>(i) * d;
        if (!use_net)  // periodizing tent transform; the kernel sees raw z_i
          for (int j = 0; j < d; ++j) row[j] = tent(row[j]);
        y[i] = problem.eval(l + 1, row);
      }
      lv.state->append_values(y);
      spent += (n_next[l] - n[l]) * problem.costs[l];
      n[l] = n_next[l];

      lv.state->fit(opts.fit);
      const auto cub = lv.state->posterior_cubature();
      mu[l] = cub.mu_hat;
      vhat[l] = cub.v_hat;
    }
    assert(spent <= budget * (1.0 + kBudgetSlack));

    std::vector<LevelForSelect> feasible;
    for (int l = 0; l < L; ++l) {
      if (spent + n[l] * problem.costs[l] > budget * (1.0 + kBudgetSlack)) continue;
      feasible.push_back(LevelForSelect{
          l + 1, problem.costs[l], n[l],
          [state = levels[l].state.get()](double n_hat) {
            return state->projected_variance(n_hat);
          }});
    }
    if (feasible.empty()) break;
    const int chosen = level_select_bqmc(feasible) - 1;
    std::fill(update.begin(), update.end(), false);
    update[chosen] = true;
    n_next[chosen] = 2 * n[chosen];
  }

  MlEstimate est;
  est.total_cost = spent;
  est.n_per_level.assign(n.begin(), n.end());
  for (int l = 0; l < L; ++l) {
    est.mu_level.push_back(mu[l]);
    est.var_level.push_back(vhat[l]);
    est.nu_hat += mu[l];
    est.std_err += vhat[l];
  }
  est.std_err = std::sqrt(est.std_err);
  return est;
}

}  // namespace mlqmc
