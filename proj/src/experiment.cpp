#include "mlqmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <tuple>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "mlqmc/problems.hpp"

namespace mlqmc {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_budget(const std::string& tok) {
  if (tok.size() > 2 && tok[0] == '2' && tok[1] == '^')
    return std::ldexp(1.0, std::stoi(tok.substr(2)));
  return std::stod(tok);
}

Method parse_method(const std::string& s) {
  if (s == "mc") return Method::mc;
  if (s == "rqmc") return Method::rqmc;
  if (s == "bqmc") return Method::bqmc;
  throw std::invalid_argument("unknown method: " + s);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::mc:
      return "mc";
    case Method::rqmc:
      return "rqmc";
    default:
      return "bqmc";
  }
}

std::string to_string(SeqKind k) { return k == SeqKind::lattice ? "lattice" : "net"; }

void ExperimentConfig::validate() const {
  if (budgets.empty()) throw std::invalid_argument("config needs at least one budget");
  for (double b : budgets)
    if (!(b > 0.0)) throw std::invalid_argument("budgets must be positive");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (methods.empty()) throw std::invalid_argument("config needs at least one method");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(val);
    if (key.empty() || val.empty()) continue;

    if (key == "problem") {
      cfg.problem = val;
    } else if (key == "d") {
      cfg.d = std::stoi(val);
    } else if (key == "levels") {
      cfg.levels = std::stoi(val);
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& tok : split(val, ',')) cfg.methods.push_back(parse_method(tok));
    } else if (key == "sequence") {
      if (val == "lattice")
        cfg.sequence = SeqKind::lattice;
      else if (val == "net")
        cfg.sequence = SeqKind::net;
      else
        throw std::invalid_argument("unknown sequence kind: " + val);
    } else if (key == "budgets") {
      cfg.budgets.clear();
      for (const auto& tok : split(val, ',')) cfg.budgets.push_back(parse_budget(tok));
    } else if (key == "trials") {
      cfg.trials = std::stoi(val);
    } else if (key == "r" || key == "replications") {
      cfg.replications = std::stoi(val);
    } else if (key == "seed") {
      cfg.seed = std::stoull(val);
    } else if (key == "n_init") {
      cfg.n_init = std::stoll(val);
    } else if (key == "n_init_mc") {
      cfg.n_init_mc = std::stoll(val);
    } else if (key == "threads") {
      cfg.threads = std::stoi(val);
    } else if (key == "out_csv") {
      cfg.out_csv = val;
    } else if (key == "out_json") {
      cfg.out_json = val;
    } else if (key.rfind("check_", 0) == 0) {
      cfg.checks[key] = std::stod(val);
    } else {
      throw std::invalid_argument("unknown config key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize needs at least one record");
  std::map<std::tuple<std::string, int, int, double>, std::vector<const TrialRecord*>> cells;
  for (const auto& r : records)
    cells[{r.problem, static_cast<int>(r.method), static_cast<int>(r.sequence), r.budget}]
        .push_back(&r);

  std::vector<CellSummary> out;
  for (const auto& [key, recs] : cells) {
    CellSummary s;
    s.problem = recs[0]->problem;
    s.method = recs[0]->method;
    s.sequence = recs[0]->sequence;
    s.budget = recs[0]->budget;
    s.trials = static_cast<int>(recs.size());
    std::vector<double> errs, ses;
    int covered = 0, with_ref = 0;
    for (const auto* r : recs) {
      ses.push_back(r->std_err);
      if (r->true_err) {
        errs.push_back(*r->true_err);
        ++with_ref;
        if (*r->true_err <= 2.0 * r->std_err) ++covered;
      }
    }
    s.median_std_err = median_of(ses);
    s.median_true_err = median_of(errs);
    s.coverage = with_ref ? static_cast<double>(covered) / with_ref
                          : std::numeric_limits<double>::quiet_NaN();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

TrialRecord run_one(const ExperimentConfig& cfg, const MlProblem& problem, Method method,
                    double budget, int trial) {
  TrialRecord rec;
  rec.problem = cfg.problem;
  rec.method = method;
  rec.sequence = cfg.sequence;
  rec.budget = budget;
  rec.trial = trial;

  // trial streams are keyed so that adding/removing other trials, methods or
  // budgets never perturbs this record
  RngStream rng = RngStream(cfg.seed)
                      .child(cfg.problem)
                      .child(to_string(method))
                      .child(to_string(cfg.sequence))
                      .child(static_cast<std::uint64_t>(trial));

  const auto t0 = std::chrono::steady_clock::now();
  MlEstimate est;
  if (method == Method::mc) {
    McOptions o;
    o.n_init = cfg.n_init_mc;
    est = run_mc(problem, budget, o, rng);
  } else if (method == Method::rqmc) {
    RqmcOptions o;
    o.n_init = cfg.n_init;
    o.replications = cfg.replications;
    o.kind = cfg.sequence;
    est = run_rqmc(problem, budget, o, rng);
  } else {
    BqmcOptions o;
    o.n_init = cfg.n_init;
    o.kind = cfg.sequence;
    est = run_bqmc(problem, budget, o, rng);
  }
  const auto t1 = std::chrono::steady_clock::now();

  rec.nu_hat = est.nu_hat;
  rec.std_err = est.std_err;
  rec.n_per_level = est.n_per_level;
  rec.total_cost = est.total_cost;
  rec.wall_time = std::chrono::duration<double>(t1 - t0).count();
  if (problem.reference) rec.true_err = std::abs(est.nu_hat - *problem.reference);
  return rec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ProblemOptions popts;
  popts.d = cfg.d;
  popts.levels = cfg.levels;
  const MlProblem problem = make_problem(cfg.problem, popts);

  struct Job {
    Method method;
    double budget;
    int trial;
  };
  std::vector<Job> jobs;
  for (Method m : cfg.methods)
    for (double budget : cfg.budgets)
      for (int t = 0; t < cfg.trials; ++t) jobs.push_back({m, budget, t});

  std::vector<TrialRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mu;

  const unsigned n_threads = std::max(
      1u, cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                          : std::min<unsigned>(std::thread::hardware_concurrency(),
                                               static_cast<unsigned>(jobs.size())));
  const auto worker = [&]() {
    while (!failed.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      try {
        records[k] = run_one(cfg, problem, jobs[k].method, jobs[k].budget, jobs[k].trial);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        error_message = e.what();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failed.load()) throw std::runtime_error("experiment failed: " + error_message);

  ExperimentResult result;
  result.records = std::move(records);
  result.summaries = summarize(result.records);

  // per-method slopes over budgets when true errors and >= 2 budgets exist
  for (Method m : cfg.methods) {
    std::vector<double> lx, ly, lys;
    for (const auto& s : result.summaries) {
      if (s.method != m) continue;
      lx.push_back(std::log2(s.budget));
      lys.push_back(std::log2(std::max(s.median_std_err, 1e-300)));
      if (!std::isnan(s.median_true_err))
        ly.push_back(std::log2(std::max(s.median_true_err, 1e-300)));
    }
    if (lx.size() >= 2) {
      MethodSlopes ms;
      ms.method = m;
      ms.true_err_slope =
          ly.size() == lx.size() ? fit_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN();
      ms.std_err_slope = fit_slope(lx, lys);
      result.slopes.push_back(ms);
    }
  }

  // --check assertions
  for (const auto& [key, bound] : cfg.checks) {
    bool pass = true;
    std::ostringstream msg;
    if (key.rfind("check_slope_", 0) == 0 && key.size() > 16 &&
        key.substr(key.size() - 4) == "_max") {
      const std::string method = key.substr(12, key.size() - 16);
      pass = false;
      for (const auto& s : result.slopes)
        if (to_string(s.method) == method) pass = s.true_err_slope <= bound;
      msg << key << " = " << bound << (pass ? " satisfied" : " violated");
    } else if (key == "check_coverage_min") {
      double min_budget = 0.0;
      const auto it = cfg.checks.find("check_coverage_budget_min");
      if (it != cfg.checks.end()) min_budget = it->second;
      for (const auto& s : result.summaries)
        if (!std::isnan(s.coverage) && s.budget >= min_budget && s.coverage < bound) pass = false;
      msg << key << " = " << bound << (pass ? " satisfied" : " violated");
    } else if (key == "check_coverage_budget_min") {
      continue;  // consumed by check_coverage_min
    } else {
      throw std::invalid_argument("unknown check key: " + key);
    }
    result.check_messages.push_back(msg.str());
    result.checks_passed = result.checks_passed && pass;
  }

  if (!cfg.out_csv.empty()) emit_csv(result.records, cfg.out_csv);
  if (!cfg.out_json.empty()) emit_json(result, cfg.out_json);
  return result;
}

std::string csv_string(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  out << "problem,method,sequence,budget,trial,nu_hat,std_err,true_err,total_cost,n_per_level\n";
  for (const auto& r : records) {
    out << r.problem << ',' << to_string(r.method) << ',' << to_string(r.sequence) << ','
        << fmt(r.budget) << ',' << r.trial << ',' << fmt(r.nu_hat) << ',' << fmt(r.std_err)
        << ',' << (r.true_err ? fmt(*r.true_err) : "") << ',' << fmt(r.total_cost) << ',';
    for (std::size_t l = 0; l < r.n_per_level.size(); ++l)
      out << r.n_per_level[l] << (l + 1 < r.n_per_level.size() ? ";" : "");
    out << '\n';
  }
  return out.str();
}

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  if (records.empty()) throw std::invalid_argument("no records to write");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV: " + path);
  out << csv_string(records);
}

void emit_json(const ExperimentResult& result, const std::string& path) {
  if (result.summaries.empty()) throw std::invalid_argument("no summaries to write");
  nlohmann::json root;
  for (const auto& s : result.summaries) {
    nlohmann::json cell;
    cell["problem"] = s.problem;
    cell["method"] = to_string(s.method);
    cell["sequence"] = to_string(s.sequence);
    cell["budget"] = s.budget;
    cell["trials"] = s.trials;
    cell["median_std_err"] = s.median_std_err;
    if (!std::isnan(s.median_true_err)) cell["median_true_err"] = s.median_true_err;
    if (!std::isnan(s.coverage)) cell["coverage"] = s.coverage;
    root["cells"].push_back(cell);
  }
  for (const auto& s : result.slopes) {
    nlohmann::json m;
    m["method"] = to_string(s.method);
    if (!std::isnan(s.true_err_slope)) m["true_err_slope"] = s.true_err_slope;
    m["std_err_slope"] = s.std_err_slope;
    root["slopes"].push_back(m);
  }
  if (!result.check_messages.empty()) {
    root["checks_passed"] = result.checks_passed;
    root["checks"] = result.check_messages;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write JSON: " + path);
  out << root.dump(2) << '\n';
}

}  // namespace mlqmc
