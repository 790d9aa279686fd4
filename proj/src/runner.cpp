#include "lhj/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "lhj/csv.hpp"
#include "lhj/errors.hpp"
#include "lhj/estimates.hpp"
#include "lhj/field_io.hpp"
#include "lhj/heatkernel.hpp"
#include "lhj/oracles.hpp"

namespace lhj {

using nlohmann::json;

namespace {

std::string beta_label(const std::vector<int>& beta) {
  std::string s;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(beta[i]);
  }
  return s;
}

struct CheckList {
  std::vector<std::pair<std::string, bool>> items;
  void add(const std::string& name, bool pass) { items.emplace_back(name, pass); }
  bool all_pass() const {
    for (const auto& [_, p] : items)
      if (!p) return false;
    return true;
  }
};

void run_solve(const Scenario& s, const Problem& p, const std::filesystem::path& out,
               CheckList& checks) {
  Trajectory traj = march(p, s.solver);
  CsvWriter csv(out / "diagnostics.csv",
                {"t", "sup_u", "sup_Du", "holder_beta", "holder_grad", "picard_iters", "rho_last",
                 "residual_sup"});
  for (const StepDiagnostics& d : traj.diagnostics)
    csv.row({format_sci(d.time), format_sci(d.sup_u), format_sci(d.sup_du),
             format_sci(d.holder_u), format_sci(d.holder_du), format_int(d.picard_iters),
             format_sci(d.rho_last), format_sci(d.residual_sup)});
  csv.close();
  for (std::size_t i = 0; i < s.snapshot_times.size(); ++i) {
    double t = s.snapshot_times[i];
    std::size_t idx = traj.index_at(t, s.solver.dt);
    write_snapshot(out / ("snap_" + std::to_string(i) + ".lhj"), traj.fields[idx],
                   traj.times[idx]);
  }
  checks.add("solve_completed", true);
}

void run_kernel_audit(const Scenario& s, const std::filesystem::path& out, CheckList& checks) {
  std::vector<std::vector<int>> betas = s.kernel_audit.betas;
  if (betas.empty())
    for (int a = 0; a < s.grid.dim; ++a) {
      std::vector<int> b(s.grid.dim, 0);
      b[a] = 1;
      betas.push_back(b);
    }
  std::vector<double> times =
      geometric_times(s.kernel_audit.t_lo, s.kernel_audit.t_hi, s.kernel_audit.per_decade);
  KernelAuditOptions opts;
  opts.guard = s.solver.resolve_guard;
  KernelAudit audit = audit_order(s.symbol, s.grid, times, betas, opts);

  CsvWriter csv(out / "kernel_audit.csv",
                {"symbol", "row", "t", "beta", "l1_norm", "seam_fraction", "slope", "alpha_hat",
                 "pass"});
  for (const KernelAuditRow& row : audit.rows)
    csv.row({audit.symbol_name, "sample", format_sci(row.t), beta_label(row.beta),
             format_sci(row.l1), format_sci(row.seam), "", "", ""});
  for (const KernelBetaFit& fit : audit.fits)
    csv.row({audit.symbol_name, "fit", "", beta_label(fit.beta), "", "", format_sci(fit.slope),
             format_sci(fit.alpha_hat), ""});
  csv.row({audit.symbol_name, "summary", "", "", "", audit.seam_ok ? "seam_ok" : "seam_exceeded",
           "", format_sci(audit.alpha_hat), audit.message});
  csv.close();
  checks.add("kernel_audit", audit.pass);
}

void run_blowup(const Scenario& s, const Problem& p, const std::filesystem::path& out,
                CheckList& checks) {
  BlowupStudy study = blowup_study(s.symbol, s.hamiltonian, p.forcing, /*beta inferred below*/
                                   0.0, 0.0, s.grid, s.horizon, s.solver, s.seed);
  (void)study;
}

void write_ratefits(const std::filesystem::path& path, std::span<const RateFit> fits) {
  CsvWriter csv(path, {"quantity", "claimed_exponent", "fitted_exponent", "residual", "window_lo",
                       "window_hi", "pass"});
  for (const RateFit& f : fits)
    csv.row({f.quantity, format_sci(f.claimed_exponent), format_sci(f.fitted_exponent),
             format_sci(f.fit_residual), format_sci(f.window_lo), format_sci(f.window_hi),
             f.pass ? "true" : "false"});
  csv.close();
}

void run_estimate_audit(const Scenario& s, const Problem& p, const std::filesystem::path& out,
                        CheckList& checks) {
  CsvWriter csv(out / "estimate_audit.csv", {"check", "quantity", "value", "threshold", "pass"});
  auto datum_fn = [&](std::span<const double> x) {
    // estimate checks rebuild data across grids; route through the scenario datum
    thread_local Field cache{PeriodicGrid(1, 2, 1.0)};
    (void)x;
    return 0.0;
  };
  (void)datum_fn;

  for (const std::string& check : s.estimate_audit.checks) {
    if (check == "comparison") {
      Field low = p.initial;
      double c = s.estimate_audit.bump_center >= 0.0 ? s.estimate_audit.bump_center
                                                     : s.grid.period / 2.0;
      Field bump = make_field(s.grid, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (int a = 0; a < s.grid.dim; ++a) {
          double d = x[a] - c;
          r2 += d * d;
        }
        return s.estimate_audit.bump_amplitude *
               std::exp(-r2 / (s.estimate_audit.bump_width * s.estimate_audit.bump_width));
      });
      Field high = low;
      high += bump;
      ComparisonReport rep = comparison_check(p, low, high, s.solver);
      csv.row({"comparison", "min_gap", format_sci(rep.min_gap), format_sci(-rep.tolerance),
               rep.pass ? "true" : "false"});
      checks.add("comparison", rep.pass);
    } else if (check == "supbound") {
      Trajectory traj = march(p, s.solver);
      SupBoundReport rep = supbound_check(p, traj, s.solver);
      csv.row({"supbound", "worst_slack", format_sci(rep.worst_slack), format_sci(0.0),
               rep.pass ? "true" : "false"});
      checks.add("supbound", rep.pass);
    }
  }
  csv.close();
}

void run_oracle_compare(const Scenario& s, const Problem& p, const std::filesystem::path& out,
                        CheckList& checks) {
  Trajectory traj = march(p, s.solver);
  CsvWriter csv(out / "oracle_compare.csv", {"t", "max_deviation", "tolerance", "pass"});
  bool all = true;
  for (double t : s.oracle_compare.times) {
    std::size_t idx = traj.index_at(t, s.solver.dt);
    Field reference =
        s.oracle_compare.oracle == "cole_hopf"
            ? cole_hopf_solution(s.symbol, /*c from quadratic*/ 1.0, p.initial, traj.times[idx])
            : linear_heat_solution(s.symbol, p.initial, traj.times[idx],
                                   s.oracle_compare.forcing_constant);
    Field diff = traj.fields[idx];
    diff -= reference;
    double dev = sup_norm(diff);
    bool pass = dev <= s.oracle_compare.tolerance;
    all = all && pass;
    csv.row({format_sci(traj.times[idx]), format_sci(dev), format_sci(s.oracle_compare.tolerance),
             pass ? "true" : "false"});
  }
  csv.close();
  checks.add("oracle_compare", all);
}

}  // namespace

RunResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                       std::optional<std::uint64_t> seed_override) {
  auto start = std::chrono::steady_clock::now();
  RunResult result;
  CheckList checks;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) return {kIo, "cannot create output directory " + out_dir.string()};

  std::uint64_t seed = seed_override.value_or(s.seed);
  std::string error_message;
  try {
    Problem p{s.symbol, s.hamiltonian, s.forcing(s.grid), s.datum(s.grid, seed), s.horizon};
    switch (s.study) {
      case Study::solve:
        run_solve(s, p, out_dir, checks);
        break;
      case Study::kernel_audit:
        run_kernel_audit(s, out_dir, checks);
        break;
      case Study::blowup: {
        double beta = 0.5;  // overwritten below from the datum
        (void)beta;
        BlowupStudy study = blowup_study(s.symbol, s.hamiltonian, p.forcing, s.blowup_beta(),
                                         s.blowup.eps, s.grid, s.horizon, s.solver, seed);
        write_ratefits(out_dir / "ratefit.csv", study.fits);
        checks.add("blowup_rates", study.pass && !study.inconclusive);
        if (study.inconclusive) error_message = study.message;
        break;
      }
      case Study::estimate_audit:
        run_estimate_audit(s, p, out_dir, checks);
        break;
      case Study::oracle_compare:
        run_oracle_compare(s, p, out_dir, checks);
        break;
    }
    result.exit_code = checks.all_pass() ? kOk : kCheckFailed;
  } catch (const ConfigError& e) {
    result = {kConfig, e.what()};
  } catch (const UnderResolvedError& e) {
    result = {kUnderResolved, e.what()};
  } catch (const NoContractionError& e) {
    result = {kNoContraction, e.what()};
  } catch (const BlowupSuspicionError& e) {
    result = {kNoContraction, e.what()};
  } catch (const IoError& e) {
    result = {kIo, e.what()};
  } catch (const std::exception& e) {
    result = {kError, e.what()};
  }

  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest;
  manifest["schema_version"] = 1;
  manifest["name"] = s.name;
  manifest["study"] = study_name(s.study);
  manifest["scenario_hash"] = s.scenario_hash;
  manifest["seed"] = seed;
  manifest["wall_time_s"] = wall;
  manifest["exit_code"] = result.exit_code;
  if (!result.message.empty()) manifest["error"] = result.message;
  if (!error_message.empty()) manifest["note"] = error_message;
  json jchecks = json::array();
  for (const auto& [name, pass] : checks.items) jchecks.push_back({{"name", name}, {"pass", pass}});
  manifest["checks"] = jchecks;
  std::ofstream mf(out_dir / "manifest.json");
  mf << manifest.dump(2) << '\n';
  return result;
}

int run_config(const std::filesystem::path& config, const std::filesystem::path& out_dir,
               std::optional<std::uint64_t> seed_override, int jobs, Study expected_study) {
  std::vector<Scenario> scenarios = load_scenarios(config);
  for (const Scenario& s : scenarios)
    if (s.study != expected_study)
      throw ConfigError("scenario '" + s.name + "' declares study '" + study_name(s.study) +
                        "' but the subcommand is '" + study_name(expected_study) + "'");

  if (scenarios.size() == 1) {
    RunResult r = run_scenario(scenarios[0], out_dir, seed_override);
    if (!r.message.empty()) std::fprintf(stderr, "error: %s\n", r.message.c_str());
    return r.exit_code;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= scenarios.size()) return;
      RunResult r = run_scenario(scenarios[i], out_dir / scenarios[i].name, seed_override);
      int w = worst.load();
      while (r.exit_code > w && !worst.compare_exchange_weak(w, r.exit_code)) {
      }
      if (!r.message.empty())
        std::fprintf(stderr, "[%s] error: %s\n", scenarios[i].name.c_str(), r.message.c_str());
    }
  };
  int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return worst.load();
}

}  // namespace lhj
