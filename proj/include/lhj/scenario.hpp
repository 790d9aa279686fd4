#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lhj/estimates.hpp"
#include "lhj/solver.hpp"

namespace lhj {

enum class Study { solve, kernel_audit, blowup, estimate_audit, oracle_compare };

std::string study_name(Study s);

// Fully validated run description.  Parameter ranges and assumption flags are
// checked at load time, before any computation starts.
struct Scenario {
  int schema_version = 1;
  std::string name = "scenario";
  Study study = Study::solve;

  PeriodicGrid grid{1, 64, 16.0};
  Symbol symbol;
  Hamiltonian hamiltonian;
  std::uint64_t seed = 0;

  // materialized against (grid, seed) at run time
  std::function<Field(const PeriodicGrid&, std::uint64_t)> datum;
  std::function<Forcing(const PeriodicGrid&)> forcing;

  double horizon = 1.0;
  SolverConfig solver;
  std::vector<double> snapshot_times;

  // per-study parameters
  struct {
    double t_lo = 1e-3, t_hi = 1e-1;
    int per_decade = 6;
    std::vector<std::vector<int>> betas;  // empty = first-order per axis
  } kernel_audit;
  struct {
    double eps = 0.1;
  } blowup;
  struct {
    std::vector<std::string> checks{"comparison", "supbound"};
    double eps = 0.1;
    std::vector<double> lambdas{1.0, 2.0, 4.0};
    double bump_amplitude = 0.5, bump_width = 1.0, bump_center = -1.0;  // <0 = period/2
  } estimate_audit;
  struct {
    std::string oracle = "cole_hopf";  // or "linear_heat"
    std::vector<double> times;
    double tolerance = 1e-5;
    double forcing_constant = 0.0;  // linear_heat oracle with constant forcing
  } oracle_compare;

  std::string scenario_hash;  // FNV-1a of the canonical configuration text

  Scenario() : symbol(symbol_laplacian(1)), hamiltonian(ham_zero()) {}
};

// Parses and validates one scenario or a batch ({"scenarios": [...]}) from a
// JSON configuration file.  Unknown keys and out-of-range parameters are
// ConfigErrors naming the key and the violated constraint.
std::vector<Scenario> load_scenarios(const std::filesystem::path& config_path);

// Parses a scenario from JSON text (single object form).
Scenario parse_scenario(const std::string& json_text);

}  // namespace lhj
