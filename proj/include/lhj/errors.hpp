#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lhj {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scenario / configuration problems: message names the offending key and the
// violated constraint.
struct ConfigError : Error {
  using Error::Error;
};

// A heat kernel was requested at a time too small for the grid to resolve the
// spectral tail.  min_time is the smallest admissible time on that grid.
struct UnderResolvedError : Error {
  double min_time;
  UnderResolvedError(const std::string& msg, double t_min) : Error(msg), min_time(t_min) {}
};

// Picard iteration failed to contract on the requested interval.
struct NoContractionError : Error {
  std::vector<double> ratios;
  NoContractionError(const std::string& msg, std::vector<double> r)
      : Error(msg), ratios(std::move(r)) {}
};

// Time marching had to shrink its interval below the abort floor.
struct BlowupSuspicionError : Error {
  double time_reached;
  BlowupSuspicionError(const std::string& msg, double t) : Error(msg), time_reached(t) {}
};

// Adaptive quadrature could not reach the requested tolerance within budget.
struct QuadratureError : Error {
  double achieved_error;
  QuadratureError(const std::string& msg, double err) : Error(msg), achieved_error(err) {}
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace lhj
