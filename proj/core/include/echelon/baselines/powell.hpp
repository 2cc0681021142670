#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace echelon {

class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowellOptions {
  int max_iters = 200;        // direction-set sweeps
  double ftol = 1e-6;         // relative improvement per sweep that counts as converged
  double line_tol = 1e-6;     // golden-section bracket width, in units of x
  double initial_step = 1.0;  // first trial step of each line search
  int max_bracket_expansions = 60;
  int restarts = 1;           // fresh coordinate sweeps after convergence
  bool project_nonnegative = false;  // evaluate and return max(x, 0)
};

// Search state after the last sweep.
struct PowellState {
  std::vector<double> point;
  std::vector<std::vector<double>> directions;
  double value = 0.0;
  int iterations = 0;
  double bracket_tolerance = 0.0;
};

struct PowellResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
  PowellState state;
};

using Objective = std::function<double(std::span<const double>)>;

// Powell's conjugate direction-set method with golden-section line searches.
// Never returns a point worse than x0. Throws OptimizationError if the
// objective yields a non-finite value.
PowellResult powell_minimize(const Objective& objective, std::vector<double> x0,
                             const PowellOptions& options = {});

}  // namespace echelon
