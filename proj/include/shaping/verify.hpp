#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace shaping::verify {

struct CheckRow {
  std::string suite;
  std::string name;
  int instances = 0;
  double deviation = 0.0;  // measured worst-case value
  double tolerance = 0.0;  // bound the measurement is held to
  bool pass = false;
};

/// Telescoping, cycle-zero, uniform constancy, gridworld mean constraint,
/// angle invariances, correction-path consistency.
std::vector<CheckRow> run_advice_suite();

/// The exact identity checks on random tabular instances, with negative
/// controls.
std::vector<CheckRow> run_oracle_suite();

/// Simulated TD(0) against the exact fixed point, and the gradient-norm
/// bound at ODE equilibria of tiny games.
std::vector<CheckRow> run_convergence_suite();

/// Finite-difference verification of every analytic gradient family, with
/// a corrupted-gradient negative control.
std::vector<CheckRow> run_gradient_suite();

/// which: all | advice | oracle | gradients (oracle includes convergence).
std::vector<CheckRow> run_verify(const std::string& which);

void print_rows(const std::vector<CheckRow>& rows, std::FILE* out);
bool all_pass(const std::vector<CheckRow>& rows);

}  // namespace shaping::verify
