#pragma once

namespace rankr {

/// Numerical thresholds shared by all modules. Every entry point that needs
/// one takes a `const Tolerances&` defaulting to `default_tolerances()`.
struct Tolerances {
  /// |det - 1| bound for group elements; also the Gram-Schmidt pivot floor.
  double det = 1e-9;
  /// Orthogonality / reconstruction residual bound.
  double lin = 1e-10;
  /// Relative gap below which a root is considered to vanish.
  double wall = 1e-9;
  /// Relative singular-value threshold for Bruhat rank tests.
  double rank = 1e-8;
  /// Lower bound on the sine-product margin for transverse flags.
  double transverse = 1e-6;
  /// Relative distance under which computed eigenvalues are grouped.
  double eig_cluster = 2e-3;
  /// Condition-number ceiling for generalized eigenbases.
  double spectrum_condition = 1e8;
  /// Norm below which a translation vector counts as zero.
  double translation = 1e-8;
  /// Frobenius bound on u - I below which the unipotent part is trivial.
  double unipotent = 1e-6;
  /// Sweep cap is jacobi_sweep_factor * n^2.
  int jacobi_sweep_factor = 200;
};

const Tolerances& default_tolerances();

}  // namespace rankr
