#pragma once

namespace stateid {

// Every numerical threshold used by the library lives here so that runs can
// override them in one place (the CLI echoes the active record into reports).
struct Tolerances {
  // linmat
  double hermitian = 1e-12;        // |A - A^dagger| entrywise
  double density_trace = 1e-10;    // |Tr rho - 1|
  double density_min_eig = 1e-10;  // lambda_min(rho) >= -density_min_eig
  double pure_norm = 1e-12;        // | ||psi|| - 1 |
  double eig_threshold = 1e-13;    // Jacobi off-diagonal stopping ratio
  int eig_max_sweeps = 100;
  double psd_clamp = 1e-10;        // eigenvalues in [-psd_clamp, 0] count as 0

  // sdp
  double sdp_gap = 1e-7;
  double sdp_feasibility = 1e-8;
  int sdp_max_iterations = 500;
  double sdp_infeasibility_certificate = 1e-8;

  // certificates and measurements
  double certificate_slack = 1e-9;
  double measurement_psd = 1e-9;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

}  // namespace stateid
