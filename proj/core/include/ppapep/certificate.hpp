#pragma once

#include <cstddef>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <string>
#include <vector>

#include "ppapep/linalg.hpp"
#include "ppapep/pep.hpp"
#include "ppapep/schedule.hpp"

namespace ppapep {

/// Closed-form Lagrange multipliers of the reduced PEP (radius 1). Only the
/// 3N reduced constraints carry entries; every other constraint has
/// multiplier 0.
struct MultiplierSet {
  std::map<ConstraintId, double> values;
  std::size_t separator;
  StepSchedule schedule;

  double at(const ConstraintId& tag) const;
  double min_value() const;
};

MultiplierSet multipliers(const StepSchedule& sched);

/// For each f_i, the signed multiplier sum of the reduced constraints in
/// which f_i appears (constraints taken in <= orientation).
Vector f_cancellation_check(const MultiplierSet& ms);

/// The quadratic form left over after multiplying the reduced constraints
/// by `ms` and subtracting the objective:
///
///   A3 = -||g_N||^2 + sum_k lambda_k q_k(x),
///
/// so that ||g_N||^2 = lambda_Radius - A3 - sum_k lambda_k slack_k.
/// Throws std::domain_error when some |f-cancellation residual| exceeds
/// `cancel_tol`.
QuadForm aggregate_a3(const MultiplierSet& ms, double cancel_tol = 1e-12);

enum class SosCase { I, II, III };
std::string to_string(SosCase c);

/// weight * ||sum_k coeffs_k x_k||^2.
struct SosTerm {
  double weight;
  Vector coeffs;
  std::string label;
};

struct SosDecomposition {
  SosCase sos_case;
  std::size_t separator;
  std::vector<SosTerm> terms;

  /// sum_k weight_k c_k c_k^T.
  Matrix reconstruct() const;
  double min_weight() const;
};

/// Explicit weighted sum of squares equal to A3, chosen by the separator:
/// case I for s = 1 < N, case II for 2 <= s <= N-1, case III for s = N.
/// Zero-weight squares are kept.
SosDecomposition sos_decompose(const StepSchedule& sched);

struct CertificateReport {
  std::size_t steps = 0;
  std::size_t separator = 0;
  SosCase sos_case = SosCase::III;

  bool multipliers_ok = false;
  double min_multiplier = 0.0;
  bool cancellation_ok = false;
  double cancellation_residual = 0.0;  // max_i |residual_i|
  bool psd_ok = false;
  double a3_min_eigenvalue = 0.0;
  bool sos_match_ok = false;
  double sos_residual = 0.0;  // max entrywise |reconstruction - A3|
  double min_sos_weight = 0.0;

  /// 1 / alpha_{1:N}^2: the verified bound on ||g_N||^2 at radius 1.
  /// For radius R scale by R^2.
  double bound = 0.0;

  bool all_ok() const { return multipliers_ok && cancellation_ok && psd_ok && sos_match_ok; }
  /// Comma-separated names of failing checks, empty when all pass.
  std::string failures() const;
};

struct CertificateTolerances {
  double cancellation = 1e-12;
  double psd = 1e-10;
  double sos = 1e-10;
};

/// Multipliers, cancellation and the SOS match are evaluated in exact
/// rational arithmetic; the eigenvalue check runs in long double on the
/// exact A3. Entries of A3 grow like 1 / min(alpha)^2, so double rounding
/// alone would exceed the absolute tolerances for small steps.
CertificateReport certify(const StepSchedule& sched, const CertificateTolerances& tol = {});

/// One observation of a worst-case bound for a given schedule.
struct BoundSample {
  StepSchedule schedule;
  double bound;
};

/// bound(alpha) = (n_0 + sum n_i alpha_i) / (d_0 + sum d_i alpha_i),
/// normalized so that the largest-magnitude denominator coefficient is +1.
struct RationalFit {
  Vector numerator;    // [n_0, n_1..n_N]
  Vector denominator;  // [d_0, d_1..d_N]
  int nullity = 0;     // dimension of the numerical null space
  double condition = 0.0;
  double residual = 0.0;  // max |numerator - bound * denominator| over samples

  double evaluate(const StepSchedule& sched) const;
};

/// Fits the rational ansatz by homogeneous least squares on the linearized
/// equations numerator - bound * denominator = 0 (smallest right singular
/// vector). When the null space has dimension > 1 (numerator and
/// denominator share a factor, e.g. a constant bound) the null vector with
/// the smallest step-length coefficients is returned. Needs at least 2N+1
/// samples of equal length N.
RationalFit recover_bound_coefficients(std::span<const BoundSample> samples);

void to_json(nlohmann::json& j, const MultiplierSet& ms);
void to_json(nlohmann::json& j, const SosDecomposition& sos);
void to_json(nlohmann::json& j, const CertificateReport& report);
void to_json(nlohmann::json& j, const RationalFit& fit);

}  // namespace ppapep
