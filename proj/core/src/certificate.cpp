#include "ppapep/certificate.hpp"

#include <gmpxx.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

namespace ppapep {

double MultiplierSet::at(const ConstraintId& tag) const {
  const auto it = values.find(tag);
  return it == values.end() ? 0.0 : it->second;
}

double MultiplierSet::min_value() const {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& [tag, v] : values) out = std::min(out, v);
  return out;
}

namespace {

// Every certificate identity is checked in exact rational arithmetic: a
// double step length is a dyadic rational, so the multipliers, A3 and the
// squares are computed without rounding.
using Q = mpq_class;

// Sparse coefficient vector over x_0..x_N (or f_1..f_N, 0-based).
using Sparse = std::vector<std::pair<std::size_t, Q>>;

struct Inner {
  Sparse u;
  Sparse v;
  Q scale;
};

class Square {
 public:
  explicit Square(std::size_t n) : n_(n), v_(n * n) {}
  Q& operator()(std::size_t i, std::size_t j) { return v_[i * n_ + j]; }
  const Q& operator()(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }
  std::size_t size() const { return n_; }

  // scale * (u v^T + v u^T) / 2
  void add_inner(const Sparse& u, const Sparse& v, const Q& scale) {
    for (const auto& [a, ua] : u) {
      for (const auto& [b, vb] : v) {
        const Q h = scale * ua * vb / 2;
        (*this)(a, b) += h;
        (*this)(b, a) += h;
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<Q> v_;
};

class ExactSums {
 public:
  explicit ExactSums(const StepSchedule& sched) : prefix_(sched.size() + 1, Q(0)) {
    for (std::size_t k = 1; k <= sched.size(); ++k) prefix_[k] = prefix_[k - 1] + Q(sched.alpha(k));
  }
  // alpha_{i:j}, 0 when i > j.
  Q operator()(std::size_t i, std::size_t j) const {
    return i > j ? Q(0) : Q(prefix_[j] - prefix_[i - 1]);
  }
  Q alpha(std::size_t i) const { return (*this)(i, i); }
  std::size_t size() const { return prefix_.size() - 1; }

 private:
  std::vector<Q> prefix_;
};

std::map<ConstraintId, Q> exact_multipliers(const ExactSums& a, std::size_t s) {
  const std::size_t n = a.size();
  const Q total = a(1, n);
  std::map<ConstraintId, Q> v;
  v[ConstraintId::radius()] = 1 / (total * total);
  for (std::size_t i = 1; i <= n; ++i) v[ConstraintId::at_opt(i)] = 0;
  for (std::size_t i = 1; i + 1 <= s; ++i) {
    v[ConstraintId::at_opt(i)] = 2 * a.alpha(i) / (a(i, n) * a(i + 1, n));
  }
  v[ConstraintId::at_opt(s)] = 2 * (a(s, n) - a(1, s - 1)) / (total * a(s, n));

  // f_i >= f_{i+1} + <g_{i+1}, x_i - x_{i+1}>  is Cross(i+1, i);
  // f_{i+1} >= f_i + <g_i, x_{i+1} - x_i>     is Cross(i, i+1).
  for (std::size_t i = 1; i + 1 <= s; ++i) {
    v[ConstraintId::cross(i + 1, i)] = 2 * a(1, i) / (total * a(i + 1, n));
    v[ConstraintId::cross(i, i + 1)] = 0;
  }
  for (std::size_t i = s; i + 1 <= n; ++i) {
    const Q denom = total * a.alpha(i + 1);
    v[ConstraintId::cross(i + 1, i)] = 2 * (a(1, i) - a(i + 2, n)) / denom;
    v[ConstraintId::cross(i, i + 1)] = 2 * (a(1, i) - a(i + 1, n)) / denom;
  }
  v[ConstraintId::fnonneg(n)] = 2 / total;
  return v;
}

// Reduced constraint in <= orientation: sum of inner products + <lin, F> <= rhs.
struct Row {
  ConstraintId tag;
  std::vector<Inner> quad;
  Sparse lin;
};

struct ReducedPep {
  std::vector<Row> rows;
  Inner objective;
};

ReducedPep exact_reduced_pep(const ExactSums& a) {
  const std::size_t n = a.size();
  auto x = [](std::size_t k, const Q& c = Q(1)) { return Sparse{{k, c}}; };
  auto f = [](std::size_t k, const Q& c = Q(1)) { return Sparse{{k - 1, c}}; };
  // g_i = (x_{i-1} - x_i) / alpha_i
  auto g = [&](std::size_t i) {
    const Q inv = 1 / a.alpha(i);
    return Sparse{{i - 1, inv}, {i, -inv}};
  };
  auto minus = [](Sparse u, const Sparse& v) {
    for (const auto& [k, c] : v) u.emplace_back(k, -c);
    return u;
  };

  ReducedPep out;
  out.objective = {g(n), g(n), Q(1)};
  out.rows.push_back({ConstraintId::radius(), {{x(0), x(0), Q(1)}}, {}});
  out.rows.push_back({ConstraintId::fnonneg(n), {}, f(n, Q(-1))});
  for (std::size_t i = 1; i <= n; ++i) {
    out.rows.push_back({ConstraintId::at_opt(i), {{g(i), x(i, Q(-1)), Q(1)}}, f(i)});
  }
  // f_i - f_j + <g_i, x_j - x_i> <= 0
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j : {i - 1, i + 1}) {
      if (j < 1 || j > n) continue;
      out.rows.push_back(
          {ConstraintId::cross(i, j), {{g(i), minus(x(j), x(i)), Q(1)}}, minus(f(i), f(j))});
    }
  }
  return out;
}

std::vector<Q> exact_cancellation(const ReducedPep& pep, const std::map<ConstraintId, Q>& lambda,
                                  std::size_t n) {
  std::vector<Q> residual(n);
  for (const auto& r : pep.rows) {
    for (const auto& [k, c] : r.lin) residual[k] += lambda.at(r.tag) * c;
  }
  return residual;
}

Square exact_a3(const ReducedPep& pep, const std::map<ConstraintId, Q>& lambda, std::size_t n) {
  Square a3(n + 1);
  a3.add_inner(pep.objective.u, pep.objective.v, -pep.objective.scale);
  for (const auto& r : pep.rows) {
    const Q& l = lambda.at(r.tag);
    for (const auto& t : r.quad) a3.add_inner(t.u, t.v, l * t.scale);
  }
  return a3;
}

struct ExactTerm {
  Q weight;
  Sparse coeffs;
  std::string label;
};

std::vector<ExactTerm> exact_sos(const ExactSums& a, std::size_t s, SosCase sos_case) {
  const std::size_t n = a.size();
  auto al = [&](std::size_t i) { return a.alpha(i); };
  const Q total = a(1, n);

  std::vector<ExactTerm> terms;
  auto push = [&](Q w, Sparse c, std::string label) {
    terms.push_back({std::move(w), std::move(c), std::move(label)});
  };
  // ||x_0 / alpha_{1:N} - x_1 / alpha_{2:N}||^2, undefined for N = 1.
  auto leading = [&] {
    if (n >= 2) push(Q(1), {{0, 1 / total}, {1, -1 / a(2, n)}}, "lead");
  };
  // Weighted ||x_i / alpha_{i+1:N} - x_{i+1} / alpha_{i+2:N}||^2 for i in [1, last].
  auto telescoping = [&](std::size_t last) {
    for (std::size_t i = 1; i <= last; ++i) {
      Q w = (al(i + 1) * total + 2 * a(1, i) * a(i + 2, n)) / (total * al(i + 1));
      push(std::move(w), {{i, 1 / a(i + 1, n)}, {i + 1, -1 / a(i + 2, n)}},
           "telescope(" + std::to_string(i) + ")");
    }
  };
  // Weighted second differences for i in [first, N-1].
  auto curvature = [&](std::size_t first) {
    for (std::size_t i = first; i + 1 <= n; ++i) {
      Q w = (a(1, i) - a(i + 1, n)) / total;
      Sparse c{{i - 1, 1 / al(i)},
               {i, -(al(i) + al(i + 1)) / (al(i) * al(i + 1))},
               {i + 1, 1 / al(i + 1)}};
      push(std::move(w), std::move(c), "curvature(" + std::to_string(i) + ")");
    }
  };

  switch (sos_case) {
    case SosCase::I: {
      const Q a1 = al(1);
      const Q a2 = al(2);
      push(Q(1),
           {{0, 1 / total}, {1, -(a1 - a(3, n)) / (a1 * a2)}, {2, (a1 - a(2, n)) / (a1 * a2)}},
           "lead");
      push((a1 - a(2, n)) / (total * a1 * a1 * a2 * a2), {{1, a(3, n)}, {2, -a(2, n)}}, "pair");
      curvature(2);
      break;
    }
    case SosCase::II: {
      leading();
      telescoping(s - 2);
      const Q as = al(s);
      const Q as1 = al(s + 1);
      const Q excess = a(1, s) - a(s + 1, n);
      const Q denom = as * total + 2 * a(1, s - 1) * a(s + 1, n);
      push(denom / (total * as),
           {{s - 1, 1 / a(s, n)},
            {s, -(as1 * total + a(s, n) * excess) / (as1 * denom)},
            {s + 1, a(s, n) * excess / (as1 * denom)}},
           "A4");
      push(excess * (a(s, n) - a(1, s - 1)) / (total * as * as1 * as1 * denom),
           {{s, a(s + 2, n)}, {s + 1, -a(s + 1, n)}}, "pair");
      curvature(s + 1);
      break;
    }
    case SosCase::III: {
      leading();
      if (n >= 2) telescoping(n - 2);
      push((al(n) - a(1, n - 1)) / (total * al(n) * al(n)), {{n, Q(1)}}, "tail");
      break;
    }
  }
  return terms;
}

SosCase case_of(std::size_t s, std::size_t n) {
  if (s == n) return SosCase::III;
  return s == 1 ? SosCase::I : SosCase::II;
}

double to_double(const Q& q) { return q.get_d(); }

// Two-term split keeps ~106 bits before the final rounding.
long double to_extended(const Q& q) {
  const double hi = q.get_d();
  const Q rest = q - Q(hi);
  return static_cast<long double>(hi) + static_cast<long double>(rest.get_d());
}

Vector dense(const Sparse& c, std::size_t dim) {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& [k, v] : c) out[static_cast<Eigen::Index>(k)] += to_double(v);
  return out;
}

Q max_abs(const std::vector<Q>& v) {
  Q out(0);
  for (const auto& q : v) out = std::max(out, Q(abs(q)));
  return out;
}

// Multipliers from `ms`, kept exact wherever the stored double is the
// rounding of the exact table value; edited entries are taken as given.
std::map<ConstraintId, Q> resolve_multipliers(const ExactSums& a, const ReducedPep& pep,
                                              const MultiplierSet& ms) {
  const auto exact = exact_multipliers(a, ms.separator);
  std::map<ConstraintId, Q> out;
  for (const auto& r : pep.rows) {
    const auto it = ms.values.find(r.tag);
    const double given = (it == ms.values.end()) ? 0.0 : it->second;
    const auto ex = exact.find(r.tag);
    out[r.tag] = (ex != exact.end() && to_double(ex->second) == given) ? ex->second : Q(given);
  }
  for (const auto& [tag, v] : ms.values) {
    if (v != 0.0 && !out.contains(tag)) {
      throw std::invalid_argument("multiplier on " + tag.to_string() +
                                  ", which is not part of the reduced instance");
    }
  }
  return out;
}

}  // namespace

MultiplierSet multipliers(const StepSchedule& sched) {
  const std::size_t s = separator(sched).s;
  MultiplierSet ms{{}, s, sched};
  for (const auto& [tag, v] : exact_multipliers(ExactSums(sched), s)) ms.values[tag] = to_double(v);
  return ms;
}

Vector f_cancellation_check(const MultiplierSet& ms) {
  const ExactSums a(ms.schedule);
  const ReducedPep pep = exact_reduced_pep(a);
  const auto residual = exact_cancellation(pep, resolve_multipliers(a, pep, ms), a.size());
  Vector out(static_cast<Eigen::Index>(residual.size()));
  for (std::size_t k = 0; k < residual.size(); ++k)
    out[static_cast<Eigen::Index>(k)] = to_double(residual[k]);
  return out;
}

QuadForm aggregate_a3(const MultiplierSet& ms, double cancel_tol) {
  const ExactSums a(ms.schedule);
  const std::size_t n = a.size();
  const ReducedPep pep = exact_reduced_pep(a);
  const auto lambda = resolve_multipliers(a, pep, ms);
  const double worst = to_double(max_abs(exact_cancellation(pep, lambda, n)));
  if (worst > cancel_tol) {
    std::ostringstream os;
    os << "function values do not cancel (max residual " << worst << "); refusing to aggregate";
    throw std::domain_error(os.str());
  }
  const Square a3 = exact_a3(pep, lambda, n);
  Matrix m(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = to_double(a3(i, j));
    }
  }
  return QuadForm(m);
}

std::string to_string(SosCase c) {
  switch (c) {
    case SosCase::I:
      return "I";
    case SosCase::II:
      return "II";
    default:
      return "III";
  }
}

Matrix SosDecomposition::reconstruct() const {
  const Eigen::Index dim = terms.empty() ? 0 : terms.front().coeffs.size();
  Matrix out = Matrix::Zero(dim, dim);
  for (const auto& t : terms) out += t.weight * (t.coeffs * t.coeffs.transpose());
  return out;
}

double SosDecomposition::min_weight() const {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& t : terms) out = std::min(out, t.weight);
  return out;
}

SosDecomposition sos_decompose(const StepSchedule& sched) {
  const std::size_t s = separator(sched).s;
  const std::size_t n = sched.size();
  SosDecomposition out{case_of(s, n), s, {}};
  for (auto& t : exact_sos(ExactSums(sched), s, out.sos_case)) {
    out.terms.push_back({to_double(t.weight), dense(t.coeffs, n + 1), std::move(t.label)});
  }
  return out;
}

std::string CertificateReport::failures() const {
  std::string out;
  auto add = [&](bool ok, const char* name) {
    if (ok) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  add(multipliers_ok, "multipliers");
  add(cancellation_ok, "cancellation");
  add(psd_ok, "psd");
  add(sos_match_ok, "sos_match");
  return out;
}

CertificateReport certify(const StepSchedule& sched, const CertificateTolerances& tol) {
  CertificateReport r;
  const ExactSums a(sched);
  const std::size_t n = sched.size();
  r.steps = n;
  r.separator = separator(sched).s;
  r.sos_case = case_of(r.separator, n);
  r.bound = 1.0 / (sched.total() * sched.total());

  const auto lambda = exact_multipliers(a, r.separator);
  Q min_lambda = lambda.begin()->second;
  for (const auto& [tag, v] : lambda) min_lambda = std::min(min_lambda, v);
  r.min_multiplier = to_double(min_lambda);
  r.multipliers_ok = sgn(min_lambda) >= 0;

  const ReducedPep pep = exact_reduced_pep(a);
  r.cancellation_residual = to_double(max_abs(exact_cancellation(pep, lambda, n)));
  r.cancellation_ok = r.cancellation_residual <= tol.cancellation;

  const Square a3 = exact_a3(pep, lambda, n);
  ExtMatrix ext(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n + 1));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      ext(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = to_extended(a3(i, j));
    }
  }
  r.a3_min_eigenvalue = static_cast<double>(symmetric_eigenvalues(ext)[0]);
  r.psd_ok = r.a3_min_eigenvalue >= -tol.psd;

  Square rebuilt(n + 1);
  const auto terms = exact_sos(a, r.separator, r.sos_case);
  Q min_weight = terms.front().weight;
  for (const auto& t : terms) {
    rebuilt.add_inner(t.coeffs, t.coeffs, t.weight);
    min_weight = std::min(min_weight, t.weight);
  }
  Q worst(0);
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) worst = std::max(worst, Q(abs(rebuilt(i, j) - a3(i, j))));
  }
  r.min_sos_weight = to_double(min_weight);
  r.sos_residual = to_double(worst);
  r.sos_match_ok = r.sos_residual <= tol.sos && sgn(min_weight) >= 0;
  return r;
}

double RationalFit::evaluate(const StepSchedule& sched) const {
  const Eigen::Map<const Vector> alpha(sched.alphas().data(),
                                       static_cast<Eigen::Index>(sched.size()));
  const double num = numerator[0] + numerator.tail(alpha.size()).dot(alpha);
  const double den = denominator[0] + denominator.tail(alpha.size()).dot(alpha);
  return num / den;
}

RationalFit recover_bound_coefficients(std::span<const BoundSample> samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  const std::size_t n = samples.front().schedule.size();
  const auto cols = static_cast<Eigen::Index>(2 * (n + 1));
  for (const auto& smp : samples) {
    if (smp.schedule.size() != n)
      throw std::invalid_argument("samples must share the number of steps");
    if (!std::isfinite(smp.bound)) throw std::invalid_argument("sample bound must be finite");
  }
  if (samples.size() < 2 * n + 1) {
    std::ostringstream os;
    os << "rank-deficient system: " << samples.size() << " samples for " << cols
       << " coefficients (need at least " << 2 * n + 1 << ")";
    throw std::domain_error(os.str());
  }

  // Row: [1, alpha, -b, -b alpha] . [n_0, n, d_0, d] = 0
  Matrix sys(static_cast<Eigen::Index>(samples.size()), cols);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const double b = samples[r].bound;
    sys(row, 0) = 1.0;
    sys(row, static_cast<Eigen::Index>(n + 1)) = -b;
    for (std::size_t i = 1; i <= n; ++i) {
      const double ai = samples[r].schedule.alpha(i);
      sys(row, static_cast<Eigen::Index>(i)) = ai;
      sys(row, static_cast<Eigen::Index>(n + 1 + i)) = -b * ai;
    }
  }
  // Column equilibration keeps the singular values meaningful when the
  // bound and step lengths differ in scale.
  Vector colscale = sys.colwise().norm().transpose();
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (colscale[c] == 0.0) colscale[c] = 1.0;
  }
  const Matrix scaled = sys * colscale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  const Matrix& v = svd.matrixV();
  const double smax = sv[0];

  // Singular values beyond the row count are structurally zero.
  Vector full_sv = Vector::Zero(cols);
  full_sv.head(sv.size()) = sv;
  int nullity = 0;
  for (Eigen::Index k = 0; k < cols; ++k) {
    if (full_sv[k] <= 1e-6 * smax) ++nullity;
  }
  if (nullity == 0) nullity = 1;
  if (nullity > static_cast<int>(n + 1)) {
    std::ostringstream os;
    os << "rank-deficient system: null space of dimension " << nullity
       << " (samples are not distinct enough)";
    throw std::domain_error(os.str());
  }

  const Matrix basis = v.rightCols(nullity);
  Vector coeff;
  if (nullity == 1) {
    coeff = basis.col(0);
  } else {
    // Minimize the step-length coefficients over unit vectors of the null
    // space (in unscaled coordinates).
    Matrix unscaled = colscale.cwiseInverse().asDiagonal() * basis;
    Matrix proj = unscaled;
    proj.row(0).setZero();
    proj.row(static_cast<Eigen::Index>(n + 1)).setZero();
    Matrix gram_all = symmetrized(unscaled.transpose() * unscaled);
    Matrix gram_alpha = symmetrized(proj.transpose() * proj);
    // Generalized problem gram_alpha w = mu gram_all w via whitening.
    const SymmetricEigen wa = symmetric_eigen(gram_all);
    const Matrix whiten = wa.vectors * wa.values.cwiseSqrt().cwiseInverse().asDiagonal();
    const SymmetricEigen we =
        symmetric_eigen(symmetrized(whiten.transpose() * gram_alpha * whiten));
    coeff = basis * (whiten * we.vectors.col(0));
  }
  const Vector raw = colscale.cwiseInverse().asDiagonal() * coeff;

  RationalFit fit;
  fit.numerator = raw.head(static_cast<Eigen::Index>(n + 1));
  fit.denominator = raw.tail(static_cast<Eigen::Index>(n + 1));
  Eigen::Index arg = 0;
  fit.denominator.cwiseAbs().maxCoeff(&arg);
  const double pivot = fit.denominator[arg];
  if (pivot == 0.0) throw std::domain_error("recovered denominator vanishes");
  fit.numerator /= pivot;
  fit.denominator /= pivot;
  fit.nullity = nullity;
  const Eigen::Index first_nonnull = cols - nullity - 1;
  fit.condition = (first_nonnull >= 0 && full_sv[first_nonnull] > 0.0)
                      ? smax / full_sv[first_nonnull]
                      : std::numeric_limits<double>::infinity();
  Vector joined(cols);
  joined << fit.numerator, fit.denominator;
  fit.residual = (sys * joined).cwiseAbs().maxCoeff();
  return fit;
}

void to_json(nlohmann::json& j, const MultiplierSet& ms) {
  nlohmann::json vals = nlohmann::json::object();
  for (const auto& [tag, v] : ms.values) vals[tag.to_string()] = v;
  j = nlohmann::json{{"separator", ms.separator}, {"multipliers", std::move(vals)}};
}

void to_json(nlohmann::json& j, const SosDecomposition& sos) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& t : sos.terms) {
    rows.push_back(
        {{"label", t.label},
         {"weight", t.weight},
         {"coeffs", std::vector<double>(t.coeffs.data(), t.coeffs.data() + t.coeffs.size())}});
  }
  j = nlohmann::json{
      {"case", to_string(sos.sos_case)}, {"separator", sos.separator}, {"terms", std::move(rows)}};
}

void to_json(nlohmann::json& j, const CertificateReport& r) {
  j = nlohmann::json{
      {"N", r.steps},
      {"separator", r.separator},
      {"case", to_string(r.sos_case)},
      {"ok", r.all_ok()},
      {"failures", r.failures()},
      {"checks",
       {{"multipliers", {{"ok", r.multipliers_ok}, {"min_multiplier", r.min_multiplier}}},
        {"cancellation", {{"ok", r.cancellation_ok}, {"max_residual", r.cancellation_residual}}},
        {"psd", {{"ok", r.psd_ok}, {"min_eigenvalue", r.a3_min_eigenvalue}}},
        {"sos_match",
         {{"ok", r.sos_match_ok},
          {"max_error", r.sos_residual},
          {"min_weight", r.min_sos_weight}}}}},
      {"bound", r.bound},
      {"bound_note", "bound on ||g_N||^2 for radius 1; for radius R multiply by R^2"}};
}

void to_json(nlohmann::json& j, const RationalFit& fit) {
  j = nlohmann::json{
      {"numerator",
       std::vector<double>(fit.numerator.data(), fit.numerator.data() + fit.numerator.size())},
      {"denominator", std::vector<double>(fit.denominator.data(),
                                          fit.denominator.data() + fit.denominator.size())},
      {"nullity", fit.nullity},
      {"condition", fit.condition},
      {"residual", fit.residual}};
}

}  // namespace ppapep
