#include "ppapep/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <tuple>

namespace ppapep {
namespace {

// The interior-point iteration runs in extended precision: without strict
// complementarity the attainable accuracy is about sqrt(eps), which in double
// sits right at the default tolerance.
using Real = long double;
using Mat = ExtMatrix;
using Vec = ExtVector;

Mat sym(const Mat& a) { return Real(0.5) * (a + a.transpose()); }

constexpr Real kInf = std::numeric_limits<Real>::infinity();

struct Entry {
  Eigen::Index row;
  Eigen::Index col;
  Real value;
};

// Constraint k normalized to  <A_k, X> + d_k^T u (+ s_k) = b_k.
struct Row {
  std::vector<Entry> entries;  // both triangles
  Vec d;
  Real b;
  bool has_slack;
  Eigen::Index slack_index;  // position in s/z when has_slack
  Real scale;                // row was multiplied by this factor
};

struct Problem {
  Eigen::Index n = 0;   // order of X
  Eigen::Index p = 0;   // free variables
  Eigen::Index ms = 0;  // slack count
  std::vector<Row> rows;
  Mat c;   // minimization cost on X
  Vec cu;  // minimization cost on u
};

struct Iterate {
  Mat x;
  Vec u;
  Vec s;
  Vec y;
  Mat z;
  Vec zs;
};

struct Direction {
  Mat dx;
  Vec du;
  Vec ds;
  Vec dy;
  Mat dz;
  Vec dzs;
};

Problem normalize(const SdpInstance& inst) {
  Problem pr;
  pr.n = inst.gram_dim;
  pr.p = inst.fvec_dim;
  pr.c = -inst.objective.matrix().cast<Real>();
  pr.cu = (inst.objective_lin.size() > 0) ? Vec(-inst.objective_lin.cast<Real>()) : Vec::Zero(pr.p);
  for (const auto& con : inst.constraints) {
    if (con.quad.dim() != pr.n || (con.lin.size() != pr.p && con.lin.size() != 0)) {
      throw std::invalid_argument("constraint " + con.tag.to_string() +
                                  " has mismatched dimensions");
    }
    const Real sign = (con.sense == Sense::GreaterEqual) ? -1.0 : 1.0;
    Row row;
    const Matrix& m = con.quad.matrix();
    for (Eigen::Index c = 0; c < pr.n; ++c)
      for (Eigen::Index r = 0; r < pr.n; ++r)
        if (m(r, c) != 0.0) row.entries.push_back({r, c, sign * m(r, c)});
    row.d = (con.lin.size() > 0) ? Vec(sign * con.lin.cast<Real>()) : Vec::Zero(pr.p);
    row.b = sign * con.rhs;
    row.has_slack = con.sense != Sense::Equal;
    row.slack_index = row.has_slack ? pr.ms++ : -1;
    // Unit-norm rows: step lengths enter the data as 1/alpha, so raw row
    // norms can differ by many orders of magnitude.
    Real norm2 = row.d.squaredNorm();
    for (const auto& e : row.entries) norm2 += e.value * e.value;
    row.scale = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0;
    for (auto& e : row.entries) e.value *= row.scale;
    row.d *= row.scale;
    row.b *= row.scale;
    pr.rows.push_back(std::move(row));
  }
  return pr;
}

Real inner(const Row& row, const Mat& y) {
  Real acc = 0.0;
  for (const auto& e : row.entries) acc += e.value * y(e.row, e.col);
  return acc;
}

Vec apply_a(const Problem& pr, const Mat& x) {
  Vec out(static_cast<Eigen::Index>(pr.rows.size()));
  for (std::size_t k = 0; k < pr.rows.size(); ++k)
    out[static_cast<Eigen::Index>(k)] = inner(pr.rows[k], x);
  return out;
}

Mat apply_at(const Problem& pr, const Vec& y) {
  Mat out = Mat::Zero(pr.n, pr.n);
  for (std::size_t k = 0; k < pr.rows.size(); ++k) {
    const Real yk = y[static_cast<Eigen::Index>(k)];
    for (const auto& e : pr.rows[k].entries) out(e.row, e.col) += yk * e.value;
  }
  return out;
}

Vec apply_d(const Problem& pr, const Vec& u) {
  Vec out(static_cast<Eigen::Index>(pr.rows.size()));
  for (std::size_t k = 0; k < pr.rows.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = pr.p > 0 ? pr.rows[k].d.dot(u) : 0.0;
  }
  return out;
}

Vec apply_dt(const Problem& pr, const Vec& y) {
  Vec out = Vec::Zero(pr.p);
  for (std::size_t k = 0; k < pr.rows.size(); ++k)
    out += y[static_cast<Eigen::Index>(k)] * pr.rows[k].d;
  return out;
}

// Embeds slack-indexed values into constraint rows (zero on equality rows).
Vec embed_slack(const Problem& pr, const Vec& s) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(pr.rows.size()));
  for (std::size_t k = 0; k < pr.rows.size(); ++k) {
    if (pr.rows[k].has_slack) out[static_cast<Eigen::Index>(k)] = s[pr.rows[k].slack_index];
  }
  return out;
}

Vec restrict_slack(const Problem& pr, const Vec& y) {
  Vec out(pr.ms);
  for (std::size_t k = 0; k < pr.rows.size(); ++k) {
    if (pr.rows[k].has_slack) out[pr.rows[k].slack_index] = y[static_cast<Eigen::Index>(k)];
  }
  return out;
}

class Breakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Mat spd_inverse(const Mat& a) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) throw Breakdown("Cholesky factorization of an iterate failed");
  return sym(llt.solve(Mat::Identity(a.rows(), a.cols())));
}

// Largest t with x + t dx PSD (infinity when unbounded).
Real max_step_psd(const Mat& x, const Mat& dx) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) throw Breakdown("Cholesky factorization of an iterate failed");
  const Mat l = llt.matrixL();
  Mat w = l.triangularView<Eigen::Lower>().solve(dx);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
  const Real lmin = symmetric_eigenvalues(sym(w))[0];
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

bool is_spd(const Mat& a) { return Eigen::LLT<Mat>(a).info() == Eigen::Success; }

constexpr int kMaxBacktracks = 40;

Real max_step_cone(const Vec& s, const Vec& ds) {
  Real t = kInf;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (ds[i] < 0.0) t = std::min(t, -s[i] / ds[i]);
  }
  return t;
}

class Solver {
 public:
  Solver(const SdpInstance& inst, const SolverOptions& opt)
      : inst_(inst), opt_(opt), pr_(normalize(inst)) {
    m_ = static_cast<Eigen::Index>(pr_.rows.size());
    b_.resize(m_);
    for (Eigen::Index k = 0; k < m_; ++k) b_[k] = pr_.rows[static_cast<std::size_t>(k)].b;
    b_norm_ = b_.norm();
    c_norm_ = std::sqrt(pr_.c.squaredNorm() + pr_.cu.squaredNorm());
  }

  SdpSolution run() {
    initialize();
    constexpr double inf = std::numeric_limits<double>::infinity();
    SolverResiduals best{inf, inf, inf, inf};
    double best_score = inf;
    int iter = 0;
    try {
      for (;; ++iter) {
        compute_residuals();
        const SolverResiduals cur = residuals();
        const Real score = std::max({cur.primal, cur.dual, cur.gap});
        if (score < best_score) {
          best_score = score;
          best = cur;
        }
        if (!std::isfinite(score)) throw Breakdown("iterate became non-finite");
        if (score <= opt_.tol) return finish(cur, iter);
        if (iter >= opt_.max_iter) {
          std::ostringstream os;
          os << "SDP solver reached " << opt_.max_iter << " iterations (primal " << best.primal
             << ", dual " << best.dual << ", gap " << best.gap << ")";
          throw SolverError(SolverError::Kind::MaxIterationsExceeded, os.str(), best, iter);
        }
        step();
      }
    } catch (const Breakdown& e) {
      std::ostringstream os;
      os << "SDP solver numerical breakdown at iteration " << iter << ": " << e.what()
         << " (best primal " << best.primal << ", dual " << best.dual << ", gap " << best.gap
         << ")";
      throw SolverError(SolverError::Kind::NumericalBreakdown, os.str(), best, iter);
    }
  }

 private:
  void initialize() {
    const auto n = pr_.n;
    Real max_a = 0.0;
    Real ratio = 0.0;
    for (Eigen::Index k = 0; k < m_; ++k) {
      const Row& row = pr_.rows[static_cast<std::size_t>(k)];
      Real fro = 0.0;
      for (const auto& e : row.entries) fro += e.value * e.value;
      fro = std::sqrt(fro + row.d.squaredNorm());
      max_a = std::max(max_a, fro);
      ratio = std::max(ratio, (1.0 + std::abs(row.b)) / (1.0 + fro));
    }
    const Real sqrt_n = std::sqrt(static_cast<Real>(std::max<Eigen::Index>(n, 1)));
    const Real xi = std::max({Real(10), sqrt_n, sqrt_n * ratio});
    const Real eta = std::max({Real(10), sqrt_n, max_a, c_norm_});
    it_.x = xi * Mat::Identity(n, n);
    it_.z = eta * Mat::Identity(n, n);
    it_.u = Vec::Zero(pr_.p);
    it_.s = Vec::Constant(pr_.ms, xi);
    it_.zs = Vec::Constant(pr_.ms, eta);
    it_.y = Vec::Zero(m_);
  }

  void compute_residuals() {
    rp_ = b_ - apply_a(pr_, it_.x) - apply_d(pr_, it_.u) - embed_slack(pr_, it_.s);
    rd_ = sym(pr_.c - apply_at(pr_, it_.y) - it_.z);
    rz_ = -restrict_slack(pr_, it_.y) - it_.zs;
    rf_ = pr_.cu - apply_dt(pr_, it_.y);
    pobj_ = pr_.c.cwiseProduct(it_.x).sum() + pr_.cu.dot(it_.u);
    dobj_ = b_.dot(it_.y);
  }

  SolverResiduals residuals() const {
    SolverResiduals r;
    r.primal = rp_.norm() / (1.0 + b_norm_);
    r.dual = std::sqrt(rd_.squaredNorm() + rz_.squaredNorm() + rf_.squaredNorm()) / (1.0 + c_norm_);
    r.gap = std::abs(pobj_ - dobj_) / (1.0 + std::abs(pobj_) + std::abs(dobj_));
    r.complementarity = it_.x.cwiseProduct(it_.z).sum() + it_.s.dot(it_.zs);
    return r;
  }

  Real mu() const {
    const Real nu = static_cast<Real>(pr_.n + pr_.ms);
    return (it_.x.cwiseProduct(it_.z).sum() + it_.s.dot(it_.zs)) / nu;
  }

  // Schur complement M_kl = <A_k, X A_l Z^{-1}> plus the slack scaling.
  void factor() {
    const Mat& x = it_.x;
    Mat schur(m_, m_);
    for (Eigen::Index k = 0; k < m_; ++k) {
      const auto& ek = pr_.rows[static_cast<std::size_t>(k)].entries;
      for (Eigen::Index l = k; l < m_; ++l) {
        const auto& el = pr_.rows[static_cast<std::size_t>(l)].entries;
        Real acc = 0.0;
        for (const auto& a : ek)
          for (const auto& c : el) acc += a.value * c.value * x(a.col, c.row) * zinv_(c.col, a.row);
        schur(k, l) = acc;
        schur(l, k) = acc;
      }
      const Row& row = pr_.rows[static_cast<std::size_t>(k)];
      if (row.has_slack) schur(k, k) += it_.s[row.slack_index] / it_.zs[row.slack_index];
    }
    // The free F block is kept in an augmented system [M D; D^T 0]; a row
    // with only F coefficients has M_kk = s_k / z_k -> 0, which makes the
    // eliminated form D^T M^{-1} D unusable near the optimum.
    const Eigen::Index size = m_ + pr_.p;
    kkt_ = Mat::Zero(size, size);
    kkt_.topLeftCorner(m_, m_) = schur;
    for (Eigen::Index k = 0; k < m_ && pr_.p > 0; ++k) {
      const Vec& d = pr_.rows[static_cast<std::size_t>(k)].d;
      kkt_.block(k, m_, 1, pr_.p) = d.transpose();
      kkt_.block(m_, k, pr_.p, 1) = d;
    }
    lu_.compute(kkt_);
  }

  // [M D; D^T 0] [dy; du] = [h; rf] with one step of iterative refinement.
  std::pair<Vec, Vec> solve_kkt(const Vec& h) const {
    Vec rhs(m_ + pr_.p);
    rhs << h, rf_;
    Vec sol = lu_.solve(rhs);
    sol += lu_.solve(rhs - kkt_ * sol);
    if (!sol.allFinite()) throw Breakdown("Newton system solve produced non-finite values");
    return {sol.head(m_), sol.tail(pr_.p)};
  }

  // Solves the Newton system for the given complementarity targets
  // rx (matrix block) and rs (slack block).
  Direction direction(const Mat& rx, const Vec& rs) const {
    Direction dir;
    const Vec ratio = it_.s.cwiseQuotient(it_.zs);
    Vec h = rp_ - apply_a(pr_, rx) + apply_a(pr_, it_.x * rd_ * zinv_) - embed_slack(pr_, rs) +
            embed_slack(pr_, ratio.cwiseProduct(rz_));
    std::tie(dir.dy, dir.du) = solve_kkt(h);
    dir.dz = sym(rd_ - apply_at(pr_, dir.dy));
    dir.dzs = rz_ - restrict_slack(pr_, dir.dy);
    dir.dx = sym(rx - it_.x * dir.dz * zinv_);
    dir.ds = rs - ratio.cwiseProduct(dir.dzs);
    return dir;
  }

  std::pair<Real, Real> step_lengths(const Direction& d, Real fraction) const {
    const Real tp = std::min(max_step_psd(it_.x, d.dx), max_step_cone(it_.s, d.ds));
    const Real td = std::min(max_step_psd(it_.z, d.dz), max_step_cone(it_.zs, d.dzs));
    return {std::min(Real(1), fraction * tp), std::min(Real(1), fraction * td)};
  }

  void step() {
    zinv_ = spd_inverse(it_.z);
    factor();
    const Real mu0 = mu();
    const Real nu = static_cast<Real>(pr_.n + pr_.ms);

    // Predictor (affine scaling).
    const Direction aff = direction(-it_.x, -it_.s);
    const auto [ap, ad] = step_lengths(aff, 1.0);
    const Real mu_aff = ((it_.x + ap * aff.dx).cwiseProduct(it_.z + ad * aff.dz).sum() +
                         (it_.s + ap * aff.ds).dot(it_.zs + ad * aff.dzs)) /
                        nu;
    const Real sigma =
        std::clamp(std::pow(std::max(mu_aff, Real(0)) / mu0, Real(3)), Real(0), Real(1));

    // Corrector with second-order term.
    const Mat rx = sym(sigma * mu0 * zinv_ - it_.x - aff.dx * aff.dz * zinv_);
    Vec rs(pr_.ms);
    for (Eigen::Index i = 0; i < pr_.ms; ++i) {
      rs[i] = (sigma * mu0 - aff.ds[i] * aff.dzs[i]) / it_.zs[i] - it_.s[i];
    }
    const Direction dir = direction(rx, rs);
    auto [tp, td] = step_lengths(dir, 0.98);
    if (!(tp > 0.0) || !(td > 0.0)) throw Breakdown("zero step length");

    // Near a low-rank optimum the eigenvalue-based step can still leave an
    // iterate numerically indefinite; shorten until Cholesky succeeds.
    Mat x_next = sym(it_.x + tp * dir.dx);
    Mat z_next = sym(it_.z + td * dir.dz);
    for (int k = 0; !is_spd(x_next); ++k) {
      if (k == kMaxBacktracks) throw Breakdown("primal iterate lost definiteness");
      tp *= 0.8;
      x_next = sym(it_.x + tp * dir.dx);
    }
    for (int k = 0; !is_spd(z_next); ++k) {
      if (k == kMaxBacktracks) throw Breakdown("dual iterate lost definiteness");
      td *= 0.8;
      z_next = sym(it_.z + td * dir.dz);
    }

    it_.x = std::move(x_next);
    it_.s += tp * dir.ds;
    it_.u += tp * dir.du;
    it_.y += td * dir.dy;
    it_.z = std::move(z_next);
    it_.zs += td * dir.dzs;
  }

  SdpSolution finish(const SolverResiduals& r, int iter) const {
    SdpSolution sol;
    sol.objective = static_cast<double>(-pobj_);
    sol.dual_objective = static_cast<double>(-dobj_);
    sol.gram = it_.x.cast<double>();
    sol.fvec = it_.u.cast<double>();
    sol.residuals = r;
    sol.iterations = iter;
    sol.tags.reserve(static_cast<std::size_t>(m_));
    sol.duals.reserve(static_cast<std::size_t>(m_));
    for (Eigen::Index k = 0; k < m_; ++k) {
      sol.tags.push_back(inst_.constraints[static_cast<std::size_t>(k)].tag);
      sol.duals.push_back(
          static_cast<double>(-it_.y[k] * pr_.rows[static_cast<std::size_t>(k)].scale));
    }
    sol.gram_eigenvalues = symmetric_eigenvalues(sol.gram);
    return sol;
  }

  const SdpInstance& inst_;
  SolverOptions opt_;
  Problem pr_;
  Eigen::Index m_ = 0;
  Vec b_;
  Real b_norm_ = 0.0;
  Real c_norm_ = 0.0;

  Iterate it_;
  Vec rp_;
  Mat rd_;
  Vec rz_;
  Vec rf_;
  Real pobj_ = 0.0;
  Real dobj_ = 0.0;

  Mat zinv_;
  Mat kkt_;
  Eigen::PartialPivLU<Mat> lu_;
};

}  // namespace

double SdpSolution::dual(const ConstraintId& tag) const {
  for (std::size_t k = 0; k < tags.size(); ++k) {
    if (tags[k] == tag) return duals[k];
  }
  return 0.0;
}

SdpSolution solve(const SdpInstance& inst, const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (options.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (inst.gram_dim < 1 || inst.gram_dim > 64) {
    throw std::invalid_argument("solver supports Gram matrices of order 1..64");
  }
  Solver solver(inst, options);
  return solver.run();
}

int rank_profile(const Matrix& gram, double rel_tol) {
  if (gram.size() == 0) return 0;
  const Vector ev = symmetric_eigenvalues(symmetrized(gram));
  const double top = ev[ev.size() - 1];
  if (!(top > 0.0)) return 0;
  return static_cast<int>((ev.array() > rel_tol * top).count());
}

int rank_profile(const SdpSolution& sol, double rel_tol) { return rank_profile(sol.gram, rel_tol); }

void to_json(nlohmann::json& j, const SolverResiduals& r) {
  j = nlohmann::json{{"primal", r.primal},
                     {"dual", r.dual},
                     {"gap", r.gap},
                     {"complementarity", r.complementarity}};
}

void to_json(nlohmann::json& j, const SdpSolution& sol) {
  nlohmann::json duals = nlohmann::json::object();
  for (std::size_t k = 0; k < sol.tags.size(); ++k) duals[sol.tags[k].to_string()] = sol.duals[k];
  j = nlohmann::json{{"value", sol.objective},
                     {"dual_value", sol.dual_objective},
                     {"iterations", sol.iterations},
                     {"residuals", sol.residuals},
                     {"gram_eigenvalues", std::vector<double>(sol.gram_eigenvalues.data(),
                                                              sol.gram_eigenvalues.data() +
                                                                  sol.gram_eigenvalues.size())},
                     {"F", std::vector<double>(sol.fvec.data(), sol.fvec.data() + sol.fvec.size())},
                     {"duals", std::move(duals)}};
}

}  // namespace ppapep
