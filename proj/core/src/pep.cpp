#include "ppapep/pep.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "ppapep/ppa.hpp"

namespace ppapep {

ConstraintId ConstraintId::cross(std::size_t i, std::size_t j) {
  if (i == j) throw std::invalid_argument("Cross constraint requires i != j");
  return {Kind::Cross, i, j};
}

std::string ConstraintId::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Radius:
      os << "Radius";
      break;
    case Kind::FNonneg:
      os << "FNonneg(" << i << ")";
      break;
    case Kind::AtOpt:
      os << "AtOpt(" << i << ")";
      break;
    case Kind::Cross:
      os << "Cross(" << i << "," << j << ")";
      break;
    case Kind::Generic:
      os << "Generic(" << i << ")";
      break;
  }
  return os.str();
}

ConstraintId ConstraintId::parse(const std::string& text) {
  if (text == "Radius") return radius();
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close != text.size() - 1) {
    throw std::invalid_argument("unrecognized constraint tag '" + text + "'");
  }
  const std::string name = text.substr(0, open);
  const std::string args = text.substr(open + 1, close - open - 1);
  const auto comma = args.find(',');
  auto parse_index = [&](const std::string& s) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || v == 0) {
      throw std::invalid_argument("bad index in constraint tag '" + text + "'");
    }
    return static_cast<std::size_t>(v);
  };
  if (name == "Cross") {
    if (comma == std::string::npos) throw std::invalid_argument("Cross tag needs two indices");
    return cross(parse_index(args.substr(0, comma)), parse_index(args.substr(comma + 1)));
  }
  if (comma != std::string::npos)
    throw std::invalid_argument("unexpected index pair in '" + text + "'");
  if (name == "FNonneg") return fnonneg(parse_index(args));
  if (name == "AtOpt") return at_opt(parse_index(args));
  if (name == "Generic") return generic(parse_index(args));
  throw std::invalid_argument("unrecognized constraint tag '" + text + "'");
}

QuadForm::QuadForm(const Matrix& m) : m_(symmetrized(m)) {
  if (m.rows() != m.cols()) throw std::invalid_argument("QuadForm matrix must be square");
}

void QuadForm::add_inner(const Vector& u, const Vector& v, double scale) {
  m_ += (0.5 * scale) * (u * v.transpose() + v * u.transpose());
}

double QuadForm::evaluate(const Matrix& gram) const { return m_.cwiseProduct(gram).sum(); }

QuadForm& QuadForm::operator+=(const QuadForm& other) {
  m_ += other.m_;
  return *this;
}

QuadForm& QuadForm::operator*=(double s) {
  m_ *= s;
  return *this;
}

double Constraint::lhs(const Matrix& gram, const Vector& fvec) const {
  return quad.evaluate(gram) + (lin.size() > 0 ? lin.dot(fvec) : 0.0);
}

double Constraint::slack(const Matrix& gram, const Vector& fvec) const {
  const double v = lhs(gram, fvec);
  switch (sense) {
    case Sense::LessEqual:
      return rhs - v;
    case Sense::GreaterEqual:
      return v - rhs;
    default:
      return -std::abs(v - rhs);
  }
}

const Constraint* SdpInstance::find(const ConstraintId& tag) const {
  for (const auto& c : constraints) {
    if (c.tag == tag) return &c;
  }
  return nullptr;
}

double SdpInstance::objective_value(const Matrix& gram, const Vector& fvec) const {
  return objective.evaluate(gram) + (objective_lin.size() > 0 ? objective_lin.dot(fvec) : 0.0);
}

SdpInstance build_pep(const StepSchedule& sched, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw std::invalid_argument("radius must be positive");
  const std::size_t n = sched.size();
  const auto dim = static_cast<Eigen::Index>(n + 1);
  const auto fdim = static_cast<Eigen::Index>(n);
  auto e = [dim](std::size_t k) { return Vector(Vector::Unit(dim, static_cast<Eigen::Index>(k))); };
  auto fe = [fdim](std::size_t k) {
    return Vector(Vector::Unit(fdim, static_cast<Eigen::Index>(k - 1)));
  };
  // g_i = (x_{i-1} - x_i) / alpha_i as a coefficient vector over x_0..x_N.
  auto g = [&](std::size_t i) { return Vector((e(i - 1) - e(i)) / sched.alpha(i)); };

  SdpInstance inst;
  inst.gram_dim = dim;
  inst.fvec_dim = fdim;
  inst.radius = radius;
  inst.objective = QuadForm(dim);
  inst.objective.add_inner(g(n), g(n));
  inst.objective_lin = Vector::Zero(fdim);
  inst.constraints.reserve(1 + 2 * n + n * (n - 1));

  {
    Constraint c{QuadForm(dim), Vector::Zero(fdim), radius * radius, Sense::LessEqual,
                 ConstraintId::radius()};
    c.quad.add_inner(e(0), e(0));
    inst.constraints.push_back(std::move(c));
  }
  for (std::size_t i = 1; i <= n; ++i) {
    inst.constraints.push_back(
        Constraint{QuadForm(dim), fe(i), 0.0, Sense::GreaterEqual, ConstraintId::fnonneg(i)});
  }
  // 0 >= f_i + <g_i, 0 - x_i>
  for (std::size_t i = 1; i <= n; ++i) {
    Constraint c{QuadForm(dim), fe(i), 0.0, Sense::LessEqual, ConstraintId::at_opt(i)};
    c.quad.add_inner(g(i), -e(i));
    inst.constraints.push_back(std::move(c));
  }
  // f_j - f_i - <g_i, x_j - x_i> >= 0
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      if (i == j) continue;
      Constraint c{QuadForm(dim), fe(j) - fe(i), 0.0, Sense::GreaterEqual,
                   ConstraintId::cross(i, j)};
      c.quad.add_inner(g(i), e(j) - e(i), -1.0);
      inst.constraints.push_back(std::move(c));
    }
  }
  return inst;
}

SdpInstance drop_constraints(const SdpInstance& inst,
                             const std::function<bool(const ConstraintId&)>& drop) {
  SdpInstance out = inst;
  out.constraints.clear();
  for (const auto& c : inst.constraints) {
    if (!drop(c.tag)) out.constraints.push_back(c);
  }
  return out;
}

SdpInstance reduce_pep(const SdpInstance& inst) {
  const auto n = static_cast<std::size_t>(inst.fvec_dim);
  return drop_constraints(inst, [n](const ConstraintId& t) {
    switch (t.kind) {
      case ConstraintId::Kind::FNonneg:
        return t.i < n;
      case ConstraintId::Kind::Cross:
        return (t.i > t.j ? t.i - t.j : t.j - t.i) >= 2;
      default:
        return false;
    }
  });
}

std::vector<ConstraintSlack> evaluate_slacks(const SdpInstance& inst, const Matrix& gram,
                                             const Vector& fvec) {
  if (gram.rows() != inst.gram_dim || gram.cols() != inst.gram_dim ||
      fvec.size() != inst.fvec_dim) {
    std::ostringstream os;
    os << "dimension mismatch: instance expects G of order " << inst.gram_dim << " and F of length "
       << inst.fvec_dim << ", got " << gram.rows() << "x" << gram.cols() << " and " << fvec.size();
    throw std::invalid_argument(os.str());
  }
  std::vector<ConstraintSlack> out;
  out.reserve(inst.constraints.size());
  for (const auto& c : inst.constraints) out.push_back({c.tag, c.slack(gram, fvec)});
  return out;
}

std::vector<ConstraintSlack> evaluate_feasibility(const SdpInstance& inst, const Trajectory& traj) {
  if (static_cast<Eigen::Index>(traj.steps()) + 1 != inst.gram_dim) {
    std::ostringstream os;
    os << "dimension mismatch: instance has N = " << inst.gram_dim - 1 << " but trajectory has "
       << traj.steps() << " steps";
    throw std::invalid_argument(os.str());
  }
  if (!traj.minimizer || !traj.min_value) {
    throw std::invalid_argument("feasibility check needs a trajectory with known minimizer");
  }
  Vector fvec(static_cast<Eigen::Index>(traj.steps()));
  for (std::size_t i = 0; i < traj.steps(); ++i) {
    fvec[static_cast<Eigen::Index>(i)] = traj.fvals[i] - *traj.min_value;
  }
  return evaluate_slacks(inst, trajectory_gram(traj), fvec);
}

std::string to_string(Sense sense) {
  switch (sense) {
    case Sense::LessEqual:
      return "<=";
    case Sense::GreaterEqual:
      return ">=";
    default:
      return "==";
  }
}

void to_json(nlohmann::json& j, const ConstraintId& tag) { j = tag.to_string(); }

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> vector_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void to_json(nlohmann::json& j, const SdpInstance& inst) {
  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : inst.constraints) {
    cons.push_back({{"tag", c.tag.to_string()},
                    {"M", matrix_json(c.quad.matrix())},
                    {"lin", vector_std(c.lin)},
                    {"rhs", c.rhs},
                    {"sense", to_string(c.sense)}});
  }
  j = nlohmann::json{
      {"gram_dim", inst.gram_dim},
      {"fvec_dim", inst.fvec_dim},
      {"radius", inst.radius},
      {"sense", "max"},
      {"objective",
       {{"M", matrix_json(inst.objective.matrix())}, {"lin", vector_std(inst.objective_lin)}}},
      {"constraints", std::move(cons)}};
}

}  // namespace ppapep
