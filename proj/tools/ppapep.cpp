// ppapep: command-line front end.
//
//   ppapep run     --function l1|quad|box|maxaffine --alphas 1,1 [--x0 ..] [--radius R]
//   ppapep pep     solve|build --alphas .. | --random-n N --seed k  [--reduced]
//   ppapep certify --alphas .. | --sweep --count M --max-n K --seed s
//   ppapep audit   --alphas .. [--probe]
//
// --alphas takes a comma list or the path of a {"alphas": [...]} file.
// Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 solver failure.
// Every command prints JSON (run can print CSV); --reproducible drops the
// timestamp so reruns are byte-identical.

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ppapep/certificate.hpp"
#include "ppapep/instances.hpp"
#include "ppapep/pep.hpp"
#include "ppapep/ppa.hpp"
#include "ppapep/random.hpp"
#include "ppapep/schedule.hpp"
#include "ppapep/sdp.hpp"
#include "ppapep/worstcase.hpp"

namespace {

using namespace ppapep;
using nlohmann::json;

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kSolverFailed = 3 };

/// Bad user input; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool g_reproducible = false;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void emit(json j, const std::string& out_path = "") {
  if (!g_reproducible) j["timestamp"] = utc_timestamp();
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + out_path);
  f << text;
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read " + path);
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

StepSchedule load_schedule(const std::string& text) {
  if (std::filesystem::is_regular_file(text)) return schedule_from_json(read_json_file(text));
  return parse_schedule_list(text);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size()) {
      throw UsageError(std::string("bad number '") + item + "' in " + what);
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(what) + " is empty");
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw UsageError(std::string(what) + " must be an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (j[static_cast<std::size_t>(r)].size() != static_cast<std::size_t>(cols)) {
      throw UsageError(std::string(what) + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

/// A number gives a scalar metric; anything else is a JSON file holding the
/// matrix, either bare or under "B".
Metric load_metric(const std::string& text) {
  if (text.empty()) return Metric::identity();
  char* end = nullptr;
  const double b = std::strtod(text.c_str(), &end);
  if (end != text.c_str() && *end == '\0') return Metric::scalar(b);
  const json j = read_json_file(text);
  return Metric::dense(matrix_from_json(j.is_object() ? j.at("B") : j, "metric"));
}

std::optional<std::size_t> thread_cap() {
  const char* env = std::getenv("PPAPEP_THREADS");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw UsageError("PPAPEP_THREADS must be a positive integer");
  return static_cast<std::size_t>(v);
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string function;
  std::string alphas;
  std::string x0;
  double radius = 1.0;
  std::string metric;
  std::string out;
  std::string format = "json";
  std::optional<double> weight;
  std::string q_diag;
  std::string linear;
  std::string lower;
  std::string upper;
  std::string pieces;
  double tol = 1e-9;
};

ProxFunction build_function(const RunArgs& a, FunctionKind kind, const StepSchedule& sched,
                            const Metric& metric, Eigen::Index dim) {
  switch (kind) {
    case FunctionKind::L1: {
      // Default weight is the worst-case coefficient for this schedule and metric.
      const double b = metric.kind() == Metric::Kind::Scalar ? metric.scalar_value() : 1.0;
      return ProxFunction::scaled_l1(a.weight.value_or(std::sqrt(b) * a.radius / sched.total()),
                                     dim);
    }
    case FunctionKind::Quadratic: {
      const Vector diag =
          a.q_diag.empty() ? Vector::Ones(dim) : to_vector(parse_list(a.q_diag, "--q-diag"));
      const Vector lin =
          a.linear.empty() ? Vector::Zero(dim) : to_vector(parse_list(a.linear, "--b"));
      if (diag.size() != dim || lin.size() != dim) throw UsageError("--q-diag/--b must match --x0");
      return ProxFunction::quadratic(diag.asDiagonal().toDenseMatrix(), lin);
    }
    case FunctionKind::Box: {
      const double inf = std::numeric_limits<double>::infinity();
      const Vector lo =
          a.lower.empty() ? Vector::Zero(dim) : to_vector(parse_list(a.lower, "--lower"));
      const Vector hi =
          a.upper.empty() ? Vector::Constant(dim, inf) : to_vector(parse_list(a.upper, "--upper"));
      if (lo.size() != dim || hi.size() != dim) throw UsageError("--lower/--upper must match --x0");
      return ProxFunction::box_indicator(lo, hi);
    }
    case FunctionKind::MaxAffine: {
      if (a.pieces.empty()) {
        // max_i |x_i|
        Matrix slopes(2 * dim, dim);
        slopes << Matrix::Identity(dim, dim), -Matrix::Identity(dim, dim);
        return ProxFunction::max_affine(slopes, Vector::Zero(2 * dim), Vector::Zero(dim));
      }
      const json j = read_json_file(a.pieces);
      std::optional<Vector> x_star;
      if (j.contains("minimizer")) x_star = to_vector(j.at("minimizer").get<std::vector<double>>());
      return ProxFunction::max_affine(matrix_from_json(j.at("slopes"), "slopes"),
                                      to_vector(j.at("offsets").get<std::vector<double>>()),
                                      x_star);
    }
  }
  throw UsageError("unknown function");
}

int cmd_run(const RunArgs& a) {
  FunctionKind kind;
  try {
    kind = parse_function_kind(a.function);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const StepSchedule sched = load_schedule(a.alphas);
  const Metric metric = load_metric(a.metric);
  Vector x0;
  if (a.x0.empty()) {
    // One-dimensional start at distance R from the origin.
    const double b = metric.kind() == Metric::Kind::Scalar ? metric.scalar_value() : 1.0;
    x0 = Vector::Constant(1, -a.radius / std::sqrt(b));
  } else {
    x0 = to_vector(parse_list(a.x0, "--x0"));
  }
  if (const auto d = metric.dim(); d && *d != x0.size()) {
    throw UsageError("metric order does not match the dimension of --x0");
  }
  ProxFunction f = build_function(a, kind, sched, metric, x0.size());
  if (kind == FunctionKind::Box) f = f.with_minimizer(f.prox(1.0, x0, metric));
  if (!f.minimizer())
    throw UsageError("the function has no minimizer, so the bounds are undefined");

  const Trajectory traj = run_ppa(f, sched, x0, metric, a.radius);
  const BoundReport report = check_bounds(traj, a.tol);
  const bool ok = report.subgrad_ok && report.fval_ok;
  if (a.format == "csv") {
    const std::string csv = trajectory_csv(traj);
    if (a.out.empty()) {
      std::cout << csv;
    } else {
      std::ofstream(a.out, std::ios::binary) << csv;
    }
  } else {
    emit(json{{"command", "run"},
              {"function", std::string(to_string(kind))},
              {"trajectory", traj},
              {"bounds", report},
              {"ok", ok}},
         a.out);
  }
  if (!ok)
    std::cerr << "bound violated: subgradient margin " << report.subgrad_margin
              << ", function-value margin " << report.fval_margin << "\n";
  return ok ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------- pep

struct PepArgs {
  std::string alphas;
  std::optional<std::size_t> random_n;
  std::uint64_t seed = 0;
  double radius = 1.0;
  double tol = 1e-8;
  int max_iter = 200;
  bool reduced = false;
};

StepSchedule pep_schedule(const PepArgs& a) {
  if (a.random_n && !a.alphas.empty()) throw UsageError("give either --alphas or --random-n");
  if (a.random_n) {
    if (*a.random_n < 1) throw UsageError("--random-n must be at least 1");
    Xoshiro256 rng(a.seed);
    return random_schedule(rng, *a.random_n);
  }
  if (a.alphas.empty()) throw UsageError("--alphas or --random-n is required");
  return load_schedule(a.alphas);
}

SdpInstance pep_instance(const PepArgs& a, const StepSchedule& sched) {
  SdpInstance inst = build_pep(sched, a.radius);
  return a.reduced ? reduce_pep(inst) : inst;
}

int cmd_pep_build(const PepArgs& a) {
  const StepSchedule sched = pep_schedule(a);
  emit(json{
      {"command", "pep build"}, {"alphas", sched.alphas()}, {"instance", pep_instance(a, sched)}});
  return kOk;
}

int cmd_pep_solve(const PepArgs& a) {
  const StepSchedule sched = pep_schedule(a);
  const SdpInstance inst = pep_instance(a, sched);
  json out{{"command", "pep solve"},
           {"alphas", sched.alphas()},
           {"radius", a.radius},
           {"reduced", a.reduced},
           {"constraints", inst.constraints.size()}};
  try {
    const SdpSolution sol = solve(inst, {a.tol, a.max_iter});
    const double root = std::sqrt(std::max(sol.objective, 0.0));
    const double bound = a.radius / sched.total();
    out["value"] = sol.objective;
    out["sqrt_value"] = root;
    out["conjecture_bound"] = bound;
    out["gap"] = std::abs(root - bound);
    out["rank_profile"] = rank_profile(sol, 1e-5);
    out["solution"] = sol;
    emit(out);
    return kOk;
  } catch (const SolverError& e) {
    out["error"] = e.what();
    out["error_kind"] = e.kind() == SolverError::Kind::MaxIterationsExceeded
                            ? "max_iterations_exceeded"
                            : "numerical_breakdown";
    out["iterations"] = e.iterations();
    out["residuals"] = e.best_residuals();
    emit(out);
    std::cerr << "solver failed: " << e.what() << "\n";
    return kSolverFailed;
  }
}

// ---------------------------------------------------------------- certify

struct CertifyArgs {
  std::string alphas;
  bool sweep = false;
  std::size_t count = 1000;
  std::size_t max_n = 15;
  std::uint64_t seed = 1;
};

std::vector<CertificateReport> certify_all(const std::vector<StepSchedule>& schedules) {
  std::vector<CertificateReport> out(schedules.size());
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (const auto cap = thread_cap()) workers = std::min(workers, *cap);
  workers = std::min(workers, std::max<std::size_t>(schedules.size(), 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < schedules.size(); k = next++) out[k] = certify(schedules[k]);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

int cmd_certify(const CertifyArgs& a) {
  if (!a.sweep) {
    if (a.alphas.empty()) throw UsageError("--alphas or --sweep is required");
    const StepSchedule sched = load_schedule(a.alphas);
    const CertificateReport r = certify(sched);
    emit(json{{"command", "certify"}, {"alphas", sched.alphas()}, {"report", r}});
    if (!r.all_ok()) std::cerr << "certificate failed: " << r.failures() << "\n";
    return r.all_ok() ? kOk : kVerifyFailed;
  }
  if (!a.alphas.empty()) throw UsageError("give either --alphas or --sweep");
  if (a.max_n < 1) throw UsageError("--max-n must be at least 1");
  Xoshiro256 rng(a.seed);
  std::vector<StepSchedule> schedules;
  schedules.reserve(a.count);
  for (std::size_t k = 0; k < a.count; ++k)
    schedules.push_back(random_schedule(rng, 1 + rng.uniform_int(0, a.max_n - 1)));
  const auto reports = certify_all(schedules);

  json rows = json::array();
  json failed = json::array();
  for (std::size_t k = 0; k < reports.size(); ++k) {
    rows.push_back({{"index", k}, {"alphas", schedules[k].alphas()}, {"report", reports[k]}});
    if (!reports[k].all_ok()) failed.push_back(k);
  }
  emit(json{{"command", "certify"},
            {"sweep", {{"count", a.count}, {"max_n", a.max_n}, {"seed", a.seed}}},
            {"passed", reports.size() - failed.size()},
            {"failed", failed},
            {"reports", std::move(rows)}});
  if (!failed.empty())
    std::cerr << failed.size() << " of " << reports.size() << " schedules failed\n";
  return failed.empty() ? kOk : kVerifyFailed;
}

// ---------------------------------------------------------------- audit

struct AuditArgs {
  std::string alphas;
  bool probe = false;
  double tol = 1e-10;
  double probe_tol = 1e-7;
};

int cmd_audit(const AuditArgs& a) {
  if (a.alphas.empty()) throw UsageError("--alphas is required");
  const StepSchedule sched = load_schedule(a.alphas);
  const ActivenessAudit audit = activeness_audit(sched, a.tol);
  json out{{"command", "audit"}, {"alphas", sched.alphas()}, {"audit", audit}};
  bool ok = audit.reduced_all_active;
  if (a.probe) {
    try {
      const ProbeResult keep =
          inactive_constraint_probe(sched, generically_inactive(sched.size()), a.probe_tol);
      const ProbeResult lose =
          inactive_constraint_probe(sched, {ConstraintId::fnonneg(sched.size())}, a.probe_tol);
      out["probe"] = {{"drop_generically_inactive", keep}, {"drop_fnonneg_N", lose}};
      ok = ok && keep.same;
    } catch (const SolverError& e) {
      out["error"] = e.what();
      emit(out);
      std::cerr << "solver failed: " << e.what() << "\n";
      return kSolverFailed;
    }
  }
  out["ok"] = ok;
  emit(out);
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal point algorithm, its performance-estimation SDP and dual certificate"};
  app.require_subcommand(1);
  app.add_flag("--reproducible", g_reproducible, "Omit the timestamp from JSON output");
  app.fallthrough();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run PPA and check both convergence bounds");
  run_cmd->add_option("--function", run.function, "l1, quad, box or maxaffine")->required();
  run_cmd->add_option("--alphas", run.alphas, "Step lengths: comma list or JSON file")->required();
  run_cmd->add_option("--x0", run.x0,
                      "Starting point as a comma list (default: -R, one-dimensional)");
  run_cmd->add_option("--radius", run.radius, "Radius R >= ||x0 - x*||_B")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--metric", run.metric, "Scalar b, or JSON file holding the matrix B");
  run_cmd->add_option("--out", run.out, "Write output to this file instead of stdout");
  run_cmd->add_option("--format", run.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  run_cmd->add_option("--weight", run.weight,
                      "l1: coefficient c in c||x||_1 (default R/sum(alpha))");
  run_cmd->add_option("--q-diag", run.q_diag, "quad: diagonal of Q (default ones)");
  run_cmd->add_option("--b", run.linear, "quad: linear term (default zero)");
  run_cmd->add_option("--lower", run.lower, "box: lower bounds (default 0)");
  run_cmd->add_option("--upper", run.upper, "box: upper bounds (default +inf)");
  run_cmd->add_option("--pieces", run.pieces,
                      "maxaffine: JSON file with slopes, offsets, minimizer");
  run_cmd->add_option("--tol", run.tol, "Bound-check tolerance")->check(CLI::NonNegativeNumber);

  PepArgs pep;
  auto* pep_cmd = app.add_subcommand("pep", "Build or solve the performance-estimation SDP");
  pep_cmd->require_subcommand(1);
  for (auto* sub : {pep_cmd->add_subcommand("solve", "Solve the SDP"),
                    pep_cmd->add_subcommand("build", "Print the SDP instance")}) {
    sub->add_option("--alphas", pep.alphas, "Step lengths: comma list or JSON file");
    sub->add_option("--random-n", pep.random_n, "Draw N step lengths uniformly from (0, 1]");
    sub->add_option("--seed", pep.seed, "Seed for --random-n");
    sub->add_option("--radius", pep.radius, "Radius R")->check(CLI::PositiveNumber);
    sub->add_option("--tol", pep.tol, "Solver tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", pep.max_iter, "Solver iteration cap")->check(CLI::PositiveNumber);
    sub->add_flag("--reduced", pep.reduced, "Keep only the 3N constraints of the reduced instance");
  }

  CertifyArgs cert;
  auto* cert_cmd = app.add_subcommand("certify", "Verify the dual certificate exactly");
  cert_cmd->add_option("--alphas", cert.alphas, "Step lengths: comma list or JSON file");
  cert_cmd->add_flag("--sweep", cert.sweep, "Certify random schedules");
  cert_cmd->add_option("--count", cert.count, "Sweep size");
  cert_cmd->add_option("--max-n", cert.max_n, "Largest N in the sweep");
  cert_cmd->add_option("--seed", cert.seed, "Sweep seed");

  AuditArgs audit;
  auto* audit_cmd =
      app.add_subcommand("audit", "Constraint activeness on the worst-case l1 trajectory");
  audit_cmd->add_option("--alphas", audit.alphas, "Step lengths: comma list or JSON file");
  audit_cmd->add_flag("--probe", audit.probe, "Also re-solve with constraints removed");
  audit_cmd->add_option("--tol", audit.tol, "Activeness tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (pep_cmd->got_subcommand("solve")) return cmd_pep_solve(pep);
    if (pep_cmd->got_subcommand("build")) return cmd_pep_build(pep);
    if (*cert_cmd) return cmd_certify(cert);
    if (*audit_cmd) return cmd_audit(audit);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PpaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailed;
  }
  return kUsage;
}
