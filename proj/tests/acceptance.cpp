// Acceptance checks, one output line per criterion.
//
//   acceptance [--work DIR] [criterion ...]
//
// Criteria 6-8 solve full steering problems and take minutes.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cutsteer/astro_dynamics.hpp"
#include "cutsteer/cut_sampling.hpp"
#include "cutsteer/error.hpp"
#include "cutsteer/moment_algebra.hpp"
#include "cutsteer/monte_carlo.hpp"
#include "cutsteer/scenario.hpp"
#include "cutsteer/scvx_engine.hpp"
#include "moment_oracle.hpp"

using namespace cutsteer;
namespace fs = std::filesystem;
using scenario::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work_dir;

fs::path fresh(const std::string& name) {
  const fs::path p = work_dir / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// --- 1 -----------------------------------------------------------------------

Outcome cut_moments() {
  const auto t0 = std::chrono::steady_clock::now();
  const cut::SigmaSet s4 = cut::cut4_standard(6);
  const double e4 = oracle::max_moment_error(s4.points, s4.weights, 4);
  double e6 = 0.0;
  for (int n = 3; n <= 6; ++n) {
    const cut::SigmaSet s6 = cut::cut6_standard(n);
    e6 = std::max(e6, oracle::max_moment_error(s6.points, s6.weights, 6));
  }
  const double t = seconds_since(t0);
  return {e4 <= 1e-10 && e6 <= 1e-9 && t < 1.0,
          "cut4 err " + fmt("%.2e", e4) + ", cut6 err " + fmt("%.2e", e6) + ", " + fmt("%.3f", t) + " s"};
}

// --- 2 -----------------------------------------------------------------------

Outcome point_counts() {
  const int c4 = cut::cut4_standard(6).count();
  const int c6 = cut::cut6_standard(6).count();
  return {c4 == 76 && c6 == 137, "cut4 " + std::to_string(c4) + " points, cut6 " + std::to_string(c6) + " points"};
}

// --- 3 -----------------------------------------------------------------------

moments::AggregatedState random_cloud(std::mt19937_64& rng, int ns) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.2, 1.0);
  Eigen::MatrixXd pts(6, ns);
  for (int i = 0; i < pts.size(); ++i) pts.data()[i] = nd(rng) + 0.3 * nd(rng) * nd(rng);
  Eigen::VectorXd w(ns);
  for (int i = 0; i < ns; ++i) w(i) = ud(rng);
  w /= w.sum();
  return moments::centralize(moments::aggregate(pts, w));
}

Outcome jacobians() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double fd_worst = 0.0, naive_worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const auto z = random_cloud(rng, c % 2 ? 137 : 76);
    for (int m : {3, 4}) {
      const Eigen::MatrixXd jac = moments::moment_jacobian(z, m);
      naive_worst = std::max(naive_worst, (jac - moments::moment_jacobian_naive(z, m)).cwiseAbs().maxCoeff());
      const double h = 1e-6;
      for (int j = 0; j < 6; ++j) {
        // only the entries of axis j move the axis-j moment
        Eigen::RowVectorXd fd = Eigen::RowVectorXd::Zero(z.data.size());
        for (int i = 0; i < z.n_s(); ++i) {
          const int e = i * 6 + j;
          moments::AggregatedState zp = z, zm = z;
          zp.data(e) += h;
          zm.data(e) -= h;
          fd(e) = (moments::standardized_moment(zp, m, j) - moments::standardized_moment(zm, m, j)) / (2 * h);
        }
        fd_worst = std::max(fd_worst, (jac.row(j) - fd).norm() / fd.norm());
      }
    }
  }
  const double t = seconds_since(t0);
  return {fd_worst <= 1e-6 && naive_worst <= 1e-12 && t < 30.0,
          "fd rel err " + fmt("%.2e", fd_worst) + ", fast vs naive " + fmt("%.2e", naive_worst) + ", " +
              fmt("%.1f", t) + " s"};
}

// --- 4 -----------------------------------------------------------------------

Outcome dynamics() {
  using namespace dyn;
  const auto tb = DynamicsModel::two_body(398600.0, 5000.0);
  const double r = 8000.0 / tb.length_unit_km;
  Vec6 x;
  x << r, 0, 0, 0, std::sqrt(1.0 / r), 0;
  const double ret = (propagate(tb, x, 2 * kPi * std::sqrt(r * r * r)) - x).head<3>().norm() * tb.length_unit_km;

  const auto cr = DynamicsModel::cr3bp(0.01215058560962404, 384400.0, 375190.25852);
  Vec6 g;
  g << 1.16, 0, -0.1247, 0, -0.2087, 0;
  const PeriodicOrbit orbit = correct_halo(cr, g, 3.2690);
  const double drift =
      std::abs(jacobi_constant(cr.mu, propagate(cr, orbit.state, orbit.period)) - jacobi_constant(cr.mu, orbit.state));

  double stm = 0.0;
  for (const auto& [m, x0, dt] : {std::tuple{tb, Vec6(x + Vec6::Constant(0.01)), 0.8}, std::tuple{cr, orbit.state, 0.36}}) {
    const StateAndStm p = propagate_with_stm(m, x0, dt);
    Mat6 fd;
    const double h = 1e-7;
    for (int c = 0; c < 6; ++c) {
      Vec6 a = x0, b = x0;
      a(c) += h;
      b(c) -= h;
      fd.col(c) = (propagate(m, a, dt) - propagate(m, b, dt)) / (2 * h);
    }
    stm = std::max(stm, (p.stm - fd).norm() / fd.norm());
  }
  return {ret <= 1e-8 && drift <= 1e-10 && stm <= 1e-5,
          "period return " + fmt("%.2e", ret) + " km, Jacobi drift " + fmt("%.2e", drift) + ", STM rel err " +
              fmt("%.2e", stm)};
}

// --- 5 -----------------------------------------------------------------------

Outcome toy() {
  // Double integrator, two impulses at t = 0 and T/2, final mean fixed. The
  // dynamics are linear so they are imposed without slack.
  const double horizon = 2.0;
  scvx::SteeringProblem p;
  p.model = dyn::DynamicsModel::free_space();
  p.grid = dyn::NodeGrid::uniform(0.0, horizon, 3);
  p.initial.covariance = dyn::Mat6::Identity() * 1e-4;
  p.objective = scvx::ObjectiveKind::expected_fuel;
  p.slack = scvx::SlackPlacement::none;
  scvx::MomentConstraint c;
  c.kind = scvx::MomentKind::mean_eq;
  c.node = 2;
  c.target = dyn::Vec6::Zero();
  c.target << 0.2, -0.1, 0.05, 0.05, 0.02, -0.01;
  p.constraints.push_back(c);

  // least-norm controls from the stacked linear conditions
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    a(i, i) = horizon;
    a(i, 3 + i) = horizon / 2.0;
    a(3 + i, i) = 1.0;
    a(3 + i, 3 + i) = 1.0;
  }
  const Eigen::VectorXd oracle = a.completeOrthogonalDecomposition().solve(Eigen::VectorXd(c.target));

  const auto out = scvx::solve_moment_steering(p, scvx::ScvxParams::two_body(), scvx::initial_reference(p).reference);
  Eigen::VectorXd got(6);
  got << out.policy.feedforward[0], out.policy.feedforward[1];
  const double err = (got - oracle).cwiseAbs().maxCoeff();
  const double mean_err = (out.cut_means.back() - c.target).cwiseAbs().maxCoeff();
  return {out.converged && out.iterations <= 3 && err <= 1e-8 && mean_err <= 1e-8,
          std::to_string(out.iterations) + " iterations, control err " + fmt("%.2e", err) + ", mean err " +
              fmt("%.2e", mean_err)};
}

// --- 6-8 ---------------------------------------------------------------------

struct Solved {
  scenario::ScenarioConfig config;
  json solve;
  json validate;
  scenario::StoredPolicy policy;
  fs::path out;
};

Solved solve_and_validate(const std::string& preset, bool fast, const fs::path& out,
                          const fs::path& warm_from = {}) {
  Solved s;
  s.config = scenario::preset(preset, fast);
  s.out = out;
  if (!warm_from.empty()) fs::copy(warm_from, out / "warm_start", fs::copy_options::recursive);
  scenario::RunOptions opt;
  opt.out = out;
  s.solve = scenario::run(scenario::Command::solve, s.config, opt);
  s.validate = scenario::run(scenario::Command::validate, s.config, opt);
  s.policy = scenario::policy_from_json(read_json(out / "policy.json"));
  return s;
}

std::vector<double> to_vec(const json& a) { return a.get<std::vector<double>>(); }

Outcome two_body() {
  const Solved s = solve_and_validate("twobody_unskew", false, fresh("twobody_unskew"));
  const auto& term = s.policy.moments.back();
  const double cut_skew = term.skewness.head<3>().cwiseAbs().maxCoeff();
  const double mean_res =
      (s.policy.cut_means.back() - s.config.problem.constraints.front().target).cwiseAbs().maxCoeff();
  double mc_skew = 0.0;
  for (double v : to_vec(s.validate["terminal"]["skewness"])) mc_skew = std::max(mc_skew, std::abs(v));
  const double p99_ratio = s.validate["dv"]["p99_over_bound"].get<double>();
  const double fuel_err = std::abs(s.validate["dv"]["mean_vs_expected_fuel"].get<double>());
  const bool pass = s.policy.converged && cut_skew <= 0.01 + 1e-6 && mean_res <= 1e-6 && mc_skew <= 0.2 &&
                    p99_ratio <= 1.02 && fuel_err <= 0.03;
  return {pass, "full preset, converged " + std::to_string(s.policy.converged) + " in " +
                    std::to_string(s.policy.iterations) + " iterations, CUT |skew| " + fmt("%.6f", cut_skew) +
                    ", mean residual " + fmt("%.1e", mean_res) + ", MC |skew| " + fmt("%.3f", mc_skew) +
                    ", p99/bound " + fmt("%.4f", p99_ratio) + ", fuel err " + fmt("%.2f%%", 100 * fuel_err)};
}

int halo_cut4_iterations = -1;

Outcome halo_cut4() {
  const Solved s = solve_and_validate("halo_cut4", true, fresh("halo_cut4_fast"));
  halo_cut4_iterations = s.policy.iterations;
  const auto& model = s.config.problem.model;
  // the all-node square-root covariance bound, on the optimizer side
  double bound = 0.0;
  for (const auto& c : s.config.problem.constraints)
    if (c.kind == scvx::MomentKind::sqrt_cov_norm_le) bound = c.bound;
  // optimizer-side sigma points as written by solve
  std::vector<std::vector<double>> pts, wts;
  {
    std::ifstream sp(s.out / "sigma_points.csv");
    std::string l;
    std::getline(sp, l);
    while (std::getline(sp, l)) {
      std::stringstream ss(l);
      std::string cell;
      std::vector<double> c;
      while (std::getline(ss, cell, ',')) c.push_back(std::stod(cell));
      const auto k = static_cast<std::size_t>(c[0]);
      if (pts.size() <= k) pts.resize(k + 1), wts.resize(k + 1);
      for (int a = 0; a < 3; ++a) pts[k].push_back(c[3 + a] / model.length_unit_km);
      wts[k].push_back(c[2]);
    }
  }
  double excess = -1e300;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Eigen::Map<const Eigen::MatrixXd> p(pts[k].data(), 3, static_cast<Eigen::Index>(wts[k].size()));
    const Eigen::Map<const Eigen::VectorXd> w(wts[k].data(), static_cast<Eigen::Index>(wts[k].size()));
    const Eigen::MatrixXd root = moments::sqrt_covariance(moments::centralize(moments::aggregate(p, w)));
    excess = std::max(excess, moments::spectral_norm(root) - bound);
  }
  // Monte Carlo 3-sigma against the CUT prediction, every node and axis
  std::ifstream in(s.out / "mc_moments.csv");
  std::string line;
  std::getline(in, line);
  double sigma_err = 0.0;
  const double scale[6] = {model.length_unit_km, model.length_unit_km, model.length_unit_km,
                           model.velocity_unit_km_s(), model.velocity_unit_km_s(), model.velocity_unit_km_s()};
  for (int row = 0; std::getline(in, line); ++row) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> c;
    while (std::getline(ss, cell, ',')) c.push_back(cell);
    const int k = std::stoi(c[0]);
    const int a = row % 6;
    const double cut = s.policy.moments[k].three_sigma(a) * scale[a];
    sigma_err = std::max(sigma_err, std::abs(std::stod(c[3]) - cut) / cut);
  }
  double skew = 0.0;
  for (double v : to_vec(s.validate["terminal"]["skewness"])) skew = std::max(skew, std::abs(v));
  const bool pass = s.policy.converged && excess <= 1e-8 && sigma_err <= 0.05 && skew > 0.5;
  return {pass, "desk N=" + std::to_string(s.config.problem.nodes()) + ", converged " +
                    std::to_string(s.policy.converged) + " in " + std::to_string(s.policy.iterations) +
                    " iterations, sqrt-cov excess " + fmt("%.2e", excess * model.length_unit_km) + " km, max 3-sigma err " +
                    fmt("%.2f%%", 100 * sigma_err) + ", terminal MC max |skew| " + fmt("%.3f", skew)};
}

Outcome halo_cut6() {
  const fs::path warm = work_dir / "halo_cut4_fast";
  const Solved s = solve_and_validate("halo_cut6_skew_kurt", true, fresh("halo_cut6_skew_kurt_fast"),
                                      fs::exists(warm / "policy.json") ? warm : fs::path());
  if (halo_cut4_iterations < 0)
    halo_cut4_iterations = scenario::policy_from_json(read_json(s.out / "warm_start" / "policy.json")).iterations;
  const auto& term = s.policy.moments.back();
  const double kurt = (term.kurtosis.head<3>().array() - 3.0).abs().maxCoeff();
  const std::vector<double> mc = to_vec(s.validate["terminal"]["kurtosis"]);
  bool mc_ok = true;
  for (double v : mc) mc_ok = mc_ok && v >= 2.2 && v <= 3.8;
  const bool fewer = s.policy.iterations < halo_cut4_iterations;
  const bool pass = s.policy.converged && kurt <= 0.5 + 1e-6 && mc_ok && fewer;
  return {pass, "desk, converged " + std::to_string(s.policy.converged) + " in " + std::to_string(s.policy.iterations) +
                    " iterations vs " + std::to_string(halo_cut4_iterations) + " cold CUT-4, CUT |kurt-3| " +
                    fmt("%.4f", kurt) + ", MC kurtosis [" + fmt("%.3f", mc[0]) + ", " + fmt("%.3f", mc[1]) + ", " +
                    fmt("%.3f", mc[2]) + "]"};
}

// --- 9 -----------------------------------------------------------------------

Outcome mc_convergence() {
  std::vector<double> ns, errs;
  for (int n = 250; n <= 16000; n *= 2) {
    double acc = 0.0;
    const int reps = 48;
    for (int r = 0; r < reps; ++r) {
      const Eigen::MatrixXd s = mc::sample_gaussian(dyn::Vec6::Zero(), dyn::Mat6::Identity(), n,
                                                    static_cast<std::uint64_t>(1000 * n + r));
      for (int a = 0; a < 6; ++a) acc += std::pow(mc::empirical_moments(s, a).mean, 2);
    }
    ns.push_back(n);
    errs.push_back(std::sqrt(acc / (reps * 6)));
  }
  const double slope = mc::log_log_slope(ns, errs);
  const Eigen::MatrixXd cloud = mc::sample_gaussian(dyn::Vec6::Zero(), dyn::Mat6::Identity(), 5000, 77);
  double full = 0.0;
  for (const auto& r : mc::convergence_analysis(cloud, {500, 5000}))
    if (r.samples == 5000) full = std::max({full, r.mean, r.sigma, r.skewness, r.kurtosis});
  return {std::abs(slope + 0.5) <= 0.1 && full == 0.0,
          "slope " + fmt("%.4f", slope) + ", checkpoint=full difference " + fmt("%.1e", full)};
}

// --- 10 ----------------------------------------------------------------------

Outcome determinism() {
  const scenario::ScenarioConfig cfg = scenario::preset("twobody_unskew", true);
  const int threads[2] = {1, 4};
  fs::path dirs[2];
  for (int r = 0; r < 2; ++r) {
    omp_set_num_threads(threads[r]);
    dirs[r] = fresh("determinism_" + std::to_string(r));
    scenario::RunOptions opt;
    opt.out = dirs[r];
    opt.samples = 2000;
    opt.seed = 5;
    for (auto c : {scenario::Command::solve, scenario::Command::validate, scenario::Command::report})
      scenario::run(c, cfg, opt);
  }
  omp_set_num_threads(omp_get_num_procs());
  int files = 0;
  std::string differ;
  for (const auto& e : fs::directory_iterator(dirs[0])) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = dirs[1] / e.path().filename();
    if (!fs::exists(other) || read_bytes(e.path()) != read_bytes(other)) differ += " " + e.path().filename().string();
  }
  return {files >= 9 && differ.empty(), std::to_string(files) + " artifacts compared across 1 and 4 threads" +
                                            (differ.empty() ? std::string(", all identical") : ", differ:" + differ)};
}

}  // namespace

int main(int argc, char** argv) {
  work_dir = fs::current_path() / "acceptance_work";
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work" && i + 1 < argc) {
      work_dir = argv[++i];
    } else {
      wanted.insert(std::stoi(a));
    }
  }
  fs::create_directories(work_dir);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"CUT moment matching", cut_moments},
      {"CUT point counts", point_counts},
      {"moment Jacobians", jacobians},
      {"dynamics fidelity", dynamics},
      {"SCP linear toy", toy},
      {"two-body skewness steering", two_body},
      {"CR3BP CUT-4 covariance steering", halo_cut4},
      {"CR3BP CUT-6 kurtosis box", halo_cut6},
      {"Monte Carlo convergence", mc_convergence},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const int id = static_cast<int>(c) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[c].second();
    } catch (const Error& e) {
      o = {false, std::string("error ") + error_code_name(e.code()) + ": " + e.what() + " " + e.context()};
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %2d  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[c].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
