#include "dominion/commands.hpp"

#include "dominion/decouple.hpp"
#include "dominion/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

namespace dominion {

namespace {

// ---------------------------------------------------------------------------
// JSON helpers

Report num(double v) { return std::isfinite(v) ? Report(v) : Report(nullptr); }

Report to_json(const Matrix& m) {
  Report rows = Report::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Report row = Report::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Report to_json(const Vector& v) {
  Report out = Report::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

Report to_json(const Inertia& in) { return Report::array({in.neg, in.zero, in.pos}); }

Report to_json(const CertResult& r) {
  Report out;
  out["feasible"] = r.feasible;
  out["worst_margin"] = num(r.worst_margin);
  out["worst_vertex"] = r.worst_vertex;
  Report margins = Report::array();
  for (double m : r.margins) margins.push_back(num(m));
  out["margins"] = std::move(margins);
  out["within_slack"] = !r.feasible && r.worst_margin <= kSlackReport;
  return out;
}

Report to_json(const SPDominanceCertificate& c) {
  Report out;
  out["P_r"] = to_json(c.P_r().matrix());
  out["P_f"] = to_json(c.P_f().matrix());
  out["lambda_r"] = c.lambda_r();
  out["lambda_f"] = c.lambda_f();
  out["sigma_r"] = c.sigma_r();
  out["sigma_f"] = c.sigma_f();
  out["p"] = c.p();
  out["inertia_P_r"] = to_json(inertia(c.P_r()));
  out["inertia_P_f"] = to_json(inertia(c.P_f()));
  return out;
}

Report to_json(const MatrixPolytope& p) {
  Report out = Report::array();
  for (const Matrix& v : p.vertices()) out.push_back(to_json(v));
  return out;
}

Report to_json(const EpsilonCheck& c) {
  Report out;
  out["eps"] = c.eps;
  out["feasible"] = c.feasible;
  out["slow_margin"] = num(c.slow_margin);
  out["fast_margin"] = num(c.fast_margin);
  out["decoupling_solved"] = std::isfinite(c.slow_margin);
  return out;
}

Report header(const char* command, const std::string& config_name, const CommandOptions& opt) {
  Report r;
  r["tool"] = "dominion";
  r["report_version"] = 1;
  r["command"] = command;
  r["config"] = config_name;
  if (opt.timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    r["generated_at"] = buf;
  }
  return r;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Runs fn(i) for i in [0, n) on up to worker_count() threads. The first
// exception (lowest index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

const SPDominanceCertificate& need_certificate(const SystemConfig& cfg) {
  if (!cfg.certificate) throw Error(ErrorCode::ConfigError, "config has no certificate block");
  return *cfg.certificate;
}

double integration_step(const SystemConfig& cfg) { return cfg.step.value_or(default_step(cfg.eps())); }

}  // namespace

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DOMINION_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
  }
  return hw;
}

void write_report(const Report& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write report " + path.string());
  out << report.dump(2) << '\n';
}

CertificationInputs certification_inputs(const SystemConfig& cfg) {
  if (cfg.linear) {
    const LinearSPSystem& s = *cfg.linear;
    const MatrixPolytope a_poly = s.A_polytope();
    const MatrixPolytope d_poly = s.D_polytope();
    std::vector<Matrix> slow;
    for (const Matrix& A : a_poly.vertices())
      for (const Matrix& D : d_poly.vertices()) slow.push_back(reduced_model(A, s.B, s.C, D).A0);
    Report hull;
    hull["source"] = "linear";
    hull["slow_vertices_from"] = "A vertex x D vertex combinations";
    return {MatrixPolytope(std::move(slow)), d_poly, a_poly, s.B, s.C, std::move(hull)};
  }
  const NonlinearSPSystem& sys = *cfg.nonlinear;
  const HullSpec spec = cfg.hull.value_or(HullSpec{});
  ScalarHull h = scalar_hull(sys, spec.entry, spec.bounds, spec.grid_n);
  Report hull;
  hull["source"] = "scalar_hull";
  if (h.entry) {
    hull["entry"] = {{"block", std::string(1, h.entry->block)}, {"row", h.entry->row + 1}, {"col", h.entry->col + 1}};
    hull["entry_expression"] = h.entry_expr;
    hull["bounds"] = Report::array({num(h.lo), num(h.hi)});
    hull["bounds_sampled"] = h.sampled;
    if (h.sampled) hull["grid_n"] = spec.grid_n;
  } else {
    hull["entry"] = nullptr;
    hull["note"] = "all Jacobian entries are constant";
  }
  return {h.a0, MatrixPolytope({h.D}), h.a, h.B, h.C, std::move(hull)};
}

VectorField make_field(const SystemConfig& cfg) {
  return cfg.linear ? make_field(*cfg.linear) : make_field(*cfg.nonlinear);
}

// ---------------------------------------------------------------------------

CommandResult cmd_certify(const SystemConfig& cfg, const CommandOptions& opt) {
  const SPDominanceCertificate& cert = need_certificate(cfg);
  const CertificationInputs in = certification_inputs(cfg);
  const SPCertResult res = certify_sp(cert, in.slow, in.fast);

  CommandResult out;
  out.report = header("certify", cfg.name, opt);
  out.report["certificate"] = to_json(cert);
  out.report["polytopes"] = {{"hull", in.hull}, {"slow", to_json(in.slow)}, {"fast", to_json(in.fast)}};
  out.report["slow"] = to_json(res.slow);
  out.report["fast"] = to_json(res.fast);
  out.report["feasible"] = res.feasible();
  out.report["tolerances"] = {{"feasibility_threshold", 0.0},
                              {"slack_report", kSlackReport},
                              {"inertia_zero_tol", "1e-9 * max(1, spectral radius)"}};
  out.exit_code = res.feasible() ? kExitOk : kExitCheckFailed;
  out.summary.push_back("slow condition: " + std::string(res.slow.feasible ? "feasible" : "INFEASIBLE") +
                        ", worst margin " + fmt(res.slow.worst_margin) + " at vertex " +
                        std::to_string(res.slow.worst_vertex));
  out.summary.push_back("fast condition: " + std::string(res.fast.feasible ? "feasible" : "INFEASIBLE") +
                        ", worst margin " + fmt(res.fast.worst_margin) + " at vertex " +
                        std::to_string(res.fast.worst_vertex));
  return out;
}

CommandResult cmd_decouple(const SystemConfig& cfg, double eps, const CommandOptions& opt) {
  if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
  const CertificationInputs in = certification_inputs(cfg);
  constexpr double kDetTol = 1e-9;
  constexpr double kInverseTol = 1e-9;
  constexpr double kBlockTol = 1e-8;
  constexpr double kSpectrumTol = 1e-8;

  CommandResult out;
  out.report = header("decouple", cfg.name, opt);
  out.report["eps"] = eps;
  out.report["tolerances"] = {{"det_T_inv", kDetTol},
                              {"inverse_residual", kInverseTol},
                              {"offdiag_residual", kBlockTol},
                              {"spectrum", kSpectrumTol},
                              {"chang_update_tol", ChangOptions{}.tol},
                              {"chang_max_iter", ChangOptions{}.max_iter}};
  bool all_ok = true;
  Report cases = Report::array();
  for (std::size_t i = 0; i < in.a_full.size(); ++i) {
    for (std::size_t j = 0; j < in.fast.size(); ++j) {
      Report c;
      c["a_vertex"] = i;
      c["d_vertex"] = j;
      try {
        const ChangDecoupling dec = build_decoupling(in.a_full[i], in.B, in.C, in.fast[j], eps);
        // Spectrum of the full matrix against the union of the two blocks.
        const Matrix M = full_system_matrix(in.a_full[i], in.B, in.C, in.fast[j], eps);
        auto sorted_eigs = [](const Matrix& m) {
          Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(m, false).eigenvalues();
          std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
          return v;
        };
        auto full = sorted_eigs(M);
        auto split = sorted_eigs(dec.slow_block);
        auto fast = sorted_eigs(dec.fast_block);
        split.insert(split.end(), fast.begin(), fast.end());
        auto by_parts = [](std::complex<double> a, std::complex<double> b) {
          return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        };
        std::sort(full.begin(), full.end(), by_parts);
        std::sort(split.begin(), split.end(), by_parts);
        double spec_err = 0.0;
        for (std::size_t k = 0; k < full.size(); ++k)
          spec_err = std::max(spec_err, std::abs(full[k] - split[k]) / std::max(1.0, std::abs(full[k])));

        const bool ok = std::abs(dec.det_T_inv - 1.0) <= kDetTol && dec.inverse_residual <= kInverseTol &&
                        dec.offdiag_residual <= kBlockTol && spec_err <= kSpectrumTol;
        all_ok = all_ok && ok;
        c["L"] = to_json(dec.L);
        c["H"] = to_json(dec.H);
        c["T"] = to_json(dec.T);
        c["T_inv"] = to_json(dec.T_inv);
        c["slow_block"] = to_json(dec.slow_block);
        c["fast_block"] = to_json(dec.fast_block);
        c["residual_L"] = num(dec.residual_L);
        c["residual_H"] = num(dec.residual_H);
        c["det_T_inv"] = num(dec.det_T_inv);
        c["inverse_residual"] = num(dec.inverse_residual);
        c["offdiag_residual"] = num(dec.offdiag_residual);
        c["spectrum_relative_error"] = num(spec_err);
        c["ok"] = ok;
        out.summary.push_back("vertex (" + std::to_string(i) + "," + std::to_string(j) + "): offdiag residual " +
                              fmt(dec.offdiag_residual) + ", det(T_inv) - 1 = " + fmt(dec.det_T_inv - 1.0) +
                              (ok ? "" : "  [CHECK FAILED]"));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::SingularD) throw;
        all_ok = false;
        c["error"] = e.what();
        c["ok"] = false;
        out.summary.push_back("vertex (" + std::to_string(i) + "," + std::to_string(j) + "): " + e.what());
      }
      cases.push_back(std::move(c));
    }
  }
  out.report["decouplings"] = std::move(cases);
  out.report["ok"] = all_ok;
  out.exit_code = all_ok ? kExitOk : kExitCheckFailed;
  return out;
}

CommandResult cmd_epsilon_star(const SystemConfig& cfg, const CommandOptions& opt) {
  const SPDominanceCertificate& cert = need_certificate(cfg);
  const CertificationInputs in = certification_inputs(cfg);
  const SPCertResult base = certify_sp(cert, in.slow, in.fast);

  EpsilonStarOptions eo;
  eo.eps_max = cfg.epsilon_search.eps_max;
  eo.bisection_steps = cfg.epsilon_search.steps;
  eo.coupling_bound = cfg.epsilon_search.coupling_bound;

  CommandResult out;
  out.report = header("epsilon-star", cfg.name, opt);
  out.report["certificate_feasible"] = base.feasible();
  out.report["search"] = {{"eps_max", eo.eps_max},
                          {"eps_floor", eo.eps_floor},
                          {"bisection_steps", eo.bisection_steps},
                          {"verification_points", eo.verification_points},
                          {"verification_decades", eo.verification_decades},
                          {"block_sigma", cert.block_sigma()},
                          {"block_rate", cert.lambda_r()},
                          {"coupling_bound", eo.coupling_bound ? Report(*eo.coupling_bound) : Report(nullptr)}};
  try {
    const EpsilonStarResult r = epsilon_star(in.a_full, in.B, in.C, in.fast, cert, eo);
    out.report["status"] = "ok";
    out.report["eps_hat"] = r.eps_hat;
    out.report["hit_eps_max"] = r.hit_eps_max;
    out.report["at_eps_hat"] = to_json(r.at_eps_hat);
    Report ver = Report::array();
    for (const auto& c : r.verification) ver.push_back(to_json(c));
    out.report["verification"] = std::move(ver);
    out.report["violations"] = r.violations;
    const bool ok = base.feasible() && r.violations == 0;
    out.exit_code = ok ? kExitOk : kExitCheckFailed;
    out.summary.push_back("certified eps_hat = " + fmt(r.eps_hat) + (r.hit_eps_max ? " (eps_max)" : ""));
    if (r.violations > 0)
      out.summary.push_back(std::to_string(r.violations) + " verification point(s) below eps_hat were infeasible");
    if (!base.feasible()) out.summary.push_back("certificate itself is infeasible on the slow/fast polytopes");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InfeasibleAtFloor) throw;
    out.report["status"] = "infeasible_at_floor";
    out.report["error"] = e.what();
    out.exit_code = kExitCheckFailed;
    out.summary.push_back(e.what());
  }
  return out;
}

CommandResult cmd_simulate(const SystemConfig& cfg, double t_final, const std::filesystem::path& out_dir,
                           const CommandOptions& opt) {
  if (!(t_final > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_final must be positive");
  if (cfg.initial_conditions.empty()) throw Error(ErrorCode::ConfigError, "config has no initial_conditions");
  const VectorField field = make_field(cfg);
  const double h = integration_step(cfg);
  const EquilibriumSearch es;
  const std::vector<Vector> equilibria = find_equilibria(field, cfg.omega(), cfg.equilibrium_grid, es);

  std::filesystem::create_directories(out_dir);
  const std::size_t n = cfg.initial_conditions.size();
  std::vector<Report> rows(n);
  std::vector<int> converged(n, 0);
  std::vector<int> failed(n, 0);
  parallel_for(n, [&](std::size_t i) {
    Report row;
    row["index"] = i + 1;
    row["initial"] = to_json(cfg.initial_conditions[i]);
    try {
      const Trajectory traj = integrate(field, cfg.initial_conditions[i], 0.0, t_final, h);
      const std::string csv = "trajectory_" + std::to_string(i + 1) + ".csv";
      std::ofstream f(out_dir / csv);
      write_csv(f, traj, cfg.n_r(), cfg.n_f());
      const auto match = detect_convergence(traj, equilibria, kDefaultConvergenceTol);
      double nearest = std::numeric_limits<double>::infinity();
      for (const Vector& e : equilibria) nearest = std::min(nearest, (e - traj.final_state()).norm());
      row["csv"] = csv;
      row["samples"] = traj.size();
      row["final"] = to_json(traj.final_state());
      row["final_quarter_variation"] = num(final_quarter_variation(traj));
      row["nearest_equilibrium_distance"] = num(nearest);
      row["converged"] = match.has_value();
      row["equilibrium"] = match ? Report(*match) : Report(nullptr);
      converged[i] = match.has_value();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      row["converged"] = false;
      row["error"] = e.what();
      failed[i] = 1;
    }
    rows[i] = std::move(row);
  });

  CommandResult out;
  out.report = header("simulate", cfg.name, opt);
  out.report["eps"] = cfg.eps();
  out.report["t_final"] = t_final;
  out.report["step"] = h;
  out.report["method"] = "rk4";
  out.report["tolerances"] = {{"convergence_tol", kDefaultConvergenceTol},
                              {"equilibrium_merge_radius", es.merge_radius},
                              {"equilibrium_residual_tol", es.residual_tol},
                              {"equilibrium_grid", cfg.equilibrium_grid}};
  Report eq = Report::array();
  for (const Vector& e : equilibria) eq.push_back(to_json(e));
  out.report["equilibria"] = std::move(eq);
  Report traj = Report::array();
  for (auto& r : rows) traj.push_back(std::move(r));
  out.report["trajectories"] = std::move(traj);
  const int n_conv = static_cast<int>(std::count(converged.begin(), converged.end(), 1));
  const int n_fail = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
  out.report["converged_count"] = n_conv;
  out.report["all_converged"] = n_conv == static_cast<int>(n);
  out.exit_code = n_fail == 0 ? kExitOk : kExitCheckFailed;
  out.summary.push_back(std::to_string(equilibria.size()) + " equilibria found in omega");
  out.summary.push_back(std::to_string(n_conv) + "/" + std::to_string(n) + " trajectories converged (tol " +
                        fmt(kDefaultConvergenceTol) + ")");
  if (n_fail > 0) out.summary.push_back(std::to_string(n_fail) + " trajectories blew up");
  return out;
}

PairProbe probe_pair(const VectorField& field, const MatrixConeSpec& cone, const Vector& a, const Vector& b,
                     double t_final, double h, int samples, double lambda) {
  if ((a - b).squaredNorm() == 0.0)
    throw Error(ErrorCode::InvalidArgument, "probe pair has identical initial states");
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  PairProbe p;
  p.worst_ratio = -std::numeric_limits<double>::infinity();
  p.min_weighted_ratio = 1.0;
  Vector sa = a;
  Vector sb = b;
  double t_prev = 0.0;
  Vector d = a - b;
  double w_prev = quad_form(cone.P(), d);
  for (int k = 1; k <= samples; ++k) {
    const double t = t_final * k / samples;
    sa = advance(field, std::move(sa), t_prev, t, h);
    sb = advance(field, std::move(sb), t_prev, t, h);
    t_prev = t;
    d = sa - sb;
    const double q = quad_form(cone.P(), d);
    const double nn = d.squaredNorm();
    if (nn > 0.0) p.worst_ratio = std::max(p.worst_ratio, q / nn);
    switch (cone_locate(cone, d)) {
      case ConeLocation::Interior: ++p.interior; break;
      case ConeLocation::Boundary: ++p.boundary; break;
      case ConeLocation::Outside: ++p.outside; break;
    }
    const double w = std::exp(2.0 * lambda * t) * q;
    if (w_prev > 0.0) {
      const double ratio = w / w_prev;
      p.min_weighted_ratio = std::min(p.min_weighted_ratio, ratio);
      if (ratio > 1.0 + 1e-9) ++p.weighted_increases;
    }
    w_prev = w;
  }
  return p;
}

CommandResult cmd_monotone_probe(const SystemConfig& cfg, int n_pairs, double t_final, std::uint64_t seed,
                                 const CommandOptions& opt) {
  if (n_pairs < 1) throw Error(ErrorCode::InvalidArgument, "need at least one pair");
  if (!(t_final > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_final must be positive");
  const SPDominanceCertificate& cert = need_certificate(cfg);
  const MatrixConeSpec cone = make_cone(cert.full_cone_matrix());
  const VectorField field = make_field(cfg);
  const double h = integration_step(cfg);
  const std::vector<Interval> box = cfg.omega();
  const bool stability_mode = cone.rank_k() == 0;

  // Sampling is sequential so the pairs depend only on the seed.
  SplitMix64 rng(seed);
  std::vector<std::pair<Vector, Vector>> pairs;
  long long total_attempts = 0;
  for (int k = 0; k < n_pairs; ++k) {
    for (int attempt = 1;; ++attempt) {
      if (attempt > kProbeMaxAttempts) {
        throw Error(ErrorCode::SamplingExhausted, "no pair with difference in the cone after " +
                                                      std::to_string(kProbeMaxAttempts) + " draws");
      }
      Vector a(field.n());
      Vector b(field.n());
      for (int i = 0; i < field.n(); ++i) a[i] = rng.uniform(box[static_cast<std::size_t>(i)].lo, box[static_cast<std::size_t>(i)].hi);
      for (int i = 0; i < field.n(); ++i) b[i] = rng.uniform(box[static_cast<std::size_t>(i)].lo, box[static_cast<std::size_t>(i)].hi);
      ++total_attempts;
      const Vector d = a - b;
      if (d.squaredNorm() == 0.0) continue;
      if (!stability_mode && cone_locate(cone, d) == ConeLocation::Outside) continue;
      pairs.emplace_back(std::move(a), std::move(b));
      break;
    }
  }

  std::vector<PairProbe> results(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    results[i] = probe_pair(field, cone, pairs[i].first, pairs[i].second, t_final, h, kProbeSamples,
                            cert.lambda_r());
  });

  long long interior = 0, boundary = 0, outside = 0, increases = 0;
  double worst = -std::numeric_limits<double>::infinity();
  double min_weighted = 1.0;
  std::size_t worst_pair = 0;
  Report per_pair = Report::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const PairProbe& r = results[i];
    interior += r.interior;
    boundary += r.boundary;
    outside += r.outside;
    increases += r.weighted_increases;
    min_weighted = std::min(min_weighted, r.min_weighted_ratio);
    if (r.worst_ratio > worst) {
      worst = r.worst_ratio;
      worst_pair = i;
    }
    Report pr;
    pr["a"] = to_json(pairs[i].first);
    pr["b"] = to_json(pairs[i].second);
    pr["interior"] = r.interior;
    pr["boundary"] = r.boundary;
    pr["outside"] = r.outside;
    pr["worst_ratio"] = num(r.worst_ratio);
    if (stability_mode) pr["weighted_increases"] = r.weighted_increases;
    per_pair.push_back(std::move(pr));
  }
  const long long total = static_cast<long long>(results.size()) * kProbeSamples;
  const double boundary_fraction = static_cast<double>(boundary) / static_cast<double>(total);

  CommandResult out;
  out.report = header("monotone-probe", cfg.name, opt);
  out.report["mode"] = stability_mode ? "weighted_decrease" : "cone_invariance";
  out.report["cone_rank"] = cone.rank_k();
  out.report["cone_matrix"] = to_json(cone.P().matrix());
  out.report["seed"] = seed;
  out.report["pairs"] = n_pairs;
  out.report["t_final"] = t_final;
  out.report["step"] = h;
  out.report["samples_per_pair"] = kProbeSamples;
  out.report["sampling_draws"] = total_attempts;
  out.report["tolerances"] = {{"cone_tol", kDefaultConeTol},
                              {"boundary_allowance", kProbeBoundaryAllowance},
                              {"weighted_increase_tol", 1e-9},
                              {"max_sampling_draws_per_pair", kProbeMaxAttempts}};
  out.report["interior"] = interior;
  out.report["boundary"] = boundary;
  out.report["outside"] = outside;
  out.report["boundary_fraction"] = boundary_fraction;
  out.report["interior_fraction"] = static_cast<double>(interior) / static_cast<double>(total);
  out.report["worst_ratio"] = num(worst);
  out.report["worst_pair"] = worst_pair;

  bool pass = false;
  if (stability_mode) {
    out.report["weighted_increases"] = increases;
    out.report["min_weighted_ratio"] = num(min_weighted);
    pass = increases == 0;
    out.summary.push_back("weighted quadratic form increases: " + std::to_string(increases) + " of " +
                          std::to_string(total) + " steps");
  } else {
    pass = outside == 0 && boundary_fraction <= kProbeBoundaryAllowance;
    out.summary.push_back("interior " + std::to_string(interior) + ", boundary " + std::to_string(boundary) +
                          ", outside " + std::to_string(outside) + " of " + std::to_string(total) + " samples");
    if (boundary > 0) out.summary.push_back("warning: differences grazed the cone boundary");
  }
  out.report["pass"] = pass;
  out.report["per_pair"] = std::move(per_pair);
  out.exit_code = pass ? kExitOk : kExitCheckFailed;
  return out;
}

CommandResult cmd_reproduce_paper(const std::filesystem::path& out_dir, const ReproduceOverrides& overrides,
                                  const CommandOptions& opt) {
  constexpr double kTFinal = 9.0;
  constexpr int kPairs = 100;
  constexpr std::uint64_t kSeed = 42;
  constexpr std::size_t kExpectedEquilibria = 3;

  nlohmann::json j = nonlinear_spring_config_json();
  if (overrides.eps) j["eps"] = *overrides.eps;
  if (overrides.sigma_r) j["certificate"]["sigma_r"] = *overrides.sigma_r;
  const SystemConfig cfg = parse_config(j);

  std::filesystem::create_directories(out_dir);
  write_report(Report(j), out_dir / "config.json");

  const CommandOptions inner{false};
  CommandResult certify = cmd_certify(cfg, inner);
  CommandResult eps_star = cmd_epsilon_star(cfg, inner);
  CommandResult simulate = cmd_simulate(cfg, kTFinal, out_dir, inner);
  CommandResult probe = cmd_monotone_probe(cfg, kPairs, kTFinal, kSeed, inner);

  const bool cert_ok = certify.exit_code == kExitOk;
  const bool eps_ok = eps_star.exit_code == kExitOk && eps_star.report.contains("eps_hat") &&
                      cfg.eps() <= eps_star.report["eps_hat"].get<double>();
  const bool eq_ok = simulate.report["equilibria"].size() == kExpectedEquilibria;
  const bool conv_ok = simulate.exit_code == kExitOk && simulate.report["all_converged"].get<bool>();
  const bool probe_ok = probe.exit_code == kExitOk;

  CommandResult out;
  out.report = header("reproduce-paper", cfg.name, opt);
  out.report["overrides"] = {{"eps", overrides.eps ? Report(*overrides.eps) : Report(nullptr)},
                             {"sigma_r", overrides.sigma_r ? Report(*overrides.sigma_r) : Report(nullptr)}};
  out.report["checks"] = {{"certificate_feasible", cert_ok},
                          {"eps_within_certified_range", eps_ok},
                          {"three_equilibria", eq_ok},
                          {"all_trajectories_converged", conv_ok},
                          {"strong_monotonicity_probe", probe_ok}};
  out.report["certify"] = std::move(certify.report);
  out.report["epsilon_star"] = std::move(eps_star.report);
  out.report["simulate"] = std::move(simulate.report);
  out.report["monotone_probe"] = std::move(probe.report);

  auto line = [](const char* name, bool ok) { return std::string(ok ? "pass  " : "FAIL  ") + name; };
  out.summary.push_back(line("certificate feasible", cert_ok));
  out.summary.push_back(line("eps within certified range", eps_ok));
  out.summary.push_back(line("three equilibria", eq_ok));
  out.summary.push_back(line("all trajectories converged", conv_ok));
  out.summary.push_back(line("strong monotonicity probe", probe_ok));
  const bool all = cert_ok && eps_ok && eq_ok && conv_ok && probe_ok;
  out.report["all_checks_passed"] = all;
  out.exit_code = all ? kExitOk : kExitCheckFailed;
  return out;
}

}  // namespace dominion
