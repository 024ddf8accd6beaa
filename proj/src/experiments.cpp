#include "sojourn/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>

#include "sojourn/delay_asymptotics.hpp"
#include "sojourn/parallel.hpp"

namespace sojourn {

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
  const ExperimentConfig& cfg;
  MomentumGrid grid;
  Mass mass;
  RunReport& report;
  std::filesystem::path out;

  std::string artifact(const std::string& name) {
    report.artifacts.push_back(name);
    return (out / name).string();
  }
};

// Runs one stage; computational errors are re-raised with the stage name and
// every check added inside the stage gets the stage's wall time.
void stage(Context& ctx, const std::string& name, const std::function<void()>& body) {
  std::size_t first = ctx.report.checks.size();
  auto t0 = Clock::now();
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.kind(), e.what());
  }
  double dt = std::chrono::duration<double>(Clock::now() - t0).count();
  std::size_t added = ctx.report.checks.size() - first;
  for (std::size_t i = first; i < ctx.report.checks.size(); ++i) ctx.report.checks[i].runtime = dt / added;
}

PacketConfig default_packet() {
  PacketConfig p;
  p.center = {1.6, -1.2, 2.0};
  p.width = 0.4;
  p.seed = {cplx(1.0, 0.0), cplx(0.3, 0.4), cplx(0.0, 0.8), cplx(-0.5, 0.2)};
  return p;
}

SpinorField make_packet(Context& ctx, std::size_t i) {
  PacketConfig p = i < ctx.cfg.packets.size() ? ctx.cfg.packets[i] : default_packet();
  return gaussian_packet(ctx.grid, ctx.mass, p.spec());
}

PacketSpec packet_spec(Context& ctx, std::size_t i) {
  return (i < ctx.cfg.packets.size() ? ctx.cfg.packets[i] : default_packet()).spec();
}

TimeQuadrature time_quadrature(Context& ctx) {
  const auto& q = ctx.cfg.quadrature;
  TimeQuadrature tq;
  if (q.dt > 0.0) {
    tq.dt = q.dt;
    tq.t_max = std::ceil(q.t_max / (4.0 * q.dt)) * 4.0 * q.dt;
    tq.eps_tail = q.eps_tail;
  } else {
    tq = default_time_quadrature(ctx.grid, ctx.mass, q.t_max, q.eps_tail);
  }
  tq.t_min = q.t_min;
  return tq;
}

SojournOptions sojourn_options(Context& ctx, const std::string& label) {
  SojournOptions o;
  o.ball = ctx.cfg.quadrature.ball == "lattice" ? BallQuadrature::Lattice : BallQuadrature::Spectral;
  o.packet_label = label;
  o.wrap_threshold = ctx.cfg.quadrature.wrap_threshold;
  return o;
}

std::vector<int> fit_powers(const ExperimentConfig& cfg) {
  std::vector<int> k;
  for (double v : cfg.quadrature.fit_powers) k.push_back(static_cast<int>(v));
  return k;
}

EnergyQuadrature energy_quadrature(Context& ctx, const PacketSpec& spec) {
  const auto& q = ctx.cfg.quadrature;
  EnergyWindow w = energy_window_for_packet(spec, ctx.mass, q.energy_k_sigma);
  return make_energy_quadrature({w}, q.energy_panels, q.energy_points, ctx.mass);
}

std::shared_ptr<const SphereQuadrature> sphere(Context& ctx) {
  return make_sphere_quadrature(ctx.cfg.quadrature.sphere_theta, ctx.cfg.quadrature.sphere_phi);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- sojourn-curve

void run_sojourn_curve(Context& ctx) {
  const auto& q = ctx.cfg.quadrature;
  if (q.R_list.size() < 2) throw Error(ErrorKind::Config, "quadrature.R_list: sojourn-curve needs at least 2 radii");
  SpinorField f = make_packet(ctx, 0);
  const bool two = ctx.cfg.packets.size() > 1;
  SpinorField g = two ? make_packet(ctx, 1) : SpinorField();
  const SpinorField& gr = two ? g : f;
  const bool cross = two && f.sector() != Sector::Mixed && g.sector() != Sector::Mixed && f.sector() != g.sector();
  TimeQuadrature tq = time_quadrature(ctx);

  SojournCurve curve;
  stage(ctx, "sojourn_curve", [&] {
    curve = sojourn_curve(f, gr, q.R_list, tq, sojourn_options(ctx, two ? "packets[0],packets[1]" : "packets[0]"));
    write_curve_csv(ctx.artifact("sojourn_curve.csv"), curve);
  });
  ctx.report.results["t_stop"] = curve.t_stop;
  ctx.report.results["dt"] = curve.dt;
  double max_err = 0.0;
  for (const auto& s : curve.samples) max_err = std::max(max_err, s.err);
  ctx.report.results["max_err"] = max_err;

  if (cross) {
    stage(ctx, "cross_sector", [&] {
      const auto& s = curve.samples;
      double ratio = std::abs(s.back().I) / std::abs(s.front().I);
      // the trend is read off the samples that stand above their own error
      std::vector<double> sig;
      for (const auto& x : s)
        if (std::abs(x.I) > x.err) sig.push_back(std::abs(x.I));
      int rises = 0;
      for (std::size_t j = 1; j < sig.size(); ++j)
        if (sig[j] >= sig[j - 1]) ++rises;
      ctx.report.results["abs_I_first"] = std::abs(s.front().I);
      ctx.report.results["abs_I_last"] = std::abs(s.back().I);
      ctx.report.add(make_check("cross_sector_ratio", ratio, 0.0, 0.1, "max"));
      ctx.report.add(make_check("cross_sector_non_decreasing_steps", rises, 0.0, 0.0, "max"));
      ctx.report.add(make_check("resolved_ladder_points", static_cast<double>(sig.size()), 0.0, 4.0, "min"));
    });
    return;
  }

  stage(ctx, "asymptotics", [&] {
    AsymptoticExpansion e = asymptotic_expansion(f, gr);
    CurveFit fit = fit_sojourn_curve(curve, q.fit_r_min, fit_powers(ctx.cfg));
    ctx.report.results["C1"] = e.C1.real();
    ctx.report.results["C0"] = e.C0.real();
    ctx.report.results["C1_imag"] = e.C1.imag();
    ctx.report.results["C0_imag"] = e.C0.imag();
    ctx.report.results["fit_slope"] = fit.slope;
    ctx.report.results["fit_intercept"] = fit.intercept;
    ctx.report.results["fit_rms_residual"] = fit.rms_residual;
    ctx.report.results["fit_points"] = static_cast<double>(fit.points);
    for (std::size_t k = 0; k < fit.tail.size(); ++k)
      ctx.report.results["fit_tail_R^-" + std::to_string(fit.powers[k])] = fit.tail[k];
    ctx.report.add(make_check("fit_slope_vs_leading_coefficient", fit.slope, e.C1.real(), 0.02, "rel"));
    ctx.report.add(make_check("fit_intercept_vs_constant_term", fit.intercept, e.C0.real(), 0.05, "rel"));

    const auto& s = curve.samples;
    std::vector<double> resid;
    for (const auto& x : s) resid.push_back(std::abs(x.I - (e.C1 * x.R + e.C0)));
    int bad = 0;
    for (std::size_t j = s.size() >= 3 ? s.size() - 2 : 1; j < s.size(); ++j)
      if (!(resid[j] < resid[j - 1])) ++bad;
    ctx.report.results["residual_last"] = resid.back();
    ctx.report.add(make_check("residual_strictly_decreasing_top3_violations", bad, 0.0, 0.0, "max"));
    if (!two) {
      int drops = 0;
      double im = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        im = std::max(im, std::abs(s[j].I.imag()));
        if (j > 0 && s[j].I.real() < s[j - 1].I.real()) ++drops;
      }
      ctx.report.add(make_check("curve_nondecreasing_violations", drops, 0.0, 0.0, "max"));
      ctx.report.add(make_check("max_imag_I", im, 0.0, 1e-10, "max"));
    }
  });
}

// ------------------------------------------------------------ asymptotics-check

PacketSpec random_packet(std::mt19937_64& rng, const MomentumGrid& grid, double sigma, int sign) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  // 5.5 sigma clear of the excluded origin cell, 8 sigma inside the box
  double pmin = 6.0 * sigma + 2.0 * grid.dp();
  double room = grid.p_max - 8.0 * sigma;
  if (room < pmin) throw Error(ErrorKind::InvalidArgument, "momentum box too small for random packets of this width");
  PacketSpec p;
  Vec3 dir{nd(rng), nd(rng), nd(rng)};
  double r = pmin + (room - pmin) * ud(rng);
  double nrm = norm3(dir);
  for (int a = 0; a < 3; ++a) p.center[a] = dir[a] * r / nrm;
  p.width = sigma;
  p.sign = sign;
  for (int c = 0; c < 4; ++c) p.seed[c] = cplx(nd(rng), nd(rng));
  return p;
}

// a second packet overlapping `a`: nearby centre, fresh spinor seed
PacketSpec nearby_packet(std::mt19937_64& rng, const PacketSpec& a, const MomentumGrid& grid) {
  std::normal_distribution<double> nd;
  PacketSpec b = a;
  double pmin = 6.0 * a.width + 2.0 * grid.dp();
  double room = grid.p_max - 8.0 * a.width;
  for (int tries = 0; tries < 100; ++tries) {
    for (int k = 0; k < 3; ++k) b.center[k] = a.center[k] + 0.5 * a.width * nd(rng);
    double r = norm3(b.center);
    if (r >= pmin && r <= room) break;
    b.center = a.center;
  }
  for (int c = 0; c < 4; ++c) b.seed[c] = cplx(nd(rng), nd(rng));
  return b;
}

void run_asymptotics_check(Context& ctx) {
  const std::size_t npk = std::max<std::size_t>(1, ctx.cfg.packets.size());
  stage(ctx, "self_pairs", [&] {
    double worst_im1 = 0.0, worst_im0 = 0.0, worst_speed = 0.0, worst_a0 = 0.0;
    for (std::size_t i = 0; i < npk; ++i) {
      SpinorField f = make_packet(ctx, i);
      PacketSpec spec = packet_spec(ctx, i);
      AsymptoticExpansion e = asymptotic_expansion(f, f);
      cplx a0 = constant_term_A0(f, f);
      double n2 = f.norm2();
      std::string tag = "packets[" + std::to_string(i) + "].";
      ctx.report.results[tag + "C1"] = e.C1.real();
      ctx.report.results[tag + "C0"] = e.C0.real();
      ctx.report.results[tag + "C0_A0"] = a0.real();
      worst_im1 = std::max(worst_im1, std::abs(e.C1.imag()) / n2);
      worst_im0 = std::max(worst_im0, std::abs(e.C0.imag()) / n2);
      worst_a0 = std::max(worst_a0, std::abs(e.C0 - a0) / std::max(std::abs(e.C0), 1e-300));
      double p0 = norm3(spec.center);
      double inv_speed = std::hypot(p0, ctx.mass.value()) / p0;
      worst_speed = std::max(worst_speed, std::abs(e.C1.real() / n2 - inv_speed) / inv_speed);
    }
    ctx.report.add(make_check("self_imag_C1_max", worst_im1, 0.0, 1e-12, "max"));
    ctx.report.add(make_check("self_imag_C0_max", worst_im0, 0.0, 1e-8, "max"));
    ctx.report.add(make_check("self_C0_vs_A0_max_rel", worst_a0, 0.0, 1e-6, "max"));
    ctx.report.add(make_check("self_C1_vs_inverse_group_speed_max_rel", worst_speed, 0.0, 0.01, "max"));
  });

  stage(ctx, "random_pairs", [&] {
    std::mt19937_64 rng(ctx.cfg.seed);
    const double sigma = packet_spec(ctx, 0).width;
    double worst_a0 = 0.0, worst_conj = 0.0, worst_cross = 0.0;
    for (int t = 0; t < ctx.cfg.trials; ++t) {
      int sign = (rng() & 1) ? 1 : -1;
      PacketSpec a = random_packet(rng, ctx.grid, sigma, sign);
      PacketSpec b = nearby_packet(rng, a, ctx.grid);
      SpinorField f = gaussian_packet(ctx.grid, ctx.mass, a);
      SpinorField g = gaussian_packet(ctx.grid, ctx.mass, b);
      cplx c0 = constant_term(f, g);
      cplx c0a = constant_term_A0(f, g);
      cplx c0r = constant_term(g, f);
      double scale = std::max(std::abs(c0), 1e-300);
      worst_a0 = std::max(worst_a0, std::abs(c0 - c0a) / scale);
      worst_conj = std::max(worst_conj, std::abs(c0r - std::conj(c0)) / scale);
      PacketSpec bo = b;
      bo.sign = -sign;
      SpinorField h = gaussian_packet(ctx.grid, ctx.mass, bo);
      AsymptoticExpansion x = asymptotic_expansion(f, h);
      worst_cross = std::max({worst_cross, std::abs(x.C1), std::abs(x.C0)});
    }
    ctx.report.results["random_pairs"] = ctx.cfg.trials;
    ctx.report.add(make_check("pairs_C0_vs_A0_max_rel", worst_a0, 0.0, 1e-6, "max"));
    ctx.report.add(make_check("pairs_conjugation_max_rel", worst_conj, 0.0, 1e-10, "max"));
    ctx.report.add(make_check("opposite_sector_coefficients_max", worst_cross, 0.0, 1e-14, "max"));
  });
}

// ----------------------------------------------------------- delay-three-routes

MultiplierSMatrix multiplier(Context& ctx) {
  PhaseShiftModel model;
  model.channels = ctx.cfg.model.channels;
  return MultiplierSMatrix(model, ctx.mass);
}

void run_delay_three_routes(Context& ctx) {
  if (ctx.cfg.model.channels.empty()) throw Error(ErrorKind::Config, "model.channels: delay-three-routes needs a phase model");
  SpinorField f = make_packet(ctx, 0);
  PacketSpec spec = packet_spec(ctx, 0);
  MultiplierSMatrix s = multiplier(ctx);

  CommutatorDelay cd;
  EwDelay ew;
  SojournDelay sd;
  stage(ctx, "commutator", [&] {
    cd = commutator_delay_detail(f, s);
    ctx.report.add(make_check("commutator_imag_residue", std::abs(cd.imag_residue), 0.0, 1e-9, "max"));
    SpinorField sf = s.apply(f);
    double c1f = leading_coefficient(f, f).real(), c1s = leading_coefficient(sf, sf).real();
    ctx.report.add(make_check("C1_invariance", std::abs(c1s - c1f), 0.0, 1e-12, "max"));
  });
  stage(ctx, "eisenbud_wigner", [&] {
    EnergyQuadrature eq = energy_quadrature(ctx, spec);
    ew = ew_delay_integral(f, s, eq, sphere(ctx));
  });
  stage(ctx, "sojourn", [&] {
    sd = sojourn_delay(f, s, ctx.cfg.quadrature.R_list, time_quadrature(ctx), sojourn_options(ctx, "packets[0]"));
    std::string path = ctx.artifact("delay_routes.csv");
    std::string text = "R,D,D_err\n";
    for (std::size_t j = 0; j < sd.R.size(); ++j) text += num(sd.R[j]) + "," + num(sd.D[j]) + "," + num(sd.D_err[j]) + "\n";
    write_text_file(path, text);
  });

  auto& r = ctx.report.results;
  r["delta_T_commutator"] = cd.value;
  r["delta_T_eisenbud_wigner"] = ew.value;
  r["delta_T_sojourn"] = sd.value;
  r["delta_T_sojourn_err"] = sd.err;
  r["sojourn_fit_residual"] = sd.fit_residual;
  r["sojourn_tail_coefficient"] = sd.tail_coefficient;
  r["sojourn_slope"] = sd.slope;
  r["C1"] = sd.c1;
  r["dev_commutator_ew"] = std::abs(cd.value - ew.value);
  r["dev_commutator_sojourn"] = std::abs(cd.value - sd.value);
  r["dev_ew_sojourn"] = std::abs(ew.value - sd.value);

  ctx.report.add(make_check("commutator_vs_eisenbud_wigner", ew.value, cd.value, 1e-6, "rel"));
  ctx.report.add(
      make_check("sojourn_vs_commutator", sd.value, cd.value, std::max(0.05 * std::abs(cd.value), 3.0 * sd.err), "abs"));
  ctx.report.add(
      make_check("sojourn_vs_eisenbud_wigner", sd.value, ew.value, std::max(0.05 * std::abs(ew.value), 3.0 * sd.err), "abs"));
  ctx.report.add(make_check("sojourn_slope_over_C1", std::abs(sd.slope) / sd.c1, 0.0, 0.01, "max"));
}

// -------------------------------------------------------------------- ssf-trace

// exp(i (A + E B + E^2 C)) for fixed random Hermitian A, B, C
MatrixFunctionFamily random_family(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> nd;
  auto herm = [&](double scale) {
    Eigen::MatrixXcd X(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) X(i, j) = cplx(nd(rng), nd(rng));
    Eigen::MatrixXcd H = 0.5 * (X + X.adjoint());
    return Eigen::MatrixXcd(H * (scale / H.norm()));
  };
  Eigen::MatrixXcd A = herm(2.0), B = herm(1.0), C = herm(0.3);
  return MatrixFunctionFamily([A, B, C](double E) { return unitary_exp(A + E * B + E * E * C); });
}

void run_ssf_trace(Context& ctx) {
  if (ctx.cfg.model.channels.empty()) throw Error(ErrorKind::Config, "model.channels: ssf-trace needs a phase model");
  const auto& q = ctx.cfg.quadrature;
  PhaseShiftModel model;
  model.channels = ctx.cfg.model.channels;
  PhaseShiftFamily family(model);
  std::vector<double> path;
  for (int i = 0; i < q.e_count; ++i) path.push_back(q.e_min + (q.e_max - q.e_min) * i / (q.e_count - 1));

  std::vector<SsfSample> xi;
  std::vector<double> trace, resid;
  stage(ctx, "ssf_branch", [&] {
    xi = ssf_from_determinant(family, path);
    double worst = 0.0, worst_closed = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      double E = path[i];
      ShellOperator T = eisenbud_wigner_matrix(family, E, q.dE_step);
      trace.push_back(T.matrix.trace().real());
      resid.push_back(trace_delay_check(family, E, q.dE_step));
      worst = std::max(worst, resid.back());
      worst_closed = std::max(worst_closed, std::abs(xi[i].xi + model.total_phase(E) / kPi));
    }
    write_ssf_csv(ctx.artifact("ssf.csv"), xi, trace, resid);
    ctx.report.results["energies"] = static_cast<double>(path.size());
    ctx.report.results["xi_first"] = xi.front().xi;
    ctx.report.results["xi_last"] = xi.back().xi;
    ctx.report.add(make_check("trace_delay_residual_max", worst, 0.0, 1e-8, "max"));
    ctx.report.add(make_check("xi_vs_phase_sum_max", worst_closed, 0.0, 1e-10, "max"));
  });

  stage(ctx, "finite_difference_order", [&] {
    double h0 = 8.0 * q.dE_step;
    std::vector<double> agg;
    for (int level = 0; level < 3; ++level) {
      double h = h0 / std::pow(2.0, level), s = 0.0;
      for (double E : path) s += trace_delay_check_fd(family, E, h);
      agg.push_back(s);
    }
    double order = std::log2(agg[1] / agg[2]);
    ctx.report.results["fd_order_coarse"] = std::log2(agg[0] / agg[1]);
    ctx.report.results["fd_order"] = order;
    ctx.report.results["fd_residual_finest"] = agg[2] / path.size();
    ctx.report.add(make_check("fd_convergence_order", order, 2.0, 0.2, "abs"));
  });

  stage(ctx, "jacobi", [&] {
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> ud(q.e_min, q.e_max);
    double worst = 0.0;
    for (int t = 0; t < ctx.cfg.trials; ++t) {
      MatrixFunctionFamily fam = random_family(rng, 8);
      double E = ud(rng);
      worst = std::max(worst, jacobi_residual(fam, E, 1e-5));
    }
    ctx.report.results["jacobi_families"] = ctx.cfg.trials;
    ctx.report.add(make_check("jacobi_residual_max", worst, 0.0, 1e-7, "max"));
  });
}

// ----------------------------------------------------------------- born-scaling

void run_born_scaling(Context& ctx) {
  const auto& q = ctx.cfg.quadrature;
  std::vector<double> amps = ctx.cfg.model.amplitudes;
  if (amps.empty())
    for (double k : {1.0, 2.0, 4.0, 8.0, 16.0}) amps.push_back(k * ctx.cfg.model.potential.amplitude);
  if (amps.size() < 2) throw Error(ErrorKind::Config, "model.amplitudes: need at least 2 amplitudes");
  const double E = q.e_min;
  auto sq = sphere(ctx);
  std::vector<double> born, expo, herm;
  stage(ctx, "born_sweep", [&] {
    std::string text = "amplitude,born_defect,exp_defect,hermiticity_defect,fiber_defect\n";
    for (double a : amps) {
      PotentialModel V = ctx.cfg.model.potential;
      V.amplitude = a;
      ShellOperator K = born_kernel_weighted(V, E, sq, ctx.mass);
      ShellOperator Sb = born_shell_kernel(V, E, sq, ctx.mass);
      ShellOperator Se = unitary_exponential_smatrix(V, E, sq, ctx.mass);
      born.push_back(Sb.unitarity_defect());
      expo.push_back(Se.unitarity_defect());
      herm.push_back(K.hermiticity_defect());
      text += num(a) + "," + num(born.back()) + "," + num(expo.back()) + "," + num(herm.back()) + "," +
              num(K.fiber_defect()) + "\n";
    }
    write_text_file(ctx.artifact("born.csv"), text);
  });
  stage(ctx, "born_checks", [&] {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < amps.size(); ++i) {
      lx.push_back(std::log(amps[i]));
      ly.push_back(std::log(born[i]));
    }
    LinearFit fit = least_squares(lx, ly, {[](double) { return 1.0; }, [](double x) { return x; }});
    double ratio = *std::max_element(amps.begin(), amps.end()) / *std::min_element(amps.begin(), amps.end());
    ctx.report.results["born_exponent"] = fit.coef[1];
    ctx.report.results["shell_energy"] = E;
    ctx.report.results["shell_nodes"] = static_cast<double>(sq->size());
    ctx.report.add(make_check("born_defect_exponent", fit.coef[1], 2.0, 0.1, "abs"));
    ctx.report.add(make_check("amplitude_sweep_ratio", ratio, 0.0, 16.0, "min"));
    ctx.report.add(make_check("exp_unitarity_defect_max", *std::max_element(expo.begin(), expo.end()), 0.0, 1e-10, "max"));
    ctx.report.add(make_check("kernel_hermiticity_defect_max", *std::max_element(herm.begin(), herm.end()), 0.0, 1e-10, "max"));
  });
}

// -------------------------------------------------------------- invariant-suite

void run_invariant_suite(Context& ctx) {
  stage(ctx, "algebra", [&] {
    const auto& D = standard_matrices();
    const Matrix4 I = Matrix4::Identity();
    double cliff = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        Matrix4 ac = D.alpha(a) * D.alpha(b) + D.alpha(b) * D.alpha(a);
        cliff = std::max(cliff, (ac - (a == b ? 2.0 : 0.0) * I).cwiseAbs().maxCoeff());
      }
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> ud(-5.0, 5.0);
    double idem = 0.0, orth = 0.0, comp = 0.0, eig = 0.0;
    for (int t = 0; t < 1000; ++t) {
      Vec3 xi{ud(rng), ud(rng), ud(rng)};
      Matrix4 h = symbol_h0(xi, ctx.mass).matrix();
      Matrix4 pp = energy_projector(xi, ctx.mass, 1).matrix(), pm = energy_projector(xi, ctx.mass, -1).matrix();
      double e = dispersion(xi, ctx.mass.value());
      idem = std::max({idem, (pp * pp - pp).cwiseAbs().maxCoeff(), (pm * pm - pm).cwiseAbs().maxCoeff()});
      orth = std::max(orth, (pp * pm).cwiseAbs().maxCoeff());
      comp = std::max(comp, (pp + pm - I).cwiseAbs().maxCoeff());
      eig = std::max({eig, (h * pp - e * pp).cwiseAbs().maxCoeff(), (h * pm + e * pm).cwiseAbs().maxCoeff()});
    }
    ctx.report.add(make_check("clifford_relations", cliff, 0.0, 1e-13, "max"));
    ctx.report.add(make_check("projector_idempotence", idem, 0.0, 1e-13, "max"));
    ctx.report.add(make_check("projector_orthogonality", orth, 0.0, 1e-13, "max"));
    ctx.report.add(make_check("projector_completeness", comp, 0.0, 1e-13, "max"));
    ctx.report.add(make_check("h0_eigen_relation", eig, 0.0, 1e-13, "max"));
  });

  SpinorField f = make_packet(ctx, 0);
  stage(ctx, "field", [&] {
    ctx.report.add(make_check("packet_norm", f.norm2(), 1.0, 1e-12, "abs"));
    SpinorField back = from_position(to_position(f), f.mass(), f.sector());
    double rt = 0.0;
    for (std::size_t i = 0; i < ctx.grid.size(); ++i) rt = std::max(rt, (back.at(i) - f.at(i)).norm());
    ctx.report.add(make_check("fft_round_trip", rt, 0.0, 1e-12, "max"));
    SpinorField a = free_evolve(f, 7.3);
    ctx.report.add(make_check("evolution_unitarity", std::abs(a.norm2() - f.norm2()), 0.0, 1e-12, "max"));
    SpinorField b = free_evolve(free_evolve(f, 2.1), 5.2);
    double gl = 0.0;
    for (std::size_t i = 0; i < ctx.grid.size(); ++i) gl = std::max(gl, (a.at(i) - b.at(i)).norm());
    ctx.report.add(make_check("evolution_group_law", gl, 0.0, 1e-12, "max"));
    SpinorField mixed(ctx.grid, ctx.mass, Sector::Mixed);
    for (int c = 0; c < 4; ++c) mixed.component(c) = f.component(c);
    mixed = mixed + free_evolve(f, 1.0);
    mixed.set_sector(Sector::Mixed);
    cplx ov = inner_product(project_energy(mixed, 1), project_energy(mixed, -1));
    ctx.report.add(make_check("sector_orthogonality", std::abs(ov), 0.0, 1e-14, "max"));
  });
  stage(ctx, "spectral", [&] {
    EnergyQuadrature eq = energy_quadrature(ctx, packet_spec(ctx, 0));
    auto sq = sphere(ctx);
    ParsevalResult pr = parseval_check(f, eq, sq);
    double diag = diagonalization_residual(f, eq, sq);
    ctx.report.results["parseval_defect"] = pr.defect;
    ctx.report.results["diagonalization_residual"] = diag;
    ctx.report.add(make_check("parseval_defect", pr.defect, 0.0, 1e-6 * pr.norm2, "max"));
    ctx.report.add(make_check("diagonalization_residual", diag, 0.0, 1e-8 * std::sqrt(pr.norm2), "max"));
  });
  stage(ctx, "multiplier", [&] {
    PhaseShiftModel model;
    model.channels = ctx.cfg.model.channels;
    if (model.channels.empty()) {
      PhaseChannel c;
      c.family = PhaseFamily::BreitWigner;
      c.e_res = 3.0;
      c.gamma = 0.5;
      model.channels.push_back(c);
    }
    MultiplierSMatrix s(model, ctx.mass);
    SpinorField sf = s.apply(f);
    double c1f = leading_coefficient(f, f).real(), c1s = leading_coefficient(sf, sf).real();
    ctx.report.add(make_check("multiplier_C1_invariance", std::abs(c1s - c1f), 0.0, 1e-12, "max"));
    ctx.report.add(make_check("multiplier_norm_invariance", std::abs(sf.norm2() - f.norm2()), 0.0, 1e-12, "max"));
    cplx c0 = constant_term(f, f);
    ctx.report.add(make_check("self_constant_term_imag", std::abs(c0.imag()), 0.0, 1e-8, "max"));
  });
}

}  // namespace

ExperimentConfig default_config(const std::string& experiment) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    throw Error(ErrorKind::Config, "experiment: unknown experiment '" + experiment + "'");
  ExperimentConfig c;
  c.experiment = experiment;
  c.grid = {64, 6.0};
  c.packets = {default_packet()};
  c.quadrature.sphere_theta = 32;
  c.quadrature.sphere_phi = 64;
  if (experiment == "sojourn-curve") {
    c.grid = {96, 7.2};
    c.packets[0].center = {2.3, 2.3, 2.3};
    c.packets[0].width = 0.6;
    c.quadrature.R_list.clear();
    for (int i = 0; i <= 16; ++i) c.quadrature.R_list.push_back(4.0 + 0.5 * i);
    c.quadrature.fit_r_min = 6.0;
    c.quadrature.fit_powers = {1.0, 3.0, 5.0, 7.0};
    c.quadrature.dt = 0.05;
    c.quadrature.t_max = 60.0;
    c.quadrature.eps_tail = 1e-6;
  }
  if (experiment == "delay-three-routes") {
    // slow packet, resonance at its central energy
    c.grid = {96, 2.8};
    c.packets[0].center = {0.0, 0.0, 1.2};
    c.packets[0].width = 0.2;
    PhaseChannel ch;
    ch.family = PhaseFamily::BreitWigner;
    ch.e_res = std::hypot(1.2, 1.0);
    ch.gamma = 1.0;
    c.model.channels = {ch};
    c.quadrature.R_list = {8.0, 12.0, 16.0, 20.0};
    c.quadrature.dt = 0.4;
    c.quadrature.t_max = 200.0;
    c.quadrature.eps_tail = 1e-4;
    c.quadrature.wrap_threshold = 1e-6;
    c.quadrature.energy_panels = 12;
    c.quadrature.sphere_theta = 32;
    c.quadrature.sphere_phi = 64;
  }
  if (experiment == "ssf-trace") {
    PhaseChannel a, b;
    a.family = PhaseFamily::BreitWigner;
    a.e_res = 2.5;
    a.gamma = 0.5;
    b.family = PhaseFamily::Bump;
    b.amplitude = 0.3;
    b.center = 3.0;
    b.width = 0.5;
    c.model.channels = {a, b};
    c.quadrature.e_min = 1.5;
    c.quadrature.e_max = 4.0;
    c.quadrature.e_count = 50;
  }
  if (experiment == "born-scaling") {
    c.model.potential.amplitude = 0.01;
    c.quadrature.sphere_theta = 8;
    c.quadrature.sphere_phi = 16;
    c.quadrature.e_min = 2.0;
  }
  if (experiment == "asymptotics-check") c.trials = 20;
  return c;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  parallel::set_worker_count(cfg.workers);
  drain_warnings();
  RunReport report;
  report.experiment = cfg.experiment;
  report.workers = cfg.workers;
  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + cfg.output_dir + ": " + ec.message());

  MomentumGrid grid;
  Mass mass;
  try {
    grid = make_grid(cfg.grid.n, cfg.grid.p_max);
    mass = Mass(cfg.mass);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("grid: ") + e.what());
  }
  Context ctx{cfg, grid, mass, report, cfg.output_dir};
  try {
    if (cfg.experiment == "sojourn-curve") run_sojourn_curve(ctx);
    else if (cfg.experiment == "asymptotics-check") run_asymptotics_check(ctx);
    else if (cfg.experiment == "delay-three-routes") run_delay_three_routes(ctx);
    else if (cfg.experiment == "ssf-trace") run_ssf_trace(ctx);
    else if (cfg.experiment == "born-scaling") run_born_scaling(ctx);
    else if (cfg.experiment == "invariant-suite") run_invariant_suite(ctx);
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw StageError("setup", e.kind(), e.what());
  }
  for (const auto& w : drain_warnings()) report.warnings.push_back(w.code + ": " + w.message);
  return report;
}

}  // namespace sojourn
