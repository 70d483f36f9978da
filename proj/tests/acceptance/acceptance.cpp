// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "attstab/attstab.hpp"
#include "oracles.hpp"

using namespace attstab;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

double min_condition_gap(const SigmaTriple& s) {
  const PhiPair p = phis(s);
  return std::min({std::abs(s.s2), std::abs(p.phi1), std::abs(p.phi2), std::abs(p.delta)});
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// 1. Closed-form eigenvalues against the numeric root oracle.
Outcome eigenvalues() {
  Outcome o;
  const std::vector<Complex> want{{0, std::sqrt(0.5)}, {0, -std::sqrt(0.5)}, {0, 1.452745},
                                  {0, -1.452745}, {0, 0.435352}, {0, -0.435352}};
  const SpacecraftInertia ref{100.0, 120.0, 80.0};
  const EigenSet e = closed_form_eigenvalues(sigmas_from_inertia(ref), OrbitalRate(1.0));
  const double vs_listed = oracle::multiset_distance({e.begin(), e.end()}, want);
  const double vs_numeric =
      oracle::multiset_distance({e.begin(), e.end()}, poly_roots(char_poly_coeffs(build_system(ref, OrbitalRate(1.0)).a)));
  // The listed values carry six decimals.
  o.ok = vs_listed <= 1e-6 && vs_numeric <= 1e-8;

  oracle::InertiaSampler sample(1001);
  double worst = vs_numeric;
  int n = 0;
  while (n < 500) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const SigmaTriple s = sigmas_from_inertia(j);
    if (!is_lyapunov_stable(s, 0.0)) continue;
    ++n;
    const EigenSet c = closed_form_eigenvalues(s, OrbitalRate(1.0));
    const auto roots = poly_roots(char_poly_coeffs(build_system(j, OrbitalRate(1.0)).a));
    worst = std::max(worst, oracle::multiset_distance({c.begin(), c.end()}, roots));
  }
  o.ok = o.ok && worst <= 1e-8;
  o.detail = fmt("max |closed - numeric| = %.2e over 501 bodies", worst);
  return o;
}

// 2. Predicate classifier against eigenvalue + rank classifier.
Outcome classification() {
  Outcome o;
  oracle::InertiaSampler sample(2002);
  int n = 0;
  int agree = 0;
  int counts[3] = {0, 0, 0};
  while (n < 2000) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const SigmaTriple s = sigmas_from_inertia(j);
    if (min_condition_gap(s) < 1e-6) continue;
    ++n;
    const Verdict v = classify(s).verdict;
    ++counts[static_cast<int>(v)];
    agree += classify_numeric(build_system(j, OrbitalRate(1.0))).verdict == v;
  }
  o.ok = agree == n;
  std::ostringstream d;
  d << agree << "/" << n << " agree (" << counts[0] << " unstable, " << counts[2]
    << " Lyapunov stable)";
  o.detail = d.str();
  return o;
}

// 3. Family members solve the Lyapunov equation at both rates.
Outcome lyapunov_residual() {
  Outcome o;
  oracle::InertiaSampler sample(3003);
  std::mt19937_64 rng(3004);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  std::uniform_real_distribution<double> any(-5.0, 5.0);
  double worst = 0.0;
  int n = 0;
  while (n < 500) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const SigmaTriple s = sigmas_from_inertia(j);
    if (std::min({std::abs(s.s1), std::abs(s.s2), std::abs(s.s3), std::abs(1.0 - s.s1)}) < 1e-6) {
      continue;
    }
    ++n;
    const double a2 = pos(rng);
    const double a3 = pos(rng);
    const double a13 = any(rng);
    const AlphaParams alpha{solve_alpha1(j, a3, a13), a2, a3, a13};
    for (double w : {7.2922e-5, 1.0}) {
      worst = std::max(worst, solution_family(j, OrbitalRate(w), alpha).residual_relative);
    }
  }
  o.ok = worst <= 1e-11;
  o.detail = fmt("max ||A'P+PA|| / (||P|| w0) = %.2e over %g tuples x 2 rates", worst, n);
  return o;
}

// 4. A positive definite family member exists exactly on Lyapunov-stable cells.
Outcome existence() {
  Outcome o;
  constexpr int kGrid = 40;
  int cells = 0;
  int stable = 0;
  int mismatches = 0;
  for (int r = 0; r < kGrid; ++r) {
    for (int c = 0; c < kGrid; ++c) {
      const double b1 = 0.3 + 2.2 * c / (kGrid - 1);
      const double b2 = 0.3 + 2.2 * r / (kGrid - 1);
      const SpacecraftInertia j = inertia_from_beta(b1, b2);
      const SigmaTriple s = sigmas_from_inertia(j);
      if (min_condition_gap(s) < 1e-4) continue;
      ++cells;
      const bool lyap = classify(s).verdict == Verdict::LyapunovStable;
      stable += lyap;
      bool found = false;
      try {
        found = find_positive_definite(j, OrbitalRate(1.0)).found();
      } catch (const DegenerateError&) {
      }
      mismatches += found != lyap;
    }
  }
  o.ok = mismatches == 0;
  std::ostringstream d;
  d << mismatches << " mismatches over " << cells << " cells (" << stable << " Lyapunov stable)";
  o.detail = d.str();
  return o;
}

// 5. The transform carries (A, B) to the block form.
Outcome similarity() {
  Outcome o;
  oracle::InertiaSampler sample(5005);
  std::mt19937_64 rng(5006);
  std::uniform_real_distribution<double> log_w(-5.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const OrbitalRate w(std::pow(10.0, log_w(rng)));
    const SimilarityResidual res = verify_similarity(build_system(j, w), block_decompose(j));
    const double scale = std::max(1.0, w.omega0 * w.omega0);
    worst = std::max({worst, res.a / scale, res.b / scale});
  }
  o.ok = worst <= 1e-12;
  o.detail = fmt("max residual / max(1, w0^2) = %.2e over 200 (J, w0)", worst);
  return o;
}

// 6. Pitch and roll/yaw factors multiply to the characteristic polynomial.
Outcome factorization() {
  Outcome o;
  // Absolute on physically realisable bodies; relative to the largest
  // coefficient across the wide sampler, where the coefficients reach 1e3.
  oracle::InertiaSampler sample(6006);
  double worst_abs = 0.0;
  double worst_rel = 0.0;
  int physical = 0;
  for (int k = 0; k < 200 || physical < 200; ++k) {
    const auto [jx, jy, jz] = sample();
    const SpacecraftInertia j{jx, jy, jz};
    const bool is_physical = jx + jy >= jz && jy + jz >= jx && jx + jz >= jy;
    if (k >= 200 && !is_physical) continue;
    physical += is_physical;
    const auto f = factored_char_poly(sigmas_from_inertia(j));
    const PolyCoeffs product = f.pitch * f.roll_yaw;
    const PolyCoeffs direct = char_poly_coeffs(block_decompose(j).a0);
    const double scale = std::max(1.0, direct.max_abs_coefficient());
    for (std::size_t i = 0; i <= 6; ++i) {
      const double e = std::abs(product[i] - direct[i]);
      if (is_physical) worst_abs = std::max(worst_abs, e);
      if (k < 200) worst_rel = std::max(worst_rel, e / scale);
    }
  }
  o.ok = worst_abs <= 1e-12 && worst_rel <= 1e-12;
  o.detail = fmt("physical bodies max abs %.2e; wide sampler max rel %.2e", worst_abs, worst_rel);
  return o;
}

// 7. Open-loop energy is conserved, saturated feedback never raises it.
Outcome energy_behaviour() {
  Outcome o;
  const OrbitalRate w = orbital_rate(7.0e6);
  const double dt = 1e-3 / w.omega0;
  const std::vector<State> starts{{0.1, -0.05, 0.08, 1e-4, -2e-4, 1e-4},
                                  {-0.3, 0.2, 0.1, 0.0, 0.0, 5e-4},
                                  {0.01, 0.0, 0.0, 0.0, 0.0, 0.0}};
  double drift = 0.0;
  double rise = 0.0;
  for (const SpacecraftInertia& j : {SpacecraftInertia{100, 120, 80}, SpacecraftInertia{100, 95, 99}}) {
    const SystemMatrices sys = build_system(j, w);
    const auto pd = find_positive_definite(j, w);
    if (!pd.found()) return {false, "no positive definite P"};
    const Matrix& p = pd.solution->p;
    // Gain chosen so the RK4 step resolves the unsaturated loop.
    const double kappa = 0.5 / (loop_gain(p, sys.b) * dt);
    const SaturatedFeedback fb(p, kappa);
    for (const State& x0 : starts) {
      const Trajectory open = simulate(sys, std::nullopt, x0, dt, w.period(), p);
      for (double v : open.v) drift = std::max(drift, std::abs(v - open.v[0]) / open.v[0]);
      const Trajectory closed = simulate(sys, fb, x0, dt, w.period());
      for (std::size_t n = 1; n < closed.size(); ++n) {
        rise = std::max(rise, (closed.v[n] - closed.v[n - 1]) / closed.v[0]);
      }
    }
  }
  o.ok = drift <= 1e-8 && rise <= 1e-9;
  o.detail = fmt("open-loop drift %.2e, largest closed-loop step rise %.2e (relative to V0)",
                 drift, rise);
  return o;
}

// 8. The desk-scale sweep is reproducible byte for byte.
Outcome sweep_determinism() {
  Outcome o;
  SweepConfig cfg;
  cfg.n1 = 100;
  cfg.n2 = 100;
  auto render = [&](unsigned jobs) {
    const SweepResult r = run_sweep(cfg, jobs);
    std::ostringstream pgm;
    std::ostringstream csv;
    write_sweep_pgm(pgm, r);
    write_sweep_csv(csv, r);
    return std::pair{pgm.str(), csv.str()};
  };
  const auto first = render(1);
  const auto again = render(1);
  const auto parallel = render(8);
  std::istringstream pgm_in(first.first);
  const PgmImage img = read_pgm(pgm_in);
  std::istringstream csv_in(first.second);
  const std::size_t rows = read_sweep_csv(csv_in).size();
  o.ok = first == again && first == parallel && img.width == 100 && img.height == 100 &&
         rows == 10000;
  o.detail = fmt("PGM %g bytes, CSV %g bytes; identical across runs and 1 vs 8 workers",
                 static_cast<double>(first.first.size()), static_cast<double>(first.second.size()));
  if (!o.ok) o.detail = "outputs differ or fail to re-parse";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form eigenvalues", 5.0, eigenvalues},
      {2, "classification equivalence", 30.0, classification},
      {3, "Lyapunov residual", 10.0, lyapunov_residual},
      {4, "positive definite existence", 60.0, existence},
      {5, "similarity identity", 2.0, similarity},
      {6, "characteristic factorization", 2.0, factorization},
      {7, "energy behaviour", 30.0, energy_behaviour},
      {8, "sweep determinism", 20.0, sweep_determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.ok && in_time;
    failures += !pass;
    std::printf("%s %d %s: %s [%.2fs, limit %.0fs]%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_s, in_time ? "" : " too slow");
  }
  return failures == 0 ? 0 : 1;
}
