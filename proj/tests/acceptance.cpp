// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heatlab/bounds.hpp"
#include "heatlab/cli.hpp"
#include "heatlab/potential.hpp"
#include "heatlab/rng.hpp"
#include "heatlab/verify.hpp"

using namespace heatlab;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome closed_forms() {
  const auto p = gen_lattice(1, 101);
  const Vertex o = 50;
  const TransitionOperator walk(p, 0.0);
  double e_err = 0.0, rho_err = 0.0, g_err = 0.0;
  for (int R = 1; R <= 32; ++R) e_err = std::max(e_err, std::abs(mean_exit(walk, o, R) - R * R) / (R * R));
  // Two unit resistors per side in series from distance 1 to R, sides in parallel.
  for (int R = 2; R <= 32; ++R) rho_err = std::max(rho_err, std::abs(resistance(walk, o, 1, R) - R / 2.0));
  for (int R = 1; R <= 32; ++R) {
    const auto G = green_kernel(walk, proper_ball(p, o, R));
    g_err = std::max(g_err, std::abs(p.mu(o) * G(o, o) - R));
  }
  const double h_err = std::abs(harnack_constant(TransitionOperator(p, 0.5), o, 2).H - 5.0 / 3.0);
  const bool pass = e_err < 1e-9 && rho_err < 1e-9 && g_err < 1e-9 && h_err < 1e-9;
  return {pass, fmt("E rel %.1e, rho %.1e, G %.1e, H %.1e", e_err, rho_err, g_err, h_err)};
}

Outcome kernel_properties() {
  const WeightedGraph graphs[] = {gen_lattice(2, 21), gen_sierpinski(5)};
  const int times[] = {0, 1, 2, 3, 5, 8, 13, 21, 34};
  double neg = 0.0, norm = 0.0, sym = 0.0, ck = 0.0;
  std::size_t samples = 0;
  for (const auto& g : graphs) {
    const TransitionOperator op(g, 0.5);
    RngStream rng(2024, 0);
    for (int s = 0; s < 12; ++s) {
      const Vertex x = rng() % g.n(), y = rng() % g.n();
      std::vector<std::vector<double>> rx, ry;
      for (int t : times) {
        rx.push_back(heat_kernel_row(op, t, x));
        ry.push_back(heat_kernel_row(op, t, y));
      }
      for (std::size_t i = 0; i < std::size(times); ++i) {
        double mass = 0.0;
        for (Vertex z = 0; z < g.n(); ++z) {
          neg = std::max(neg, -rx[i][z]);
          mass += rx[i][z] * g.mu(z);
        }
        norm = std::max(norm, std::abs(mass - 1.0));
        sym = std::max(sym, std::abs(rx[i][y] - ry[i][x]));
        for (std::size_t j = 0; j < std::size(times); ++j) {
          const int st = times[i] + times[j];
          double acc = 0.0;
          for (Vertex z = 0; z < g.n(); ++z) acc += rx[i][z] * ry[j][z] * g.mu(z);
          ck = std::max(ck, std::abs(heat_kernel(op, st, x, y) - acc));
          ++samples;
        }
      }
    }
  }
  const bool pass = neg <= 0.0 && norm <= 1e-10 && sym <= 1e-12 && ck <= 1e-10;
  return {pass, fmt("%zu (s,t,x,y); min p %.1e, mass %.1e, sym %.1e, CK %.1e", samples, -neg, norm, sym, ck)};
}

Outcome tail_sum_identity() {
  const WeightedGraph graphs[] = {gen_lattice(1, 61), gen_lattice(2, 21), gen_sierpinski(5), gen_bottleneck(7)};
  RngStream rng(77, 0);
  double worst = 0.0;
  int done = 0;
  while (done < 50) {
    const auto& g = graphs[rng() % std::size(graphs)];
    const TransitionOperator op(g, 0.5);
    const Vertex x = rng() % g.n();
    const int R = 1 + static_cast<int>(rng() % 8);
    const Ball b = ball(g, x, R);
    if (!b.proper()) continue;
    worst = std::max(worst, std::abs(exit_tail_sum(op, b, x) - mean_exit(op, x, R)));
    ++done;
  }
  return {worst <= 1e-8, fmt("50 instances, max |sum P(T>t) - E| = %.2e", worst)};
}

Outcome monte_carlo() {
  struct Inst {
    WeightedGraph g;
    Vertex x;
    int R;
  };
  std::vector<Inst> inst;
  inst.push_back({gen_lattice(1, 41), 20, 5});
  inst.push_back({gen_lattice(2, 21), 10 * 21 + 10, 6});
  inst.push_back({gen_sierpinski(5), 0, 8});
  inst.push_back({gen_sierpinski(4), sierpinski_vertex(4, 4, 4), 3});
  {
    auto b = gen_bottleneck(9);
    const Vertex x = b.meta().params.at("bridge")[0].get<Vertex>();
    inst.push_back({std::move(b), x, 4});
  }
  const std::size_t n = 100000;
  const double eps = dkw_epsilon(n, 1e-6);
  bool pass = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const TransitionOperator op(inst[i].g, 0.5);
    const Ball b = proper_ball(inst[i].g, inst[i].x, inst[i].R);
    const RngStream rng(31337, i);
    const auto s = mc_exit_samples(op, b, inst[i].x, n, rng, 1);
    const auto cdf = exit_distribution(op, b, inst[i].x, static_cast<int>(s.back()));
    const double ks = ks_distance(s, cdf);
    worst = std::max(worst, ks);
    pass = pass && ks <= eps;
    pass = pass && mc_exit_samples(op, b, inst[i].x, n, rng, 8) == s;
  }
  return {pass, fmt("5 instances, n = 1e5, max KS %.4f vs DKW %.4f, replay identical", worst, eps)};
}

Outcome chaining() {
  struct Inst {
    std::string name;
    WeightedGraph g;
    Vertex x;
    std::vector<Vertex> ys;
  };
  std::vector<Inst> insts;
  {
    std::vector<Vertex> ys;
    for (int d : {6, 9, 12, 18, 24}) ys.push_back(48 + d);
    insts.push_back({"lattice-1d", gen_lattice(1, 97), 48, ys});
  }
  {
    const int s = 41;
    const Vertex x = 20 * s + 20;
    std::vector<Vertex> ys;
    for (int d : {6, 8, 12}) ys.push_back(x + static_cast<Vertex>(d / 2) * s + (d - d / 2));
    insts.push_back({"lattice-2d", gen_lattice(2, s), x, ys});
  }
  {
    std::vector<Vertex> ys;
    for (int d : {6, 8, 12}) ys.push_back(sierpinski_vertex(6, 16 + d, 0));
    insts.push_back({"gasket", gen_sierpinski(6), sierpinski_vertex(6, 16, 0), ys});
  }
  std::size_t total = 0, violations = 0;
  std::set<int> nus;
  for (const auto& in : insts) {
    const TransitionOperator op(in.g, 0.5);
    const GraphExitOracle orc(op);
    const auto E = orc.as_function();
    for (Vertex y : in.ys) {
      const int d = distance(in.g, in.x, y);
      const Ball A = ball(in.g, in.x, 3 * d);
      // t chosen so that nu(x, t, 3d) lands on each target value 1..8.
      std::vector<double> ts;
      for (int target = 1; target <= 8; ++target) {
        double sup = 0.0;
        for (Vertex z : A.interior) sup = std::max(sup, E(z, std::ceil(3.0 * d / target)));
        if (std::isfinite(sup)) ts.push_back(target * sup);
      }
      for (double t : ts) {
        const NuValue v = nu(E, t, 3 * d, 1.0, A.interior);
        if (!v.infinite) nus.insert(v.value);
      }
      for (int l = 1; l <= 3; ++l)
        for (const auto& c : chain_lower_bounds(op, in.x, y, ts, l, 4)) {
          ++total;
          if (!c.holds()) ++violations;
        }
    }
  }
  const bool pass = total >= 200 && violations == 0;
  return {pass, fmt("%zu instances, %zu violations, nu in [%d,%d]", total, violations, nus.empty() ? 0 : *nus.begin(),
                    nus.empty() ? 0 : *nus.rbegin())};
}

Outcome kappa_nu_oracle() {
  const ExitOracle square = [](Vertex, double rho) { return rho <= 1.0 ? 1.0 : rho * rho; };
  const std::vector<Vertex> A{0};
  const int radii[] = {2, 3, 5, 8, 12, 17, 23, 30, 40, 50};
  const double times[] = {0.5, 1.0, 2.0, 5.0, 13.0, 40.0, 100.0, 300.0, 1000.0, 3000.0};
  int mismatches = 0, kappa_zero = 0, nu_inf = 0, points = 0;
  for (int R : radii)
    for (double t : times) {
      ++points;
      const double ratio = R * static_cast<double>(R) / t;
      const int k_want = static_cast<int>(std::min<double>(R, std::floor(ratio)));
      const int n_val = static_cast<int>(std::ceil(ratio));
      const bool n_inf = n_val > R;
      const auto c = iter_counts(square, t, R, 1.0, A);
      if (c.kappa != k_want) ++mismatches;
      if (c.nu.infinite != n_inf || (!n_inf && c.nu.value != n_val)) ++mismatches;
      if (k_want == 0) ++kappa_zero;
      if (n_inf) ++nu_inf;
      if ((c.kappa == 0) != (k_want == 0) || c.nu.infinite != n_inf) ++mismatches;
    }
  const bool pass = mismatches == 0 && kappa_zero > 0 && nu_inf > 0;
  return {pass, fmt("%d points, %d mismatches; kappa = 0 at %d, nu = inf at %d", points, mismatches, kappa_zero,
                    nu_inf)};
}

Outcome envelopes() {
  EnvelopeOptions opt;
  opt.q = 0.5;
  opt.jobs = 8;
  for (int j = -32; j <= 0; ++j) opt.thetas.push_back(std::pow(2.0, j / 8.0));
  for (int j = 0; j <= 40; ++j) opt.lambdas.push_back(std::pow(2.0, j / 8.0));
  const std::vector<int> radii{8, 16, 32, 64};
  std::string detail;
  bool pass = true;
  auto one = [&](const char* name, const WeightedGraph& g, Vertex x) {
    const TransitionOperator op(g, 0.5);
    const std::vector<Vertex> c{x};
    const auto r = theorem1_envelope(op, c, radii, opt);
    const bool ok = r.report.pass && r.points.size() >= 150;
    pass = pass && ok;
    detail += fmt("%s%s: %zu pts, c %.4f (spread %.3f), C %.4f (spread %.3f)", detail.empty() ? "" : "; ", name,
                  r.points.size(), r.c_hat, r.c_spread, r.C_hat, r.C_spread);
  };
  one("lattice-2d", gen_lattice(2, 129), 64 * 129 + 64);
  one("gasket", gen_sierpinski(8), sierpinski_vertex(8, 128, 0));
  return {pass, detail};
}

Outcome profiles() {
  std::vector<double> X;
  for (int j = 1; j <= 21; ++j) X.push_back(j);
  const auto p = gen_lattice(1, 321);
  const TransitionOperator lop(p, 0.5);
  const std::vector<Vertex> pc{160};
  const std::vector<int> pr{40, 80, 120};
  const auto a = corollary2_profile(lop, 2.0, pc, pr, X, 0.98);

  const auto g = gen_sierpinski(8);
  const TransitionOperator gop(g, 0.5);
  const std::vector<int> fit_radii{2, 4, 8, 16, 32, 64};
  const double beta = scaling_fit(gop, 0, fit_radii).beta;
  const std::vector<Vertex> gc{0};
  const std::vector<int> gr{16, 32, 64};
  const auto b = corollary2_profile(gop, beta, gc, gr, X, 0.95);
  const bool pass = a.report.pass && a.r2 >= 0.98 && b.report.pass && b.r2 >= 0.95;
  return {pass, fmt("path r2 %.5f (%zu pts); gasket beta %.4f r2 %.5f (%zu pts)", a.r2, a.X.size(), beta, b.r2,
                    b.X.size())};
}

Outcome scaling() {
  const auto p = gen_lattice(1, 201);
  const TransitionOperator lop(p, 0.5);
  const std::vector<int> lr{2, 4, 8, 16, 32, 64};
  const double b1 = scaling_fit(lop, 100, lr).beta;

  const auto g = gen_sierpinski(7);
  const TransitionOperator gop(g, 0.5);
  const std::vector<int> full{2, 4, 8, 16, 32, 64}, half{2, 4, 8, 16, 32};
  const double bf = scaling_fit(gop, 0, full).beta, bh = scaling_fit(gop, 0, half).beta;
  const bool pass = std::abs(b1 - 2.0) <= 0.02 && std::abs(bf - bh) < 0.05;
  return {pass, fmt("lattice-1d beta %.4f; gasket-7 beta %.4f (R<=64) vs %.4f (R<=32)", b1, bf, bh)};
}

Outcome short_time() {
  std::string detail;
  bool pass = true;
  auto one = [&](const char* name, const TransitionOperator& op, double beta, const ShortTimeOptions& o) {
    const auto r = short_time_experiment(op, beta, o);
    pass = pass && r.report.pass && r.series.size() == 3;
    detail += fmt("%s%s:", detail.empty() ? "" : "; ", name);
    for (const auto& s : r.series) detail += fmt(" th=%g Q %.3f sp %.3f", s.theta, s.value, s.spread);
  };
  {
    const auto g = gen_lattice(1, 2000);
    const TransitionOperator op(g, 0.5);
    ShortTimeOptions o;
    o.a = 0;
    o.toward = 1999;
    o.d0 = 1;
    o.levels = {2, 3, 4, 5, 6, 7};
    o.thetas = {1, 2, 4};
    one("lattice-1d", op, 2.0, o);
  }
  {
    const auto g = gen_sierpinski(8);
    const TransitionOperator op(g, 0.5);
    std::vector<int> radii;
    for (int k = 1; k <= 7; ++k) radii.push_back(1 << k);
    const double beta = scaling_fit(op, 0, radii).beta;
    ShortTimeOptions o;
    o.a = 0;
    o.toward = sierpinski_vertex(8, 256, 0);
    o.d0 = 1;
    o.levels = {1, 2, 3, 4, 5};
    o.thetas = {1, 2, 4};
    one("gasket", op, beta, o);
  }
  return {pass, detail};
}

Outcome determinism() {
  auto run = [](const char* jobs) {
    std::ostringstream out, err;
    const int code = cli::run({"verify", "--family", "sierpinski", "--level", "5", "--jobs", jobs}, out, err);
    return std::make_pair(code, out.str());
  };
  const auto a = run("1"), b = run("8");
  const bool pass = a.first == 0 && b.first == 0 && !a.second.empty() && a.second == b.second;
  return {pass, fmt("verify --jobs 1 vs --jobs 8: %zu bytes, %s", a.second.size(),
                    a.second == b.second ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "closed-form oracles", 10, closed_forms},
      {2, "kernel properties", 30, kernel_properties},
      {3, "tail sum equals mean exit time", 30, tail_sum_identity},
      {4, "Monte Carlo inside the DKW band", 120, monte_carlo},
      {5, "chaining inequality", 600, chaining},
      {6, "kappa/nu closed forms", 60, kappa_nu_oracle},
      {7, "exit-time envelopes", 900, envelopes},
      {8, "sub-Gaussian exit profile", 600, profiles},
      {9, "walk-dimension fit", 300, scaling},
      {10, "scaling-window constant", 1200, short_time},
      {11, "verify determinism across jobs", 600, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_s;
    if (!pass) ++failed;
    std::printf("%s %2d %s: %s [%.1f s / %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
