#include "heatlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "heatlab/error.hpp"
#include "heatlab/io.hpp"
#include "heatlab/parallel.hpp"
#include "heatlab/stats.hpp"

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json nu_json(const NuValue& v) { return v.infinite ? Json("inf") : Json(v.value); }

// Relative spread over the last three entries (all of them if fewer).
double top3_spread(const std::vector<double>& v) {
  if (v.empty()) return kInf;
  const std::size_t from = v.size() > 3 ? v.size() - 3 : 0;
  return relative_spread(std::span<const double>(v).subspan(from));
}

double top3_mean(const std::vector<double>& v) {
  const std::size_t from = v.size() > 3 ? v.size() - 3 : 0;
  double m = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) m += v[i];
  return m / static_cast<double>(v.size() - from);
}

// Integer step k with {tau < t} = {tau <= k}.
int last_step_before(double t) { return std::max(0, static_cast<int>(std::ceil(t)) - 1); }

}  // namespace

Json to_json(const BoundReport& r) {
  Json c = Json::object();
  for (const auto& [k, v] : r.constants) c[k] = std::isfinite(v) ? Json(v) : Json(v > 0 ? "inf" : "-inf");
  return Json{{"experiment", r.experiment}, {"family", r.family},   {"grid", r.grid},
              {"constants", c},             {"pass", r.pass},       {"excluded", r.excluded},
              {"flagged", r.flagged}};
}

// ---------------------------------------------------------------------------

std::vector<ChainBound> chain_lower_bounds(const TransitionOperator& op, Vertex x, Vertex y,
                                           std::span<const double> times, int l, int jobs) {
  const auto& g = op.graph();
  g.check_vertex(x);
  g.check_vertex(y);
  if (l < 1) throw Error(Errc::invalid_parameter, "chain needs l >= 1");
  if (x == y) throw Error(Errc::invalid_parameter, "chain needs x != y");
  if (times.empty()) throw Error(Errc::invalid_parameter, "chain bound needs at least one time");
  for (double t : times)
    if (!(t > 0.0)) throw Error(Errc::invalid_parameter, "chain bound needs t > 0");
  const int d = distance(g, x, y);
  if (l > d)
    throw Error(Errc::degenerate_chain, "l = " + std::to_string(l) + " exceeds d(x,y) = " + std::to_string(d));

  ChainBound proto;
  proto.x = x;
  proto.y = y;
  proto.l = l;
  proto.d = d;
  proto.r = d / (3.0 * l);
  proto.link_radius = static_cast<int>(std::ceil(proto.r - 1e-12));
  proto.pair_distance = static_cast<int>(std::ceil(4.0 * proto.r - 1e-12));
  proto.in_hypothesis_range = proto.r >= d / 4.0 && proto.r < d;
  if (proto.link_radius < 1) throw Error(Errc::resolution, "link radius d/(3l) rounds below one hop");

  const auto region = closed_ball(g, x, d);
  const auto in_region = indicator(g.n(), region);
  std::size_t pairs = 0;
  for (Vertex w : region) {
    const auto dw = bfs_distances_within(g, w, proto.pair_distance);
    for (Vertex z : region)
      if (dw[z] >= 0) ++pairs;
  }
  if (pairs > kMaxLinkPairs)
    throw Error(Errc::resolution, "chain instance needs " + std::to_string(pairs) + " link probabilities, cap is " +
                                      std::to_string(kMaxLinkPairs));
  proto.pairs = pairs;

  // Time indices sorted by link step so one sweep per w serves every t.
  const std::size_t nt = times.size();
  std::vector<int> link_steps(nt);
  for (std::size_t i = 0; i < nt; ++i) link_steps[i] = last_step_before(times[i] / l);
  std::vector<int> sorted_steps(link_steps);
  std::sort(sorted_steps.begin(), sorted_steps.end());
  sorted_steps.erase(std::unique(sorted_steps.begin(), sorted_steps.end()), sorted_steps.end());

  struct Best {
    std::vector<double> value;
    std::vector<Vertex> z;
  };
  std::vector<Best> per_w(region.size());
  parallel_for(region.size(), jobs, [&](std::size_t iw) {
    const Vertex w = region[iw];
    const Ball target = ball(g, w, proto.link_radius);
    const auto cdf = hitting_cdf_all(op, target.interior, sorted_steps);
    const auto dw = bfs_distances_within(g, w, proto.pair_distance);
    Best b{std::vector<double>(sorted_steps.size(), kInf), std::vector<Vertex>(sorted_steps.size(), 0)};
    for (std::size_t k = 0; k < sorted_steps.size(); ++k)
      for (Vertex z = 0; z < g.n(); ++z)
        if (in_region[z] && dw[z] >= 0 && cdf[k][z] < b.value[k]) {
          b.value[k] = cdf[k][z];
          b.z[k] = z;
        }
    per_w[iw] = std::move(b);
  });

  // Exact side: one hitting distribution up to the largest t.
  const Ball target = ball(g, y, proto.link_radius);
  int max_exact = 0;
  for (double t : times) max_exact = std::max(max_exact, last_step_before(t));
  const auto exact = hitting_distribution(op, target.interior, x, max_exact);

  std::vector<ChainBound> out;
  out.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    ChainBound cb = proto;
    cb.t = times[i];
    cb.s = times[i] / l;
    const std::size_t k = static_cast<std::size_t>(
        std::lower_bound(sorted_steps.begin(), sorted_steps.end(), link_steps[i]) - sorted_steps.begin());
    cb.link_inf = kInf;
    for (std::size_t iw = 0; iw < region.size(); ++iw)
      if (per_w[iw].value[k] < cb.link_inf) {
        cb.link_inf = per_w[iw].value[k];
        cb.arg_z = per_w[iw].z[k];
        cb.arg_w = region[iw];
      }
    cb.bound = std::pow(cb.link_inf, l);
    cb.exact = prob_before(exact, times[i]);
    out.push_back(cb);
  }
  return out;
}

ChainBound chain_lower_bound(const TransitionOperator& op, Vertex x, Vertex y, double t, int l, int jobs) {
  const double times[] = {t};
  return chain_lower_bounds(op, x, y, times, l, jobs).front();
}

Prop3Result prop3_lower(const TransitionOperator& op, const GraphExitOracle& E, Vertex x, Vertex y, double t,
                        double q, int jobs) {
  const auto& g = op.graph();
  const int d = distance(g, x, y);
  if (d < 1) throw Error(Errc::invalid_parameter, "nu-chained bound needs x != y");
  const auto oracle = E.as_function();
  const Ball big = ball(g, x, 3 * d);
  const Ball small = ball(g, x, d);
  Prop3Result res;
  res.nu_3d = nu(oracle, t, 3 * d, q, big.interior);
  res.nu_d = nu(oracle, t, 3 * d, q, small.interior);
  if (res.nu_3d.infinite || res.nu_3d.value > d) {
    res.flagged = true;
    res.bound = 0.0;
    res.C_emp = kInf;
    return res;
  }
  res.chain = chain_lower_bound(op, x, y, t, res.nu_3d.value, jobs);
  res.bound = res.chain.bound;
  res.C_emp = res.bound > 0.0 ? -std::log(res.bound) / res.nu_3d.value : kInf;
  return res;
}

// ---------------------------------------------------------------------------

EnvelopeResult theorem1_envelope(const TransitionOperator& op, std::span<const Vertex> centers,
                                 std::span<const int> radii, const EnvelopeOptions& opt) {
  if (centers.empty() || radii.empty() || (opt.thetas.empty() && opt.lambdas.empty()))
    throw Error(Errc::insufficient_data, "envelope needs centers, radii and times");
  if (opt.b < 1) throw Error(Errc::invalid_parameter, "envelope needs b >= 1");
  const auto& g = op.graph();
  std::vector<int> sorted(radii.begin(), radii.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  GraphExitOracle oracle(op);
  const auto E = oracle.as_function();

  struct Cell {
    Vertex x;
    int R;
  };
  std::vector<Cell> cells;
  for (int R : sorted)
    for (Vertex x : centers) cells.push_back({x, R});

  std::vector<std::vector<EnvelopePoint>> per_cell(cells.size());
  parallel_for(cells.size(), opt.jobs, [&](std::size_t i) {
    const auto [x, R] = cells[i];
    const Ball inner = proper_ball(g, x, R);
    const Ball outer = ball(g, x, opt.b * R);
    const double ER = oracle.at_radius(x, R);
    std::vector<double> ts;
    for (double th : opt.thetas) ts.push_back(th * ER);
    for (double lam : opt.lambdas) ts.push_back(lam * opt.q * R);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    int t_max = 1;
    for (double t : ts) {
      if (!(t > 0.0)) throw Error(Errc::invalid_parameter, "envelope times must be positive");
      t_max = std::max(t_max, last_step_before(t));
    }
    const auto cdf = exit_distribution(op, inner, x, t_max);
    for (double t : ts) {
      EnvelopePoint p{x, R, t / ER, t, prob_before(cdf, t), kappa(E, t, R, opt.q, inner.interior),
                      nu(E, t, opt.b * R, opt.q, outer.interior)};
      per_cell[i].push_back(p);
    }
  });

  EnvelopeResult res;
  res.c_hat = kInf;
  res.C_hat = 0.0;
  std::map<int, EnvelopeScale> scales;
  for (int R : sorted) scales[R] = {R, kInf, 0.0};
  for (const auto& pts : per_cell)
    for (const auto& p : pts) {
      res.points.push_back(p);
      const double nlp = -std::log(p.prob);
      auto& sc = scales[p.R];
      if (p.kappa > 0) {
        sc.c_hat = std::min(sc.c_hat, nlp / p.kappa);
      } else {
        ++res.kappa_excluded;
      }
      if (!p.nu.infinite) {
        sc.C_hat = std::max(sc.C_hat, nlp / p.nu.value);
      } else {
        ++res.nu_excluded;
      }
    }
  std::vector<double> cs, Cs;
  for (const auto& [R, sc] : scales) {
    res.scales.push_back(sc);
    if (std::isfinite(sc.c_hat)) cs.push_back(sc.c_hat);
    if (sc.C_hat > 0.0) Cs.push_back(sc.C_hat);
    res.c_hat = std::min(res.c_hat, sc.c_hat);
    res.C_hat = std::max(res.C_hat, sc.C_hat);
  }
  res.c_spread = top3_spread(cs);
  res.C_spread = top3_spread(Cs);

  auto& rep = res.report;
  rep.experiment = "theorem1_envelope";
  rep.family = g.meta().family;
  for (const auto& p : res.points) {
    const double nlp = -std::log(p.prob);
    rep.grid.push_back({{"x", p.x},
                        {"R", p.R},
                        {"theta", p.theta},
                        {"t", p.t},
                        {"P", p.prob},
                        {"kappa", p.kappa},
                        {"nu", nu_json(p.nu)},
                        {"slack_upper", p.kappa > 0 ? Json(-res.c_hat * p.kappa + nlp) : Json(nullptr)},
                        {"slack_lower", p.nu.infinite ? Json(nullptr) : Json(res.C_hat * p.nu.value - nlp)}});
  }
  rep.constants = {{"c_hat", res.c_hat}, {"C_hat", res.C_hat},       {"c_spread", res.c_spread},
                   {"C_spread", res.C_spread}, {"q", opt.q},          {"b", static_cast<double>(opt.b)}};
  rep.excluded = res.kappa_excluded + res.nu_excluded;
  rep.pass = cs.size() >= 3 && Cs.size() >= 3 && res.c_hat > 0.0 && std::isfinite(res.C_hat) &&
             res.c_spread <= 0.30 && res.C_spread <= 0.30;
  return res;
}

ProfileResult corollary2_profile(const TransitionOperator& op, double beta, std::span<const Vertex> centers,
                                 std::span<const int> radii, std::span<const double> X, double min_r2,
                                 double min_ratio) {
  if (!(beta > 1.0)) throw Error(Errc::invalid_parameter, "profile needs beta > 1");
  if (centers.empty() || radii.empty() || X.empty())
    throw Error(Errc::insufficient_data, "profile needs centers, radii and regressor values");
  const auto& g = op.graph();
  ProfileResult res;
  auto& rep = res.report;
  rep.experiment = "corollary2_profile";
  rep.family = g.meta().family;
  for (Vertex x : centers)
    for (int R : radii) {
      const Ball b = proper_ball(g, x, R);
      std::vector<int> ts;
      for (double xi : X) {
        if (!(xi > 0.0)) throw Error(Errc::invalid_parameter, "regressor values must be positive");
        ts.push_back(static_cast<int>(std::lround(std::pow(R, beta) / std::pow(xi, beta - 1.0))));
      }
      const auto cdf = exit_distribution(op, b, x, std::max(1, *std::max_element(ts.begin(), ts.end())));
      for (int t : ts) {
        if (t < min_ratio * R) {
          ++rep.excluded;
          continue;
        }
        const double P = prob_before(cdf, t);
        const double xi = std::pow(std::pow(R, beta) / t, 1.0 / (beta - 1.0));
        res.X.push_back(xi);
        res.Y.push_back(-std::log(P));
        rep.grid.push_back({{"x", x}, {"R", R}, {"t", t}, {"X", xi}, {"P", P}});
      }
    }
  const auto fit = least_squares(res.X, res.Y);
  res.slope = fit.slope;
  res.intercept = fit.intercept;
  res.r2 = fit.r2;
  rep.constants = {{"beta", beta}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
  rep.pass = fit.slope > 0.0 && fit.r2 >= min_r2;
  return res;
}

ProfileResult heat_profile(const TransitionOperator& op, double beta, std::span<const HeatPair> pairs,
                           std::span<const int> times) {
  if (!(beta > 1.0)) throw Error(Errc::invalid_parameter, "profile needs beta > 1");
  if (pairs.empty() || times.empty()) throw Error(Errc::insufficient_data, "heat profile needs pairs and times");
  const auto& g = op.graph();
  std::vector<int> ts(times.begin(), times.end());
  std::sort(ts.begin(), ts.end());
  ProfileResult res;
  auto& rep = res.report;
  rep.experiment = "heat_profile";
  rep.family = g.meta().family;
  for (const auto& [x, y] : pairs) {
    const int d = distance(g, x, y);
    // Advance one kernel row through the sorted times.
    std::vector<double> m(g.n(), 0.0), next(g.n());
    m[x] = 1.0;
    int now = 0;
    for (int t : ts) {
      if (t < 1) throw Error(Errc::invalid_parameter, "heat profile times must be >= 1");
      for (; now < t; ++now) {
        op.evolve(m, next);
        m.swap(next);
      }
      const double p = m[y] / g.mu(y);
      if (!(p > 0.0)) {
        ++rep.excluded;
        continue;
      }
      const int rho = static_cast<int>(std::ceil(std::pow(t, 1.0 / beta)));
      double V = 0.0;
      for (Vertex v : ball(g, x, rho).interior) V += g.mu(v);
      const double xi = std::pow(std::pow(d, beta) / t, 1.0 / (beta - 1.0));
      res.X.push_back(xi);
      res.Y.push_back(-std::log(p * V));
      rep.grid.push_back({{"x", x}, {"y", y}, {"d", d}, {"t", t}, {"p", p}, {"V", V}, {"X", xi}});
    }
  }
  const auto fit = least_squares(res.X, res.Y);
  res.slope = fit.slope;
  res.intercept = fit.intercept;
  res.r2 = fit.r2;
  rep.constants = {{"beta", beta}, {"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2}};
  rep.pass = fit.slope > 0.0;
  return res;
}

// ---------------------------------------------------------------------------

ShortTimeResult short_time_experiment(const TransitionOperator& op, double beta, const ShortTimeOptions& opt) {
  if (!(beta > 1.0)) throw Error(Errc::invalid_parameter, "scaling window needs beta > 1");
  if (opt.d0 < 1) throw Error(Errc::invalid_parameter, "scaling window needs d0 >= 1");
  if (opt.levels.empty() || opt.thetas.empty())
    throw Error(Errc::insufficient_data, "scaling window needs levels and theta values");
  const auto& g = op.graph();
  g.check_vertex(opt.a);
  const auto path = shortest_path(g, opt.a, opt.toward);
  std::vector<int> levels(opt.levels);
  std::sort(levels.begin(), levels.end());

  struct Geometry {
    int k, d, radius;
    Vertex b;
    std::vector<Vertex> A, B;
    double mu_a;
  };
  ShortTimeResult res;
  res.beta = beta;
  std::vector<Geometry> geo;
  for (int k : levels) {
    const long long nominal = static_cast<long long>(opt.d0) << k;
    const int rho = static_cast<int>((nominal + 1) / 2);
    const long long hop = nominal + 2LL * (rho - 1);
    if (hop >= static_cast<long long>(path.size())) {
      ++res.excluded;
      continue;
    }
    const Vertex b = path[static_cast<std::size_t>(hop)];
    const Ball A = ball(g, opt.a, rho), B = ball(g, b, rho);
    if (!A.proper() || !B.proper()) {
      ++res.excluded;
      continue;
    }
    const int d = set_distance(g, A.interior, B.interior);
    if (d == 0) throw Error(Errc::domain, "sets at level " + std::to_string(k) + " touch: d(A,B) = 0");
    double mu_a = 0.0;
    for (Vertex v : A.interior) mu_a += g.mu(v);
    geo.push_back({k, d, rho, b, A.interior, B.interior, mu_a});
  }
  if (geo.size() < 3)
    throw Error(Errc::insufficient_data, "scaling window has " + std::to_string(geo.size()) + " usable levels, need 3");

  auto& rep = res.report;
  rep.experiment = "short_time_experiment";
  rep.family = g.meta().family;
  rep.excluded = res.excluded;
  rep.pass = true;
  const double e1 = 1.0 / (beta - 1.0);
  for (double theta : opt.thetas) {
    if (!(theta > 0.0)) throw Error(Errc::invalid_parameter, "theta must be positive");
    ShortTimeSeries s;
    s.theta = theta;
    std::vector<double> qs;
    for (const auto& G : geo) {
      const double t = std::max(1.0, std::round(theta * std::pow(G.d, beta)));
      const double P = set_kernel(op, static_cast<int>(t), G.A, G.B);
      const double Q = std::pow(t, e1) * std::log(P / G.mu_a) / std::pow(G.d, beta * e1);
      s.levels.push_back({G.k, G.d, G.radius, G.b, t, G.mu_a, P, Q});
      qs.push_back(Q);
      rep.grid.push_back({{"theta", theta}, {"k", G.k}, {"d", G.d}, {"radius", G.radius}, {"b", G.b},
                          {"t", t}, {"mu_A", G.mu_a}, {"P", P}, {"Q", Q}});
    }
    s.spread = top3_spread(qs);
    s.value = top3_mean(qs);
    rep.constants["spread_theta_" + format_real(theta)] = s.spread;
    rep.constants["Q_theta_" + format_real(theta)] = s.value;
    rep.pass = rep.pass && s.spread <= 0.25 && s.value < 0.0;
    res.series.push_back(std::move(s));
  }
  rep.constants["beta"] = beta;
  return res;
}

}  // namespace heatlab
