#include "heatlab/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "heatlab/bounds.hpp"
#include "heatlab/error.hpp"
#include "heatlab/exit.hpp"
#include "heatlab/io.hpp"
#include "heatlab/kernel.hpp"
#include "heatlab/parallel.hpp"
#include "heatlab/potential.hpp"
#include "heatlab/verify.hpp"

namespace heatlab::cli {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

template <class T>
T parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw Error(Errc::invalid_parameter, "not a number: '" + raw + "'");
  return v;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& piece : split(s, ',')) {
    const std::string p = trim(piece);
    if (p.empty()) throw Error(Errc::invalid_parameter, "empty entry in integer list '" + s + "'");
    const bool pow2 = p.rfind("2^", 0) == 0;
    const auto parts = split(pow2 ? p.substr(2) : p, ':');
    if (parts.size() > 3) throw Error(Errc::invalid_parameter, "bad range '" + p + "'");
    const int a = parse_number<int>(parts[0]);
    const int b = parts.size() > 1 ? parse_number<int>(parts[1]) : a;
    const int step = parts.size() > 2 ? parse_number<int>(parts[2]) : 1;
    if (step <= 0) throw Error(Errc::invalid_parameter, "range step must be positive in '" + p + "'");
    if (b < a) throw Error(Errc::invalid_parameter, "range end below start in '" + p + "'");
    for (int k = a; k <= b; k += step) {
      if (pow2 && (k < 0 || k > 30)) throw Error(Errc::invalid_parameter, "exponent out of range in '" + p + "'");
      out.push_back(pow2 ? (1 << k) : k);
    }
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& piece : split(s, ',')) {
    const std::string p = trim(piece);
    if (p.empty()) throw Error(Errc::invalid_parameter, "empty entry in real list '" + s + "'");
    const bool pow2 = p.rfind("2^", 0) == 0;
    const auto parts = split(pow2 ? p.substr(2) : p, ':');
    if (parts.size() == 2 || parts.size() > 3) throw Error(Errc::invalid_parameter, "real ranges need a:b:step, got '" + p + "'");
    std::vector<double> vals;
    if (parts.size() == 1) {
      vals.push_back(parse_number<double>(parts[0]));
    } else {
      const double a = parse_number<double>(parts[0]), b = parse_number<double>(parts[1]),
                   step = parse_number<double>(parts[2]);
      if (!(step > 0) || b < a) throw Error(Errc::invalid_parameter, "bad real range '" + p + "'");
      const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
      for (long i = 0; i <= n; ++i) vals.push_back(a + static_cast<double>(i) * step);
    }
    for (double v : vals) out.push_back(pow2 ? std::exp2(v) : v);
  }
  return out;
}

Vertex parse_vertex(const WeightedGraph& g, const std::string& raw) {
  const std::string token = trim(raw);
  if (token.find('/') == std::string::npos) {
    const auto v = parse_number<long long>(token);
    if (v < 0 || static_cast<std::size_t>(v) >= g.n())
      throw Error(Errc::invalid_parameter, "vertex " + token + " out of range [0, " + std::to_string(g.n()) + ")");
    return static_cast<Vertex>(v);
  }
  std::vector<int> c;
  for (const auto& part : split(token, '/')) c.push_back(parse_number<int>(part));
  const auto& meta = g.meta();
  if (meta.family == "lattice") {
    const int dim = meta.params.at("dim").get<int>(), side = meta.params.at("side").get<int>();
    if (static_cast<int>(c.size()) != dim)
      throw Error(Errc::invalid_parameter, "vertex '" + token + "' needs " + std::to_string(dim) + " coordinates");
    std::size_t id = 0;
    for (int x : c) {
      if (x < 0 || x >= side) throw Error(Errc::invalid_parameter, "coordinate out of range in '" + token + "'");
      id = id * static_cast<std::size_t>(side) + static_cast<std::size_t>(x);
    }
    return static_cast<Vertex>(id);
  }
  if (meta.family == "sierpinski") {
    if (c.size() != 2) throw Error(Errc::invalid_parameter, "gasket vertex '" + token + "' needs i/j");
    return sierpinski_vertex(meta.params.at("level").get<int>(), c[0], c[1]);
  }
  throw Error(Errc::invalid_parameter, "coordinates are not defined for family '" + meta.family + "'");
}

std::vector<Vertex> parse_vertex_list(const WeightedGraph& g, const std::string& s) {
  std::vector<Vertex> out;
  for (const auto& piece : split(s, ',')) out.push_back(parse_vertex(g, piece));
  return out;
}

namespace {

struct GraphSpec {
  std::string path;
  std::string family;
  int dim = 1;
  int side = 0;
  int level = 0;
  std::string left, right;
};

WeightedGraph build_graph(const GraphSpec& s) {
  if (s.family == "lattice") {
    if (s.dim < 1 || s.side < 2) throw Error(Errc::invalid_parameter, "lattice needs --dim >= 1 and --side >= 2");
    return gen_lattice(s.dim, s.side);
  }
  if (s.family == "sierpinski") {
    if (s.level < 0) throw Error(Errc::invalid_parameter, "sierpinski needs --level >= 0");
    return gen_sierpinski(s.level);
  }
  if (s.family == "bottleneck") return gen_bottleneck(s.side);
  if (s.family == "product") {
    if (s.left.empty() || s.right.empty())
      throw Error(Errc::invalid_parameter, "product needs --left and --right graph files");
    return gen_product(load_graph(s.left), load_graph(s.right));
  }
  throw Error(Errc::invalid_parameter, "unknown family '" + s.family + "'");
}

struct Common {
  GraphSpec graph;
  double lazy = 0.5;
  double q = 1.0;
  std::uint64_t seed = 0;
  std::string format;
  int jobs = 1;
  std::string output;
  std::string config;
};

struct Output {
  std::vector<std::string> columns;
  Json rows = Json::array();  // arrays aligned with columns
  Json body;                  // full JSON document; built from the table when null
  std::string trailer;        // extra CSV comment lines
  bool pass = true;
};

struct Context {
  Common& c;
  std::unique_ptr<WeightedGraph> g;
  std::unique_ptr<TransitionOperator> op;
};

using Handler = std::function<Output(Context&)>;

struct Command {
  CLI::App* app;
  std::string default_format;
  bool needs_graph;
  Handler run;
  // Checked after --config is applied, so a config file can supply them.
  std::vector<CLI::Option*> required = {};
};

std::string cell(const Json& v) {
  if (v.is_null()) return "nan";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_real(v.get<double>());
  if (v.is_number()) return v.dump();
  return v.dump();
}

Json real(double v) { return std::isfinite(v) ? Json(v) : Json(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf")); }

Json nu_cell(const NuValue& v) { return v.infinite ? Json("inf") : Json(v.value); }

// Table view of a report grid: columns are the keys of the first row.
Output from_report(const BoundReport& rep) {
  Output o;
  if (!rep.grid.empty()) {
    for (const auto& [k, _] : rep.grid.front().items()) o.columns.push_back(k);
    for (const auto& row : rep.grid) {
      Json r = Json::array();
      for (const auto& k : o.columns) r.push_back(row.contains(k) ? row.at(k) : Json(nullptr));
      o.rows.push_back(std::move(r));
    }
  }
  const Json j = to_json(rep);
  o.body = j;
  o.trailer = "# constants: " + j.at("constants").dump() + "\n# excluded: " + std::to_string(rep.excluded) +
              "\n# pass: " + (rep.pass ? "true" : "false") + "\n";
  o.pass = rep.pass;
  return o;
}

std::string json_arg(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + json_arg(e);
    return s;
  }
  throw Error(Errc::invalid_parameter, "config value must be a scalar or a list, got " + v.dump());
}

const std::set<std::string> kUnserialized = {"help", "config", "output", "jobs", "version"};

void apply_config(CLI::App* sub, const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(Errc::invalid_parameter, "config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw Error(Errc::invalid_parameter, "config " + path + " must be a JSON object");
  auto set = [&](const std::string& key, const Json& v) {
    CLI::Option* o = key == "help" || key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
    if (o == nullptr) throw Error(Errc::invalid_parameter, "unknown config key '" + key + "' for " + sub->get_name());
    const std::string arg = json_arg(v);
    if (o->count() > 0 || arg.empty()) return;  // the command line wins
    o->add_result(arg);
    o->run_callback();
  };
  for (const auto& [k, v] : j.items()) {
    if (k == "tool" || k == "graph_hash") continue;
    if (k == "command") {
      if (v != sub->get_name())
        throw Error(Errc::invalid_parameter, "config is for '" + json_arg(v) + "', not " + sub->get_name());
      continue;
    }
    if (k == "params") {
      if (!v.is_object()) throw Error(Errc::invalid_parameter, "config key 'params' must be an object");
      for (const auto& [pk, pv] : v.items()) set(pk, pv);
      continue;
    }
    set(k, v);
  }
}

const std::set<std::string> kGraphParams{"family", "dim", "side", "level", "left", "right"};

Json run_config(const CLI::App* sub, const Common& c, const std::string& format) {
  Json params = Json::object();
  for (const CLI::Option* o : sub->get_options()) {
    const std::string name = o->get_single_name();
    if (kUnserialized.count(name) || name == "lazy" || name == "q" || name == "seed" || name == "format") continue;
    if (c.graph.family.empty() && kGraphParams.count(name)) continue;
    std::string v;
    if (o->count() > 0) {
      for (const auto& r : o->results()) v += (v.empty() ? "" : ",") + r;
    } else {
      v = o->get_default_str();
    }
    if (!v.empty()) params[name] = v;
  }
  Json cfg{{"tool", kVersion}, {"command", sub->get_name()}};
  if (params.contains("graph")) {
    cfg["graph"] = params["graph"];
    params.erase("graph");
  }
  if (sub->get_option_no_throw("--lazy")) cfg["lazy"] = c.lazy;
  if (sub->get_option_no_throw("--q")) cfg["q"] = c.q;
  if (sub->get_option_no_throw("--seed")) cfg["seed"] = c.seed;
  cfg["format"] = format;
  cfg["params"] = params;
  return cfg;
}

std::string render(const Output& o, const std::string& format, const Json& cfg, const std::string& hash) {
  if (format == "csv") {
    std::string s = "# config: " + cfg.dump() + "\n# graph_hash: " + hash + "\n";
    for (std::size_t i = 0; i < o.columns.size(); ++i) s += (i ? "," : "") + o.columns[i];
    s += "\n";
    for (const auto& row : o.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + cell(row[i]);
      s += "\n";
    }
    return s + o.trailer;
  }
  Json body = o.body;
  if (body.is_null()) {
    body = Json{{"experiment", cfg.at("command")}, {"columns", o.columns}, {"rows", o.rows}};
  }
  body["config"] = cfg;
  body["graph_hash"] = hash;
  return body.dump(1) + "\n";
}

void add_graph_options(CLI::App* app, GraphSpec& g, bool inline_only) {
  if (!inline_only) app->add_option("-g,--graph", g.path, "Graph JSON file");
  app->add_option("--family", g.family, "Generate the graph: lattice|sierpinski|product|bottleneck")
      ->check(CLI::IsMember({"lattice", "sierpinski", "product", "bottleneck"}));
  app->add_option("--dim", g.dim, "Lattice dimension");
  app->add_option("--side", g.side, "Lattice or bottleneck box side");
  app->add_option("--level", g.level, "Gasket level");
  app->add_option("--left", g.left, "First product factor (graph file)");
  app->add_option("--right", g.right, "Second product factor (graph file)");
}

void add_common(CLI::App* app, Common& c, bool with_q) {
  add_graph_options(app, c.graph, false);
  app->add_option("--lazy", c.lazy, "Hold probability alpha in [0,1)")->check(CLI::Range(0.0, 0.999999999999));
  if (with_q) app->add_option("--q", c.q, "Iteration-count constant q > 0")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "Master seed (falls back to HEATLAB_SEED)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--jobs", c.jobs, "Worker threads; never changes results")->check(CLI::PositiveNumber);
  app->add_option("-o,--output", c.output, "Output file (written atomically); stdout if absent");
  app->add_option("--config", c.config, "JSON RunConfig; command-line flags take precedence");
}

std::vector<int> radii_for_fit(const WeightedGraph& g, Vertex x, const std::string& list) {
  if (!list.empty()) return parse_int_list(list);
  std::vector<int> radii;
  for (int R = 2; ball(g, x, 2 * R).proper(); R *= 2) radii.push_back(R);
  return radii;
}

// beta from a string: a number, or "auto" for a log-log fit of E(x, R).
double resolve_beta(const TransitionOperator& op, const std::string& beta, Vertex x, const std::string& radii,
                    BoundReport& rep) {
  if (beta != "auto") {
    const double b = parse_number<double>(beta);
    if (!(b > 1)) throw Error(Errc::invalid_parameter, "--beta must exceed 1");
    return b;
  }
  const auto fit = scaling_fit(op, x, radii_for_fit(op.graph(), x, radii));
  rep.constants["beta_fit_r2"] = fit.r2;
  rep.constants["beta_fit_r_min"] = fit.r_min;
  rep.constants["beta_fit_r_max"] = fit.r_max;
  return fit.beta;
}

// ---------------------------------------------------------------------------

struct MeanExitArgs {
  std::string center = "0", radii;
};

Output mean_exit_cmd(Context& cx, const MeanExitArgs& a) {
  const Vertex x = parse_vertex(*cx.g, a.center);
  const auto radii = parse_int_list(a.radii);
  std::vector<ExitProfile> prof(radii.size());
  parallel_for(radii.size(), cx.c.jobs, [&](std::size_t i) { prof[i] = exit_profile(*cx.op, x, radii[i]); });
  Output o;
  o.columns = {"R", "E", "Ebar"};
  for (const auto& p : prof) o.rows.push_back(Json::array({p.radius, p.E, p.Ebar}));
  return o;
}

struct ExitDistArgs {
  std::string center = "0", target;
  int R = 0;
  int t_max = 0;
  std::size_t mc = 0;
};

Output exit_dist_cmd(Context& cx, const ExitDistArgs& a) {
  const Vertex x = parse_vertex(*cx.g, a.center);
  Json meta{{"family", cx.g->meta().family}, {"params", cx.g->meta().params}, {"center", x}};
  std::vector<double> cdf;
  Json mc = nullptr;
  bool pass = true;
  if (!a.target.empty()) {
    if (a.t_max <= 0) throw Error(Errc::invalid_parameter, "--t-max is required with --target");
    const auto target = parse_vertex_list(*cx.g, a.target);
    cdf = hitting_distribution(*cx.op, target, x, a.t_max);
    meta["kind"] = "hitting";
    meta["target"] = target;
  } else {
    if (a.R < 1) throw Error(Errc::invalid_parameter, "--R must be >= 1");
    const Ball b = proper_ball(*cx.g, x, a.R);
    const int t_max = a.t_max > 0 ? a.t_max : static_cast<int>(std::ceil(8 * mean_exit(*cx.op, x, a.R)));
    cdf = exit_distribution(*cx.op, b, x, t_max);
    meta["kind"] = "exit";
    meta["R"] = a.R;
    if (a.mc > 0) {
      const auto samples = mc_exit_samples(*cx.op, b, x, a.mc, RngStream(cx.c.seed, 0), cx.c.jobs);
      const auto full = exit_distribution(*cx.op, b, x, static_cast<int>(std::max<long long>(samples.back(), t_max)));
      const double ks = ks_distance(samples, full), eps = dkw_epsilon(a.mc, 1e-6);
      double mean = 0.0;
      for (long long s : samples) mean += static_cast<double>(s);
      pass = ks <= eps;
      mc = Json{{"n", a.mc}, {"ks", ks}, {"dkw_epsilon", eps}, {"mean", mean / static_cast<double>(a.mc)},
                {"pass", pass}};
    }
  }
  Output o;
  o.columns = {"t", "cdf"};
  Json ts = Json::array(), cs = Json::array();
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    o.rows.push_back(Json::array({k, cdf[k]}));
    ts.push_back(k);
    cs.push_back(cdf[k]);
  }
  o.body = Json{{"t", ts}, {"cdf", cs}, {"meta", meta}};
  if (!mc.is_null()) {
    o.body["mc"] = mc;
    o.trailer = "# mc: " + mc.dump() + "\n";
  }
  o.pass = pass;
  return o;
}

struct IterArgs {
  std::string center = "0", t, R;
  std::string rule = "ceil";
};

Output iter_counts_cmd(Context& cx, const IterArgs& a) {
  const Vertex x = parse_vertex(*cx.g, a.center);
  const auto ts = parse_real_list(a.t);
  const auto Rs = parse_int_list(a.R);
  const GraphExitOracle E(*cx.op, a.rule == "interpolate" ? RadiusRule::interpolate : RadiusRule::ceil);
  const auto fn = E.as_function();
  Output o;
  o.columns = {"t", "R", "kappa", "nu"};
  std::vector<Json> rows(ts.size() * Rs.size());
  parallel_for(rows.size(), cx.c.jobs, [&](std::size_t i) {
    const double t = ts[i / Rs.size()];
    const int R = Rs[i % Rs.size()];
    if (R < 1) throw Error(Errc::invalid_parameter, "R must be >= 1");
    const auto A = ball(*cx.g, x, R).interior;
    const auto ic = iter_counts(fn, t, R, cx.c.q, A);
    rows[i] = Json::array({t, R, ic.kappa, nu_cell(ic.nu)});
  });
  for (auto& r : rows) o.rows.push_back(std::move(r));
  return o;
}

struct HarnackArgs {
  std::string centers = "0", radii;
};

Output harnack_cmd(Context& cx, const HarnackArgs& a) {
  const auto xs = parse_vertex_list(*cx.g, a.centers);
  const auto Rs = parse_int_list(a.radii);
  std::vector<HarnackReport> reps(xs.size() * Rs.size());
  parallel_for(reps.size(), cx.c.jobs,
               [&](std::size_t i) { reps[i] = harnack_constant(*cx.op, xs[i / Rs.size()], Rs[i % Rs.size()]); });
  Output o;
  o.columns = {"x", "R", "H"};
  for (const auto& r : reps) o.rows.push_back(Json::array({r.center, r.radius, r.H}));
  return o;
}

struct ResistanceArgs {
  std::string centers = "0", inner, outer;
};

Output resistance_cmd(Context& cx, const ResistanceArgs& a) {
  const auto xs = parse_vertex_list(*cx.g, a.centers);
  const auto rs = parse_int_list(a.inner), Rs = parse_int_list(a.outer);
  std::vector<LhgPoint> grid;
  for (Vertex x : xs)
    for (int r : rs)
      for (int R : Rs)
        if (r < R) grid.push_back({x, r, R});
  if (grid.empty()) throw Error(Errc::invalid_parameter, "no (inner, outer) pair with inner < outer");
  std::vector<LhgRow> rows(grid.size());
  parallel_for(grid.size(), cx.c.jobs,
               [&](std::size_t i) { rows[i] = lhg_row(*cx.op, grid[i].x, grid[i].r, grid[i].R); });
  Output o;
  o.columns = {"x", "r", "R", "rho", "inf_g", "sup_g"};
  for (const auto& r : rows) o.rows.push_back(Json::array({r.x, r.r, r.R, r.rho, r.inf_g, r.sup_g}));
  return o;
}

struct GreenArgs {
  std::string center = "0", at;
  int R = 0;
};

Output green_cmd(Context& cx, const GreenArgs& a) {
  const Vertex x = parse_vertex(*cx.g, a.center);
  if (a.R < 1) throw Error(Errc::invalid_parameter, "--R must be >= 1");
  const Ball b = proper_ball(*cx.g, x, a.R);
  const auto ys = a.at.empty() ? b.interior : parse_vertex_list(*cx.g, a.at);
  const auto col = green_kernel(*cx.op, b).column(x);
  Output o;
  o.columns = {"x", "y", "g"};
  for (Vertex y : ys) o.rows.push_back(Json::array({x, y, col[y]}));
  return o;
}

struct ChainArgs {
  std::string from, to, t;
  std::string l = "1";
};

Json chain_row(const ChainBound& c) {
  return Json{{"x", c.x},
              {"y", c.y},
              {"t", c.t},
              {"l", c.l},
              {"d", c.d},
              {"r", c.r},
              {"s", c.s},
              {"link_radius", c.link_radius},
              {"pair_distance", c.pair_distance},
              {"pairs", c.pairs},
              {"arg_z", c.arg_z},
              {"arg_w", c.arg_w},
              {"link_inf", c.link_inf},
              {"bound", c.bound},
              {"exact", c.exact},
              {"in_hypothesis_range", c.in_hypothesis_range},
              {"holds", c.holds()}};
}

Output chain_bound_cmd(Context& cx, const ChainArgs& a) {
  const Vertex x = parse_vertex(*cx.g, a.from), y = parse_vertex(*cx.g, a.to);
  const auto ts = parse_real_list(a.t);
  BoundReport rep;
  rep.experiment = "chain-bound";
  rep.family = cx.g->meta().family;
  rep.pass = true;
  std::size_t violations = 0;
  if (a.l == "auto") {
    const GraphExitOracle E(*cx.op);
    for (double t : ts) {
      const auto p = prop3_lower(*cx.op, E, x, y, t, cx.c.q, cx.c.jobs);
      Json row = p.flagged ? Json{{"x", x}, {"y", y}, {"t", t}} : chain_row(p.chain);
      row["nu_3d"] = nu_cell(p.nu_3d);
      row["nu_d"] = nu_cell(p.nu_d);
      row["flagged"] = p.flagged;
      row["prop3_bound"] = p.bound;
      row["C_emp"] = real(p.C_emp);
      if (p.flagged) ++rep.flagged;
      if (!p.flagged && !p.chain.holds()) ++violations;
      rep.grid.push_back(std::move(row));
    }
  } else {
    const int l = parse_number<int>(a.l);
    for (const auto& c : chain_lower_bounds(*cx.op, x, y, ts, l, cx.c.jobs)) {
      if (!c.holds()) ++violations;
      rep.grid.push_back(chain_row(c));
    }
  }
  rep.constants["violations"] = static_cast<double>(violations);
  rep.pass = violations == 0;
  return from_report(rep);
}

struct EnvelopeArgs {
  std::string centers = "0", radii;
  std::string theta = "2^-4:0:0.125", lambda = "2^0:5:0.125";
  int b = 6;
};

Output envelope_cmd(Context& cx, const EnvelopeArgs& a) {
  const auto xs = parse_vertex_list(*cx.g, a.centers);
  const auto Rs = parse_int_list(a.radii);
  EnvelopeOptions opt;
  opt.q = cx.c.q;
  opt.b = a.b;
  opt.thetas = parse_real_list(a.theta);
  opt.lambdas = a.lambda.empty() ? std::vector<double>{} : parse_real_list(a.lambda);
  opt.jobs = cx.c.jobs;
  return from_report(theorem1_envelope(*cx.op, xs, Rs, opt).report);
}

struct ProfileArgs {
  std::string kind = "exit", beta = "auto", beta_radii;
  std::string centers = "0", radii, X = "1:21:1";
  std::string pairs, times;
  double min_r2 = 0.95;
  double min_ratio = 3.0;
};

Output profile_cmd(Context& cx, const ProfileArgs& a) {
  BoundReport fit;
  if (a.kind == "exit") {
    const auto xs = parse_vertex_list(*cx.g, a.centers);
    const double beta = resolve_beta(*cx.op, a.beta, xs.front(), a.beta_radii, fit);
    const auto X = parse_real_list(a.X);
    auto res = corollary2_profile(*cx.op, beta, xs, parse_int_list(a.radii), X, a.min_r2, a.min_ratio);
    for (const auto& [k, v] : fit.constants) res.report.constants[k] = v;
    return from_report(res.report);
  }
  std::vector<HeatPair> pairs;
  for (const auto& tok : split(a.pairs, ',')) {
    const auto xy = split(tok, ':');
    if (xy.size() != 2) throw Error(Errc::invalid_parameter, "heat pairs are x:y, got '" + tok + "'");
    pairs.push_back({parse_vertex(*cx.g, xy[0]), parse_vertex(*cx.g, xy[1])});
  }
  const double beta = resolve_beta(*cx.op, a.beta, pairs.front().x, a.beta_radii, fit);
  auto res = heat_profile(*cx.op, beta, pairs, parse_int_list(a.times));
  for (const auto& [k, v] : fit.constants) res.report.constants[k] = v;
  return from_report(res.report);
}

struct AsymArgs {
  std::string from = "0", toward, beta = "auto", beta_radii;
  std::string theta = "1,2,4", levels = "3:7";
  int d0 = 1;
};

Output asymptotics_cmd(Context& cx, const AsymArgs& a) {
  ShortTimeOptions opt;
  opt.a = parse_vertex(*cx.g, a.from);
  opt.toward = parse_vertex(*cx.g, a.toward);
  opt.d0 = a.d0;
  opt.levels = parse_int_list(a.levels);
  opt.thetas = parse_real_list(a.theta);
  BoundReport fit;
  const double beta = resolve_beta(*cx.op, a.beta, opt.a, a.beta_radii, fit);
  auto res = short_time_experiment(*cx.op, beta, opt);
  for (const auto& [k, v] : fit.constants) res.report.constants[k] = v;
  return from_report(res.report);
}

struct VerifyArgs {
  std::size_t pairs = 8, exit_instances = 6, trajectories = 20000;
};

Output verify_cmd(Context& cx, const VerifyArgs& a) {
  VerifyOptions opt;
  opt.seed = cx.c.seed;
  opt.jobs = cx.c.jobs;
  opt.pairs = a.pairs;
  opt.exit_instances = a.exit_instances;
  opt.trajectories = a.trajectories;
  return from_report(run_verify(*cx.op, opt).report);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact random-walk experiments on weighted graphs", "heatlab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  Common c;
  std::vector<Command> cmds;
  auto sub = [&](const std::string& name, const std::string& desc, const std::string& format, bool q) {
    CLI::App* s = app.add_subcommand(name, desc);
    add_common(s, c, q);
    cmds.push_back({s, format, true, nullptr});
    return s;
  };

  GraphSpec gen;
  {
    CLI::App* s = app.add_subcommand("gen", "Generate a graph file");
    add_graph_options(s, gen, true);
    s->get_option("--family")->required();
    s->add_option("-o,--output", c.output, "Output file (written atomically); stdout if absent");
    cmds.push_back({s, "json", false, nullptr});
  }

  auto me = std::make_shared<MeanExitArgs>();
  {
    auto* s = sub("mean-exit", "Mean exit times E(x,R) and sup over starting points", "csv", false);
    s->add_option("--center", me->center, "Ball center");
    cmds.back().required.push_back(s->add_option("--radii", me->radii, "Radii, e.g. 1,2,3 or 2:24:2"));
    cmds.back().run = [me](Context& cx) { return mean_exit_cmd(cx, *me); };
  }
  auto ed = std::make_shared<ExitDistArgs>();
  {
    auto* s = sub("exit-dist", "Exact exit (or hitting) time distribution", "json", false);
    s->add_option("--center", ed->center, "Start vertex (ball center)");
    s->add_option("--R", ed->R, "Ball radius");
    s->add_option("--target", ed->target, "Hitting target vertices instead of a ball exit");
    s->add_option("--t-max", ed->t_max, "Last time step; 0 means ceil(8 E(x,R))");
    s->add_option("--mc", ed->mc, "Monte Carlo trajectories compared against the exact CDF");
    cmds.back().run = [ed](Context& cx) { return exit_dist_cmd(cx, *ed); };
  }
  auto ic = std::make_shared<IterArgs>();
  {
    auto* s = sub("iter-counts", "Iteration counts kappa(x,t,R) and nu(x,t,R)", "csv", true);
    s->add_option("--center", ic->center, "Ball center");
    cmds.back().required.push_back(s->add_option("--t", ic->t, "Times"));
    cmds.back().required.push_back(s->add_option("--R", ic->R, "Radii"));
    s->add_option("--rule", ic->rule, "Real-radius rule")->check(CLI::IsMember({"ceil", "interpolate"}));
    cmds.back().run = [ic](Context& cx) { return iter_counts_cmd(cx, *ic); };
  }
  auto ha = std::make_shared<HarnackArgs>();
  {
    auto* s = sub("harnack", "Harnack constants over B(x,R) inside B(x,2R)", "csv", false);
    s->add_option("--center", ha->centers, "Centers");
    cmds.back().required.push_back(s->add_option("--radii", ha->radii, "Radii"));
    cmds.back().run = [ha](Context& cx) { return harnack_cmd(cx, *ha); };
  }
  auto rs = std::make_shared<ResistanceArgs>();
  {
    auto* s = sub("resistance", "Effective resistance rho(x,r,R) and Green kernel extremes", "csv", false);
    s->add_option("--center", rs->centers, "Centers");
    cmds.back().required.push_back(s->add_option("--inner", rs->inner, "Inner radii r"));
    cmds.back().required.push_back(s->add_option("--outer", rs->outer, "Outer radii R"));
    cmds.back().run = [rs](Context& cx) { return resistance_cmd(cx, *rs); };
  }
  auto gr = std::make_shared<GreenArgs>();
  {
    auto* s = sub("green", "Green kernel g^B(x, y) of B(x,R)", "csv", false);
    s->add_option("--center", gr->center, "Ball center x");
    cmds.back().required.push_back(s->add_option("--R", gr->R, "Ball radius"));
    s->add_option("--at", gr->at, "Vertices y (default: the whole ball)");
    cmds.back().run = [gr](Context& cx) { return green_cmd(cx, *gr); };
  }
  auto cb = std::make_shared<ChainArgs>();
  {
    auto* s = sub("chain-bound", "Chained lower bound for hitting a far ball", "json", true);
    cmds.back().required.push_back(s->add_option("--from", cb->from, "Start x"));
    cmds.back().required.push_back(s->add_option("--to", cb->to, "Target y"));
    cmds.back().required.push_back(s->add_option("--t", cb->t, "Times"));
    s->add_option("--l", cb->l, "Number of links, or auto for l = nu(x,t,3d)");
    cmds.back().run = [cb](Context& cx) { return chain_bound_cmd(cx, *cb); };
  }
  auto en = std::make_shared<EnvelopeArgs>();
  {
    auto* s = sub("envelope", "Exit-time envelopes against kappa and nu", "json", true);
    s->add_option("--center", en->centers, "Centers");
    cmds.back().required.push_back(s->add_option("--grid,--radii", en->radii, "Radius grid"));
    s->add_option("--theta", en->theta, "Times t = theta E(x,R)");
    s->add_option("--lambda", en->lambda, "Times t = lambda q R");
    s->add_option("--b", en->b, "Outer ball factor for nu")->check(CLI::PositiveNumber);
    cmds.back().run = [en](Context& cx) { return envelope_cmd(cx, *en); };
  }
  auto pr = std::make_shared<ProfileArgs>();
  {
    auto* s = sub("profile", "Sub-Gaussian profile regression", "json", false);
    s->add_option("--kind", pr->kind, "exit: -log P(T < t); heat: -log p_t V")->check(CLI::IsMember({"exit", "heat"}));
    s->add_option("--beta", pr->beta, "Walk dimension, or auto");
    s->add_option("--beta-radii", pr->beta_radii, "Radii of the auto fit (default 2^k with B(x,2^{k+1}) proper)");
    s->add_option("--center", pr->centers, "Centers (exit kind)");
    s->add_option("--radii", pr->radii, "Radii (exit kind)");
    s->add_option("--X", pr->X, "Values of (R^beta/t)^{1/(beta-1)} (exit kind)");
    s->add_option("--min-r2", pr->min_r2, "Pass threshold on r^2 (exit kind)");
    s->add_option("--min-ratio", pr->min_ratio, "Exclude t < min_ratio R (exit kind)");
    s->add_option("--pairs", pr->pairs, "Pairs x:y (heat kind)");
    s->add_option("--times", pr->times, "Times (heat kind)");
    cmds.back().run = [pr](Context& cx) { return profile_cmd(cx, *pr); };
  }
  auto as = std::make_shared<AsymArgs>();
  {
    auto* s = sub("asymptotics", "Scaling-window experiment for the short-time constant", "json", false);
    s->add_option("--from", as->from, "Center a of the sets A_k");
    cmds.back().required.push_back(s->add_option("--toward", as->toward, "The B_k centers move along a shortest path to this vertex"));
    s->add_option("--beta", as->beta, "Walk dimension, or auto");
    s->add_option("--beta-radii", as->beta_radii, "Radii of the auto fit");
    s->add_option("--theta", as->theta, "Values of theta in t = theta d^beta");
    s->add_option("--levels", as->levels, "Levels k, distance 2^k d0");
    s->add_option("--d0", as->d0, "Base distance")->check(CLI::PositiveNumber);
    cmds.back().run = [as](Context& cx) { return asymptotics_cmd(cx, *as); };
  }
  auto ve = std::make_shared<VerifyArgs>();
  {
    auto* s = sub("verify", "Invariant suite: kernel properties, exit CDFs, Monte Carlo", "json", false);
    s->add_option("--pairs", ve->pairs, "Sampled vertex pairs");
    s->add_option("--exit-instances", ve->exit_instances, "Sampled (x, R) exit instances");
    s->add_option("--trajectories", ve->trajectories, "Monte Carlo trajectories")->check(CLI::PositiveNumber);
    cmds.back().run = [ve](Context& cx) { return verify_cmd(cx, *ve); };
  }

  for (auto& k : cmds)
    for (CLI::Option* o : k.required) o->description(o->get_description() + " (required)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalid;
  }

  const Command* cmd = nullptr;
  for (const auto& k : cmds)
    if (k.app->parsed()) cmd = &k;

  if (!cmd->needs_graph) {
    const std::string text = serialize(build_graph(gen));
    if (c.output.empty())
      out << text;
    else
      write_file_atomic(c.output, text);
    return kOk;
  }

  if (!c.config.empty()) apply_config(cmd->app, c.config);
  for (const CLI::Option* o : cmd->required)
    if (o->count() == 0) throw Error(Errc::invalid_parameter, o->get_name() + " is required");
  if (CLI::Option* s = cmd->app->get_option_no_throw("--seed"); s && s->count() == 0) {
    if (const char* env = std::getenv("HEATLAB_SEED")) {
      s->add_result(env);
      s->run_callback();
    }
  }
  const std::string format = c.format.empty() ? cmd->default_format : c.format;

  Context cx{c, nullptr, nullptr};
  if (!c.graph.path.empty() && !c.graph.family.empty())
    throw Error(Errc::invalid_parameter, "give either --graph or --family, not both");
  if (!c.graph.path.empty())
    cx.g = std::make_unique<WeightedGraph>(load_graph(c.graph.path));
  else if (!c.graph.family.empty())
    cx.g = std::make_unique<WeightedGraph>(build_graph(c.graph));
  else
    throw Error(Errc::invalid_parameter, "a graph is required: --graph <file> or --family ...");
  cx.op = std::make_unique<TransitionOperator>(*cx.g, c.lazy);

  const Output o = cmd->run(cx);
  const std::string text = render(o, format, run_config(cmd->app, c, format), graph_hash(*cx.g));
  if (c.output.empty())
    out << text;
  else
    write_file_atomic(c.output, text);
  return o.pass ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << "heatlab: " << e.what() << "\n";
    return kInvalid;
  } catch (const CLI::Error& e) {
    err << "heatlab: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << "heatlab: internal error: " << e.what() << "\n";
    return kInternal;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace heatlab::cli
