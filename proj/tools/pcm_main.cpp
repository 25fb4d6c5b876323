// pcm: piecewise-continuous interval map analysis CLI.
// Exit codes: 0 success, 2 input/precondition error (machine-readable JSON
// error object), 1 internal fault.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pcm/connections.hpp"
#include "pcm/critical.hpp"
#include "pcm/experiment.hpp"
#include "pcm/measures.hpp"
#include "pcm/metrics.hpp"
#include "pcm/pcmap.hpp"
#include "pcm/perturb.hpp"
#include "pcm/sequences.hpp"

using json = nlohmann::ordered_json;
using namespace pcm;

namespace {

struct GlobalOpts {
  std::string out = "json";
  int threads = 1;
  std::string plot_data;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("FormatError", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("FormatError", "cannot write " + path);
  out << content;
}

json bounds_json(const Bounds& b) {
  return {{"lower", b.lower},
          {"upper", b.upper},
          {"width", b.width()},
          {"heuristic_upper", b.heuristic_upper},
          {"budget_exhausted", b.budget_exhausted}};
}

json map_summary(const PCMap& f) {
  json j;
  j["interval"] = {f.domain().lo, f.domain().hi};
  j["order"] = f.order();
  j["pieces"] = f.piece_count();
  j["breakpoints"] = f.breakpoints();
  return j;
}

json connection_json(const ConnectionReport& rep) {
  json j;
  j["ok"] = rep.ok;
  j["horizon"] = rep.horizon;
  j["orbit_tol"] = rep.orbit_tol;
  j["min_gap"] = rep.min_gap;
  json dpts = json::array();
  for (const auto& d : rep.d_points)
    dpts.push_back({{"value", d.value}, {"source", d.source}, {"side", d.side}});
  j["d_set"] = dpts;
  if (rep.first_violation) {
    j["first_violation"] = {{"d", rep.first_violation->d},
                            {"k", rep.first_violation->k},
                            {"breakpoint", rep.first_violation->breakpoint}};
  }
  return j;
}

std::string orbit_csv(const ConnectionReport& rep, const PCMap& f) {
  std::string csv = "d,k,fk,gap\n";
  for (std::size_t i = 0; i < rep.orbits.size(); ++i) {
    for (std::size_t k = 0; k < rep.orbits[i].size(); ++k) {
      double x = rep.orbits[i][k];
      double gap = 1e308;
      for (int c = 1; c <= f.piece_count() - 1; ++c)
        gap = std::min(gap, std::abs(x - f.cut(c)));
      csv += format_double(rep.d_points[i].value) + "," + std::to_string(k) + "," +
             format_double(x) + "," + format_double(gap) + "\n";
    }
  }
  return csv;
}

std::string graph_csv(const PCMap& f, int per_piece = 2048) {
  std::string csv = "piece,x,fx\n";
  for (int i = 1; i <= f.piece_count(); ++i) {
    IntervalPair p = f.piece_closure(i);
    for (int k = 0; k <= per_piece; ++k) {
      double x = k == per_piece ? p.hi : p.lo + p.length() * k / per_piece;
      csv += std::to_string(i) + "," + format_double(x) + "," +
             format_double(f.branch_value(i, 0, x)) + "\n";
    }
  }
  return csv;
}

std::string measure_csv(const UlamOperator& op, const MeasureVector& mu) {
  std::string csv = "cell_lo,cell_hi,weight\n";
  for (int a = 0; a < op.cells(); ++a) {
    csv += format_double(op.edges[static_cast<std::size_t>(a)]) + "," +
           format_double(op.edges[static_cast<std::size_t>(a) + 1]) + "," +
           format_double(mu.weights[static_cast<std::size_t>(a)]) + "\n";
  }
  return csv;
}

int emit(const json& config, const json& result, const GlobalOpts& g,
         const std::string& human, const std::string& csv = "") {
  if (g.out == "human" && !human.empty()) {
    std::cout << human;
    return 0;
  }
  if (g.out == "csv" && !csv.empty()) {
    std::cout << csv;
    return 0;
  }
  json doc;
  doc["schema"] = "pcm/1";
  doc["config"] = config;
  doc["result"] = result;
  std::cout << doc.dump(2) << "\n";
  return 0;
}

SupOptions sup_options(double tol, long budget, int threads) {
  SupOptions o;
  o.tol = tol;
  o.budget = budget;
  o.threads = threads;
  return o;
}

}  // namespace

static int run_cli(int argc, char** argv) {
  CLI::App app{"piecewise-continuous interval map toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--out", g.out, "output mode: json|csv|human")->default_str("json");
  app.add_option("--threads", g.threads, "worker threads for metric terms")->default_val(1);
  app.add_option("--plot-data", g.plot_data, "write plot CSV to this path");

  // ---- check ----------------------------------------------------------
  auto* check = app.add_subcommand("check", "validate a map document");
  std::string check_path;
  bool check_clamp = false;
  check->add_option("map", check_path)->required();
  check->add_flag("--clamp", check_clamp, "project out-of-range values onto X");

  // ---- eval -----------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "evaluate the map or a branch jet");
  std::string eval_path;
  double eval_at = 0.0;
  int eval_piece = 0, eval_deriv = 0;
  eval->add_option("map", eval_path)->required();
  eval->add_option("--at", eval_at)->required();
  eval->add_option("--piece", eval_piece, "use this branch's one-sided extension");
  eval->add_option("--deriv", eval_deriv, "derivative order for --piece");

  // ---- dist -----------------------------------------------------------
  auto* dist = app.add_subcommand("dist", "metric between two maps");
  std::string dist_a, dist_b, dist_metric = "comp";
  int dist_order = 0;
  double dist_tol = 1e-9;
  long dist_budget = 200000;
  dist->add_option("a", dist_a)->required();
  dist->add_option("b", dist_b)->required();
  dist->add_option("--metric", dist_metric, "comp|inf");
  dist->add_option("--order", dist_order);
  dist->add_option("--tol", dist_tol);
  dist->add_option("--budget", dist_budget);

  // ---- xi -------------------------------------------------------------
  auto* xi = app.add_subcommand("xi", "deformation homeomorphism value");
  std::string xi_a, xi_b;
  double xi_at = 0.0;
  xi->add_option("a", xi_a)->required();
  xi->add_option("b", xi_b)->required();
  xi->add_option("--at", xi_at)->required();

  // ---- seq ------------------------------------------------------------
  auto* seq = app.add_subcommand("seq", "analyze a map sequence");
  std::string seq_input, seq_analysis = "collapse";
  int seq_order = 0, seq_window = 5, seq_probes = 16;
  double seq_tolc = 1e-3;
  seq->add_option("input", seq_input, "directory of .pcm files or a manifest")->required();
  seq->add_option("--analysis", seq_analysis, "pairwise|collapse|limit");
  seq->add_option("--order", seq_order);
  seq->add_option("--tol-c", seq_tolc);
  seq->add_option("--window", seq_window);
  seq->add_option("--probes", seq_probes);

  // ---- crit -----------------------------------------------------------
  auto* crit = app.add_subcommand("crit", "critical point census");
  std::string crit_path;
  bool crit_radius = false;
  crit->add_option("map", crit_path)->required();
  crit->add_flag("--radius", crit_radius, "also certify a robustness radius");

  // ---- connections ----------------------------------------------------
  auto* conn = app.add_subcommand("connections", "no-connections check");
  std::string conn_path;
  int conn_horizon = 1;
  double conn_tol = 1e-11;
  conn->add_option("map", conn_path)->required();
  conn->add_option("--horizon", conn_horizon)->required();
  conn->add_option("--orbit-tol", conn_tol);

  // ---- radius ---------------------------------------------------------
  auto* rad = app.add_subcommand("radius", "no-connections robustness radius");
  std::string rad_path;
  int rad_horizon = 1;
  rad->add_option("map", rad_path)->required();
  rad->add_option("--horizon", rad_horizon)->required();

  // ---- perturb --------------------------------------------------------
  auto* pert = app.add_subcommand("perturb", "move a breakpoint and one-sided limit");
  std::string pert_path, pert_out;
  int pert_index = 1;
  double pert_a = 0.0, pert_b = 0.0, pert_eps = 0.1;
  bool pert_right = false;
  pert->add_option("map", pert_path)->required();
  pert->add_option("--index", pert_index)->required();
  pert->add_option("--breakpoint", pert_a)->required();
  pert->add_option("--value", pert_b)->required();
  pert->add_option("--eps", pert_eps)->required();
  pert->add_flag("--right", pert_right, "pin the right-side limit instead");
  pert->add_option("--out-map", pert_out, "write the perturbed map document here");

  // ---- repair ---------------------------------------------------------
  auto* rep = app.add_subcommand("repair", "remove connections by precomposition");
  std::string rep_path, rep_out;
  int rep_horizon = 1;
  double rep_eps = 0.01;
  std::uint64_t rep_seed = 0;
  rep->add_option("map", rep_path)->required();
  rep->add_option("--horizon", rep_horizon)->required();
  rep->add_option("--eps", rep_eps);
  rep->add_option("--seed", rep_seed);
  rep->add_option("--out-map", rep_out);

  // ---- measure --------------------------------------------------------
  auto* meas = app.add_subcommand("measure", "Ulam invariant measure approximation");
  std::string meas_path;
  int meas_cells = 64, meas_q = 64;
  std::uint64_t meas_seed = 0;
  double meas_tol = 1e-12;
  long meas_iters = 100000;
  int meas_probe_seeds = 3;
  meas->add_option("map", meas_path)->required();
  meas->add_option("--cells", meas_cells);
  meas->add_option("--samples", meas_q);
  meas->add_option("--seed", meas_seed);
  meas->add_option("--tol", meas_tol);
  meas->add_option("--max-iter", meas_iters);
  meas->add_option("--probe-seeds", meas_probe_seeds,
                   "extra seeds used to flag multi-modality (sampling mode)");

  // ---- random ---------------------------------------------------------
  auto* rnd = app.add_subcommand("random", "sample a neighbor in the comp ball");
  std::string rnd_path, rnd_out;
  double rnd_eps = 0.01;
  std::uint64_t rnd_seed = 0;
  rnd->add_option("map", rnd_path)->required();
  rnd->add_option("--eps", rnd_eps)->required();
  rnd->add_option("--seed", rnd_seed);
  rnd->add_option("--out-map", rnd_out);

  // ---- genericity -----------------------------------------------------
  auto* gen = app.add_subcommand("genericity", "no-connections Monte Carlo experiment");
  GenericityParams gp;
  bool gen_cubic = false;
  gen->add_option("--samples", gp.samples);
  gen->add_option("--horizon", gp.horizon);
  gen->add_option("--seed", gp.seed);
  gen->add_option("--pieces", gp.gen.pieces);
  gen->add_option("--lipschitz", gp.gen.lipschitz_cap);
  gen->add_flag("--cubic", gen_cubic, "rescaled-cubic branches instead of affine");
  gen->add_option("--repair-eps", gp.repair_eps);

  CLI11_PARSE(app, argc, argv);

  if (*check) {
    LoadOptions lo;
    lo.clamp = check_clamp;
    PCMap f = PCMap::load(read_file(check_path), lo);
    json config{{"subcommand", "check"}, {"map", check_path}, {"clamp", check_clamp},
                {"out", g.out}, {"threads", g.threads}};
    json result{{"ok", true}, {"map", map_summary(f)}};
    if (!g.plot_data.empty()) write_file(g.plot_data, graph_csv(f));
    return emit(config, result, g, "ok\n", graph_csv(f));
  }

  if (*eval) {
    PCMap f = PCMap::load(read_file(eval_path));
    json config{{"subcommand", "eval"}, {"map", eval_path}, {"at", eval_at},
                {"piece", eval_piece}, {"deriv", eval_deriv}, {"out", g.out},
                {"threads", g.threads}};
    double v = eval_piece > 0 ? f.branch_value(eval_piece, eval_deriv, eval_at)
                              : f.eval(eval_at);
    json result{{"value", v}};
    return emit(config, result, g, format_double(v) + "\n");
  }

  if (*dist) {
    PCMap a = PCMap::load(read_file(dist_a));
    PCMap b = PCMap::load(read_file(dist_b));
    SupOptions opts = sup_options(dist_tol, dist_budget, g.threads);
    Bounds v = dist_metric == "inf" ? dist_inf_metric(a, b, dist_order, opts)
                                    : comp_metric(a, b, dist_order, opts);
    json config{{"subcommand", "dist"}, {"a", dist_a},    {"b", dist_b},
                {"metric", dist_metric}, {"order", dist_order}, {"tol", dist_tol},
                {"budget", dist_budget}, {"out", g.out},  {"threads", g.threads}};
    return emit(config, {{"bounds", bounds_json(v)}}, g,
                "[" + format_double(v.lower) + ", " + format_double(v.upper) + "]\n");
  }

  if (*xi) {
    PCMap a = PCMap::load(read_file(xi_a));
    PCMap b = PCMap::load(read_file(xi_b));
    double v = xi_deform(a, b, xi_at);
    json config{{"subcommand", "xi"}, {"a", xi_a}, {"b", xi_b}, {"at", xi_at},
                {"out", g.out}, {"threads", g.threads}};
    return emit(config, {{"value", v}}, g, format_double(v) + "\n");
  }

  if (*seq) {
    namespace fs = std::filesystem;
    MapSequence s = fs::is_directory(seq_input) ? MapSequence::from_directory(seq_input)
                                                : MapSequence::from_manifest(seq_input);
    json config{{"subcommand", "seq"},   {"input", seq_input}, {"analysis", seq_analysis},
                {"order", seq_order},    {"tol_c", seq_tolc},  {"window", seq_window},
                {"probes", seq_probes},  {"out", g.out},       {"threads", g.threads}};
    SupOptions opts;
    opts.threads = g.threads;
    json result;
    result["size"] = s.size();
    if (seq_analysis == "pairwise") {
      auto mat = pairwise_comp(s, seq_order, opts);
      json rows = json::array();
      for (const auto& row : mat) {
        json r = json::array();
        for (const Bounds& b : row) r.push_back(bounds_json(b));
        rows.push_back(r);
      }
      result["pairwise"] = rows;
    } else if (seq_analysis == "limit") {
      LimitEstimate est = limit_estimate(s, seq_order, seq_probes, opts);
      json probes = json::array();
      for (const auto& p : est.probes)
        probes.push_back({{"piece", p.piece},
                          {"x0", p.x0},
                          {"s_last", p.chain.back()},
                          {"value_last", p.values.back()},
                          {"tail_oscillation", p.tail_oscillation}});
      result["limit"] = {{"tail_bound", est.tail_bound},
                         {"tail_window", est.tail_window},
                         {"representative", est.representative.to_document()},
                         {"probes", probes}};
      if (est.max_ftc_defect) result["limit"]["max_ftc_defect"] = *est.max_ftc_defect;
    } else {
      CollapseReport rep = collapse_estimate(s, seq_tolc, seq_window);
      json pieces = json::array();
      for (const auto& pp : rep.per_piece) {
        const char* flag = pp.flag == PieceTrend::Collapsing ? "collapsing"
                         : pp.flag == PieceTrend::Stable     ? "stable"
                                                             : "inconclusive";
        json tail = json::array();
        for (std::size_t k = pp.lengths.size() - std::min<std::size_t>(pp.lengths.size(),
                                                                       rep.window);
             k < pp.lengths.size(); ++k)
          tail.push_back(pp.lengths[k]);
        pieces.push_back({{"flag", flag},
                          {"first_length", pp.lengths.front()},
                          {"last_length", pp.lengths.back()},
                          {"tail", tail}});
      }
      result["collapse"] = {{"kappa_hat", rep.kappa_hat},
                            {"tol_c", rep.tol_c},
                            {"window", rep.window},
                            {"heuristic", rep.heuristic},
                            {"per_piece", pieces}};
    }
    return emit(config, result, g, "");
  }

  if (*crit) {
    PCMap f = PCMap::load(read_file(crit_path));
    CritReport rep = critical_census(f);
    json internal = json::array();
    for (const auto& p : rep.internal) {
      json e{{"x", p.x}, {"piece", p.piece}, {"fprime_residual", p.fprime_residual}};
      if (p.fsecond) e["fsecond"] = *p.fsecond;
      internal.push_back(e);
    }
    json boundary = json::array();
    for (const auto& b : rep.boundary)
      boundary.push_back({{"c", b.c}, {"branch", b.branch}, {"fprime", b.fprime}});
    json result{{"internal", internal},
                {"boundary", boundary},
                {"degenerate", rep.degenerate},
                {"suspected_tangencies", rep.suspected_tangencies},
                {"grid_density", rep.grid_density}};
    if (crit_radius) {
      RadiusCertificate cert = critical_radius(f);
      json c{{"radius", cert.radius},
             {"min_fprime_away", cert.min_fprime_away},
             {"delta", cert.delta},
             {"heuristic", cert.heuristic}};
      if (cert.min_fsecond_near) c["min_fsecond_near"] = *cert.min_fsecond_near;
      result["radius_certificate"] = c;
    }
    json config{{"subcommand", "crit"}, {"map", crit_path}, {"radius", crit_radius},
                {"out", g.out}, {"threads", g.threads}};
    return emit(config, result, g,
                std::to_string(rep.internal.size()) + " internal critical point(s)\n");
  }

  if (*conn) {
    PCMap f = PCMap::load(read_file(conn_path));
    ConnectionReport r = check_connections(f, conn_horizon, conn_tol);
    json config{{"subcommand", "connections"}, {"map", conn_path},
                {"horizon", conn_horizon},     {"orbit_tol", conn_tol},
                {"out", g.out},                {"threads", g.threads}};
    if (!g.plot_data.empty()) write_file(g.plot_data, orbit_csv(r, f));
    return emit(config, connection_json(r), g,
                std::string(r.ok ? "ok" : "has connections") + "\n", orbit_csv(r, f));
  }

  if (*rad) {
    PCMap f = PCMap::load(read_file(rad_path));
    LipschitzEstimate lam = lipschitz_estimate(f);
    ConnectionRadius cr = connection_radius(f, rad_horizon, lam);
    json config{{"subcommand", "radius"}, {"map", rad_path}, {"horizon", rad_horizon},
                {"out", g.out}, {"threads", g.threads}};
    json result{{"epsilon", cr.epsilon},
                {"degenerate", cr.degenerate},
                {"lipschitz",
                 {{"value", lam.value}, {"certified", lam.certified}, {"method", lam.method}}}};
    return emit(config, result, g, format_double(cr.epsilon) + "\n");
  }

  if (*pert) {
    PCMap f = PCMap::load(read_file(pert_path));
    PCMap out = perturb_breakpoint(f, pert_index, pert_a, pert_b, pert_eps, pert_right);
    Bounds c = comp_metric(f, out, 0);
    if (!pert_out.empty()) write_file(pert_out, out.to_document());
    json config{{"subcommand", "perturb"}, {"map", pert_path},   {"index", pert_index},
                {"breakpoint", pert_a},    {"value", pert_b},    {"eps", pert_eps},
                {"right", pert_right},     {"out_map", pert_out}, {"out", g.out},
                {"threads", g.threads}};
    json result{{"comp0", bounds_json(c)}, {"map_document", out.to_document()},
                {"map", map_summary(out)}};
    return emit(config, result, g, out.to_document());
  }

  if (*rep) {
    PCMap f = PCMap::load(read_file(rep_path));
    RepairResult r = repair_connections(f, rep_horizon, rep_eps, rep_seed);
    if (!rep_out.empty()) write_file(rep_out, r.map.to_document());
    json config{{"subcommand", "repair"}, {"map", rep_path}, {"horizon", rep_horizon},
                {"eps", rep_eps},         {"seed", rep_seed}, {"out_map", rep_out},
                {"out", g.out},           {"threads", g.threads}};
    json result{{"changed", r.changed},
                {"comp0", bounds_json(r.comp0)},
                {"post", connection_json(r.post)},
                {"eta", r.eta},
                {"max_deviation", r.max_deviation},
                {"homeomorphism", r.h.serialize()},
                {"map_document", r.map.to_document()}};
    return emit(config, result, g, r.map.to_document());
  }

  if (*meas) {
    PCMap f = PCMap::load(read_file(meas_path));
    UlamOperator op = ulam_operator(f, meas_cells, meas_q, meas_seed);
    StationaryResult st = stationary_measure(op, meas_tol, meas_iters);
    double recomputed = invariance_residual(st.measure, op);
    json config{{"subcommand", "measure"}, {"map", meas_path},   {"cells", meas_cells},
                {"samples", meas_q},       {"seed", meas_seed},  {"tol", meas_tol},
                {"max_iter", meas_iters},  {"probe_seeds", meas_probe_seeds},
                {"out", g.out},            {"threads", g.threads}};
    json result{{"cells", op.cells()},
                {"exact", op.exact},
                {"iterations", st.iterations},
                {"converged", st.converged},
                {"residual", st.residual},
                {"residual_damped", st.residual_damped},
                {"residual_recomputed", recomputed}};
    // existence, not uniqueness: flag qualitative seed-dependence of the
    // sampled chain without adjudicating
    if (!op.exact && meas_probe_seeds > 1) {
      bool multi = false;
      for (int s = 1; s < meas_probe_seeds; ++s) {
        UlamOperator alt = ulam_operator(f, meas_cells, meas_q, meas_seed + s);
        StationaryResult st2 = stationary_measure(alt, meas_tol, meas_iters);
        double l1 = 0.0;
        for (std::size_t k = 0; k < st.measure.weights.size() &&
                                k < st2.measure.weights.size();
             ++k)
          l1 += std::abs(st.measure.weights[k] - st2.measure.weights[k]);
        if (l1 > 0.1) multi = true;
      }
      result["multi_modal"] = multi;
    }
    if (!g.plot_data.empty()) write_file(g.plot_data, measure_csv(op, st.measure));
    return emit(config, result, g,
                "residual " + format_double(st.residual) + " after " +
                    std::to_string(st.iterations) + " iterations\n",
                measure_csv(op, st.measure));
  }

  if (*rnd) {
    PCMap f = PCMap::load(read_file(rnd_path));
    PCMap out = random_neighbor(f, rnd_eps, rnd_seed);
    Bounds c = comp_metric(f, out, f.order());
    if (!rnd_out.empty()) write_file(rnd_out, out.to_document());
    json config{{"subcommand", "random"}, {"map", rnd_path}, {"eps", rnd_eps},
                {"seed", rnd_seed},       {"out_map", rnd_out}, {"out", g.out},
                {"threads", g.threads}};
    json result{{"comp", bounds_json(c)}, {"map_document", out.to_document()},
                {"map", map_summary(out)}};
    return emit(config, result, g, out.to_document());
  }

  if (*gen) {
    gp.gen.cubic = gen_cubic;
    GenericityReport r = genericity_experiment(gp);
    json config{{"subcommand", "genericity"},
                {"samples", gp.samples},
                {"horizon", gp.horizon},
                {"seed", gp.seed},
                {"pieces", gp.gen.pieces},
                {"lipschitz", gp.gen.lipschitz_cap},
                {"cubic", gp.gen.cubic},
                {"repair_eps", gp.repair_eps},
                {"out", g.out},
                {"threads", g.threads}};
    json result{{"pass_count", r.pass_count},
                {"fail_count", r.fail_count},
                {"pass_fraction", r.pass_fraction},
                {"repaired_ok", r.repaired_ok},
                {"repair_no_room", r.repair_no_room},
                {"repair_verification_failed", r.repair_verification_failed},
                {"repair_success_fraction", r.repair_success_fraction}};
    return emit(config, result, g,
                "pass fraction " + format_double(r.pass_fraction) + "\n");
  }

  return 1;
}

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const Error& e) {
    json doc;
    doc["schema"] = "pcm/1";
    doc["error"] = {{"code", e.code()}, {"message", e.what()}};
    if (e.witness()) doc["error"]["witness"] = *e.witness();
    std::cout << doc.dump(2) << "\n";
    return 2;
  } catch (const std::exception& e) {
    json doc;
    doc["schema"] = "pcm/1";
    doc["error"] = {{"code", "Internal"}, {"message", e.what()}};
    std::cout << doc.dump(2) << "\n";
    return 1;
  }
}
