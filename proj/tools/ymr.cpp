// ymr: lattice Yang-Mills replacement experiment harness.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "config.hpp"
#include "ym/io.hpp"

using namespace ym;
using ymcli::Config;
using ymcli::ConfigError;

namespace {

const std::vector<std::string> config_schema = {
    "lattice.dims", "lattice.spacing", "lattice.topology", "group",
    "region.lo", "region.hi",
    "generator.kind", "generator.scale", "generator.seed", "generator.dilation", "generator.file",
    "solver.method", "solver.tol_residual", "solver.max_iter", "solver.gauge_refix_every",
    "solver.step_init", "solver.step_shrink", "solver.armijo_c",
    "gauge.variant", "gauge.tol", "gauge.max_iter", "gauge.overrelax",
    "replace.epsilon", "replace.interpolation_samples", "replace.convexity",
    "replace.diagnostic_regauge",
    "sweep.ball", "sweep.stride", "sweep.max_cycles", "sweep.tol", "sweep.epsilon",
    "sweep.interpolation_samples", "sweep.convexity", "sweep.diagnostic_regauge",
    "family.members", "family.kind", "family.gauge_scale",
    "verify.pair", "verify.pair_tol",
};

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_nonconvergence = 3;
constexpr int exit_hypothesis = 4;

struct Experiment {
  explicit Experiment(Config c) : cfg(std::move(c)) {}

  Config cfg;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string outdir = "out";
  std::string config_hash;

  std::shared_ptr<const LatticeComplex> lattice;
  GroupTag group = GroupTag::SU2;

  void setup_lattice() {
    const auto dims = cfg.ints4("lattice.dims");
    const double h = cfg.num_or("lattice.spacing", 1.0);
    const std::string topo = cfg.str_or("lattice.topology", "periodic");
    if (topo == "periodic")
      lattice = build_torus(dims, h);
    else if (topo == "box")
      lattice = build_box(dims, h);
    else
      throw ConfigError("lattice.topology must be periodic or box, got '" + topo + "'");
    group = parse_group(cfg.str_or("group", "su2"));
  }

  bool has_region() const { return cfg.has("region.lo") || lattice->topology() == Topology::box; }

  BallRegion region() const {
    if (cfg.has("region.lo") || cfg.has("region.hi"))
      return build_ball(lattice, cfg.ints4("region.lo"), cfg.ints4("region.hi"));
    if (lattice->topology() == Topology::box)
      return build_ball(lattice, {0, 0, 0, 0}, lattice->dims());
    throw ConfigError("this subcommand needs region.lo / region.hi on a periodic lattice");
  }

  LinkField make_field() {
    const std::string kind = cfg.str_or("generator.kind", "random_small");
    if (kind == "flat") return flat_field(lattice, group);
    if (kind == "random_small") {
      Rng rng(seed);
      return random_field(lattice, group, rng, cfg.num_or("generator.scale", 0.1));
    }
    if (kind == "dilated") {
      Rng rng(seed);
      LinkField base = random_field(lattice, group, rng, cfg.num_or("generator.scale", 0.1));
      return dilation_generator(base, cfg.num_or("generator.dilation", 0.5));
    }
    if (kind == "file") {
      LinkField U = read_field(cfg.str("generator.file"));
      if (U.group != group)
        throw ConfigError("generator.file group tag does not match the configured group");
      if (U.complex->descriptor() != lattice->descriptor())
        throw ConfigError("generator.file lattice does not match the configured lattice");
      U.complex = lattice;
      return U;
    }
    throw ConfigError("generator.kind must be flat|random_small|dilated|file, got '" + kind + "'");
  }

  SolveOptions solve_options() const {
    SolveOptions so;
    so.method = parse_method(cfg.str_or("solver.method", "newton"));
    so.tol_residual = cfg.num_or("solver.tol_residual", 1e-8);
    so.max_iter = static_cast<int>(cfg.integer_or("solver.max_iter", 500));
    so.gauge_refix_every = static_cast<int>(cfg.integer_or("solver.gauge_refix_every", 25));
    so.step_init = cfg.num_or("solver.step_init", 1.0);
    so.step_shrink = cfg.num_or("solver.step_shrink", 0.5);
    so.armijo_c = cfg.num_or("solver.armijo_c", 1e-4);
    return so;
  }

  GaugeFixOptions gauge_options() const {
    GaugeFixOptions go;
    go.tol = cfg.num_or("gauge.tol", 1e-8);
    go.max_iter = static_cast<int>(cfg.integer_or("gauge.max_iter", 10000));
    go.overrelax = cfg.num_or("gauge.overrelax", 1.7);
    return go;
  }

  ReplaceOptions replace_options() const {
    ReplaceOptions ro;
    ro.solve = solve_options();
    ro.gauge = gauge_options();
    ro.epsilon = cfg.num_or("replace.epsilon", 0.5);
    ro.interpolation_samples = static_cast<int>(cfg.integer_or("replace.interpolation_samples", 32));
    ro.convexity = cfg.flag_or("replace.convexity", true);
    ro.diagnostic_regauge = cfg.flag_or("replace.diagnostic_regauge", true);
    return ro;
  }

  SweepOptions sweep_options() const {
    SweepOptions sw;
    sw.step.solve = solve_options();
    sw.step.gauge = gauge_options();
    sw.step.epsilon = cfg.num_or("sweep.epsilon", 0.5);
    sw.step.interpolation_samples =
        static_cast<int>(cfg.integer_or("sweep.interpolation_samples", 0));
    sw.step.convexity = cfg.flag_or("sweep.convexity", false);
    sw.step.diagnostic_regauge = cfg.flag_or("sweep.diagnostic_regauge", true);
    sw.max_cycles = static_cast<int>(cfg.integer_or("sweep.max_cycles", 50));
    sw.tol_cycle_decrease = cfg.num_or("sweep.tol", 1e-10);
    return sw;
  }

  json base_report(const std::string& subcommand) const {
    json j;
    j["subcommand"] = subcommand;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["lattice"] = lattice->descriptor();
    j["group"] = group_name(group);
    return j;
  }

  std::string out(const std::string& name) const {
    return (std::filesystem::path(outdir) / name).string();
  }
};

void add_field_norms(json& j, const LinkField& U) {
  try {
    const Cochain a = connection_form(U);
    j["energy"] = energy(U);
    j["norm_f_l2"] = std::sqrt(2.0 * energy(U));
    j["norm_a_l4"] = norm_l4(a);
  } catch (const BranchCutError& e) {
    j["norms_unavailable"] = e.what();
  }
}

int cmd_generate(Experiment& ex) {
  LinkField U = ex.make_field();
  write_field(ex.out("field.ymrf"), U);
  json rep = ex.base_report("generate");
  add_field_norms(rep, U);
  write_json(ex.out("report.json"), rep);
  return exit_ok;
}

int cmd_gaugefix(Experiment& ex) {
  const std::string variant = ex.cfg.str_or("gauge.variant", "dirichlet-coulomb");
  LinkField U = ex.make_field();
  GaugeFixOptions go = ex.gauge_options();

  GaugeFixResult res;
  if (variant == "neumann") {
    if (ex.has_region() && ex.cfg.has("region.lo")) {
      BallRegion ball = ex.region();
      res = coulomb_fix_neumann(extract_field(U, ball), go);
    } else {
      res = coulomb_fix_neumann(U, go);
    }
  } else if (variant == "identity-boundary") {
    BallRegion ball = ex.region();
    res = coulomb_fix_identity_boundary(
        U.complex == ball.sub() ? U : extract_field(U, ball), go);
  } else if (variant == "dirichlet-coulomb") {
    BallRegion ball = ex.region();
    res = dirichlet_coulomb_fix(U, ball, go);
  } else {
    throw ConfigError("gauge.variant must be neumann|identity-boundary|dirichlet-coulomb");
  }

  write_field(ex.out("fixed.ymrf"), res.fixed);
  json rep = ex.base_report("gaugefix");
  rep["variant"] = variant;
  rep["gauge_fix"] = to_json(res.report);
  add_field_norms(rep, res.fixed);
  write_json(ex.out("report.json"), rep);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < res.report.functional_trace.size(); ++i)
    rows.push_back({static_cast<double>(i), res.report.functional_trace[i]});
  write_csv(ex.out("functional.csv"), "sweep,functional", rows);
  return res.report.converged ? exit_ok : exit_nonconvergence;
}

int cmd_solve(Experiment& ex) {
  BallRegion ball = ex.region();
  LinkField U = ex.make_field();
  LinkField init = U.complex == ball.sub() ? U : extract_field(U, ball);
  LinkField bdata = restrict_boundary(init, ball);
  auto [solution, rep] = solve_dirichlet_ym(init, ball, bdata, ex.solve_options());

  write_field(ex.out("solution.ymrf"), solution);
  json j = ex.base_report("solve-dirichlet");
  j["solve"] = to_json(rep);
  write_json(ex.out("report.json"), j);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < rep.energy_trace.size(); ++i)
    rows.push_back({static_cast<double>(i), rep.energy_trace[i], rep.residual_trace[i]});
  write_csv(ex.out("trace.csv"), "iteration,energy,residual", rows);
  if (!rep.failure.empty() && rep.failure.find("branch cut") != std::string::npos)
    return exit_hypothesis;
  return rep.converged ? exit_ok : exit_nonconvergence;
}

int cmd_oracle(Experiment& ex) {
  if (ex.group != GroupTag::U1) throw ConfigError("oracle: the linear oracle needs group = u1");
  BallRegion ball = ex.region();
  LinkField U = ex.make_field();
  LinkField init = U.complex == ball.sub() ? U : extract_field(U, ball);
  LinkField bdata = restrict_boundary(init, ball);
  LinkField solution = abelian_oracle_solve(ball, bdata);
  write_field(ex.out("oracle.ymrf"), solution);
  json j = ex.base_report("oracle");
  add_field_norms(j, solution);
  write_json(ex.out("report.json"), j);
  return exit_ok;
}

int cmd_replace(Experiment& ex) {
  BallRegion ball = ex.region();
  LinkField U = ex.make_field();
  auto [out, rep] = replace_on_ball(U, ball, ex.replace_options());
  write_field(ex.out("replaced.ymrf"), out);
  json j = ex.base_report("replace");
  j["step"] = to_json(rep);
  write_json(ex.out("report.json"), j);
  if (!rep.interpolation_profile.empty()) {
    std::vector<std::vector<double>> rows;
    for (const auto& [t, e] : rep.interpolation_profile) rows.push_back({t, e});
    write_csv(ex.out("profile.csv"), "t,energy", rows);
  }
  if (rep.failure == "epsilon_violation" || rep.failure.rfind("branch_cut", 0) == 0)
    return exit_hypothesis;
  return rep.applied ? exit_ok : exit_nonconvergence;
}

int cmd_sweep(Experiment& ex) {
  LinkField U = ex.make_field();
  const int ball = static_cast<int>(ex.cfg.integer_or("sweep.ball", 6));
  const int stride = static_cast<int>(ex.cfg.integer_or("sweep.stride", 4));
  auto schedule = default_schedule(ex.lattice, ball, stride);
  auto [out, trace] = sweep(U, schedule, ex.sweep_options());
  write_field(ex.out("final.ymrf"), out);
  json j = ex.base_report("sweep");
  j["balls"] = schedule.size();
  j["trace"] = to_json(trace);
  write_json(ex.out("trace.json"), j);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < trace.global_energy.size(); ++i)
    rows.push_back({static_cast<double>(i), trace.global_energy[i]});
  write_csv(ex.out("energy.csv"), "step,global_energy", rows);
  return trace.stop == SweepStop::epsilon_violation ? exit_hypothesis : exit_ok;
}

int cmd_family(Experiment& ex) {
  BallRegion ball = ex.region();
  const int members = static_cast<int>(ex.cfg.integer_or("family.members", 8));
  const std::string kind = ex.cfg.str_or("family.kind", "gauge_orbit");
  LinkField base = ex.make_field();

  std::vector<LinkField> family;
  if (kind == "gauge_orbit") {
    const double gscale = ex.cfg.num_or("family.gauge_scale", 0.5);
    for (int i = 0; i < members; ++i) {
      Rng rng(derive_seed(ex.seed, 1000 + i));
      family.push_back(i == 0 ? base : apply_gauge(base, random_gauge(ex.lattice, ex.group, rng, gscale)));
    }
  } else if (kind == "interpolated") {
    Rng rng(derive_seed(ex.seed, 2000));
    LinkField other = random_field(ex.lattice, ex.group, rng, ex.cfg.num_or("generator.scale", 0.1));
    const Cochain a = connection_form(base);
    const Cochain b = connection_form(other);
    for (int i = 0; i < members; ++i) {
      const double t = members > 1 ? static_cast<double>(i) / (members - 1) : 0.0;
      Cochain c = a;
      c.values = (1.0 - t) * a.values + t * b.values;
      family.push_back(link_field(c));
    }
  } else {
    throw ConfigError("family.kind must be gauge_orbit or interpolated");
  }

  ReplaceOptions ro = ex.replace_options();
  FamilyResult res = family_sweep(family, ball, ro, ex.jobs);

  json j = ex.base_report("family-sweep");
  j["members"] = members;
  j["kind"] = kind;
  j["reports"] = json::array();
  bool all_ok = true;
  for (int i = 0; i < members; ++i) {
    write_field(ex.out("member_" + std::to_string(i) + ".ymrf"), res.fields[i]);
    j["reports"].push_back(to_json(res.reports[i]));
    all_ok = all_ok && res.reports[i].applied;
  }
  write_json(ex.out("family.json"), j);
  return all_ok ? exit_ok : exit_nonconvergence;
}

int cmd_verify(Experiment& ex) {
  LinkField U = ex.make_field();
  const auto cx = U.complex;
  json rows = json::array();
  bool all_pass = true;
  const auto row = [&](const std::string& name, double value, double threshold) {
    const bool pass = value <= threshold;
    all_pass = all_pass && pass;
    json r;
    r["name"] = name;
    r["value"] = value;
    r["threshold"] = threshold;
    r["pass"] = pass;
    rows.push_back(r);
    std::printf("%-34s %-12.3e %-10.0e %s\n", name.c_str(), value, threshold,
                pass ? "pass" : "FAIL");
  };

  Rng rng(derive_seed(ex.seed, 7));
  auto rand_cochain = [&](int degree, double scale) {
    Cochain c = zero_cochain(cx, ex.group, degree);
    for (int i = 0; i < c.values.rows(); ++i) c.set(i, random_algebra(rng, ex.group, scale));
    return c;
  };

  {
    const Cochain f = rand_cochain(0, 1.0);
    row("dd_zero", norm_l2(d(d(f))), 1e-12);
  }
  {
    double worst = 0;
    for (int k = 1; k <= 3; ++k) {
      Cochain a = rand_cochain(k - 1, 1.0);
      Cochain b = rand_cochain(k, 1.0);
      worst = std::max(worst,
                       std::abs(inner_l2(d(a), b) - inner_l2(a, codiff(b, BoundaryCondition::tangential))));
    }
    row("adjointness", worst, 1e-12);
  }
  try {
    VertexGaugeField g = random_gauge(cx, ex.group, rng, 1.0);
    const LinkField V = apply_gauge(U, g);
    const Cochain F = plaquette_curvature(U);
    const Cochain Fg = plaquette_curvature(V);
    double worst = 0;
    for (int f = 0; f < cx->face_count(); ++f)
      worst = std::max(worst, norm(Fg.at(f) - conjugate(g.site[cx->face_loop(f).base_vertex], F.at(f))));
    row("curvature_gauge_covariance", worst, 1e-12);
    const double e0 = energy(U);
    row("energy_gauge_invariance", std::abs(energy(V) - e0) / std::max(1.0, e0), 1e-12);
    VertexGaugeField h = random_gauge(cx, ex.group, rng, 1.0);
    const LinkField lhs = apply_gauge(U, compose(g, h));
    const LinkField rhs = apply_gauge(apply_gauge(U, h), g);
    double comp = 0;
    for (int e = 0; e < cx->edge_count(); ++e)
      comp = std::max(comp, max_abs_diff(lhs.links[e], rhs.links[e]));
    row("gauge_action_composition", comp, 1e-12);
    if (ex.group == GroupTag::U1) {
      Cochain diff = plaquette_curvature(U);
      diff.values -= d(connection_form(U)).values;
      row("abelian_exactness", norm_l2(diff), 1e-12);
    }
  } catch (const BranchCutError& e) {
    std::printf("(gauge rows skipped: %s)\n", e.what());
    all_pass = false;
  }
  {
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      AlgebraElement x = random_algebra(rng, ex.group, 1.5);
      worst = std::max(worst, norm(ym::log(ym::exp(x)) - x));
    }
    row("exp_log_roundtrip", worst, 1e-12);
  }
  {
    double worst = 0, worst_b = 0;
    for (int i = 0; i < 200; ++i) {
      GroupElement g = random_group(rng, ex.group, 2.0);
      AlgebraElement x = random_algebra(rng, ex.group, 1.0);
      AlgebraElement y = random_algebra(rng, ex.group, 1.0);
      worst = std::max(worst, std::abs(inner(conjugate(g, x), conjugate(g, y)) - inner(x, y)));
      worst_b = std::max(worst_b,
                         norm(conjugate(g, bracket(x, y)) - bracket(conjugate(g, x), conjugate(g, y))));
    }
    row("ad_orthogonality", worst, 1e-12);
    row("ad_bracket_compatibility", worst_b, 1e-12);
  }
  {
    const Cochain c = rand_cochain(1, 1.0);
    HodgeParts parts = hodge_decompose(c, BoundaryCondition::tangential);
    const double n2 = inner_l2(c, c);
    double ortho = std::max({std::abs(inner_l2(parts.exact, parts.coexact)),
                             std::abs(inner_l2(parts.exact, parts.harmonic)),
                             std::abs(inner_l2(parts.coexact, parts.harmonic))});
    row("hodge_orthogonality", ortho / std::max(1e-300, n2), 1e-10);
    Eigen::MatrixXd sum = parts.exact.values + parts.coexact.values + parts.harmonic.values;
    row("hodge_parts_sum", (sum - c.values).cwiseAbs().maxCoeff(), 1e-12);
  }
  if (ex.cfg.str_or("generator.kind", "random_small") != "file") {
    LinkField U2 = ex.make_field();
    double diff = 0;
    for (int e = 0; e < cx->edge_count(); ++e) diff = std::max(diff, max_abs_diff(U.links[e], U2.links[e]));
    row("generation_determinism", diff, 0.0);
  }
  if (ex.cfg.has("verify.pair")) {
    LinkField W = read_field(ex.cfg.str("verify.pair"));
    const auto sa = plaquette_trace_spectrum(U);
    const auto sb = plaquette_trace_spectrum(W);
    double worst = 0;
    for (std::size_t i = 0; i < sa.size(); ++i) worst = std::max(worst, std::abs(sa[i] - sb[i]));
    row("pair_spectrum_match", worst, ex.cfg.num_or("verify.pair_tol", 1e-6));
  }

  json j = ex.base_report("verify");
  j["rows"] = rows;
  j["all_pass"] = all_pass;
  write_json(ex.out("verify.json"), j);
  return all_pass ? exit_ok : exit_nonconvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice Yang-Mills replacement harness"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path, outdir = "out";
  std::uint64_t seed_flag = 0;
  bool seed_given = false;
  int jobs = 1;
  app.add_option("--config", config_path, "experiment config file")->required();
  app.add_option("--seed", seed_flag, "override generator.seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--jobs", jobs, "worker threads for ensemble fan-out");
  app.add_option("--out", outdir, "output directory");

  const std::vector<std::pair<std::string, int (*)(Experiment&)>> commands = {
      {"generate", cmd_generate}, {"gaugefix", cmd_gaugefix},     {"solve-dirichlet", cmd_solve},
      {"oracle", cmd_oracle},     {"replace", cmd_replace},       {"sweep", cmd_sweep},
      {"family-sweep", cmd_family}, {"verify", cmd_verify},
  };
  for (const auto& [name, fn] : commands) app.add_subcommand(name, "");

  CLI11_PARSE(app, argc, argv);

  const auto emit_error = [](int code, const std::string& what) {
    json err;
    err["error"] = what;
    err["exit_code"] = code;
    std::cerr << err.dump() << "\n";
    return code;
  };

  try {
    Experiment ex{Config::from_file(config_path)};
    ex.cfg.require_known(config_schema);
    ex.outdir = outdir;
    ex.jobs = jobs;
    ex.seed = seed_given ? seed_flag
                         : static_cast<std::uint64_t>(ex.cfg.integer_or("generator.seed", 0));
    ex.config_hash = fnv1a_hex(ex.cfg.raw() + "|seed=" + std::to_string(ex.seed));
    ex.setup_lattice();
    std::filesystem::create_directories(ex.outdir);

    for (const auto& [name, fn] : commands) {
      if (app.get_subcommand(name)->parsed()) return fn(ex);
    }
    return exit_config;
  } catch (const ConfigError& e) {
    return emit_error(exit_config, e.what());
  } catch (const BranchCutError& e) {
    return emit_error(exit_hypothesis, e.what());
  } catch (const SolverError& e) {
    return emit_error(exit_nonconvergence, e.what());
  } catch (const std::invalid_argument& e) {
    return emit_error(exit_config, e.what());
  } catch (const std::exception& e) {
    return emit_error(exit_nonconvergence, e.what());
  }
}
