#include "ym/replace.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace ym {

std::string sweep_stop_name(SweepStop s) {
  switch (s) {
    case SweepStop::converged: return "converged";
    case SweepStop::max_steps: return "max_steps";
    case SweepStop::epsilon_violation: return "epsilon_violation";
  }
  return "?";
}

std::vector<std::pair<double, double>> interpolation_energy_profile(const LinkField& U_A,
                                                                    const LinkField& U_B,
                                                                    int n_steps) {
  if (U_A.complex != U_B.complex || U_A.group != U_B.group)
    throw std::invalid_argument("interpolation: fields live on different complexes");
  if (n_steps < 1) throw std::invalid_argument("interpolation: need at least one step");
  const auto& cx = *U_A.complex;
  for (int e = 0; e < cx.edge_count(); ++e) {
    if (cx.own_cell_class(1, e) != CellClass::boundary_tangential) continue;
    if (max_abs_diff(U_A.links[e], U_B.links[e]) > 1e-12)
      throw std::invalid_argument("interpolation: tangential boundary links disagree");
  }
  const Cochain a = connection_form(U_A);
  const Cochain b = connection_form(U_B);
  std::vector<std::pair<double, double>> profile;
  profile.reserve(n_steps + 1);
  for (int i = 0; i <= n_steps; ++i) {
    const double t = static_cast<double>(i) / n_steps;
    Cochain ct = a;
    ct.values = (1.0 - t) * a.values + t * b.values;
    try {
      profile.emplace_back(t, energy(link_field(ct)));
    } catch (const BranchCutError& err) {
      throw BranchCutError("interpolation at t = " + std::to_string(t) + ": " + err.what(),
                           err.cell, err.degree);
    }
  }
  return profile;
}

ConvexityRecord convexity_check(const LinkField& U_A, const LinkField& U_B,
                                const BallRegion& region) {
  const LinkField A = U_A.complex == region.sub() ? U_A : extract_field(U_A, region);
  const LinkField B = U_B.complex == region.sub() ? U_B : extract_field(U_B, region);
  ConvexityRecord rec;
  const auto& cx = *region.sub();
  for (int e = 0; e < cx.edge_count(); ++e) {
    if (cx.own_cell_class(1, e) != CellClass::boundary_tangential) continue;
    if (max_abs_diff(A.links[e], B.links[e]) > 1e-12) {
      rec.note = "tangential boundary mismatch; check skipped";
      return rec;
    }
  }
  const Cochain a = connection_form(A);
  Cochain c = connection_form(B);
  c.values -= a.values;

  Cochain div = codiff(c, BoundaryCondition::normal);
  for (int v = 0; v < cx.vertex_count(); ++v)
    rec.coulomb_mismatch = std::max(rec.coulomb_mismatch, norm(div.at(v)));
  const bool project = rec.coulomb_mismatch > 1e-6;
  if (project) {
    // manufacture the shared Coulomb hypothesis: drop the exact part of b - a
    c.values -= exact_part(c, BoundaryCondition::normal).values;
  }

  const double ea = energy(A);
  double eb;
  if (project) {
    Cochain b_matched = a;
    b_matched.values = a.values + c.values;
    eb = energy(link_field(b_matched));
  } else {
    eb = energy(B);
  }
  rec.fa_l2 = std::sqrt(2.0 * ea);
  const double s1 = norm_sobolev1(c, BoundaryCondition::normal);
  rec.lhs = s1 * s1;
  rec.gap = 2.0 * (eb - ea);
  rec.ratio = rec.gap > 0 ? rec.lhs / rec.gap : std::numeric_limits<double>::infinity();
  rec.hypotheses_ok = true;
  return rec;
}

std::pair<LinkField, ReplacementStepReport> replace_on_ball(const LinkField& U,
                                                            const BallRegion& region,
                                                            const ReplaceOptions& opts) {
  ReplacementStepReport rep;
  rep.epsilon_threshold = opts.epsilon;
  rep.pre_global_energy = energy(U);
  rep.pre_ball_energy = energy(U, region);
  rep.post_global_energy = rep.pre_global_energy;
  rep.post_ball_energy = rep.pre_ball_energy;
  rep.concentration = rep.pre_ball_energy / opts.epsilon;
  if (rep.pre_ball_energy >= opts.epsilon) {
    rep.failure = "epsilon_violation";
    return {U, rep};
  }

  try {
    const GaugeFixResult fix = dirichlet_coulomb_fix(U, region, opts.gauge);
    rep.gauge_fix = fix.report;
    if (!fix.report.converged) {
      rep.failure = "gauge_fix";
      return {U, rep};
    }

    const LinkField bdata = restrict_boundary(fix.fixed, region);
    auto [solution, solve_rep] = solve_dirichlet_ym(fix.fixed, region, bdata, opts.solve);
    rep.solve = solve_rep;
    if (!solve_rep.converged) {
      rep.failure = "solve";
      return {U, rep};
    }

    if (opts.interpolation_samples > 0) {
      try {
        rep.interpolation_profile =
            interpolation_energy_profile(solution, fix.fixed, opts.interpolation_samples);
      } catch (const BranchCutError& err) {
        rep.interpolation_profile.clear();
        if (rep.failure.empty()) rep.failure = std::string("interpolation: ") + err.what();
      }
    }
    if (opts.convexity) rep.convexity = convexity_check(solution, fix.fixed, region);

    const LinkField undone = apply_gauge(solution, inverse(fix.g));
    LinkField patched = patch(region, undone, U);

    rep.post_global_energy = energy(patched);
    rep.post_ball_energy = energy(patched, region);
    rep.applied = true;

    if (opts.diagnostic_regauge) {
      GaugeFixResult diag = coulomb_fix_neumann(patched, opts.diagnostic_gauge);
      rep.patch_regauge = diag.report;
      const Cochain ad = connection_form(diag.fixed);
      const double f = std::sqrt(2.0 * rep.post_global_energy);
      rep.patch_regauge.norm_ratio =
          f > 0 ? norm_sobolev1(ad, BoundaryCondition::tangential) / f : 0.0;
    }
    return {std::move(patched), rep};
  } catch (const BranchCutError& err) {
    rep.failure = std::string("branch_cut: ") + err.what();
    return {U, rep};
  }
}

std::pair<LinkField, SweepTrace> sweep(const LinkField& U, const std::vector<BallRegion>& schedule,
                                       const SweepOptions& opts) {
  if (schedule.empty()) throw std::invalid_argument("sweep: empty schedule");
  const auto& cx = *U.complex;
  for (const auto& ball : schedule)
    if (ball.parent() != U.complex)
      throw std::invalid_argument("sweep: schedule ball on a different complex");
  for (int f = 0; f < cx.face_count(); ++f) {
    bool covered = false;
    for (const auto& ball : schedule)
      if (ball.cell_class(2, f) != CellClass::exterior) {
        covered = true;
        break;
      }
    if (!covered)
      throw std::invalid_argument("sweep: schedule does not cover face " + std::to_string(f));
  }

  LinkField current = U;
  SweepTrace trace;
  double cycle_start = energy(current);
  for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
    trace.cycles = cycle + 1;
    bool bubbled = false;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      auto [next, rep] = replace_on_ball(current, schedule[i], opts.step);
      rep.ball_id = static_cast<int>(i);
      const bool epsilon_stop = rep.failure == "epsilon_violation" && opts.stop_on_epsilon;
      trace.steps.push_back(std::move(rep));
      trace.global_energy.push_back(trace.steps.back().post_global_energy);
      current = std::move(next);
      if (epsilon_stop) {
        bubbled = true;
        break;
      }
    }
    if (bubbled) {
      trace.stop = SweepStop::epsilon_violation;
      return {current, trace};
    }
    const double cycle_end = energy(current);
    if (cycle_start - cycle_end <= opts.tol_cycle_decrease) {
      trace.stop = SweepStop::converged;
      return {current, trace};
    }
    cycle_start = cycle_end;
  }
  trace.stop = SweepStop::max_steps;
  return {current, trace};
}

std::vector<BallRegion> default_schedule(std::shared_ptr<const LatticeComplex> cx, int ball_len,
                                         int stride) {
  if (stride < 1) throw std::invalid_argument("default_schedule: stride must be >= 1");
  // per-axis base positions; balls wrap across the seam on the torus and are
  // clamped against the boundary on a box
  std::array<std::vector<int>, 4> offsets;
  for (int a = 0; a < 4; ++a) {
    const int n = cx->dims()[a];
    for (int lo = 0; lo < n; lo += stride) {
      int at = lo;
      if (cx->topology() == Topology::box) at = std::min(at, n - ball_len);
      if (at < 0) throw std::invalid_argument("default_schedule: ball larger than the box");
      if (offsets[a].empty() || offsets[a].back() != at) offsets[a].push_back(at);
    }
  }
  std::vector<BallRegion> balls;
  for (int i0 : offsets[0])
    for (int i1 : offsets[1])
      for (int i2 : offsets[2])
        for (int i3 : offsets[3]) {
          const std::array<int, 4> lo{i0, i1, i2, i3};
          std::array<int, 4> hi = lo;
          for (int a = 0; a < 4; ++a) hi[a] += ball_len;
          balls.push_back(build_ball(cx, lo, hi));
        }
  return balls;
}

FamilyResult family_sweep(const std::vector<LinkField>& family, const BallRegion& region,
                          const ReplaceOptions& opts, int jobs) {
  FamilyResult out;
  out.fields.resize(family.size());
  out.reports.resize(family.size());
  const auto run_one = [&](std::size_t i) {
    auto [field, rep] = replace_on_ball(family[i], region, opts);
    rep.ball_id = static_cast<int>(i);
    out.fields[i] = std::move(field);
    out.reports[i] = std::move(rep);
  };
  if (jobs <= 1 || family.size() <= 1) {
    for (std::size_t i = 0; i < family.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  const int nthreads = std::min<std::size_t>(jobs, family.size());
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= family.size()) return;
        run_one(i);
      }
    });
  for (auto& th : pool) th.join();
  return out;
}

LinkField dilation_generator(const LinkField& U, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("dilation_generator: lambda must lie in [0, 1]");
  if (U.complex->topology() != Topology::box)
    throw std::invalid_argument("dilation_generator: ball fields only (box complex)");
  if (lambda == 1.0) return U;

  const auto& cx = *U.complex;
  const Cochain a = connection_form(U);
  Cochain out = zero_cochain(U.complex, U.group, 1);
  if (lambda > 0.0) {
    std::array<double, 4> center{};
    for (int i = 0; i < 4; ++i) center[i] = 0.5 * (cx.dims()[i] - 1);
    for (int e = 0; e < cx.edge_count(); ++e) {
      const int mu = LatticeComplex::direction_combinations(4, 1)[cx.cell_comb(1, e)][0];
      const auto coords = cx.vertex_coords(cx.cell_base(1, e));
      std::array<int, 4> src{};
      for (int i = 0; i < 4; ++i) {
        const double mid = coords[i] + (i == mu ? 0.5 : 0.0);
        const double pulled = center[i] + lambda * (mid - center[i]) - (i == mu ? 0.5 : 0.0);
        const int cap = cx.dims()[i] - 1 - (i == mu ? 1 : 0);
        src[i] = std::min(cap, std::max(0, static_cast<int>(std::lround(pulled))));
      }
      const int se = cx.find_cell(1, mu, cx.vertex_id(src));
      out.set(e, lambda * a.at(se));
    }
  }
  return link_field(out);
}

}  // namespace ym
