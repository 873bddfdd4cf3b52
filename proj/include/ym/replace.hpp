#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ym/ym_solver.hpp"

namespace ym {

struct ConvexityRecord {
  double lhs = 0.0;    // squared Gaffney norm of b - a
  double gap = 0.0;    // |F_B|^2 - |F_A|^2
  double ratio = std::numeric_limits<double>::infinity();  // lhs / gap
  double coulomb_mismatch = 0.0;  // max-vertex |d*(b-a)| before projection
  double fa_l2 = 0.0;             // |F_A| for the smallness hypothesis
  bool hypotheses_ok = false;
  std::string note;
};

struct ReplacementStepReport {
  int ball_id = -1;
  bool applied = false;
  std::string failure;  // stage name when the step aborted
  double epsilon_threshold = 0.0;
  double concentration = 0.0;  // ball energy / epsilon
  double pre_ball_energy = 0.0, post_ball_energy = 0.0;
  double pre_global_energy = 0.0, post_global_energy = 0.0;
  GaugeFixReport gauge_fix;
  SolveReport solve;
  std::vector<std::pair<double, double>> interpolation_profile;  // (t, energy)
  ConvexityRecord convexity;
  GaugeFixReport patch_regauge;  // diagnostic global Coulomb fix on the patched field
};

struct ReplaceOptions {
  SolveOptions solve;
  GaugeFixOptions gauge;
  double epsilon = 0.5;  // ball-energy threshold (lattice units)
  int interpolation_samples = 32;  // 0 disables the profile
  bool convexity = true;
  bool diagnostic_regauge = true;
  GaugeFixOptions diagnostic_gauge{1e-6, 300, 1.7, false};
};

/// One Yang-Mills replacement step: Dirichlet Coulomb fix on the ball, the
/// Dirichlet solve with the fixed trace, gauge undo, patch into the global
/// field, diagnostic global regauge. Aborts (input returned unchanged) when
/// the ball energy exceeds epsilon or any stage fails.
std::pair<LinkField, ReplacementStepReport> replace_on_ball(const LinkField& U,
                                                            const BallRegion& region,
                                                            const ReplaceOptions& opts);

/// Energies along the exponentiated affine path a_t = (1-t) a_A + t a_B,
/// n_steps+1 samples. Fields must share a complex and tangential trace.
std::vector<std::pair<double, double>> interpolation_energy_profile(const LinkField& U_A,
                                                                    const LinkField& U_B,
                                                                    int n_steps);

/// Energy-convexity record for a (Yang-Mills A, competitor B) pair with a
/// shared trace; the Coulomb matching d*(b-a) = 0 is enforced by projecting
/// the difference when the measured mismatch exceeds 1e-6.
ConvexityRecord convexity_check(const LinkField& U_A, const LinkField& U_B,
                                const BallRegion& region);

enum class SweepStop { converged, max_steps, epsilon_violation };
std::string sweep_stop_name(SweepStop s);

struct SweepOptions {
  ReplaceOptions step{SolveOptions{}, GaugeFixOptions{}, 0.5, 0, false, true,
                      GaugeFixOptions{1e-6, 200, 1.7, false}};
  int max_cycles = 50;
  double tol_cycle_decrease = 1e-10;
  bool stop_on_epsilon = true;
};

struct SweepTrace {
  std::vector<ReplacementStepReport> steps;
  std::vector<double> global_energy;  // after every step
  SweepStop stop = SweepStop::max_steps;
  int cycles = 0;
};

/// Iterated replacement over a covering schedule of balls, cycling until the
/// per-cycle energy decrease drops below tolerance. Requires the schedule to
/// cover every face of the complex.
std::pair<LinkField, SweepTrace> sweep(const LinkField& U, const std::vector<BallRegion>& schedule,
                                       const SweepOptions& opts);

/// Balls of `ball_len` vertices per side based at every multiple of `stride`
/// (lexicographic order); the usual overlap schedule on the torus.
std::vector<BallRegion> default_schedule(std::shared_ptr<const LatticeComplex> cx, int ball_len,
                                         int stride);

struct FamilyResult {
  std::vector<LinkField> fields;
  std::vector<ReplacementStepReport> reports;
};

/// replace_on_ball with the same region applied to every member; members are
/// independent, so they may run on `jobs` threads with identical results.
FamilyResult family_sweep(const std::vector<LinkField>& family, const BallRegion& region,
                          const ReplaceOptions& opts, int jobs = 1);

/// Pullback under the dilation x -> center + lambda (x - center) with
/// nearest-edge resampling: a_new(e) = lambda a(nearest edge to the dilated
/// position). lambda = 1 is the identity; lambda = 0 gives the flat field.
LinkField dilation_generator(const LinkField& U, double lambda);

}  // namespace ym
