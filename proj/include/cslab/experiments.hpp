#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cslab/evolution.hpp"
#include "cslab/field.hpp"
#include "cslab/functionals.hpp"
#include "cslab/test_function.hpp"

namespace cslab {

enum class ScenarioName {
  appendix_selfcheck,
  conservation_suite,
  thmSL_bounds,
  thmUCSL_lower,
  thm_uniqueSL,
  radiation_linear,
  thmSN_bounds,
  radiation_nls,
  thm_uniqueSN,
};

const std::vector<ScenarioName>& all_scenarios();
std::string to_string(ScenarioName name);
std::optional<ScenarioName> parse_scenario_name(std::string_view text);
/// One line for list-scenarios.
std::string describe(ScenarioName name);

struct GaussianMember {
  double width = 1.0;
  std::array<double, 3> momentum{0, 0, 0};
  std::array<double, 3> offset{0, 0, 0};
};

struct DataFamily {
  enum class Kind { gaussian_sweep, single };
  Kind kind = Kind::gaussian_sweep;
  std::vector<GaussianMember> members;
  /// Kind::single: the initial datum itself.
  std::optional<Field> single;
  std::uint64_t seed = 0;
  /// Multiply each member by a global phase drawn from the seed.
  bool random_phase = false;

  /// Cartesian product of the three lists.
  static DataFamily sweep(const std::vector<double>& widths, const std::vector<std::array<double, 3>>& momenta,
                          const std::vector<std::array<double, 3>>& offsets);
};

/// e^{i v.x} exp(-|x - x0|^2 / (2 w^2)).
Field gaussian_datum(const Grid& grid, const GaussianMember& m);

struct BuiltMember {
  std::size_t index = 0;
  Field field;
  double amplitude = 1.0;
  double mass = 0.0;
  double hdot_half_sq = 0.0;
};

struct FamilyBuild {
  std::vector<BuiltMember> members;
  std::vector<std::string> notes;  // skipped members
};

/// Members violating grid validity (width below two spacings, offset beyond
/// 0.8 L) are skipped with a note. A positive mass budget rescales every
/// member to that mass.
FamilyBuild build_family(const DataFamily& df, const Grid& grid, double mass_budget = 0.0);

/// Fraction of the mass in the shell |x| > fraction * L.
double outer_shell_fraction(const Field& u, double fraction = 0.8);
inline constexpr double outer_shell_limit = 1e-4;

/// Threads used for family sweeps: CSLAB_THREADS, else the hardware count.
unsigned worker_count();
/// Runs fn(0..n-1) on the worker pool; results keep index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

struct Numerics {
  double box_half_width = 12.0;
  int points_per_axis = 64;
  double dt = 1e-3;
  double horizon = 1.0;
  int snapshots = 11;
  std::vector<double> radii{1, 2, 4};
  std::vector<double> deltas{0.016, 0.008, 0.004, 0.002, 0.001};
  /// Clamp radius of the potential; 0 means two grid spacings.
  double epsilon = 0.0;
  /// Give each Gaussian member its own grid: box, step, horizon and radii
  /// are in units of the member width (time in units of width^2).
  bool scale_with_width = false;
  /// Run the refinement studies (doubled resolution, halved step).
  bool refine = true;
  /// Smoothing with a potential: also run with the clamp radius halved. That
  /// run leaks mass soonest and so shortens the common horizon.
  bool clamp_study = false;
};

struct Scenario {
  ScenarioName name = ScenarioName::appendix_selfcheck;
  EquationSpec spec;
  DataFamily family;
  Numerics numerics;
  /// Mass budget for NLS families; 0 disables rescaling.
  double mass_budget = 0.0;
};

/// The configuration used when a scenario is run without overrides.
Scenario default_scenario(ScenarioName name);

struct Assertion {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SweepRow {
  std::size_t member_id = 0;
  double R_or_t = 0.0;
  double value = 0.0;
  double reference_norm = 0.0;
  double ratio = 0.0;
  std::string resolution_tag;
};

struct SweepTable {
  std::string name;
  std::vector<SweepRow> rows;
};

struct ScenarioReport {
  std::string scenario;
  bool valid = true;
  std::vector<std::string> invalid_reasons;
  std::vector<Assertion> assertions;
  std::vector<std::pair<std::string, double>> measurements;
  std::vector<SweepTable> sweeps;
  std::vector<std::string> notes;

  bool all_passed() const;
  /// Looks up an assertion by name; throws std::out_of_range.
  const Assertion& get(const std::string& name) const;
  void check(std::string name, bool passed, double measured, double tolerance, std::string detail = {});
  void measure(std::string name, double value) { measurements.emplace_back(std::move(name), value); }
  void invalidate(std::string reason);
};

/// Runs every study of the scenario. Invalid runs carry no assertions.
ScenarioReport run_scenario(const Scenario& s);

// ----------------------------------------------------------------- studies

struct ConservationRun {
  std::string label;
  double dt = 0.0;
  double mass_drift = 0.0;      // max |M(t) - M(0)| / M(0)
  double energy_spread = 0.0;   // (max E - min E) / |E(0)|
  double pseudo_conformal_spread = 0.0;
  double shell = 0.0;
  bool valid = true;
};

/// Runs f under spec with dt and dt/2 over [0, T].
std::vector<ConservationRun> conservation_study(const std::string& label, const EquationSpec& spec, const Field& f,
                                                const Numerics& n);

struct MorawetzRow {
  double R = 0.0;
  double dt = 0.0;
  MorawetzReading reading;
  TruncationReading truncation;
};

/// One run per step size with an accumulator per radius.
std::vector<MorawetzRow> morawetz_study(const EquationSpec& spec, const Field& f, double horizon,
                                        const std::vector<double>& dts, const std::vector<double>& radii,
                                        const TestFunction& tf);

struct SmoothingRun {
  std::string tag;
  double horizon = 0.0;       // common horizon of the member
  std::vector<double> radii;  // physical radii
  std::vector<double> at_half;  // S(R) at horizon / 2
  std::vector<double> at_full;  // S(R) at horizon
  double shell = 0.0;
  /// max over sampled times and the ladder of |flux| / ||f||^2 (half-derivative norm).
  double flux_max = 0.0;
  bool valid = true;
  std::string note;
};

struct MemberSmoothing {
  std::size_t index = 0;
  GaussianMember member;
  double hdot_half_sq = 0.0;
  double mass = 0.0;
  SmoothingRun base;
  std::optional<SmoothingRun> fine;      // doubled N on the same box
  std::optional<SmoothingRun> eps_half;  // potential runs: clamp radius halved
  /// max over the ladder of S(R) / ||f||^2 at the horizon, at the half horizon, on the fine grid.
  double ratio_sup = 0.0, ratio_sup_half = 0.0, ratio_sup_fine = 0.0;
  double ratio_sup_eps_half = 0.0;
  /// S(R_max) / ||f||^2 at the horizon.
  double ratio_last = 0.0;
};

struct SmoothingStudy {
  std::vector<MemberSmoothing> members;
  std::vector<std::string> notes;
  bool valid = true;
  double r_min = 0.0, r_max = 0.0;
  double r_min_half = 0.0, r_max_half = 0.0;
  double r_min_fine = 0.0, r_max_fine = 0.0;
  double r_min_eps = 0.0, r_max_eps = 0.0;
  bool refined = false;
  bool eps_refined = false;
};

/// S(R) for every family member, run until the outer-shell mass reaches its
/// limit or the horizon is hit; the last valid time (rounded to an even
/// step count) is the member's horizon.
SmoothingStudy smoothing_study(const EquationSpec& spec, const DataFamily& df, const Numerics& n,
                               double mass_budget = 0.0);

/// Two-sided smoothing assertions on a study.
void assert_two_sided(const SmoothingStudy& s, const std::string& prefix, ScenarioReport& report);
/// S(R_max) >= (r_min / 2) ||f||^2 for every member.
void assert_liminf(const SmoothingStudy& s, const std::string& prefix, ScenarioReport& report);
void add_smoothing_sweeps(const SmoothingStudy& s, const std::string& prefix, ScenarioReport& report);

struct LuvaFit {
  double R0 = 0.0;
  std::size_t member = 0;
  double sup_S = 0.0;
  double bound_shape = 0.0;  // ||f||^2 + R0^{-1/3} ||f||^{4/3}, norms in the half-derivative space
  double C = 0.0;
};

/// C = sup_{R > R0} S(R) / bound_shape for each member and R0.
std::vector<LuvaFit> luva_fits(const SmoothingStudy& s, const std::vector<double>& R0s);
/// max C / min C - 1.
double luva_spread(const std::vector<LuvaFit>& fits);

struct UniquenessRow {
  double t = 0.0;
  double M = 0.0;
  double shell = 0.0;
};

/// M(t) on the time ladder; rows past the box-valid horizon are dropped.
std::vector<UniquenessRow> uniqueness_study(const EquationSpec& spec, const Field& f,
                                            const std::vector<double>& times, double dt);

}  // namespace cslab
