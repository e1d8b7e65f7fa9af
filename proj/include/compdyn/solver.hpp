#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "compdyn/errors.hpp"
#include "compdyn/linalg.hpp"
#include "compdyn/models.hpp"
#include "compdyn/parallel.hpp"

namespace compdyn {

enum class Method { rk4, rk45 };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct IntegratorSettings {
  Method method = Method::rk45;
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_init = 1e-2;  // also the fixed step of rk4
  double dt_max = 1.0;
  double t_end = 500.0;

  void validate() const;
};

/// Accepted steps with their derivatives; `at` evaluates the cubic Hermite
/// interpolant between neighbouring steps.
struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> y;
  std::vector<std::vector<double>> dydt;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  std::vector<double> at(double time) const;
};

// Hermite interpolation on one step [t0, t1].
std::vector<double> hermite(double t0, std::span<const double> y0, std::span<const double> f0, double t1,
                            std::span<const double> y1, std::span<const double> f1, double t);

/// Root function g(t, y); an event fires when g changes sign from
/// positive to non-positive during a step.
using EventFunction = std::function<double(double, std::span<const double>)>;

struct IntegrationResult {
  Trajectory trajectory;  // every accepted step when recording, else endpoints only
  std::vector<double> y_final;
  double t_final = 0.0;
  int event = -1;  // index of the event that stopped integration, -1 if none
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

/// Step-size underflow (dt < 1e-14 * span). Carries the partial trajectory.
class StepUnderflow : public NumericalError {
 public:
  StepUnderflow(const std::string& what, IntegrationResult partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const IntegrationResult& partial() const { return partial_; }

 private:
  IntegrationResult partial_;
};

/// Integrates y' = f(y) from t0 to t1 (autonomous systems only). Adaptive
/// Dormand-Prince 5(4) with PI step control and local error test
/// |err_i| <= atol + rtol * max(|y_i|, |y_new_i|), or classical RK4 with
/// step settings.dt_init. Events are located by bisection on the dense
/// output to |dt| <= 1e-9 and stop the integration.
IntegrationResult integrate(const VectorField& f, std::span<const double> y0, double t0, double t1,
                            const IntegratorSettings& settings, const std::vector<EventFunction>& events = {},
                            bool record = true);

enum class Winner { blue, red, stalemate };
std::string_view winner_name(Winner w);

struct ScenarioSettings {
  IntegratorSettings integrator;
  double recon_T = 50.0;  // phase-only reconnaissance (full variants)
  bool record = false;
};

struct ScenarioOutcome {
  Winner winner = Winner::stalemate;
  double t_event = 0.0;  // crossing time, or the horizon for a stalemate
  std::vector<double> y_final;
  Trajectory trajectory;  // hybrid phase only, filled when settings.record
};

/// Reconnaissance (full variants, populations frozen, H = 1) for recon_T,
/// then the hybrid system from t = 0 until P1 or P2 drops below P_D or
/// t_end. Blue wins iff P2 crosses first.
ScenarioOutcome run_scenario(const System& sys, std::span<const double> y0, const ScenarioSettings& settings);

struct EnsembleStats {
  int n = 0;
  int blue = 0;
  int red = 0;
  int stalemate = 0;
  int failed = 0;

  int completed() const { return blue + red + stalemate; }
  double blue_fraction() const;
  double red_fraction() const;
  double stalemate_fraction() const;
  bool operator==(const EnsembleStats&) const = default;
};

/// Initial state for ensemble member `member`: populations P0 and phases
/// drawn i.i.d. U[0, 2pi) (full variants) or centroid differences drawn the
/// same way (reduced variants) from derive_seed(seed, {phases, member}).
std::vector<double> ensemble_member_state(const System& sys, std::span<const double> P0, std::uint64_t seed,
                                          int member);

// Members run in parallel; failed integrations are counted, not thrown.
EnsembleStats ensemble(const System& sys, std::span<const double> P0, int n_sim, std::uint64_t seed,
                       const ScenarioSettings& settings, Parallelism par = {});
EnsembleStats ensemble_serial(const System& sys, std::span<const double> P0, int n_sim, std::uint64_t seed,
                              const ScenarioSettings& settings);

}  // namespace compdyn
