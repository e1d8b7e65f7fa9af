#include "compdyn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "compdyn/rng.hpp"

namespace compdyn {

std::string_view method_name(Method m) { return m == Method::rk4 ? "rk4" : "rk45"; }

Method parse_method(std::string_view name) {
  if (name == "rk4") return Method::rk4;
  if (name == "rk45") return Method::rk45;
  throw ValidationError("unknown integration method '" + std::string(name) + "'");
}

void IntegratorSettings::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw ValidationError("tolerances must be > 0");
  if (!(dt_init > 0.0) || !(dt_max > 0.0)) throw ValidationError("step bounds must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be positive and finite");
}

std::vector<double> hermite(double t0, std::span<const double> y0, std::span<const double> f0, double t1,
                            std::span<const double> y1, std::span<const double> f1, double t) {
  const double h = t1 - t0;
  const double s = h == 0.0 ? 0.0 : (t - t0) / h;
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  std::vector<double> out(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i)
    out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  return out;
}

std::vector<double> Trajectory::at(double time) const {
  if (t.empty()) throw ValidationError("empty trajectory");
  if (time <= t.front()) return y.front();
  if (time >= t.back()) return y.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const auto k = static_cast<std::size_t>(it - t.begin());
  return hermite(t[k - 1], y[k - 1], dydt[k - 1], t[k], y[k], dydt[k], time);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Work {
  explicit Work(std::size_t n) : k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n) {}
  std::vector<double> k2, k3, k4, k5, k6, k7, tmp, ynew;
};

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// One Dormand-Prince step; returns the scaled max-norm error estimate.
double dopri_step(const VectorField& f, const std::vector<double>& y, const std::vector<double>& k1, double h,
                  const IntegratorSettings& s, Work& w) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + h * a21 * k1[i];
  f(w.tmp, w.k2);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + h * (a31 * k1[i] + a32 * w.k2[i]);
  f(w.tmp, w.k3);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + h * (a41 * k1[i] + a42 * w.k2[i] + a43 * w.k3[i]);
  f(w.tmp, w.k4);
  for (std::size_t i = 0; i < n; ++i)
    w.tmp[i] = y[i] + h * (a51 * k1[i] + a52 * w.k2[i] + a53 * w.k3[i] + a54 * w.k4[i]);
  f(w.tmp, w.k5);
  for (std::size_t i = 0; i < n; ++i)
    w.tmp[i] = y[i] + h * (a61 * k1[i] + a62 * w.k2[i] + a63 * w.k3[i] + a64 * w.k4[i] + a65 * w.k5[i]);
  f(w.tmp, w.k6);
  for (std::size_t i = 0; i < n; ++i)
    w.ynew[i] = y[i] + h * (a71 * k1[i] + a73 * w.k3[i] + a74 * w.k4[i] + a75 * w.k5[i] + a76 * w.k6[i]);
  f(w.ynew, w.k7);
  if (!all_finite(w.ynew) || !all_finite(w.k7)) return std::numeric_limits<double>::infinity();
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e =
        h * (e1 * k1[i] + e3 * w.k3[i] + e4 * w.k4[i] + e5 * w.k5[i] + e6 * w.k6[i] + e7 * w.k7[i]);
    const double sc = s.atol + s.rtol * std::max(std::abs(y[i]), std::abs(w.ynew[i]));
    err = std::max(err, std::abs(e) / sc);
  }
  return err;
}

void rk4_step(const VectorField& f, const std::vector<double>& y, const std::vector<double>& k1, double h,
              Work& w) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + 0.5 * h * k1[i];
  f(w.tmp, w.k2);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k2[i];
  f(w.tmp, w.k3);
  for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + h * w.k3[i];
  f(w.tmp, w.k4);
  for (std::size_t i = 0; i < n; ++i)
    w.ynew[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
  f(w.ynew, w.k7);
}

void push(Trajectory& tr, double t, const std::vector<double>& y, const std::vector<double>& f) {
  tr.t.push_back(t);
  tr.y.push_back(y);
  tr.dydt.push_back(f);
}

}  // namespace

IntegrationResult integrate(const VectorField& f, std::span<const double> y0, double t0, double t1,
                            const IntegratorSettings& settings, const std::vector<EventFunction>& events,
                            bool record) {
  if (!(settings.rtol > 0.0) || !(settings.atol > 0.0) || !(settings.dt_init > 0.0) || !(settings.dt_max > 0.0))
    throw ValidationError("invalid integrator settings");
  if (!(t1 >= t0)) throw ValidationError("integration interval must satisfy t1 >= t0");

  const std::size_t n = y0.size();
  IntegrationResult res;
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> k1(n);
  f(y, k1);
  double t = t0;
  push(res.trajectory, t, y, k1);

  std::vector<double> g_old(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) g_old[e] = events[e](t, y);

  const double span = t1 - t0;
  const double h_min = 1e-14 * std::max(span, std::numeric_limits<double>::min());
  Work w(n);
  double h = std::min(settings.dt_init, settings.dt_max);
  double err_old = 1e-4;
  bool rejected_last = false;

  auto finish = [&](double tf, const std::vector<double>& yf, const std::vector<double>& ff) {
    res.t_final = tf;
    res.y_final = yf;
    if (record) {
      if (res.trajectory.t.back() != tf) push(res.trajectory, tf, yf, ff);
    } else {
      Trajectory ends;
      push(ends, res.trajectory.t.front(), res.trajectory.y.front(), res.trajectory.dydt.front());
      if (tf != t0) push(ends, tf, yf, ff);
      res.trajectory = std::move(ends);
    }
  };

  while (t < t1) {
    double step = settings.method == Method::rk4 ? settings.dt_init : h;
    step = std::min(step, settings.dt_max);
    if (t + step >= t1 || t1 - (t + step) < 1e-12 * span) step = t1 - t;

    if (settings.method == Method::rk4) {
      rk4_step(f, y, k1, step, w);
      if (!all_finite(w.ynew)) {
        finish(t, y, k1);
        throw NumericalError("rk4: non-finite state at t=" + std::to_string(t));
      }
    } else {
      const double err = dopri_step(f, y, k1, step, settings, w);
      if (!(err <= 1.0)) {
        ++res.rejected;
        const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
        h = step * std::min(1.0, fac);
        rejected_last = true;
        if (h < h_min) {
          finish(t, y, k1);
          throw StepUnderflow("step size underflow at t=" + std::to_string(t), std::move(res));
        }
        continue;
      }
      // PI controller (Gustafsson / Hairer constants).
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_old, 0.04);
      fac = std::clamp(fac, 0.2, rejected_last ? 1.0 : 10.0);
      err_old = std::max(err, 1e-4);
      rejected_last = false;
      h = step * fac;
    }
    ++res.steps;
    const double t_new = step == t1 - t ? t1 : t + step;

    // Event detection on this step.
    int hit = -1;
    double t_hit = t_new;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const double g_new = events[e](t_new, w.ynew);
      if (g_old[e] > 0.0 && g_new <= 0.0) {
        double lo = t, hi = t_new;
        while (hi - lo > 1e-9) {
          const double mid = 0.5 * (lo + hi);
          const auto ym = hermite(t, y, k1, t_new, w.ynew, w.k7, mid);
          if (events[e](mid, ym) > 0.0)
            lo = mid;
          else
            hi = mid;
        }
        if (hit < 0 || hi < t_hit) {
          hit = static_cast<int>(e);
          t_hit = hi;
        }
      }
      g_old[e] = g_new;
    }
    if (hit >= 0) {
      std::vector<double> ye = hermite(t, y, k1, t_new, w.ynew, w.k7, t_hit);
      std::vector<double> fe(n);
      f(ye, fe);
      res.event = hit;
      if (record) push(res.trajectory, t_hit, ye, fe);
      finish(t_hit, ye, fe);
      return res;
    }

    t = t_new;
    y.swap(w.ynew);
    k1.swap(w.k7);
    if (record) push(res.trajectory, t, y, k1);
  }
  finish(t, y, k1);
  return res;
}

std::string_view winner_name(Winner w) {
  switch (w) {
    case Winner::blue: return "blue";
    case Winner::red: return "red";
    case Winner::stalemate: return "stalemate";
  }
  return "?";
}

ScenarioOutcome run_scenario(const System& sys, std::span<const double> y0, const ScenarioSettings& settings) {
  settings.integrator.validate();
  if (y0.size() != static_cast<std::size_t>(sys.dimension())) throw ValidationError("initial state dimension mismatch");
  if (settings.recon_T < 0.0) throw ValidationError("recon_T must be >= 0");
  const double pd = sys.config().P_D;
  ScenarioOutcome out;
  std::vector<double> y(y0.begin(), y0.end());

  const bool red_out = y[1] < pd;
  const bool blue_out = y[0] < pd;
  if (red_out || blue_out) {
    out.winner = red_out && blue_out ? Winner::stalemate : (red_out ? Winner::blue : Winner::red);
    out.y_final = y;
    return out;
  }

  if (!sys.reduced() && settings.recon_T > 0.0) {
    const VectorField recon = [&sys](std::span<const double> s, std::span<double> ds) { sys.recon_rhs(s, ds); };
    y = integrate(recon, y, -settings.recon_T, 0.0, settings.integrator, {}, false).y_final;
  }

  const VectorField flow = [&sys](std::span<const double> s, std::span<double> ds) { sys.rhs(s, ds); };
  const std::vector<EventFunction> events = {
      [pd](double, std::span<const double> s) { return s[1] - pd; },
      [pd](double, std::span<const double> s) { return s[0] - pd; },
  };
  IntegrationResult r = integrate(flow, y, 0.0, settings.integrator.t_end, settings.integrator, events, settings.record);
  out.winner = r.event == 0 ? Winner::blue : (r.event == 1 ? Winner::red : Winner::stalemate);
  out.t_event = r.t_final;
  out.y_final = std::move(r.y_final);
  if (settings.record) out.trajectory = std::move(r.trajectory);
  return out;
}

double EnsembleStats::blue_fraction() const {
  return completed() ? static_cast<double>(blue) / completed() : 0.0;
}
double EnsembleStats::red_fraction() const { return completed() ? static_cast<double>(red) / completed() : 0.0; }
double EnsembleStats::stalemate_fraction() const {
  return completed() ? static_cast<double>(stalemate) / completed() : 0.0;
}

std::vector<double> ensemble_member_state(const System& sys, std::span<const double> P0, std::uint64_t seed,
                                          int member) {
  if (P0.size() != static_cast<std::size_t>(sys.populations()))
    throw ValidationError("ensemble: expected " + std::to_string(sys.populations()) + " initial populations");
  std::vector<double> y(static_cast<std::size_t>(sys.dimension()));
  std::copy(P0.begin(), P0.end(), y.begin());
  Rng rng(derive_seed(seed, {stream::phases, static_cast<std::uint64_t>(member)}));
  for (std::size_t i = P0.size(); i < y.size(); ++i) y[i] = rng.uniform(0.0, kTwoPi);
  return y;
}

namespace {

// 0 blue, 1 red, 2 stalemate, 3 failed
int run_member(const System& sys, std::span<const double> P0, std::uint64_t seed, int m,
               const ScenarioSettings& settings) {
  try {
    const auto y0 = ensemble_member_state(sys, P0, seed, m);
    return static_cast<int>(run_scenario(sys, y0, settings).winner);
  } catch (const NumericalError&) {
    return 3;
  }
}

EnsembleStats tally(const std::vector<int>& codes) {
  EnsembleStats s;
  s.n = static_cast<int>(codes.size());
  for (int c : codes) {
    if (c == 0) ++s.blue;
    else if (c == 1) ++s.red;
    else if (c == 2) ++s.stalemate;
    else ++s.failed;
  }
  return s;
}

}  // namespace

EnsembleStats ensemble(const System& sys, std::span<const double> P0, int n_sim, std::uint64_t seed,
                       const ScenarioSettings& settings, Parallelism par) {
  if (n_sim < 1) throw ValidationError("n_sim must be >= 1");
  settings.integrator.validate();
  ensemble_member_state(sys, P0, seed, 0);  // validates sizes before going parallel
  std::vector<int> codes(static_cast<std::size_t>(n_sim));
#pragma omp parallel for schedule(dynamic) num_threads(resolve_jobs(par))
  for (int m = 0; m < n_sim; ++m) codes[static_cast<std::size_t>(m)] = run_member(sys, P0, seed, m, settings);
  return tally(codes);
}

EnsembleStats ensemble_serial(const System& sys, std::span<const double> P0, int n_sim, std::uint64_t seed,
                              const ScenarioSettings& settings) {
  if (n_sim < 1) throw ValidationError("n_sim must be >= 1");
  settings.integrator.validate();
  std::vector<int> codes(static_cast<std::size_t>(n_sim));
  for (int m = 0; m < n_sim; ++m) codes[static_cast<std::size_t>(m)] = run_member(sys, P0, seed, m, settings);
  return tally(codes);
}

}  // namespace compdyn
