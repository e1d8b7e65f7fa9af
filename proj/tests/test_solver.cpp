#include <cmath>
#include <memory>

#include "compdyn/analysis.hpp"
#include "compdyn/solver.hpp"
#include "doctest.h"

using namespace compdyn;

namespace {

IntegratorSettings tight() {
  IntegratorSettings s;
  s.rtol = 1e-11;
  s.atol = 1e-12;
  return s;
}

VectorField decay() {
  return [](std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
}

}  // namespace

TEST_CASE("exponential decay") {
  const std::vector<double> y0{1.0};
  const auto r = integrate(decay(), y0, 0.0, 1.0, tight());
  CHECK(std::abs(r.y_final[0] - std::exp(-1.0)) < 1e-8);
  CHECK(r.t_final == 1.0);

  IntegratorSettings rk4;
  rk4.method = Method::rk4;
  rk4.dt_init = 1e-3;
  CHECK(std::abs(integrate(decay(), y0, 0.0, 1.0, rk4).y_final[0] - std::exp(-1.0)) < 1e-10);
}

TEST_CASE("time-dependent right-hand side via augmented clock") {
  // y' = cos(t), written autonomously with s' = 1.
  const VectorField f = [](std::span<const double> y, std::span<double> dy) {
    dy[0] = std::cos(y[1]);
    dy[1] = 1.0;
  };
  const std::vector<double> y0{0.0, 0.0};
  const auto r = integrate(f, y0, 0.0, kPi, tight());
  CHECK(std::abs(r.y_final[0]) < 1e-8);
}

TEST_CASE("dense output follows the solution between steps") {
  const std::vector<double> y0{1.0};
  const auto r = integrate(decay(), y0, 0.0, 5.0, tight());
  REQUIRE(r.trajectory.size() > 3);
  double err = 0.0;
  for (int k = 0; k <= 500; ++k) {
    const double t = 0.01 * k;
    err = std::max(err, std::abs(r.trajectory.at(t)[0] - std::exp(-t)));
  }
  CHECK(err < 1e-7);
}

TEST_CASE("centroid flow matches the closed form") {
  const double C = 1.3, S = -0.4, mu = 0.7, d0 = 2.5;
  const VectorField f = [&](std::span<const double> y, std::span<double> dy) {
    dy[0] = mu + S * std::cos(y[0]) - C * std::sin(y[0]);
  };
  const std::vector<double> y0{d0};
  const auto r = integrate(f, y0, 0.0, 20.0, tight());
  const CentroidSolution exact(C, S, mu, d0);
  double err = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double t = 0.01 * k;
    err = std::max(err, std::abs(r.trajectory.at(t)[0] - exact(t)));
  }
  CHECK(err < 1e-6);
}

TEST_CASE("event location") {
  // y = e^{-t} crosses 0.25 at ln 4.
  const std::vector<double> y0{1.0};
  const std::vector<EventFunction> ev{[](double, std::span<const double> y) { return y[0] - 0.25; }};
  const auto r = integrate(decay(), y0, 0.0, 10.0, tight(), ev);
  CHECK(r.event == 0);
  CHECK(std::abs(r.t_final - std::log(4.0)) < 1e-8);
  CHECK(std::abs(r.y_final[0] - 0.25) < 1e-8);
}

TEST_CASE("step underflow carries the partial trajectory") {
  // y' = y^2 blows up at t = 1.
  const VectorField f = [](std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
  const std::vector<double> y0{1.0};
  bool thrown = false;
  try {
    integrate(f, y0, 0.0, 2.0, IntegratorSettings{});
  } catch (const StepUnderflow& e) {
    thrown = true;
    CHECK(e.partial().t_final < 1.0 + 1e-6);
    CHECK(e.partial().t_final > 0.99);
  } catch (const NumericalError&) {
    thrown = true;  // non-finite state detected before underflow
  }
  CHECK(thrown);
}

TEST_CASE("settings validation") {
  IntegratorSettings s;
  s.rtol = 0;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = {};
  s.dt_max = -1;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  CHECK(parse_method("rk4") == Method::rk4);
  CHECK_THROWS_AS(parse_method("euler"), ValidationError);
}

TEST_CASE("scenario: overwhelming Blue wins") {
  ModelConfig cfg;
  cfg.beta1 = 50;
  cfg.beta2 = 0;
  System sys(Variant::simple_reduced, cfg);
  const std::vector<double> y0{0.5, 0.5, 0.0};
  ScenarioSettings s;
  s.record = true;
  const auto out = run_scenario(sys, y0, s);
  CHECK(out.winner == Winner::blue);
  CHECK(out.t_event < s.integrator.t_end);
  CHECK(std::abs(out.y_final[1] - cfg.P_D) < 1e-7);
  // Red is monotone decreasing on the way out.
  const auto& tr = out.trajectory;
  for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr.y[k][1] <= tr.y[k - 1][1] + 1e-12);
}

TEST_CASE("scenario: Blue without reduction never wins") {
  ModelConfig cfg;
  cfg.beta1 = 0;
  cfg.beta2 = 2;
  System sys(Variant::simple_reduced, cfg);
  ScenarioSettings s;
  s.integrator.t_end = 100;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const std::vector<double> y0{0.1 + 0.2 * i, 0.1 + 0.2 * j, 0.0};
      CHECK(run_scenario(sys, y0, s).winner != Winner::blue);
    }
}

TEST_CASE("scenario: already-below threshold") {
  System sys(Variant::simple_reduced, ModelConfig{});
  ScenarioSettings s;
  CHECK(run_scenario(sys, std::vector<double>{0.5, 1e-6, 0.0}, s).winner == Winner::blue);
  CHECK(run_scenario(sys, std::vector<double>{1e-6, 0.5, 0.0}, s).winner == Winner::red);
  CHECK(run_scenario(sys, std::vector<double>{1e-6, 1e-6, 0.0}, s).winner == Winner::stalemate);
}

TEST_CASE("scenario: smaller extinction threshold crosses later") {
  ModelConfig cfg;
  cfg.beta1 = 20;
  cfg.beta2 = 0.5;
  ScenarioSettings s;
  const std::vector<double> y0{0.6, 0.5, 0.0};
  double prev = 0.0;
  for (double pd : {1e-2, 1e-3, 1e-4, 1e-5}) {
    cfg.P_D = pd;
    const auto out = run_scenario(System(Variant::simple_reduced, cfg), y0, s);
    REQUIRE(out.winner == Winner::blue);
    CHECK(out.t_event >= prev);
    prev = out.t_event;
  }
}

TEST_CASE("scenario: reconnaissance is inert on a synchronised locked start") {
  // Two populations with identical frequencies and no frustration: a
  // synchronised, aligned start is an equilibrium of the phase flow.
  ModelConfig cfg;
  cfg.mu = 0;
  cfg.phi = 0;
  cfg.psi = 0;
  UseCaseGraphs u = usecase_graphs(5, 2);
  NetworkParts p;
  p.populations = u.populations;
  p.interlinks = u.interlinks;
  p.sigma = {4, 2};
  p.xi = normalized_xi(u.populations, u.interlinks);
  for (const auto& g : u.populations) p.partitions.push_back(default_partition(g.size()));
  p.omega.assign(static_cast<std::size_t>(u.populations[0].size() + u.populations[1].size()), 0.0);
  auto net = std::make_shared<const CoupledNetwork>(assemble(p));
  System sys(Variant::feedback, cfg, net);
  std::vector<double> y0{0.6, 0.5};
  y0.resize(static_cast<std::size_t>(sys.dimension()), 1.0);
  ScenarioSettings a, b;
  a.recon_T = 0;
  b.recon_T = 50;
  a.integrator.t_end = b.integrator.t_end = 30;
  const auto oa = run_scenario(sys, y0, a);
  const auto ob = run_scenario(sys, y0, b);
  CHECK(oa.winner == ob.winner);
  CHECK(std::abs(oa.t_event - ob.t_event) < 1e-9);
  for (std::size_t i = 0; i < oa.y_final.size(); ++i) CHECK(std::abs(oa.y_final[i] - ob.y_final[i]) < 1e-9);
}

TEST_CASE("tolerance halving changes the terminal state only slightly") {
  ModelConfig cfg;
  cfg.beta2 = 2;
  System sys(Variant::simple_reduced, cfg);
  ScenarioSettings a;
  a.integrator.t_end = 50;
  ScenarioSettings b = a;
  b.integrator.rtol /= 2;
  b.integrator.atol /= 2;
  const std::vector<double> y0{0.5, 0.5, 0.3};
  const auto ya = run_scenario(sys, y0, a).y_final;
  const auto yb = run_scenario(sys, y0, b).y_final;
  for (std::size_t i = 0; i < ya.size(); ++i) CHECK(std::abs(ya[i] - yb[i]) < 100 * a.integrator.rtol * 10);
}

TEST_CASE("ensemble") {
  ModelConfig cfg;
  cfg.beta2 = 2;
  cfg.beta1 = 3;
  System sys(Variant::simple_reduced, cfg);
  ScenarioSettings s;
  s.integrator.t_end = 100;
  const std::vector<double> P0{0.5, 0.5};

  const auto a = ensemble(sys, P0, 12, 99, s, Parallelism{2});
  const auto b = ensemble_serial(sys, P0, 12, 99, s);
  CHECK(a == b);
  CHECK(a.n == 12);
  CHECK(a.completed() + a.failed == 12);
  CHECK(a.blue_fraction() + a.red_fraction() + a.stalemate_fraction() == doctest::Approx(1.0));

  const auto one = ensemble(sys, P0, 1, 7, s);
  CHECK(one == ensemble(sys, P0, 1, 7, s));

  // Members draw distinct initial phases from their own streams.
  CHECK(ensemble_member_state(sys, P0, 99, 0)[2] != ensemble_member_state(sys, P0, 99, 1)[2]);
  CHECK(ensemble_member_state(sys, P0, 99, 3) == ensemble_member_state(sys, P0, 99, 3));

  // Without phase influence on the rates every member ends the same way.
  ModelConfig flat = cfg;
  flat.beta1 = 0;
  flat.beta2 = 0;
  const auto f = ensemble(System(Variant::simple_reduced, flat), P0, 8, 1, s);
  CHECK((f.blue == 8 || f.red == 8 || f.stalemate == 8));

  CHECK_THROWS_AS(ensemble(sys, P0, 0, 1, s), ValidationError);
}
