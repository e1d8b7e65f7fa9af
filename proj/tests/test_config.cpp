#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "compdyn/errors.hpp"
#include "compdyn/tasks.hpp"
#include "doctest.h"

using namespace compdyn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("compdyn_test_config_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimal() { return {{"model", "simple-reduced"}, {"task", "simulate"}}; }

}  // namespace

TEST_CASE("schema rejects unknown keys and bad values with a path") {
  CHECK_NOTHROW(parse_run_config(minimal()));
  json bad = minimal();
  bad["solver"] = {{"t_end", 10.0}, {"tolerance", 1e-6}};
  try {
    parse_run_config(bad);
    FAIL("unknown key accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("$.solver") != std::string::npos);
    CHECK(std::string(e.what()).find("tolerance") != std::string::npos);
  }
  json neg = minimal();
  neg["solver"] = {{"t_end", -1.0}};
  CHECK_THROWS_AS(parse_run_config(neg), ValidationError);
  json unknown_param = minimal();
  unknown_param["params"] = {{"gamma3", 1.0}};
  CHECK_THROWS_AS(parse_run_config(unknown_param), ValidationError);
  json wrong_type = minimal();
  wrong_type["seed"] = "seven";
  CHECK_THROWS_AS(parse_run_config(wrong_type), ValidationError);
  CHECK_THROWS_AS(parse_run_config(json{{"task", "simulate"}}), ValidationError);
  json heat = minimal();
  heat["task"] = "heatmap";
  CHECK_THROWS_AS(parse_run_config(heat), ValidationError);
}

TEST_CASE("overrides follow dotted paths and parse JSON values") {
  json doc = minimal();
  apply_overrides(doc, {"beta1=0", "solver.t_end=25", "model=eco2-reduced", "initial.P=[0.3,0.6]", "seed=9"});
  CHECK(doc["params"]["beta1"] == 0);
  CHECK(doc["solver"]["t_end"] == 25);
  CHECK(doc["model"] == "eco2-reduced");
  CHECK(doc["initial"]["P"][1] == 0.6);
  const RunConfig rc = parse_run_config(doc);
  CHECK(rc.params.beta1 == 0.0);
  CHECK(rc.variant == Variant::eco2_reduced);
  CHECK(rc.seed == 9);

  json net = find_preset("scenario-blue").config;
  apply_overrides(net, {"network.sigma.1=3.5"});
  CHECK(net["network"]["sigma"][1] == 3.5);
  CHECK_THROWS_AS(apply_overrides(net, {"network.sigma.7=1"}), ValidationError);
  CHECK_THROWS_AS(apply_overrides(net, {"noequals"}), ValidationError);
  CHECK_THROWS_AS(apply_overrides(net, {"seed.x=1"}), ValidationError);
}

TEST_CASE("resolved config round-trips and the hash tracks content") {
  for (const auto& p : presets()) {
    const RunConfig rc = parse_run_config(p.config);
    const RunConfig again = parse_run_config(to_json(rc));
    CHECK(to_json(again) == to_json(rc));
    CHECK(config_hash(again) == config_hash(rc));
  }
  json doc = minimal();
  const std::string h0 = config_hash(parse_run_config(doc));
  doc["output"] = "elsewhere";
  CHECK(config_hash(parse_run_config(doc)) == h0);
  doc["params"] = {{"beta1", 7.0}};
  CHECK(config_hash(parse_run_config(doc)) != h0);
  CHECK(h0.size() == 16);
}

TEST_CASE("shipped presets") {
  CHECK(presets().size() >= 5);
  for (const auto& p : presets()) CHECK_NOTHROW(parse_run_config(p.config));
  const RunConfig rc = parse_run_config(find_preset("simple-case").config);
  CHECK(rc.params.gamma1 == 1.0);
  CHECK(rc.params.gamma2 == 1.0);
  CHECK(rc.params.psi == 0.0);
  CHECK(rc.params.beta2 == 2.0);
  CHECK(rc.params.r[0] == 3.0);
  CHECK(rc.params.r[1] == 2.5);
  const RunConfig a = parse_run_config(find_preset("scenario-red").config);
  const RunConfig b = parse_run_config(find_preset("scenario-blue").config);
  CHECK(a.params.beta1 == 1.5);
  CHECK(a.params.phi == doctest::Approx(-std::acos(0.0)).epsilon(1e-15));
  CHECK(b.params.beta1 == 5.0);
  CHECK(b.params.phi == doctest::Approx(std::acos(0.0)).epsilon(1e-15));
  CHECK(a.variant == Variant::eco3);
  CHECK_THROWS_AS(find_preset("nope"), ValidationError);
}

TEST_CASE("task prerequisites are checked before running") {
  json fp = minimal();
  fp["model"] = "eco3-reduced";
  fp["task"] = "fixed-points";
  CHECK_THROWS_AS(parse_run_config(fp), ValidationError);
  json init = minimal();
  init["initial"] = {{"P", {0.5, 0.5, 0.5}}};
  CHECK_THROWS_AS(parse_run_config(init), ValidationError);
  json doe = minimal();
  doe["task"] = "doe";
  doe["doe"] = {{"factors", {{{"name", "beta9"}, {"lo", 0}, {"hi", 1}}}}};
  CHECK_THROWS_AS(parse_run_config(doe), ValidationError);
  json policy = find_preset("usecase").config;
  policy["task"] = "basin";
  policy["basin"] = {{"phase", "settled"}};
  CHECK_THROWS_AS(parse_run_config(policy), ValidationError);
}

TEST_CASE("basin task with beta1 = 0 reports zero and writes its artifacts") {
  json doc = find_preset("simple-case").config;
  apply_overrides(doc, {"beta1=0", "basin.n_P1=5", "basin.n_P2=5"});
  const RunConfig rc = parse_run_config(doc);
  RunOptions opt;
  opt.out_dir = scratch("basin");
  const RunReport rep = run_task(rc, opt);
  CHECK(rep.result["value"] == 0.0);
  for (const char* f : {"basin_cells.csv", "basin.json", "config.resolved.json", "metadata.json"})
    CHECK(fs::exists(opt.out_dir / f));
  const json meta = json::parse(slurp(opt.out_dir / "metadata.json"));
  CHECK(meta["config_hash"] == config_hash(rc));
  CHECK(meta["seed"] == rc.seed);
  CHECK(meta["versions"].contains("compdyn"));
  const json echo = json::parse(slurp(opt.out_dir / "config.resolved.json"));
  CHECK(config_hash(parse_run_config(echo)) == config_hash(rc));
  fs::remove_all(opt.out_dir);
}

TEST_CASE("simulate artifacts: header layout and rerun identity") {
  json doc = find_preset("feedback-highsync").config;
  apply_overrides(doc, {"solver.method=\"rk4\"", "solver.dt_init=0.01", "solver.t_end=2"});
  const RunConfig rc = parse_run_config(doc);
  RunOptions opt;
  opt.out_dir = scratch("sim1");
  run_task(rc, opt);
  const std::string first = slurp(opt.out_dir / "trajectory.csv");
  CHECK(first.rfind("t,P1,P2,theta_0,theta_1,", 0) == 0);
  RunOptions again = opt;
  again.out_dir = scratch("sim2");
  run_task(rc, again);
  CHECK(slurp(again.out_dir / "trajectory.csv") == first);
  fs::remove_all(opt.out_dir);
  fs::remove_all(again.out_dir);

  json red = minimal();
  apply_overrides(red, {"initial.phases=synced", "initial.delta=[0.3]", "solver.t_end=1"});
  RunOptions ro;
  ro.out_dir = scratch("sim3");
  run_task(parse_run_config(red), ro);
  const std::string text = slurp(ro.out_dir / "trajectory.csv");
  CHECK(text.rfind("t,P1,P2,Delta1\n0,0.5,0.5,0.29999999999999999\n", 0) == 0);
  fs::remove_all(ro.out_dir);
}

TEST_CASE("synchronised start places every population at its centroid offset") {
  json doc = find_preset("scenario-blue").config;
  apply_overrides(doc, {"initial.phases=synced", "initial.delta=[0.4,1.0]"});
  const RunConfig rc = parse_run_config(doc);
  const System sys = make_system(rc);
  const auto y = simulate_initial_state(sys, rc);
  const auto d = sys.centroid_differences(y);
  // centroids live in [0, 2pi); compare the differences on the circle
  const double two_pi = 4.0 * std::acos(0.0);
  CHECK(std::abs(std::remainder(d[0] - 0.4, two_pi)) < 1e-12);
  CHECK(std::abs(std::remainder(d[1] - 1.0, two_pi)) < 1e-12);
  CHECK(sys.order_factors(y).strategic[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("heatmap svg is well formed") {
  HeatmapResult h{"beta1", "phi", {1.0, 2.0}, {0.0, 1.0}, Eigen::MatrixXd(2, 2)};
  h.values << 0.0, 1.0, 0.5, std::nan("");
  std::ostringstream os;
  write_heatmap_svg(os, h);
  const std::string s = os.str();
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("</svg>") != std::string::npos);
  std::size_t rects = 0;
  for (std::size_t pos = s.find("<rect"); pos != std::string::npos; pos = s.find("<rect", pos + 1)) ++rects;
  CHECK(rects == 4);
}
