#include "compdyn/run_config.hpp"

#include <cmath>
#include <cstdio>

#include "compdyn/errors.hpp"

namespace compdyn {

using nlohmann::json;

std::string_view task_name(Task t) {
  switch (t) {
    case Task::simulate: return "simulate";
    case Task::fixed_points: return "fixed-points";
    case Task::sweep: return "sweep";
    case Task::basin: return "basin";
    case Task::heatmap: return "heatmap";
    case Task::doe: return "doe";
    case Task::glm: return "glm";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  for (Task t : {Task::simulate, Task::fixed_points, Task::sweep, Task::basin, Task::heatmap, Task::doe, Task::glm})
    if (task_name(t) == name) return t;
  throw ValidationError("unknown task '" + std::string(name) + "'");
}

namespace {

std::string_view centroid_name(CentroidMethod m) {
  return m == CentroidMethod::recurrence ? "recurrence" : "sign_shift";
}

const char* kSchemaText = R"({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "compdyn run configuration",
  "type": "object",
  "additionalProperties": false,
  "required": ["model", "task"],
  "properties": {
    "model": {"type": "string", "enum": ["simple", "simple-reduced", "feedback", "eco3", "eco3-reduced", "eco2", "eco2-reduced"]},
    "task": {"type": "string", "enum": ["simulate", "fixed-points", "sweep", "basin", "heatmap", "doe", "glm"]},
    "seed": {"type": "integer", "minimum": 0},
    "output": {"type": "string"},
    "description": {"type": "string"},
    "params": {"type": "object", "additionalProperties": false, "properties": {}},
    "network": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "populations": {"type": "array", "minItems": 2, "maxItems": 3, "items": {
          "type": "object", "additionalProperties": false, "required": ["kind"],
          "properties": {
            "kind": {"type": "string", "enum": ["tree", "erdos_renyi", "watts_strogatz", "edges"]},
            "branching": {"type": "integer", "minimum": 1},
            "layers": {"type": "integer", "minimum": 0},
            "n": {"type": "integer", "minimum": 1},
            "p": {"type": "number", "minimum": 0, "maximum": 1},
            "k": {"type": "integer", "minimum": 0},
            "rewire": {"type": "number", "minimum": 0, "maximum": 1},
            "edges": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "integer", "minimum": 0}}}
          }}},
        "links": {"type": ["string", "array"], "items": {
          "type": "object", "additionalProperties": false, "required": ["between", "edges"],
          "properties": {
            "between": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "integer", "minimum": 0, "maximum": 2}},
            "edges": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "integer", "minimum": 0}}}
          }}},
        "sigma": {"type": "array", "minItems": 2, "maxItems": 3, "items": {"type": "number", "minimum": 0}},
        "xi": {"type": ["string", "array"], "items": {
          "type": "object", "additionalProperties": false, "required": ["from", "to", "value"],
          "properties": {
            "from": {"type": "integer", "minimum": 0, "maximum": 2},
            "to": {"type": "integer", "minimum": 0, "maximum": 2},
            "value": {"type": "number", "minimum": 0}
          }}},
        "strategic_count": {"type": "integer", "minimum": 0},
        "partitions": {"type": "array", "items": {
          "type": "object", "additionalProperties": false, "required": ["strategic", "tactical"],
          "properties": {
            "strategic": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "tactical": {"type": "array", "items": {"type": "integer", "minimum": 0}}
          }}}
      }
    },
    "solver": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "method": {"type": "string", "enum": ["rk45", "rk4"]},
        "rtol": {"type": "number", "exclusiveMinimum": 0},
        "atol": {"type": "number", "exclusiveMinimum": 0},
        "dt_init": {"type": "number", "exclusiveMinimum": 0},
        "dt_max": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "recon_T": {"type": "number", "minimum": 0},
        "centroid": {"type": "string", "enum": ["recurrence", "sign_shift"]}
      }
    },
    "initial": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "P": {"type": "array", "minItems": 2, "maxItems": 3, "items": {"type": "number", "minimum": 0}},
        "phases": {"type": "string", "enum": ["random", "synced"]},
        "delta": {"type": "array", "minItems": 1, "maxItems": 2, "items": {"type": "number"}},
        "member": {"type": "integer", "minimum": 0}
      }
    },
    "sweep": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "param": {"type": "string"},
        "lo": {"type": "number"},
        "hi": {"type": "number"},
        "n_points": {"type": "integer", "minimum": 1},
        "start": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}
      }
    },
    "basin": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "n_P1": {"type": "integer", "minimum": 1},
        "n_P2": {"type": "integer", "minimum": 1},
        "P3_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        "phase": {"type": "string", "enum": ["ensemble", "delta_grid", "settled"]},
        "n_sim": {"type": "integer", "minimum": 1},
        "delta_resolution": {"type": "integer", "minimum": 1}
      }
    },
    "heatmap": {
      "type": "object", "additionalProperties": false, "required": ["x", "y"],
      "properties": {
        "x": {"$ref": "#/definitions/axis"},
        "y": {"$ref": "#/definitions/axis"}
      }
    },
    "doe": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "factors": {"type": "array", "minItems": 1, "items": {
          "type": "object", "additionalProperties": false, "required": ["name", "lo", "hi"],
          "properties": {"name": {"type": "string"}, "lo": {"type": "number"}, "hi": {"type": "number"}}}},
        "k_init": {"type": "integer", "minimum": 2},
        "n_total": {"type": "integer", "minimum": 2},
        "kappa": {"type": "number", "minimum": 0},
        "starts": {"type": "integer", "minimum": 1},
        "refit_every": {"type": "integer", "minimum": 1},
        "bandwidth": {"type": "number", "exclusiveMinimum": 0},
        "resume": {"type": "string"}
      }
    },
    "glm": {
      "type": "object", "additionalProperties": false, "required": ["input"],
      "properties": {
        "input": {"type": "string"},
        "response": {"type": "string"},
        "weight": {"type": "string"},
        "drop": {"type": "array", "items": {"type": "string"}},
        "order": {"type": "array", "items": {"type": "string"}},
        "n_repeats": {"type": "integer", "minimum": 1}
      }
    }
  },
  "definitions": {
    "axis": {
      "type": "object", "additionalProperties": false, "required": ["param", "lo", "hi", "n"],
      "properties": {
        "param": {"type": "string"},
        "lo": {"type": "number"},
        "hi": {"type": "number"},
        "n": {"type": "integer", "minimum": 1}
      }
    }
  }
})";

bool has_type(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

const json* resolve_ref(const json& schema, const json& root) {
  if (!schema.contains("$ref")) return &schema;
  const std::string ref = schema["$ref"];
  const std::string prefix = "#/definitions/";
  if (ref.rfind(prefix, 0) != 0) throw ValidationError("schema: unsupported $ref " + ref);
  return &root["definitions"][ref.substr(prefix.size())];
}

void validate_node(const json& doc, const json& schema_in, const json& root, const std::string& path) {
  const json& schema = *resolve_ref(schema_in, root);
  auto fail = [&](const std::string& what) { throw ValidationError("config " + path + ": " + what); };

  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_array()) {
      for (const auto& t : schema["type"]) ok = ok || has_type(doc, t.get<std::string>());
    } else {
      ok = has_type(doc, schema["type"].get<std::string>());
    }
    if (!ok) fail("expected " + schema["type"].dump());
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == doc;
    if (!found) fail("value " + doc.dump() + " not in " + schema["enum"].dump());
  }
  if (doc.is_number()) {
    const double v = doc.get<double>();
    if (!std::isfinite(v)) fail("must be finite");
    if (schema.contains("minimum") && v < schema["minimum"].get<double>()) fail("must be >= " + schema["minimum"].dump());
    if (schema.contains("maximum") && v > schema["maximum"].get<double>()) fail("must be <= " + schema["maximum"].dump());
    if (schema.contains("exclusiveMinimum") && v <= schema["exclusiveMinimum"].get<double>())
      fail("must be > " + schema["exclusiveMinimum"].dump());
  }
  if (doc.is_object()) {
    const json empty = json::object();
    const json& props = schema.contains("properties") ? schema["properties"] : empty;
    if (schema.contains("required"))
      for (const auto& key : schema["required"])
        if (!doc.contains(key.get<std::string>())) fail("missing required key '" + key.get<std::string>() + "'");
    for (const auto& [key, value] : doc.items()) {
      if (props.contains(key)) {
        validate_node(value, props[key], root, path + "." + key);
      } else if (schema.contains("additionalProperties")) {
        const json& extra = schema["additionalProperties"];
        if (extra.is_boolean() && !extra.get<bool>()) fail("unknown key '" + key + "'");
        if (extra.is_object()) validate_node(value, extra, root, path + "." + key);
      }
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>())
      fail("needs at least " + schema["minItems"].dump() + " items");
    if (schema.contains("maxItems") && doc.size() > schema["maxItems"].get<std::size_t>())
      fail("allows at most " + schema["maxItems"].dump() + " items");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < doc.size(); ++i) validate_node(doc[i], schema["items"], root, path + "[" + std::to_string(i) + "]");
  }
}

template <class T>
T value_or(const json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj[key].get<T>() : fallback;
}

std::vector<Edge> edges_from(const json& arr) {
  std::vector<Edge> out;
  for (const auto& e : arr) out.emplace_back(e[0].get<int>(), e[1].get<int>());
  return out;
}

json edges_to(const std::vector<Edge>& edges) {
  json arr = json::array();
  for (const auto& [u, v] : edges) arr.push_back({u, v});
  return arr;
}

void parse_network(const json& j, RunConfig& rc) {
  NetworkSpec& ns = rc.network;
  if (j.contains("seed")) rc.network_seed = j["seed"].get<std::uint64_t>();
  if (j.contains("populations")) {
    for (const auto& g : j["populations"]) {
      GraphGenSpec s;
      s.kind = parse_graph_kind(g["kind"].get<std::string>());
      s.branching = value_or(g, "branching", s.branching);
      s.layers = value_or(g, "layers", s.layers);
      s.n = value_or(g, "n", s.n);
      s.p = value_or(g, "p", s.p);
      s.k = value_or(g, "k", s.k);
      s.rewire = value_or(g, "rewire", s.rewire);
      if (g.contains("edges")) s.edges = edges_from(g["edges"]);
      ns.populations.push_back(std::move(s));
    }
  }
  if (j.contains("links")) {
    if (j["links"].is_string()) {
      if (j["links"] != "usecase") throw ValidationError("config $.network.links: expected \"usecase\" or a list");
    } else {
      ns.explicit_links = true;
      for (const auto& l : j["links"]) {
        int a = l["between"][0], b = l["between"][1];
        if (a == b) throw ValidationError("config $.network.links: a link block joins two different populations");
        auto edges = edges_from(l["edges"]);
        if (a > b) {
          std::swap(a, b);
          for (auto& e : edges) std::swap(e.first, e.second);
        }
        auto& dst = ns.links[{a, b}];
        dst.insert(dst.end(), edges.begin(), edges.end());
      }
    }
  }
  if (j.contains("sigma")) ns.sigma = j["sigma"].get<std::vector<double>>();
  if (j.contains("xi")) {
    if (j["xi"].is_string()) {
      if (j["xi"] != "normalized") throw ValidationError("config $.network.xi: expected \"normalized\" or a list");
    } else {
      std::map<PopPair, double> xi;
      for (const auto& x : j["xi"]) xi[{x["from"].get<int>(), x["to"].get<int>()}] = x["value"].get<double>();
      ns.xi = xi;
    }
  }
  ns.strategic_count = value_or(j, "strategic_count", ns.strategic_count);
  if (j.contains("partitions"))
    for (const auto& p : j["partitions"])
      ns.partitions.push_back({p["strategic"].get<std::vector<int>>(), p["tactical"].get<std::vector<int>>()});
}

json network_to_json(const RunConfig& rc) {
  const NetworkSpec& ns = rc.network;
  json j = json::object();
  if (rc.network_seed) j["seed"] = *rc.network_seed;
  if (!ns.populations.empty()) {
    json pops = json::array();
    for (const auto& g : ns.populations) {
      json s = {{"kind", graph_kind_name(g.kind)}};
      switch (g.kind) {
        case GraphKind::tree: s["branching"] = g.branching; s["layers"] = g.layers; break;
        case GraphKind::erdos_renyi: s["n"] = g.n; s["p"] = g.p; break;
        case GraphKind::watts_strogatz: s["n"] = g.n; s["k"] = g.k; s["rewire"] = g.rewire; break;
        case GraphKind::edges: s["n"] = g.n; s["edges"] = edges_to(g.edges); break;
      }
      pops.push_back(s);
    }
    j["populations"] = pops;
  }
  if (ns.explicit_links) {
    json links = json::array();
    for (const auto& [key, edges] : ns.links) links.push_back({{"between", {key.first, key.second}}, {"edges", edges_to(edges)}});
    j["links"] = links;
  } else {
    j["links"] = "usecase";
  }
  j["sigma"] = ns.sigma;
  if (ns.xi) {
    json xi = json::array();
    for (const auto& [key, v] : *ns.xi) xi.push_back({{"from", key.first}, {"to", key.second}, {"value", v}});
    j["xi"] = xi;
  } else {
    j["xi"] = "normalized";
  }
  j["strategic_count"] = ns.strategic_count;
  if (!ns.partitions.empty()) {
    json parts = json::array();
    for (const auto& p : ns.partitions) parts.push_back({{"strategic", p.strategic}, {"tactical", p.tactical}});
    j["partitions"] = parts;
  }
  return j;
}

json axis_to_json(const std::string& p, double lo, double hi, int n) {
  return {{"param", p}, {"lo", lo}, {"hi", hi}, {"n", n}};
}

bool needs_network(Variant v) { return !is_reduced(v) || v == Variant::eco3_reduced; }

void check_model_param(const std::string& name, const char* where) {
  if (!is_model_param(name)) throw ValidationError(std::string(where) + ": unknown model parameter '" + name + "'");
}

void validate_task(const RunConfig& rc) {
  const int pops = population_count(rc.variant);
  rc.scenario.integrator.validate();
  if (needs_network(rc.variant)) build_run_network(rc);
  switch (rc.task) {
    case Task::simulate:
      if (!rc.initial.P.empty() && static_cast<int>(rc.initial.P.size()) != pops)
        throw ValidationError("initial.P needs " + std::to_string(pops) + " entries for " +
                              std::string(variant_name(rc.variant)));
      if (!rc.initial.delta.empty() && static_cast<int>(rc.initial.delta.size()) != pops - 1)
        throw ValidationError("initial.delta needs " + std::to_string(pops - 1) + " entries");
      return;
    case Task::fixed_points:
      if (rc.variant != Variant::simple_reduced && rc.variant != Variant::eco2_reduced)
        throw ValidationError("fixed-points: model must be simple-reduced or eco2-reduced");
      return;
    case Task::sweep:
      if (rc.variant != Variant::simple_reduced && rc.variant != Variant::eco2_reduced)
        throw ValidationError("sweep: model must be simple-reduced or eco2-reduced");
      check_model_param(rc.sweep.param, "sweep");
      return;
    case Task::basin:
      rc.basin.validate();
      if (rc.basin.phase && *rc.basin.phase != PhasePolicy::ensemble && !is_reduced(rc.variant))
        throw ValidationError("basin: phase policy " + std::string(phase_policy_name(*rc.basin.phase)) +
                              " needs a reduced model");
      return;
    case Task::heatmap:
      rc.basin.validate();
      rc.heatmap.validate();
      return;
    case Task::doe:
      rc.basin.validate();
      validate_factors(rc.doe.factors);
      for (const auto& f : rc.doe.factors) check_model_param(f.name, "doe");
      if (rc.doe.n_total < rc.doe.k_init) throw ValidationError("doe: n_total must be >= k_init");
      return;
    case Task::glm:
      if (rc.glm.input.empty()) throw ValidationError("glm: input path required");
      return;
  }
}

}  // namespace

const json& config_schema() {
  static const json schema = [] {
    json s = json::parse(kSchemaText);
    json& props = s["properties"]["params"]["properties"];
    for (const auto& name : model_param_names())
      props[name] = name == "p_exponent" ? json{{"type", "integer"}, {"enum", {1, 2}}} : json{{"type", "number"}};
    return s;
  }();
  return schema;
}

void validate_against(const json& doc, const json& schema, const std::string& path) {
  validate_node(doc, schema, schema, path);
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + ov + "' is not key=value");
    std::string key = ov.substr(0, eq);
    const std::string text = ov.substr(eq + 1);
    if (key.find('.') == std::string::npos && is_model_param(key)) key = "params." + key;
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error&) {
      value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ValidationError("override '" + ov + "' has an empty path segment");
      json* next = nullptr;
      if (node->is_array()) {
        std::size_t idx = 0;
        try {
          idx = std::stoul(part);
        } catch (const std::logic_error&) {
          throw ValidationError("override '" + ov + "': '" + part + "' is not an array index");
        }
        if (idx >= node->size()) throw ValidationError("override '" + ov + "': index out of range");
        next = &(*node)[idx];
      } else {
        if (node->is_null()) *node = json::object();
        if (!node->is_object()) throw ValidationError("override '" + ov + "': '" + part + "' is below a value");
        next = &(*node)[part];
      }
      if (dot == std::string::npos) {
        *next = value;
        break;
      }
      node = next;
      start = dot + 1;
    }
  }
}

RunConfig parse_run_config(const json& doc) {
  validate_against(doc, config_schema());
  RunConfig rc;
  rc.variant = parse_variant(doc["model"].get<std::string>());
  rc.task = parse_task(doc["task"].get<std::string>());
  rc.seed = value_or<std::uint64_t>(doc, "seed", 0);
  rc.output = value_or<std::string>(doc, "output", "out");

  if (doc.contains("params"))
    for (const auto& [k, v] : doc["params"].items()) set_param(rc.params, k, v.get<double>());
  rc.params.validate();

  if (doc.contains("network")) parse_network(doc["network"], rc);

  const json solver = value_or(doc, "solver", json::object());
  IntegratorSettings& is = rc.scenario.integrator;
  is.method = parse_method(value_or<std::string>(solver, "method", std::string(method_name(is.method))));
  is.rtol = value_or(solver, "rtol", is.rtol);
  is.atol = value_or(solver, "atol", is.atol);
  is.dt_init = value_or(solver, "dt_init", is.dt_init);
  is.dt_max = value_or(solver, "dt_max", is.dt_max);
  is.t_end = value_or(solver, "t_end", is.t_end);
  rc.scenario.recon_T = value_or(solver, "recon_T", rc.scenario.recon_T);
  rc.centroid = value_or<std::string>(solver, "centroid", "recurrence") == "recurrence" ? CentroidMethod::recurrence
                                                                                         : CentroidMethod::sign_shift;

  const json init = value_or(doc, "initial", json::object());
  rc.initial.P = value_or(init, "P", rc.initial.P);
  rc.initial.phases = value_or(init, "phases", rc.initial.phases);
  rc.initial.delta = value_or(init, "delta", rc.initial.delta);
  rc.initial.member = value_or(init, "member", rc.initial.member);

  const json sw = value_or(doc, "sweep", json::object());
  rc.sweep.param = value_or<std::string>(sw, "param", "beta1");
  rc.sweep.lo = value_or(sw, "lo", rc.sweep.lo);
  rc.sweep.hi = value_or(sw, "hi", rc.sweep.hi);
  rc.sweep.n_points = value_or(sw, "n_points", rc.sweep.n_points);
  rc.sweep.start = value_or(sw, "start", rc.sweep.start);

  const json b = value_or(doc, "basin", json::object());
  rc.basin.n_P1 = value_or(b, "n_P1", rc.basin.n_P1);
  rc.basin.n_P2 = value_or(b, "n_P2", rc.basin.n_P2);
  rc.basin.P3_fraction = value_or(b, "P3_fraction", rc.basin.P3_fraction);
  if (b.contains("phase")) rc.basin.phase = parse_phase_policy(b["phase"].get<std::string>());
  rc.basin.n_sim = value_or(b, "n_sim", rc.basin.n_sim);
  rc.basin.delta_resolution = value_or(b, "delta_resolution", rc.basin.delta_resolution);

  if (doc.contains("heatmap")) {
    const json& x = doc["heatmap"]["x"];
    const json& y = doc["heatmap"]["y"];
    rc.heatmap = {x["param"].get<std::string>(), x["lo"].get<double>(), x["hi"].get<double>(), x["n"].get<int>(),
                  y["param"].get<std::string>(), y["lo"].get<double>(), y["hi"].get<double>(), y["n"].get<int>()};
  } else if (rc.task == Task::heatmap) {
    throw ValidationError("config $: task heatmap needs a heatmap section");
  }

  const json d = value_or(doc, "doe", json::object());
  if (d.contains("factors"))
    for (const auto& f : d["factors"]) rc.doe.factors.push_back({f["name"].get<std::string>(), f["lo"].get<double>(), f["hi"].get<double>()});
  rc.doe.k_init = value_or(d, "k_init", rc.doe.k_init);
  rc.doe.n_total = value_or(d, "n_total", rc.doe.n_total);
  rc.doe.bo.kappa = value_or(d, "kappa", rc.doe.bo.kappa);
  rc.doe.bo.starts = value_or(d, "starts", rc.doe.bo.starts);
  rc.doe.bo.refit_every = value_or(d, "refit_every", rc.doe.bo.refit_every);
  if (d.contains("bandwidth")) rc.doe.bo.bandwidth = d["bandwidth"].get<double>();
  if (d.contains("resume")) rc.doe.resume = d["resume"].get<std::string>();

  if (doc.contains("glm")) {
    const json& g = doc["glm"];
    rc.glm.input = g["input"].get<std::string>();
    rc.glm.response = value_or(g, "response", rc.glm.response);
    if (g.contains("weight")) rc.glm.weight = g["weight"].get<std::string>();
    rc.glm.drop = value_or(g, "drop", rc.glm.drop);
    rc.glm.order = value_or(g, "order", rc.glm.order);
    rc.glm.n_repeats = value_or(g, "n_repeats", rc.glm.n_repeats);
  }

  // Basin scenarios share the solver section.
  rc.basin.scenario = rc.scenario;
  rc.basin.seed = rc.seed;
  rc.sweep.scenario = rc.scenario;
  validate_task(rc);
  return rc;
}

json to_json(const RunConfig& rc) {
  json j;
  j["model"] = variant_name(rc.variant);
  j["task"] = task_name(rc.task);
  j["seed"] = rc.seed;
  j["output"] = rc.output;
  json params = json::object();
  for (const auto& name : model_param_names()) {
    if (name == "p_exponent")
      params[name] = rc.params.p_exponent;
    else
      params[name] = get_param(rc.params, name);
  }
  j["params"] = params;
  if (needs_network(rc.variant)) j["network"] = network_to_json(rc);
  const IntegratorSettings& is = rc.scenario.integrator;
  j["solver"] = {{"method", method_name(is.method)}, {"rtol", is.rtol},         {"atol", is.atol},
                 {"dt_init", is.dt_init},            {"dt_max", is.dt_max},     {"t_end", is.t_end},
                 {"recon_T", rc.scenario.recon_T},   {"centroid", centroid_name(rc.centroid)}};
  switch (rc.task) {
    case Task::simulate: {
      json init = {{"phases", rc.initial.phases}, {"member", rc.initial.member}};
      if (!rc.initial.P.empty()) init["P"] = rc.initial.P;
      if (!rc.initial.delta.empty()) init["delta"] = rc.initial.delta;
      j["initial"] = init;
      break;
    }
    case Task::fixed_points: break;
    case Task::sweep: {
      json sw = {{"param", rc.sweep.param}, {"lo", rc.sweep.lo}, {"hi", rc.sweep.hi}, {"n_points", rc.sweep.n_points}};
      if (!rc.sweep.start.empty()) sw["start"] = rc.sweep.start;
      j["sweep"] = sw;
      break;
    }
    case Task::basin:
    case Task::heatmap:
    case Task::doe: {
      json b = {{"n_P1", rc.basin.n_P1},
                {"n_P2", rc.basin.n_P2},
                {"P3_fraction", rc.basin.P3_fraction},
                {"n_sim", rc.basin.n_sim},
                {"delta_resolution", rc.basin.delta_resolution}};
      b["phase"] = phase_policy_name(rc.basin.phase.value_or(default_phase_policy(rc.variant)));
      j["basin"] = b;
      if (rc.task == Task::heatmap) {
        const HeatmapSpec& h = rc.heatmap;
        j["heatmap"] = {{"x", axis_to_json(h.x_param, h.x_lo, h.x_hi, h.nx)},
                        {"y", axis_to_json(h.y_param, h.y_lo, h.y_hi, h.ny)}};
      }
      if (rc.task == Task::doe) {
        json f = json::array();
        for (const auto& r : rc.doe.factors) f.push_back({{"name", r.name}, {"lo", r.lo}, {"hi", r.hi}});
        json d = {{"factors", f},
                  {"k_init", rc.doe.k_init},
                  {"n_total", rc.doe.n_total},
                  {"kappa", rc.doe.bo.kappa},
                  {"starts", rc.doe.bo.starts},
                  {"refit_every", rc.doe.bo.refit_every}};
        if (rc.doe.bo.bandwidth) d["bandwidth"] = *rc.doe.bo.bandwidth;
        if (rc.doe.resume) d["resume"] = *rc.doe.resume;
        j["doe"] = d;
      }
      break;
    }
    case Task::glm: {
      json g = {{"input", rc.glm.input},
                {"response", rc.glm.response},
                {"drop", rc.glm.drop},
                {"order", rc.glm.order},
                {"n_repeats", rc.glm.n_repeats}};
      if (rc.glm.weight) g["weight"] = *rc.glm.weight;
      j["glm"] = g;
      break;
    }
  }
  return j;
}

std::string config_hash(const RunConfig& rc) {
  json j = to_json(rc);
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::shared_ptr<const CoupledNetwork> build_run_network(const RunConfig& rc) {
  if (!needs_network(rc.variant)) return nullptr;
  return build_network(rc.network, rc.params, population_count(rc.variant), rc.network_seed.value_or(rc.seed));
}

System make_system(const RunConfig& rc) { return System(rc.variant, rc.params, build_run_network(rc), rc.centroid); }

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = [] {
    const double half_pi = std::acos(0.0);
    std::vector<Preset> p;
    // Two-population case study shared by the simple-model presets.
    const json two_pop = {{"r1", 3.0}, {"r2", 2.5}, {"beta2", 2.0}, {"gamma1", 1.0}, {"gamma2", 1.0}, {"psi", 0.0}};
    auto with = [](json base, const json& extra) {
      base.update(extra);
      return base;
    };
    p.push_back({"usecase",
                 "Three networked populations: Blue 4-ary tree, Red Erdos-Renyi(21, 0.2), Green "
                 "Watts-Strogatz(21, 6, 0.4), use-case interlinks, sigma (4, 2, 2); one ensemble member",
                 {{"model", "eco3"},
                  {"task", "simulate"},
                  {"seed", 1},
                  {"network", {{"links", "usecase"}, {"sigma", {4.0, 2.0, 2.0}}, {"xi", "normalized"}}},
                  {"solver", {{"t_end", 50.0}, {"recon_T", 50.0}}},
                  {"initial", {{"P", {5.0, 5.0, 5.0}}, {"phases", "random"}}}}});
    p.push_back({"simple-case",
                 "Two-population reduced case study (gamma = 1, psi = 0, beta2 = 2, r = (3, 2.5)); basin of the "
                 "Blue-win point",
                 {{"model", "simple-reduced"},
                  {"task", "basin"},
                  {"seed", 1},
                  {"params", with(two_pop, {{"beta1", 2.0}, {"mu", 0.2}, {"phi", 0.2}})},
                  {"solver", {{"t_end", 200.0}}},
                  {"basin", {{"n_P1", 21}, {"n_P2", 21}, {"phase", "settled"}}}}});
    p.push_back({"simple-threshold",
                 "Basin heatmap of the two-population case study over beta1 and phi",
                 {{"model", "simple-reduced"},
                  {"task", "heatmap"},
                  {"seed", 1},
                  {"params", with(two_pop, {{"mu", 0.2}})},
                  {"solver", {{"t_end", 200.0}}},
                  {"basin", {{"n_P1", 11}, {"n_P2", 11}, {"phase", "settled"}}},
                  {"heatmap", {{"x", {{"param", "beta1"}, {"lo", 0.5}, {"hi", 6.5}, {"n", 21}}},
                               {"y", {{"param", "phi"}, {"lo", -1.0}, {"hi", 1.0}, {"n", 21}}}}}}});
    p.push_back({"feedback-highsync",
                 "Networked two-population model with synchronisation feedback, sigma (4, 2), couplings "
                 "normalised to one; synchronised start",
                 {{"model", "feedback"},
                  {"task", "simulate"},
                  {"seed", 1},
                  {"params", with(two_pop, {{"beta1", 2.0}, {"mu", 0.2}, {"phi", 0.2}})},
                  {"network", {{"sigma", {4.0, 2.0}}, {"xi", "normalized"}}},
                  {"solver", {{"t_end", 20.0}, {"recon_T", 0.0}}},
                  {"initial", {{"P", {0.5, 0.5}}, {"phases", "synced"}, {"delta", {0.5}}}}}});
    p.push_back({"eco3-case",
                 "Three-population centroid approximation with the networked case-study parameters",
                 {{"model", "eco3-reduced"},
                  {"task", "basin"},
                  {"seed", 1},
                  {"network", {{"sigma", {4.0, 2.0, 2.0}}}},
                  {"solver", {{"t_end", 100.0}}},
                  {"basin", {{"n_P1", 11}, {"n_P2", 11}, {"phase", "settled"}}}}});
    p.push_back({"eco2-case",
                 "Two-population model with Holling response and Blue withdrawal; fixed points",
                 {{"model", "eco2-reduced"},
                  {"task", "fixed-points"},
                  {"seed", 1},
                  {"params", with(two_pop, {{"alpha", 20.0}, {"tau", 1.0}, {"x1", 0.25}, {"beta1", 3.0},
                                            {"mu", 0.5}, {"phi", 0.2}})}}});
    p.push_back({"scenario-red",
                 "Networked three-population scenario, beta1 = 1.5, phi = -pi/2: Red succeeds",
                 {{"model", "eco3"},
                  {"task", "simulate"},
                  {"seed", 1},
                  {"params", {{"beta1", 1.5}, {"phi", -half_pi}}},
                  {"network", {{"sigma", {4.0, 2.0, 2.0}}}},
                  {"solver", {{"t_end", 100.0}}},
                  {"initial", {{"P", {5.0, 5.0, 5.0}}, {"phases", "random"}}}}});
    p.push_back({"scenario-blue",
                 "Networked three-population scenario, beta1 = 5, phi = pi/2: Blue succeeds",
                 {{"model", "eco3"},
                  {"task", "simulate"},
                  {"seed", 1},
                  {"params", {{"beta1", 5.0}, {"phi", half_pi}}},
                  {"network", {{"sigma", {4.0, 2.0, 2.0}}}},
                  {"solver", {{"t_end", 100.0}}},
                  {"initial", {{"P", {5.0, 5.0, 5.0}}, {"phases", "random"}}}}});
    p.push_back({"doe-simple",
                 "Design loop over beta1, phi and mu for the two-population reduced model",
                 {{"model", "simple-reduced"},
                  {"task", "doe"},
                  {"seed", 1},
                  {"params", two_pop},
                  {"solver", {{"t_end", 100.0}}},
                  {"basin", {{"n_P1", 7}, {"n_P2", 7}, {"phase", "delta_grid"}, {"delta_resolution", 4}}},
                  {"doe", {{"factors", {{{"name", "beta1"}, {"lo", 0.5}, {"hi", 6.5}},
                                        {{"name", "phi"}, {"lo", -1.0}, {"hi", 1.0}},
                                        {{"name", "mu"}, {"lo", -0.5}, {"hi", 0.5}}}},
                           {"k_init", 17},
                           {"n_total", 30}}}}});
    for (auto& preset : p) preset.config["description"] = preset.description;
    return p;
  }();
  return list;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

}  // namespace compdyn
