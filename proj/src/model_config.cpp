#include "compdyn/model_config.hpp"

#include <cmath>
#include <string>

#include "compdyn/errors.hpp"

namespace compdyn {

namespace {

struct ParamRef {
  const char* name;
  double ModelConfig::*field;
  int index;  // for array members; -1 otherwise
  std::array<double, 3> ModelConfig::*array;
};

const std::vector<ParamRef>& registry() {
  static const std::vector<ParamRef> refs = {
      {"r1", nullptr, 0, &ModelConfig::r},
      {"r2", nullptr, 1, &ModelConfig::r},
      {"r3", nullptr, 2, &ModelConfig::r},
      {"r3_max", &ModelConfig::r3_max, -1, nullptr},
      {"beta1", &ModelConfig::beta1, -1, nullptr},
      {"beta2", &ModelConfig::beta2, -1, nullptr},
      {"beta1_min", &ModelConfig::beta1_min, -1, nullptr},
      {"alpha", &ModelConfig::alpha, -1, nullptr},
      {"tau", &ModelConfig::tau, -1, nullptr},
      {"x1", &ModelConfig::x1, -1, nullptr},
      {"x3", &ModelConfig::x3, -1, nullptr},
      {"x3_min", &ModelConfig::x3_min, -1, nullptr},
      {"x3_max", &ModelConfig::x3_max, -1, nullptr},
      {"K1", nullptr, 0, &ModelConfig::K},
      {"K2", nullptr, 1, &ModelConfig::K},
      {"K3", nullptr, 2, &ModelConfig::K},
      {"mu", &ModelConfig::mu, -1, nullptr},
      {"nu", &ModelConfig::nu, -1, nullptr},
      {"phi", &ModelConfig::phi, -1, nullptr},
      {"psi", &ModelConfig::psi, -1, nullptr},
      {"P_D", &ModelConfig::P_D, -1, nullptr},
      {"gamma1", &ModelConfig::gamma1, -1, nullptr},
      {"gamma2", &ModelConfig::gamma2, -1, nullptr},
  };
  return refs;
}

const ParamRef* find(std::string_view name) {
  for (const auto& r : registry())
    if (name == r.name) return &r;
  return nullptr;
}

}  // namespace

const std::vector<std::string>& model_param_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& r : registry()) out.emplace_back(r.name);
    out.emplace_back("p_exponent");
    return out;
  }();
  return names;
}

bool is_model_param(std::string_view name) { return name == "p_exponent" || find(name) != nullptr; }

void set_param(ModelConfig& cfg, std::string_view name, double value) {
  if (name == "p_exponent") {
    if (value != std::round(value)) throw ValidationError("p_exponent must be an integer");
    cfg.p_exponent = static_cast<int>(value);
    return;
  }
  const ParamRef* r = find(name);
  if (r == nullptr) throw ValidationError("unknown model parameter '" + std::string(name) + "'");
  if (r->array != nullptr)
    (cfg.*(r->array))[static_cast<std::size_t>(r->index)] = value;
  else
    cfg.*(r->field) = value;
}

double get_param(const ModelConfig& cfg, std::string_view name) {
  if (name == "p_exponent") return cfg.p_exponent;
  const ParamRef* r = find(name);
  if (r == nullptr) throw ValidationError("unknown model parameter '" + std::string(name) + "'");
  if (r->array != nullptr) return (cfg.*(r->array))[static_cast<std::size_t>(r->index)];
  return cfg.*(r->field);
}

void ModelConfig::validate() const {
  for (const auto& ref : registry()) {
    const double v = get_param(*this, ref.name);
    if (!std::isfinite(v)) throw ValidationError(std::string("parameter ") + ref.name + " must be finite");
  }
  const char* nonneg[] = {"r1", "r2", "r3", "r3_max", "beta1", "beta2", "beta1_min", "alpha", "tau",
                          "x1", "x3", "x3_min", "x3_max", "gamma1", "gamma2"};
  for (const char* name : nonneg)
    if (get_param(*this, name) < 0.0) throw ValidationError(std::string("parameter ") + name + " must be >= 0");
  for (double k : K)
    if (!(k > 0.0)) throw ValidationError("carrying capacities must be > 0");
  if (!(P_D > 0.0 && P_D < 0.1)) throw ValidationError("P_D must lie in (0, 0.1)");
  if (p_exponent != 1 && p_exponent != 2) throw ValidationError("p_exponent must be 1 or 2");
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::simple: return "simple";
    case Variant::simple_reduced: return "simple-reduced";
    case Variant::feedback: return "feedback";
    case Variant::eco3: return "eco3";
    case Variant::eco3_reduced: return "eco3-reduced";
    case Variant::eco2: return "eco2";
    case Variant::eco2_reduced: return "eco2-reduced";
  }
  return "?";
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v = {Variant::simple, Variant::simple_reduced, Variant::feedback,
                                         Variant::eco3,   Variant::eco3_reduced,   Variant::eco2,
                                         Variant::eco2_reduced};
  return v;
}

Variant parse_variant(std::string_view name) {
  for (Variant v : all_variants())
    if (variant_name(v) == name) return v;
  throw ValidationError("unknown model variant '" + std::string(name) + "'");
}

bool is_reduced(Variant v) {
  return v == Variant::simple_reduced || v == Variant::eco3_reduced || v == Variant::eco2_reduced;
}

int population_count(Variant v) { return (v == Variant::eco3 || v == Variant::eco3_reduced) ? 3 : 2; }

bool is_dimensional(Variant v) { return v == Variant::eco3 || v == Variant::eco3_reduced; }

}  // namespace compdyn
