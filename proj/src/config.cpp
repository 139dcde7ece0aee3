#include "magel/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "magel/errors.hpp"

namespace magel {

using nlohmann::json;

std::vector<double> SweepSettings::eps_values() const {
  std::vector<double> out;
  double eps = eps_start;
  for (int i = 0; i < num_eps; ++i) {
    out.push_back(eps);
    eps *= eps_factor;
  }
  return out;
}

GridSpec Config::make_grid() const { return build_grid(grid_n, gamma); }

std::shared_ptr<const StoredEnergyModel> Config::make_model() const {
  return std::make_shared<StoredEnergyModel>(p, a);
}

EnergyContext Config::make_context(bool with_loads) const {
  std::optional<LoadSpec> l;
  if (with_loads) l = loads;
  return EnergyContext(make_grid(), make_model(), box, magnetostatics, l);
}

namespace {

// Walks one JSON object, tracking the path for error messages and rejecting
// keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(child(key), "unknown key");
    }
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(child(key), "expected number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(child(key), "expected finite number");
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(child(key), "expected integer");
      out = v->get<int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(child(key), "expected boolean");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(child(key), "expected string");
      out = v->get<std::string>();
    }
  }

  void vec2(const std::string& key, Vec2& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError(child(key), "expected [x, y]");
      }
      out = Vec2((*v)[0].get<double>(), (*v)[1].get<double>());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Parse>
auto parse_enum(const std::string& path, const std::string& name, Parse parse) {
  try {
    return parse(name);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

LoadField parse_load(const json& j, const std::string& path) {
  LoadField f;
  Section s(j, path);
  std::string kind = LoadField::kind_name(f.kind);
  s.string("kind", kind);
  f.kind = parse_enum(s.child("kind"), kind, LoadField::parse_kind);
  s.vec2("value", f.value);
  s.vec2("center", f.center);
  s.number("width", f.width);
  s.number("amplitude", f.amplitude);
  if (!(f.width > 0.0)) throw ConfigError(s.child("width"), "must be positive");
  return f;
}

json load_to_json(const LoadField& f) {
  return {{"kind", LoadField::kind_name(f.kind)},
          {"value", {f.value(0), f.value(1)}},
          {"center", {f.center(0), f.center(1)}},
          {"width", f.width},
          {"amplitude", f.amplitude}};
}

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

}  // namespace

Config parse_config(const json& j) {
  Config c;
  Section root(j, "");
  if (const json* g = root.find("grid")) {
    Section s(*g, "grid");
    s.integer("n", c.grid_n);
    require(c.grid_n >= 3, "grid.n", "must be at least 3");
    std::string gamma = to_string(c.gamma);
    s.string("gamma", gamma);
    c.gamma = parse_enum("grid.gamma", gamma, parse_boundary_selector);
  }
  if (const json* m = root.find("model")) {
    Section s(*m, "model");
    s.number("p", c.p);
    s.number("a", c.a);
    require(c.p > 2.0, "model.p", "must exceed 2");
    require(c.a > 1.0, "model.a", "must exceed 1");
  }
  if (const json* m = root.find("magnetostatics")) {
    Section s(*m, "magnetostatics");
    s.number("mu0", c.magnetostatics.mu0);
    s.number("pad", c.box.pad);
    s.integer("N", c.box.cells);
    s.number("cg_tol", c.magnetostatics.cg_tol);
    s.integer("cg_max", c.magnetostatics.cg_max);
    std::string pre = c.magnetostatics.spectral_preconditioner ? "spectral" : "none";
    s.string("preconditioner", pre);
    require(pre == "spectral" || pre == "none", "magnetostatics.preconditioner",
            "expected 'spectral' or 'none'");
    c.magnetostatics.spectral_preconditioner = pre == "spectral";
    require(c.magnetostatics.mu0 >= 0.0, "magnetostatics.mu0", "must be non-negative");
    require(c.box.pad > 0.0, "magnetostatics.pad", "must be positive");
    require(c.box.cells >= 4, "magnetostatics.N", "must be at least 4");
    require(c.magnetostatics.cg_tol > 0.0, "magnetostatics.cg_tol", "must be positive");
    require(c.magnetostatics.cg_max > 0, "magnetostatics.cg_max", "must be positive");
  }
  if (const json* l = root.find("loads")) {
    Section s(*l, "loads");
    if (const json* f = s.find("f")) c.loads.f = parse_load(*f, "loads.f");
    if (const json* h = s.find("h")) c.loads.h = parse_load(*h, "loads.h");
  }
  if (const json* b = root.find("boundary")) {
    Section s(*b, "boundary");
    std::string w = BoundaryDatum::kind_name(c.boundary.kind);
    s.string("w", w);
    c.boundary.kind = parse_enum("boundary.w", w, BoundaryDatum::parse_kind);
    s.number("alpha", c.boundary.alpha);
  }
  if (const json* o = root.find("solver")) {
    Section s(*o, "solver");
    s.number("tol", c.solver.tol);
    s.integer("max_iter", c.solver.max_iter);
    s.integer("memory", c.solver.memory);
    require(c.solver.tol > 0.0, "solver.tol", "must be positive");
    require(c.solver.max_iter >= 0, "solver.max_iter", "must be non-negative");
    require(c.solver.memory >= 1, "solver.memory", "must be at least 1");
  }
  if (const json* w = root.find("sweep")) {
    Section s(*w, "sweep");
    s.number("eps_start", c.sweep.eps_start);
    s.number("eps_factor", c.sweep.eps_factor);
    s.integer("num_eps", c.sweep.num_eps);
    s.boolean("warm_start", c.sweep.warm_start);
    require(c.sweep.eps_start > 0.0, "sweep.eps_start", "must be positive");
    require(c.sweep.eps_factor > 0.0, "sweep.eps_factor", "must be positive");
    require(c.sweep.num_eps >= 1, "sweep.num_eps", "must be at least 1");
    require(c.sweep.eps_start * std::pow(c.sweep.eps_factor, c.sweep.num_eps - 1) > 0.0,
            "sweep.eps_factor", "smallest eps underflows to zero");
  }
  if (const json* r = root.find("rigidity")) {
    Section s(*r, "rigidity");
    s.integer("samples", c.rigidity.samples);
    s.number("amplitude", c.rigidity.amplitude);
    require(c.rigidity.samples >= 1, "rigidity.samples", "must be at least 1");
  }
  if (const json* k = root.find("check")) {
    Section s(*k, "check");
    s.integer("samples", c.check_samples);
    require(c.check_samples >= 1, "check.samples", "must be at least 1");
  }
  root.number("ciarlet_c", c.ciarlet_c);
  if (const json* seed = root.find("seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0)) {
      throw ConfigError("seed", "expected non-negative integer");
    }
    c.seed = seed->get<std::uint64_t>();
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const Config& c) {
  return {
      {"grid", {{"n", c.grid_n}, {"gamma", to_string(c.gamma)}}},
      {"model", {{"p", c.p}, {"a", c.a}}},
      {"magnetostatics",
       {{"mu0", c.magnetostatics.mu0},
        {"pad", c.box.pad},
        {"N", c.box.cells},
        {"cg_tol", c.magnetostatics.cg_tol},
        {"cg_max", c.magnetostatics.cg_max},
        {"preconditioner", c.magnetostatics.spectral_preconditioner ? "spectral" : "none"}}},
      {"loads", {{"f", load_to_json(c.loads.f)}, {"h", load_to_json(c.loads.h)}}},
      {"boundary", {{"w", BoundaryDatum::kind_name(c.boundary.kind)}, {"alpha", c.boundary.alpha}}},
      {"solver", {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}, {"memory", c.solver.memory}}},
      {"sweep",
       {{"eps_start", c.sweep.eps_start},
        {"eps_factor", c.sweep.eps_factor},
        {"num_eps", c.sweep.num_eps},
        {"warm_start", c.sweep.warm_start}}},
      {"rigidity", {{"samples", c.rigidity.samples}, {"amplitude", c.rigidity.amplitude}}},
      {"check", {{"samples", c.check_samples}}},
      {"ciarlet_c", c.ciarlet_c},
      {"seed", c.seed},
  };
}

}  // namespace magel
