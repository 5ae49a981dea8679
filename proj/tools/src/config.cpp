#include "coneflow/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace coneflow::cli {

using nlohmann::json;

namespace {

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

const json& require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  return j;
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  const double value = j.get<double>();
  if (!std::isfinite(value)) throw ConfigError(where, "must be finite");
  return value;
}

double positive(const json& j, const std::string& where) {
  const double value = get_number(j, where);
  if (!(value > 0.0)) throw ConfigError(where, "must be > 0");
  return value;
}

long get_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where, "expected an integer");
  return j.get<long>();
}

Eigen::VectorXd get_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where, "expected a non-empty array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = get_number(j[i], where + "[" + std::to_string(i) + "]");
  }
  return out;
}

double param(const json& params, const char* key, double fallback, const std::string& where) {
  const json* p = find(params, key);
  return p ? get_number(*p, join(where, key)) : fallback;
}

ManifoldConfig parse_manifold(const json& j) {
  require_object(j, "manifold");
  const json* kind = find(j, "kind");
  if (!kind || !kind->is_string()) throw ConfigError("manifold.kind", "expected a string");
  static const json kEmpty = json::object();
  const json* params = find(j, "params");
  if (params) require_object(*params, "manifold.params");
  const json& p = params ? *params : kEmpty;
  const std::string where = "manifold.params";

  const std::string name = kind->get<std::string>();
  ManifoldConfig cfg;
  if (name == "circle") {
    cfg = ManifoldConfig::circle(param(p, "rho", 1.0, where));
  } else if (name == "ellipse") {
    cfg = ManifoldConfig::ellipse(param(p, "a", 1.0, where), param(p, "b", 1.0, where));
  } else if (name == "torus") {
    cfg = ManifoldConfig::torus(param(p, "R", 2.0, where), param(p, "r", 0.5, where));
  } else if (name == "sphere") {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    if (const json* c = find(p, "center")) {
      const Eigen::VectorXd v = get_vector(*c, join(where, "center"));
      if (v.size() != 3) throw ConfigError(join(where, "center"), "expected 3 entries");
      center = v;
    }
    cfg = ManifoldConfig::sphere(param(p, "rho", 1.0, where), center);
  } else {
    throw ConfigError("manifold.kind", "unknown kind '" + name +
                                           "' (circle, ellipse, torus, sphere)");
  }
  if (const json* t = find(p, "tol_cone")) cfg.tol_cone = positive(*t, join(where, "tol_cone"));
  try {
    Manifold check(cfg);
  } catch (const Error& e) {
    throw ConfigError(where, e.what());
  }
  return cfg;
}

InitialState parse_initial(const json& j) {
  require_object(j, "initial");
  InitialState out;
  const json* amb = find(j, "ambient");
  const json* chart = find(j, "chart");
  if ((amb != nullptr) == (chart != nullptr)) {
    throw ConfigError("initial", "give exactly one of 'ambient' or 'chart'");
  }
  if (amb) {
    require_object(*amb, "initial.ambient");
    const json* x = find(*amb, "x");
    const json* v = find(*amb, "v");
    if (!x) throw ConfigError("initial.ambient.x", "missing");
    if (!v) throw ConfigError("initial.ambient.v", "missing");
    PhasePoint p{get_vector(*x, "initial.ambient.x"), get_vector(*v, "initial.ambient.v")};
    if (p.x.size() != p.v.size()) throw ConfigError("initial.ambient", "x and v differ in length");
    out.ambient = std::move(p);
  } else {
    require_object(*chart, "initial.chart");
    auto field = [&](const char* key) -> const json& {
      const json* f = find(*chart, key);
      if (!f) throw ConfigError(join("initial.chart", key), "missing");
      return *f;
    };
    ConeChartState c;
    c.t = get_number(field("t"), "initial.chart.t");
    c.u = get_vector(field("u"), "initial.chart.u");
    c.dt = get_number(field("dt"), "initial.chart.dt");
    c.du = get_vector(field("du"), "initial.chart.du");
    if (c.u.size() != c.du.size()) throw ConfigError("initial.chart", "u and du differ in length");
    out.chart = std::move(c);
  }
  return out;
}

void parse_integrator(const json& j, IntegratorSettings& s) {
  require_object(j, "integrator");
  if (const json* f = find(j, "rtol")) s.rtol = positive(*f, "integrator.rtol");
  if (const json* f = find(j, "atol")) s.atol = positive(*f, "integrator.atol");
  if (const json* f = find(j, "h_init")) {
    s.h_init = get_number(*f, "integrator.h_init");
    if (s.h_init < 0.0) throw ConfigError("integrator.h_init", "must be >= 0");
  }
  if (const json* f = find(j, "h_max")) {
    s.h_max = get_number(*f, "integrator.h_max");
    if (s.h_max < 0.0) throw ConfigError("integrator.h_max", "must be >= 0");
  }
  if (const json* f = find(j, "max_steps")) {
    s.max_steps = get_integer(*f, "integrator.max_steps");
    if (s.max_steps <= 0) throw ConfigError("integrator.max_steps", "must be > 0");
  }
  if (const json* f = find(j, "stepper")) {
    if (!f->is_string()) throw ConfigError("integrator.stepper", "expected a string");
    const std::string name = f->get<std::string>();
    if (name == "dopri5") {
      s.stepper = Stepper::DormandPrince54;
    } else if (name == "rk4") {
      s.stepper = Stepper::ClassicalRK4;
    } else {
      throw ConfigError("integrator.stepper", "expected 'dopri5' or 'rk4'");
    }
  }
}

}  // namespace

std::string_view to_string(BackendChoice b) {
  switch (b) {
    case BackendChoice::Direct: return "direct";
    case BackendChoice::Lift: return "lift";
    case BackendChoice::Both: return "both";
  }
  return "direct";
}

BackendChoice parse_backend(const std::string& name, const std::string& where) {
  if (name == "direct") return BackendChoice::Direct;
  if (name == "lift") return BackendChoice::Lift;
  if (name == "both") return BackendChoice::Both;
  throw ConfigError(where, "expected 'direct', 'lift' or 'both'");
}

RunConfig parse_config(const json& doc) {
  require_object(doc, "<root>");
  RunConfig cfg;
  const json* manifold = find(doc, "manifold");
  if (!manifold) throw ConfigError("manifold", "missing");
  cfg.manifold = parse_manifold(*manifold);

  if (const json* f = find(doc, "initial")) cfg.initial = parse_initial(*f);
  if (const json* f = find(doc, "span")) {
    if (!f->is_array() || f->size() != 2) throw ConfigError("span", "expected [s_a, s_b]");
    const Span span{get_number((*f)[0], "span[0]"), get_number((*f)[1], "span[1]")};
    if (!(span.a < span.b)) throw ConfigError("span", "need s_a < s_b");
    cfg.span = span;
  }
  if (const json* f = find(doc, "samples")) {
    const long n = get_integer(*f, "samples");
    if (n < 2) throw ConfigError("samples", "need at least 2");
    if (n > std::numeric_limits<int>::max()) throw ConfigError("samples", "too large");
    cfg.samples = static_cast<int>(n);
  }
  if (const json* f = find(doc, "backend")) {
    if (!f->is_string()) throw ConfigError("backend", "expected a string");
    cfg.backend = parse_backend(f->get<std::string>(), "backend");
  }
  if (const json* f = find(doc, "integrator")) parse_integrator(*f, cfg.integrator);
  if (const json* f = find(doc, "seed")) {
    if (!f->is_number_integer() || f->get<std::int64_t>() < 0) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    cfg.seed = f->get<std::uint64_t>();
    cfg.has_seed = true;
  }
  if (const json* f = find(doc, "count")) {
    const long n = get_integer(*f, "count");
    if (n < 1) throw ConfigError("count", "need at least 1");
    if (n > std::numeric_limits<int>::max()) throw ConfigError("count", "too large");
    cfg.count = static_cast<int>(n);
  }
  if (const json* f = find(doc, "thresholds")) {
    require_object(*f, "thresholds");
    if (const json* t = find(*f, "I")) cfg.thresholds.I = positive(*t, "thresholds.I");
    if (const json* t = find(*f, "I_vec")) cfg.thresholds.I_vec = positive(*t, "thresholds.I_vec");
    if (const json* t = find(*f, "disagreement")) {
      cfg.thresholds.disagreement = positive(*t, "thresholds.disagreement");
    }
  }
  if (const json* f = find(doc, "output")) {
    require_object(*f, "output");
    if (const json* fmt = find(*f, "format")) {
      if (!fmt->is_string()) throw ConfigError("output.format", "expected a string");
      cfg.output.format = fmt->get<std::string>();
      if (cfg.output.format != "csv" && cfg.output.format != "json") {
        throw ConfigError("output.format", "expected 'csv' or 'json'");
      }
    }
    if (const json* path = find(*f, "path")) {
      if (!path->is_string()) throw ConfigError("output.path", "expected a string");
      cfg.output.path = path->get<std::string>();
    }
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset to line/column for the diagnostic.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col),
                      "invalid JSON");
  }
  return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

PhasePoint initial_phase(const Manifold& m, const RunConfig& cfg) {
  if (!cfg.initial.present()) throw ConfigError("initial", "missing");
  PhasePoint p;
  try {
    if (cfg.initial.ambient) {
      p = *cfg.initial.ambient;
      if (p.x.size() != m.ambient_dim()) {
        throw ConfigError("initial.ambient", "expected " + std::to_string(m.ambient_dim()) +
                                                 " coordinates");
      }
    } else {
      const ConeChartState& c = *cfg.initial.chart;
      if (c.u.size() != m.n()) {
        throw ConfigError("initial.chart", "expected " + std::to_string(m.n()) +
                                               " chart coordinates");
      }
      p = to_ambient(m, c);
    }
    if (!(p.v.norm() > 0.0)) throw ConfigError("initial", "velocity is zero");
    m.validate(p);
  } catch (const Error& e) {
    throw ConfigError("initial", e.what());
  }
  return p;
}

}  // namespace coneflow::cli
