#include "fsi/config.hpp"

#include "fsi/io.hpp"

#include <json.hpp>

#include <functional>
#include <map>

namespace fsi {

using nlohmann::json;

namespace {

json vec2_json(const Vec2& v) { return json::array({v[0], v[1]}); }

Vec2 json_vec2(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected an array of 2 numbers");
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

std::vector<double> json_list(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected an array of numbers");
    std::vector<double> v;
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
}

double positive(const json& j) {
    double v = j.get<double>();
    if (!(v > 0)) throw std::invalid_argument("must be positive");
    return v;
}

double non_negative(const json& j) {
    double v = j.get<double>();
    if (!(v >= 0)) throw std::invalid_argument("must be non-negative");
    return v;
}

const std::vector<std::string> experiments = {"simulate",  "find-periodic", "sweep-frequency", "sweep-radius",
                                              "sweep-eta", "verify",        "symmetric-mode",  "report"};

std::string shape_name(const Shape& s) {
    switch (s.kind) {
    case Shape::Kind::ellipse: return "ellipse";
    case Shape::Kind::rectangle: return "rectangle";
    case Shape::Kind::polygon: return "polygon";
    }
    return "ellipse";
}

struct Field {
    std::function<void(ExperimentConfig&, const json&)> set;
    std::function<json(const ExperimentConfig&)> get;
};

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> f = {
        {"experiment",
         {[](ExperimentConfig& c, const json& j) {
              auto s = j.get<std::string>();
              if (std::find(experiments.begin(), experiments.end(), s) == experiments.end())
                  throw std::invalid_argument("unknown experiment kind '" + s + "'");
              c.experiment = s;
          },
          [](const ExperimentConfig& c) { return json(c.experiment); }}},
        {"deterministic",
         {[](ExperimentConfig& c, const json& j) { c.deterministic = j.get<bool>(); },
          [](const ExperimentConfig& c) { return json(c.deterministic); }}},
        {"physics.lambda",
         {[](ExperimentConfig& c, const json& j) { c.physics.lambda = positive(j); },
          [](const ExperimentConfig& c) { return json(c.physics.lambda); }}},
        {"physics.stiffness_A",
         {[](ExperimentConfig& c, const json& j) {
              if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3x3 nested array");
              for (int r = 0; r < 3; ++r) {
                  if (!j[r].is_array() || j[r].size() != 3) throw std::invalid_argument("expected a 3x3 nested array");
                  for (int k = 0; k < 3; ++k) c.physics.stiffness_A(r, k) = j[r][k].get<double>();
              }
          },
          [](const ExperimentConfig& c) {
              json a = json::array();
              for (int r = 0; r < 3; ++r)
                  a.push_back({c.physics.stiffness_A(r, 0), c.physics.stiffness_A(r, 1), c.physics.stiffness_A(r, 2)});
              return a;
          }}},
        {"physics.k",
         {[](ExperimentConfig& c, const json& j) { c.physics.k = positive(j); },
          [](const ExperimentConfig& c) { return json(c.physics.k); }}},
        {"physics.varpi",
         {[](ExperimentConfig& c, const json& j) { c.physics.varpi = positive(j); },
          [](const ExperimentConfig& c) { return json(c.physics.varpi); }}},
        {"physics.tau",
         {[](ExperimentConfig& c, const json& j) { c.physics.tau = positive(j); },
          [](const ExperimentConfig& c) { return json(c.physics.tau); }}},
        {"physics.alpha",
         {[](ExperimentConfig& c, const json& j) { c.physics.alpha = j.get<double>(); },
          [](const ExperimentConfig& c) { return json(c.physics.alpha); }}},
        {"physics.b_tilde",
         {[](ExperimentConfig& c, const json& j) { c.physics.b_tilde = json_vec2(j); },
          [](const ExperimentConfig& c) { return vec2_json(c.physics.b_tilde); }}},
        {"body.shape",
         {[](ExperimentConfig& c, const json& j) {
              auto s = j.get<std::string>();
              if (s == "ellipse" || s == "disk")
                  c.body.shape.kind = Shape::Kind::ellipse;
              else if (s == "rectangle")
                  c.body.shape.kind = Shape::Kind::rectangle;
              else if (s == "polygon")
                  c.body.shape.kind = Shape::Kind::polygon;
              else
                  throw std::invalid_argument("unknown shape '" + s + "'");
              if (s == "disk") c.body.shape.b = c.body.shape.a;  // re-applied after all keys
          },
          [](const ExperimentConfig& c) { return json(shape_name(c.body.shape)); }}},
        {"body.a",
         {[](ExperimentConfig& c, const json& j) { c.body.shape.a = positive(j); },
          [](const ExperimentConfig& c) { return json(c.body.shape.a); }}},
        {"body.b",
         {[](ExperimentConfig& c, const json& j) { c.body.shape.b = positive(j); },
          [](const ExperimentConfig& c) { return json(c.body.shape.b); }}},
        {"body.vertices",
         {[](ExperimentConfig& c, const json& j) {
              if (!j.is_array()) throw std::invalid_argument("expected an array of [x2, x3] pairs");
              c.body.shape.vertices.clear();
              for (const auto& v : j) c.body.shape.vertices.push_back(json_vec2(v));
          },
          [](const ExperimentConfig& c) {
              json a = json::array();
              for (const auto& v : c.body.shape.vertices) a.push_back(vec2_json(v));
              return a;
          }}},
        {"body.com_offset",
         {[](ExperimentConfig& c, const json& j) { c.body.com_offset = json_vec2(j); },
          [](const ExperimentConfig& c) { return vec2_json(c.body.com_offset); }}},
        {"body.R_star",
         {[](ExperimentConfig& c, const json& j) { c.body.R_star = positive(j); },
          [](const ExperimentConfig& c) { return json(c.body.R_star); }}},
        {"body.cutoff_margin",
         {[](ExperimentConfig& c, const json& j) { c.cutoff_margin = positive(j); },
          [](const ExperimentConfig& c) { return json(c.cutoff_margin); }}},
        {"forcing.period_T",
         {[](ExperimentConfig& c, const json& j) { c.forcing.period_T = positive(j); },
          [](const ExperimentConfig& c) { return json(c.forcing.period_T); }}},
        {"forcing.cos_coeffs",
         {[](ExperimentConfig& c, const json& j) {
              c.forcing.cos_coeffs = json_list(j);
              if (c.forcing.cos_coeffs.empty()) c.forcing.cos_coeffs = {0.0};
          },
          [](const ExperimentConfig& c) { return json(c.forcing.cos_coeffs); }}},
        {"forcing.sin_coeffs",
         {[](ExperimentConfig& c, const json& j) { c.forcing.sin_coeffs = json_list(j); },
          [](const ExperimentConfig& c) { return json(c.forcing.sin_coeffs); }}},
        {"forcing.normalize",
         {[](ExperimentConfig& c, const json& j) { c.normalize_forcing = j.get<bool>(); },
          [](const ExperimentConfig& c) { return json(c.normalize_forcing); }}},
        {"grid.R",
         {[](ExperimentConfig& c, const json& j) { c.grid_R = positive(j); },
          [](const ExperimentConfig& c) { return json(c.grid_R); }}},
        {"grid.n",
         {[](ExperimentConfig& c, const json& j) { c.grid_n = j.get<int>(); },
          [](const ExperimentConfig& c) { return json(c.grid_n); }}},
        {"grid.eta",
         {[](ExperimentConfig& c, const json& j) { c.eta = non_negative(j); },
          [](const ExperimentConfig& c) { return json(c.eta); }}},
        {"step.dt",
         {[](ExperimentConfig& c, const json& j) { c.step.dt = positive(j); },
          [](const ExperimentConfig& c) { return json(c.step.dt); }}},
        {"step.eps_pen",
         {[](ExperimentConfig& c, const json& j) { c.step.eps_pen = non_negative(j); },
          [](const ExperimentConfig& c) { return json(c.step.eps_pen); }}},
        {"step.n_subiter",
         {[](ExperimentConfig& c, const json& j) {
              c.step.n_subiter = j.get<int>();
              if (c.step.n_subiter < 1) throw std::invalid_argument("must be at least 1");
          },
          [](const ExperimentConfig& c) { return json(c.step.n_subiter); }}},
        {"step.cfl_max",
         {[](ExperimentConfig& c, const json& j) { c.step.cfl_max = positive(j); },
          [](const ExperimentConfig& c) { return json(c.step.cfl_max); }}},
        {"step.poisson_pc",
         {[](ExperimentConfig& c, const json& j) { c.step.poisson_pc = parse_preconditioner(j.get<std::string>()); },
          [](const ExperimentConfig& c) { return json(to_string(c.step.poisson_pc)); }}},
        {"step.poisson_tol",
         {[](ExperimentConfig& c, const json& j) { c.step.poisson_tol = positive(j); },
          [](const ExperimentConfig& c) { return json(c.step.poisson_tol); }}},
        {"step.diffusion_tol",
         {[](ExperimentConfig& c, const json& j) { c.step.diffusion_tol = positive(j); },
          [](const ExperimentConfig& c) { return json(c.step.diffusion_tol); }}},
        {"orbit.tol",
         {[](ExperimentConfig& c, const json& j) { c.orbit.tol = positive(j); },
          [](const ExperimentConfig& c) { return json(c.orbit.tol); }}},
        {"orbit.max_iters",
         {[](ExperimentConfig& c, const json& j) {
              c.orbit.max_iters = j.get<int>();
              if (c.orbit.max_iters < 1) throw std::invalid_argument("must be at least 1");
          },
          [](const ExperimentConfig& c) { return json(c.orbit.max_iters); }}},
        {"orbit.aitken",
         {[](ExperimentConfig& c, const json& j) { c.orbit.aitken = j.get<bool>(); },
          [](const ExperimentConfig& c) { return json(c.orbit.aitken); }}},
        {"orbit.n_phase",
         {[](ExperimentConfig& c, const json& j) {
              c.orbit.n_phase = j.get<int>();
              if (c.orbit.n_phase < 2) throw std::invalid_argument("must be at least 2");
          },
          [](const ExperimentConfig& c) { return json(c.orbit.n_phase); }}},
        {"orbit.divergence_limit",
         {[](ExperimentConfig& c, const json& j) { c.orbit.divergence_limit = positive(j); },
          [](const ExperimentConfig& c) { return json(c.orbit.divergence_limit); }}},
        {"run.t_end",
         {[](ExperimentConfig& c, const json& j) { c.run.t_end = non_negative(j); },
          [](const ExperimentConfig& c) { return json(c.run.t_end); }}},
        {"run.output_interval",
         {[](ExperimentConfig& c, const json& j) {
              c.run.output_interval = j.get<int>();
              if (c.run.output_interval < 1) throw std::invalid_argument("must be at least 1");
          },
          [](const ExperimentConfig& c) { return json(c.run.output_interval); }}},
        {"run.xi0",
         {[](ExperimentConfig& c, const json& j) { c.run.initial.xi = json_vec2(j); },
          [](const ExperimentConfig& c) { return vec2_json(c.run.initial.xi); }}},
        {"run.delta0",
         {[](ExperimentConfig& c, const json& j) { c.run.initial.delta = json_vec2(j); },
          [](const ExperimentConfig& c) { return vec2_json(c.run.initial.delta); }}},
        {"run.omega0",
         {[](ExperimentConfig& c, const json& j) { c.run.initial.omega = j.get<double>(); },
          [](const ExperimentConfig& c) { return json(c.run.initial.omega); }}},
        {"run.theta0",
         {[](ExperimentConfig& c, const json& j) { c.run.initial.theta = j.get<double>(); },
          [](const ExperimentConfig& c) { return json(c.run.initial.theta); }}},
        {"sweep.T_list",
         {[](ExperimentConfig& c, const json& j) { c.sweep.T_list = json_list(j); },
          [](const ExperimentConfig& c) { return json(c.sweep.T_list); }}},
        {"sweep.R_list",
         {[](ExperimentConfig& c, const json& j) { c.sweep.R_list = json_list(j); },
          [](const ExperimentConfig& c) { return json(c.sweep.R_list); }}},
        {"sweep.eta_list",
         {[](ExperimentConfig& c, const json& j) { c.sweep.eta_list = json_list(j); },
          [](const ExperimentConfig& c) { return json(c.sweep.eta_list); }}},
        {"sweep.vacuum_periods",
         {[](ExperimentConfig& c, const json& j) {
              c.sweep.vacuum_periods = j.get<int>();
              if (c.sweep.vacuum_periods < 1) throw std::invalid_argument("must be at least 1");
          },
          [](const ExperimentConfig& c) { return json(c.sweep.vacuum_periods); }}},
    };
    return f;
}

const char* required_keys[] = {"forcing.period_T"};

}  // namespace

CutoffProfile ExperimentConfig::cutoff() const {
    CutoffProfile c;
    c.R_star = body.R_star;
    c.margin = cutoff_margin;
    return c;
}

Forcing ExperimentConfig::effective_forcing() const {
    if (normalize_forcing && !forcing.is_zero()) return fsi::normalize_forcing(forcing);
    return forcing;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, f] : fields()) k.push_back(name);
        return k;
    }();
    return keys;
}

ExperimentConfig parse_config(const std::string& text, bool check_physics) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "config must be a flat key-value object");
    for (const char* k : required_keys)
        if (!doc.contains(k)) throw ConfigError(k, std::string("missing required key \"") + k + "\"");
    ExperimentConfig c;
    const auto& F = fields();
    bool disk = false;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        auto f = F.find(it.key());
        if (f == F.end()) throw ConfigError(it.key(), "unknown key \"" + it.key() + "\"");
        if (it.value().is_object()) throw ConfigError(it.key(), "key \"" + it.key() + "\": nested objects are not allowed");
        try {
            f->second.set(c, it.value());
        } catch (const std::exception& e) {
            throw ConfigError(it.key(), "key \"" + it.key() + "\": " + e.what());
        }
        if (it.key() == "body.shape" && it.value() == "disk") disk = true;
    }
    if (disk) c.body.shape.b = c.body.shape.a;
    if (c.body.shape.kind == Shape::Kind::polygon) {
        try {
            c.body.shape = Shape::polygon(c.body.shape.vertices);
        } catch (const std::exception& e) {
            throw ConfigError("body.vertices", std::string("key \"body.vertices\": ") + e.what());
        }
    }
    auto check = [](const char* key, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            throw ConfigError(key, std::string("key \"") + key + "\": " + e.what());
        }
    };
    if (check_physics) check("physics", [&] { c.physics.validate_planar(); });
    check("body", [&] { c.body.validate(); });
    check("body.cutoff_margin", [&] { c.cutoff().validate(); });
    check("step", [&] { c.step.validate(); });
    check("grid.n", [&] { (void)c.grid(); });
    return c;
}

ExperimentConfig load_config(const std::string& path, bool check_physics) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError("", e.what());
    }
    return parse_config(text, check_physics);
}

void apply_override(std::string& text, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must be key=value");
    std::string key = assignment.substr(0, eq), val = assignment.substr(eq + 1);
    json doc;
    try {
        doc = text.empty() ? json::object() : json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
    }
    if (!fields().count(key)) throw ConfigError(key, "unknown key \"" + key + "\"");
    json v;
    try {
        v = json::parse(val);
    } catch (const json::parse_error&) {
        v = val;
    }
    doc[key] = v;
    text = doc.dump();
}

ExperimentConfig config_with_overrides(const std::string& text, const std::vector<std::string>& overrides,
                                       bool check_physics) {
    std::string t = text;
    for (const auto& o : overrides) apply_override(t, o);
    return parse_config(t, check_physics);
}

std::string resolved_config_text(const ExperimentConfig& c) {
    json doc = json::object();
    for (const auto& [name, f] : fields()) doc[name] = f.get(c);
    return doc.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a(resolved_config_text(c))); }

}  // namespace fsi
