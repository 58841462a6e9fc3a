#include "cutsteer/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cutsteer/cut_sampling.hpp"
#include "cutsteer/error.hpp"

namespace cutsteer::scenario {

namespace fs = std::filesystem;
using dyn::Vec3;
using dyn::Vec6;
using scvx::AxisSelector;
using scvx::MomentConstraint;
using scvx::MomentKind;

namespace {

constexpr double kPi = 3.14159265358979323846;

// --- strict reader -----------------------------------------------------------

struct Units {
  double length_km = 1.0;
  double time_s = 1.0;
  double period = 0.0;  // reference orbit period, nondimensional
  double speed() const { return length_km / time_s; }
};

enum class Dim { length, speed, time };

class Reader {
 public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& what) { issues.push_back(path + ": " + what); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) fail(path + "." + it.key(), "unknown key");
    }
  }

  const json* field(const json& j, const std::string& path, const char* key, bool required = true) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path + "." + key, "missing required field");
      return nullptr;
    }
    return &*it;
  }

  double number(const json* j, const std::string& path, double fallback = 0.0) {
    if (!j) return fallback;
    if (!j->is_number()) {
      fail(path, "expected a number");
      return fallback;
    }
    const double v = j->get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
  }

  long long integer(const json* j, const std::string& path, long long fallback = 0) {
    if (!j) return fallback;
    if (!j->is_number_integer()) {
      fail(path, "expected an integer");
      return fallback;
    }
    return j->get<long long>();
  }

  std::string text(const json* j, const std::string& path, const std::string& fallback = {}) {
    if (!j) return fallback;
    if (!j->is_string()) {
      fail(path, "expected a string");
      return fallback;
    }
    return j->get<std::string>();
  }

  std::vector<double> numbers(const json& j, const std::string& path, std::size_t n) {
    std::vector<double> out(n, 0.0);
    if (!j.is_array() || j.size() != n) {
      fail(path, "expected an array of " + std::to_string(n) + " numbers");
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = number(&j[i], path + "[" + std::to_string(i) + "]");
    return out;
  }

  // Unit object with exactly one key, for example {"km": 50}. Returns the
  // scale to nondimensional units and the raw payload.
  const json* unit(const json* j, const std::string& path, Dim dim, const Units& u, double& scale) {
    scale = 1.0;
    if (!j) return nullptr;
    if (!j->is_object() || j->size() != 1) {
      fail(path, "expected a unit object with exactly one key");
      return nullptr;
    }
    const std::string key = j->begin().key();
    static const std::map<std::string, std::pair<Dim, double>> km{{"km", {Dim::length, 1.0}},
                                                                  {"m", {Dim::length, 1e-3}},
                                                                  {"km_s", {Dim::speed, 1.0}},
                                                                  {"m_s", {Dim::speed, 1e-3}},
                                                                  {"s", {Dim::time, 1.0}},
                                                                  {"hours", {Dim::time, 3600.0}},
                                                                  {"days", {Dim::time, 86400.0}}};
    if (key == "nd") return &j->begin().value();
    if (key == "periods" && dim == Dim::time) {
      if (!(u.period > 0.0)) fail(path + ".periods", "needs a reference orbit");
      scale = u.period;
      return &j->begin().value();
    }
    auto it = km.find(key);
    if (it == km.end() || it->second.first != dim) {
      fail(path + "." + key, "unit not allowed here");
      return nullptr;
    }
    const double per = dim == Dim::length ? u.length_km : dim == Dim::speed ? u.speed() : u.time_s;
    scale = it->second.second / per;
    return &j->begin().value();
  }

  double quantity(const json* j, const std::string& path, Dim dim, const Units& u, double fallback = 0.0) {
    double scale = 1.0;
    const json* v = unit(j, path, dim, u, scale);
    if (!v) return fallback;
    return number(v, path) * scale;
  }

  Vec3 vector3(const json* j, const std::string& path, Dim dim, const Units& u) {
    double scale = 1.0;
    const json* v = unit(j, path, dim, u, scale);
    Vec3 out = Vec3::Zero();
    if (!v) return out;
    const auto n = numbers(*v, path, 3);
    for (int i = 0; i < 3; ++i) out(i) = n[i] * scale;
    return out;
  }

  // {"position": {...}, "velocity": {...}} or {"nd": [6 numbers]}
  Vec6 state(const json& j, const std::string& path, const Units& u) {
    Vec6 x = Vec6::Zero();
    if (!object(j, path)) return x;
    if (j.contains("nd")) {
      keys(j, path, {"nd"});
      const auto n = numbers(j["nd"], path + ".nd", 6);
      for (int i = 0; i < 6; ++i) x(i) = n[i];
      return x;
    }
    keys(j, path, {"position", "velocity"});
    x.head<3>() = vector3(field(j, path, "position"), path + ".position", Dim::length, u);
    x.tail<3>() = vector3(field(j, path, "velocity"), path + ".velocity", Dim::speed, u);
    return x;
  }
};

int node_index(Reader& r, const json* j, const std::string& path, int nodes) {
  if (!j) return nodes - 1;
  if (j->is_string()) {
    const std::string s = j->get<std::string>();
    if (s == "final") return nodes - 1;
    if (s == "initial") return 0;
    if (s == "all") return scvx::kAllNodes;
    r.fail(path, "expected \"final\", \"initial\", \"all\" or an index");
    return nodes - 1;
  }
  const long long k = r.integer(j, path, nodes - 1);
  if (k < 0 || k >= nodes) r.fail(path, "node index outside the grid");
  return static_cast<int>(k);
}

AxisSelector axes_of(Reader& r, const json* j, const std::string& path, AxisSelector fallback) {
  if (!j) return fallback;
  const std::string s = r.text(j, path);
  if (s == "position") return AxisSelector::position;
  if (s == "velocity") return AxisSelector::velocity;
  if (s == "full") return AxisSelector::full;
  r.fail(path, "expected position, velocity or full");
  return fallback;
}

template <typename E>
E choice(Reader& r, const json* j, const std::string& path, const std::vector<std::pair<const char*, E>>& options,
         E fallback) {
  if (!j) return fallback;
  const std::string s = r.text(j, path);
  for (const auto& [name, value] : options)
    if (s == name) return value;
  std::string list;
  for (const auto& o : options) list += std::string(list.empty() ? "" : ", ") + o.first;
  r.fail(path, "expected one of: " + list);
  return fallback;
}

void apply_overrides(Reader& r, const json& j, const std::string& path, scvx::ScvxParams& p) {
  if (!r.object(j, path)) return;
  const std::map<std::string, double*> reals{
      {"eps_opt", &p.eps_opt},       {"eps_feas", &p.eps_feas},     {"eta0", &p.eta0},
      {"eta1", &p.eta1},             {"eta2", &p.eta2},             {"alpha1", &p.alpha1},
      {"alpha2", &p.alpha2},         {"beta", &p.beta},             {"gamma", &p.gamma},
      {"delta_init", &p.delta_init}, {"delta_min", &p.delta_min},   {"delta_max", &p.delta_max},
      {"w_init", &p.w_init},         {"w_max", &p.w_max}};
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string where = path + "." + it.key();
    if (it.key() == "max_iterations") {
      p.max_iterations = static_cast<int>(r.integer(&it.value(), where, p.max_iterations));
    } else if (auto f = reals.find(it.key()); f != reals.end()) {
      *f->second = r.number(&it.value(), where, *f->second);
    } else {
      r.fail(where, "unknown key");
    }
  }
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
  Reader r;
  ScenarioConfig cfg;
  cfg.effective = doc;
  if (!r.object(doc, "$")) throw Error(ErrorCode::schema, "config must be a JSON object", "$");
  r.keys(doc, "$",
         {"name", "desk", "model", "halo", "initial", "grid", "cut_order", "objective", "constraints", "slack", "guess",
          "warm_start", "scvx", "monte_carlo"});
  cfg.name = r.text(r.field(doc, "$", "name"), "$.name");
  if (const json* d = r.field(doc, "$", "desk", false)) {
    if (!d->is_boolean()) r.fail("$.desk", "expected a boolean");
    else cfg.fast = d->get<bool>();
  }

  // model and units
  Units u;
  auto& prob = cfg.problem;
  if (const json* m = r.field(doc, "$", "model"); m && r.object(*m, "$.model")) {
    const std::string kind = r.text(r.field(*m, "$.model", "kind"), "$.model.kind");
    if (kind == "two_body") {
      r.keys(*m, "$.model", {"kind", "mu", "length_unit"});
      double mu = 0.0, len = 0.0;
      if (const json* q = r.field(*m, "$.model", "mu"); q) {
        if (!q->is_object() || q->size() != 1 || !q->contains("km3_s2")) r.fail("$.model.mu", "expected {\"km3_s2\": value}");
        else mu = r.number(&(*q)["km3_s2"], "$.model.mu.km3_s2");
      }
      if (const json* q = r.field(*m, "$.model", "length_unit"); q) {
        if (!q->is_object() || q->size() != 1 || !q->contains("km")) r.fail("$.model.length_unit", "expected {\"km\": value}");
        else len = r.number(&(*q)["km"], "$.model.length_unit.km");
      }
      if (mu > 0.0 && len > 0.0) {
        prob.model = dyn::DynamicsModel::two_body(mu, len);
      } else {
        r.fail("$.model", "mu and length unit must be positive");
      }
    } else if (kind == "cr3bp") {
      r.keys(*m, "$.model", {"kind", "mass_ratio", "length_unit", "time_unit"});
      const double ratio = r.number(r.field(*m, "$.model", "mass_ratio"), "$.model.mass_ratio");
      double len = 0.0, t = 0.0;
      if (const json* q = r.field(*m, "$.model", "length_unit"); q) {
        if (!q->is_object() || q->size() != 1 || !q->contains("km")) r.fail("$.model.length_unit", "expected {\"km\": value}");
        else len = r.number(&(*q)["km"], "$.model.length_unit.km");
      }
      if (const json* q = r.field(*m, "$.model", "time_unit"); q) {
        if (!q->is_object() || q->size() != 1 || !q->contains("s")) r.fail("$.model.time_unit", "expected {\"s\": value}");
        else t = r.number(&(*q)["s"], "$.model.time_unit.s");
      }
      if (ratio > 0.0 && ratio < 0.5 && len > 0.0 && t > 0.0) {
        prob.model = dyn::DynamicsModel::cr3bp(ratio, len, t);
      } else {
        r.fail("$.model", "mass ratio must lie in (0, 0.5) and units must be positive");
      }
    } else if (kind == "free_space") {
      r.keys(*m, "$.model", {"kind"});
      prob.model = dyn::DynamicsModel::free_space();
    } else if (!kind.empty()) {
      r.fail("$.model.kind", "expected two_body, cr3bp or free_space");
    }
  }
  u.length_km = prob.model.length_unit_km;
  u.time_s = prob.model.time_unit_s;
  if (!r.issues.empty()) {
    std::string all;
    for (const auto& s : r.issues) all += (all.empty() ? "" : "; ") + s;
    throw Error(ErrorCode::schema, "invalid config", all);
  }

  // reference halo orbit
  std::optional<Vec6> halo_state;
  if (const json* h = r.field(doc, "$", "halo", false); h && r.object(*h, "$.halo")) {
    r.keys(*h, "$.halo", {"guess", "period_guess"});
    Vec6 guess = Vec6::Zero();
    if (const json* g = r.field(*h, "$.halo", "guess")) guess = r.state(*g, "$.halo.guess", u);
    const double period = r.quantity(r.field(*h, "$.halo", "period_guess"), "$.halo.period_guess", Dim::time, u);
    if (prob.model.kind != dyn::DynamicsModel::Kind::cr3bp) r.fail("$.halo", "needs a cr3bp model");
    if (r.issues.empty()) {
      const dyn::PeriodicOrbit orbit = dyn::correct_halo(prob.model, guess, period);
      halo_state = orbit.state;
      cfg.halo_period = orbit.period;
      u.period = cfg.halo_period;
    }
  }

  // initial distribution
  if (const json* in = r.field(doc, "$", "initial"); in && r.object(*in, "$.initial")) {
    r.keys(*in, "$.initial", {"mean", "three_sigma", "lead_in"});
    if (const json* m = r.field(*in, "$.initial", "mean")) {
      if (m->is_string()) {
        if (m->get<std::string>() != "halo") r.fail("$.initial.mean", "expected a state or \"halo\"");
        else if (!halo_state) r.fail("$.initial.mean", "\"halo\" needs a halo section");
        else prob.initial.mean = *halo_state;
      } else {
        prob.initial.mean = r.state(*m, "$.initial.mean", u);
      }
    }
    if (const json* s = r.field(*in, "$.initial", "three_sigma"); s && r.object(*s, "$.initial.three_sigma")) {
      r.keys(*s, "$.initial.three_sigma", {"position", "velocity"});
      const double sp = r.quantity(r.field(*s, "$.initial.three_sigma", "position"), "$.initial.three_sigma.position",
                                   Dim::length, u) / 3.0;
      const double sv = r.quantity(r.field(*s, "$.initial.three_sigma", "velocity"), "$.initial.three_sigma.velocity",
                                   Dim::speed, u) / 3.0;
      if (!(sp > 0.0 && sv > 0.0)) r.fail("$.initial.three_sigma", "must be positive");
      prob.initial.covariance.setZero();
      for (int i = 0; i < 3; ++i) {
        prob.initial.covariance(i, i) = sp * sp;
        prob.initial.covariance(i + 3, i + 3) = sv * sv;
      }
    }
    prob.initial.lead_in = r.quantity(r.field(*in, "$.initial", "lead_in", false), "$.initial.lead_in", Dim::time, u);
  }

  // grid
  int nodes = 2;
  if (const json* g = r.field(doc, "$", "grid"); g && r.object(*g, "$.grid")) {
    r.keys(*g, "$.grid", {"nodes", "duration"});
    nodes = static_cast<int>(r.integer(r.field(*g, "$.grid", "nodes"), "$.grid.nodes", 2));
    const double duration = r.quantity(r.field(*g, "$.grid", "duration"), "$.grid.duration", Dim::time, u);
    if (nodes < 2) r.fail("$.grid.nodes", "need at least two nodes");
    if (!(duration > 0.0)) r.fail("$.grid.duration", "must be positive");
    if (nodes >= 2 && duration > 0.0) prob.grid = dyn::NodeGrid::uniform(0.0, duration, nodes);
  }

  prob.cut_order = static_cast<int>(r.integer(r.field(doc, "$", "cut_order"), "$.cut_order", 4));
  if (prob.cut_order != 4 && prob.cut_order != 6) r.fail("$.cut_order", "expected 4 or 6");
  prob.objective = choice<scvx::ObjectiveKind>(r, r.field(doc, "$", "objective"), "$.objective",
                                               {{"dv99_ub", scvx::ObjectiveKind::dv99_ub},
                                                {"expected_fuel", scvx::ObjectiveKind::expected_fuel}},
                                               scvx::ObjectiveKind::dv99_ub);
  prob.slack = choice<scvx::SlackPlacement>(r, r.field(doc, "$", "slack"), "$.slack",
                                            {{"final_segment", scvx::SlackPlacement::final_segment},
                                             {"all_segments", scvx::SlackPlacement::all_segments},
                                             {"none", scvx::SlackPlacement::none}},
                                            scvx::SlackPlacement::final_segment);
  prob.guess = choice<scvx::GuessKind>(r, r.field(doc, "$", "guess"), "$.guess",
                                       {{"ballistic", scvx::GuessKind::ballistic},
                                        {"element_interpolation", scvx::GuessKind::element_interpolation}},
                                       scvx::GuessKind::ballistic);

  // constraints
  if (const json* cs = r.field(doc, "$", "constraints")) {
    if (!cs->is_array()) r.fail("$.constraints", "expected an array");
    for (std::size_t c = 0; cs->is_array() && c < cs->size(); ++c) {
      const std::string path = "$.constraints[" + std::to_string(c) + "]";
      const json& j = (*cs)[c];
      if (!r.object(j, path)) continue;
      MomentConstraint mc;
      const std::string kind = r.text(r.field(j, path, "kind"), path + ".kind");
      mc.node = node_index(r, r.field(j, path, "node", false), path + ".node", nodes);
      if (kind == "mean_eq") {
        r.keys(j, path, {"kind", "node", "axes", "target"});
        mc.kind = MomentKind::mean_eq;
        mc.axes = axes_of(r, r.field(j, path, "axes", false), path + ".axes", AxisSelector::full);
        if (const json* t = r.field(j, path, "target")) {
          Vec6 target = Vec6::Zero();
          if (t->is_string()) {
            if (t->get<std::string>() != "initial_mean") r.fail(path + ".target", "expected a state or \"initial_mean\"");
            target = prob.initial.mean;
          } else {
            target = r.state(*t, path + ".target", u);
          }
          mc.target = target;
        }
      } else if (kind == "sqrt_cov_norm_le") {
        r.keys(j, path, {"kind", "node", "axes", "three_sigma"});
        mc.kind = MomentKind::sqrt_cov_norm_le;
        mc.axes = axes_of(r, r.field(j, path, "axes", false), path + ".axes", AxisSelector::position);
        const Dim dim = mc.axes == AxisSelector::velocity ? Dim::speed : Dim::length;
        if (mc.axes == AxisSelector::full) r.fail(path + ".axes", "mixed units are not supported here");
        mc.bound = r.quantity(r.field(j, path, "three_sigma"), path + ".three_sigma", dim, u) / 3.0;
      } else if (kind == "standardized_moment_box") {
        r.keys(j, path, {"kind", "node", "axes", "order", "center", "half_width"});
        mc.kind = MomentKind::standardized_moment_box;
        mc.axes = axes_of(r, r.field(j, path, "axes", false), path + ".axes", AxisSelector::position);
        mc.order = static_cast<int>(r.integer(r.field(j, path, "order"), path + ".order", 3));
        mc.center = r.number(r.field(j, path, "center"), path + ".center");
        mc.bound = r.number(r.field(j, path, "half_width"), path + ".half_width");
        if (mc.node == scvx::kAllNodes) r.fail(path + ".node", "moment boxes apply to a single node");
      } else {
        r.fail(path + ".kind", "expected mean_eq, sqrt_cov_norm_le or standardized_moment_box");
        continue;
      }
      prob.constraints.push_back(mc);
    }
  }
  for (const auto& c : prob.constraints)
    if (c.kind == MomentKind::mean_eq && c.node == nodes - 1) prob.guess_target = c.target;

  // solver parameters
  cfg.params = scvx::ScvxParams::two_body();
  if (const json* s = r.field(doc, "$", "scvx"); s && r.object(*s, "$.scvx")) {
    r.keys(*s, "$.scvx", {"preset", "overrides"});
    const std::string p = r.text(r.field(*s, "$.scvx", "preset"), "$.scvx.preset");
    if (p == "two_body") cfg.params = scvx::ScvxParams::two_body();
    else if (p == "cr3bp") cfg.params = scvx::ScvxParams::cr3bp();
    else r.fail("$.scvx.preset", "expected two_body or cr3bp");
    if (const json* o = r.field(*s, "$.scvx", "overrides", false)) apply_overrides(r, *o, "$.scvx.overrides", cfg.params);
  }

  if (const json* w = r.field(doc, "$", "warm_start", false)) {
    const std::string name = r.text(w, "$.warm_start");
    bool known = false;
    for (const auto& n : preset_names()) known = known || n == name;
    if (!known) r.fail("$.warm_start", "unknown preset '" + name + "'");
    cfg.warm_start = name;
  }

  if (const json* m = r.field(doc, "$", "monte_carlo", false); m && r.object(*m, "$.monte_carlo")) {
    r.keys(*m, "$.monte_carlo", {"samples", "seed"});
    cfg.samples = static_cast<int>(r.integer(r.field(*m, "$.monte_carlo", "samples"), "$.monte_carlo.samples", cfg.samples));
    const long long seed = r.integer(r.field(*m, "$.monte_carlo", "seed"), "$.monte_carlo.seed", 1);
    if (cfg.samples < 2) r.fail("$.monte_carlo.samples", "need at least two samples");
    if (seed < 0) r.fail("$.monte_carlo.seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }

  if (r.issues.empty()) {
    try {
      prob.validate();
      cfg.params.validate();
    } catch (const Error& e) {
      r.fail("$", e.what() + (e.context().empty() ? std::string() : " (" + e.context() + ")"));
    }
  }
  if (!r.issues.empty()) {
    std::string all;
    for (const auto& s : r.issues) all += (all.empty() ? "" : "; ") + s;
    throw Error(ErrorCode::schema, std::to_string(r.issues.size()) + " schema error(s)", all);
  }
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config", path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, "config is not valid JSON", e.what());
  }
  return parse_config(doc);
}

// --- presets -----------------------------------------------------------------

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"twobody_unskew", "halo_cut4", "halo_cut6_skew", "halo_cut6_skew_kurt"};
  return names;
}

json preset_json(const std::string& name, bool fast) {
  const int samples = fast ? mc::kFastSamples : mc::kDefaultSamples;
  if (name == "twobody_unskew") {
    return json{
        {"name", name},
        {"desk", fast},
        {"model", {{"kind", "two_body"}, {"mu", {{"km3_s2", 398600.0}}}, {"length_unit", {{"km", 5000.0}}}}},
        {"initial",
         {{"mean", {{"position", {{"km", {8000.0, 0.0, 0.0}}}}, {"velocity", {{"km_s", {0.0, 6.1130, 3.5293}}}}}},
          {"three_sigma", {{"position", {{"km", 50.0}}}, {"velocity", {{"km_s", 0.01}}}}},
          {"lead_in", {{"hours", 1.9781}}}}},
        {"grid", {{"nodes", fast ? 5 : 9}, {"duration", {{"hours", 1.9781}}}}},
        {"cut_order", 4},
        {"objective", "dv99_ub"},
        {"constraints",
         {{{"kind", "mean_eq"},
           {"node", "final"},
           {"target", {{"position", {{"km", {9000.0, 0.0, 0.0}}}}, {"velocity", {{"km_s", {0.0, 3.327, 5.763}}}}}}},
          {{"kind", "standardized_moment_box"},
           {"node", "final"},
           {"axes", "position"},
           {"order", 3},
           {"center", 0.0},
           {"half_width", 0.01}}}},
        {"slack", "final_segment"},
        {"guess", "element_interpolation"},
        {"scvx", {{"preset", "two_body"}}},
        {"monte_carlo", {{"samples", samples}, {"seed", 1}}}};
  }
  const bool cut6 = name == "halo_cut6_skew" || name == "halo_cut6_skew_kurt";
  if (name != "halo_cut4" && !cut6) throw Error(ErrorCode::unknown_preset, "unknown preset", name);
  json constraints = json::array();
  constraints.push_back({{"kind", "mean_eq"}, {"node", "final"}, {"target", "initial_mean"}});
  constraints.push_back(
      {{"kind", "sqrt_cov_norm_le"}, {"node", "all"}, {"axes", "position"}, {"three_sigma", {{"km", 2000.0}}}});
  if (cut6)
    constraints.push_back({{"kind", "standardized_moment_box"},
                           {"node", "final"},
                           {"axes", "position"},
                           {"order", 3},
                           {"center", 0.0},
                           {"half_width", 0.01}});
  if (name == "halo_cut6_skew_kurt")
    constraints.push_back({{"kind", "standardized_moment_box"},
                           {"node", "final"},
                           {"axes", "position"},
                           {"order", 4},
                           {"center", 3.0},
                           {"half_width", 0.5}});
  json doc{
      {"name", name},
      {"desk", fast},
      {"model",
       {{"kind", "cr3bp"},
        {"mass_ratio", 0.01215058560962404},
        {"length_unit", {{"km", 384400.0}}},
        {"time_unit", {{"s", 375190.25852}}}}},
      {"halo", {{"guess", {{"nd", {1.16, 0.0, -0.1247, 0.0, -0.2087, 0.0}}}}, {"period_guess", {{"nd", 3.2690}}}}},
      {"initial", {{"mean", "halo"}, {"three_sigma", {{"position", {{"km", 30.0}}}, {"velocity", {{"m_s", 3.0}}}}}}},
      {"grid", {{"nodes", fast ? 10 : 19}, {"duration", {{"periods", 2.0}}}}},
      {"cut_order", cut6 ? 6 : 4},
      {"objective", "dv99_ub"},
      {"constraints", constraints},
      {"slack", cut6 ? "none" : "all_segments"},
      {"guess", "ballistic"},
      {"scvx", {{"preset", "cr3bp"}}},
      {"monte_carlo", {{"samples", samples}, {"seed", 1}}}};
  if (cut6) doc["warm_start"] = "halo_cut4";
  return doc;
}

ScenarioConfig preset(const std::string& name, bool fast) { return parse_config(preset_json(name, fast)); }

Command parse_command(const std::string& name) {
  if (name == "solve") return Command::solve;
  if (name == "validate") return Command::validate;
  if (name == "report") return Command::report;
  throw Error(ErrorCode::invalid_argument, "unknown command", name);
}

// --- artifacts ---------------------------------------------------------------

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vec(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(std::isfinite(v(i)) ? json(v(i)) : json(nullptr));
  return a;
}

Eigen::VectorXd read_vec(const json& a, Eigen::Index n, const std::string& what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != n)
    throw Error(ErrorCode::schema, "policy file: malformed array", what);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = a[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : a[i].get<double>();
  return v;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write file", path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed", path.string());
}

json read_json(const fs::path& path, ErrorCode missing) {
  std::ifstream in(path);
  if (!in) throw Error(missing, "required file not found", path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, "file is not valid JSON", path.string() + ": " + e.what());
  }
}

// Scale per state axis from nondimensional to km and km/s.
Vec6 state_scale(const dyn::DynamicsModel& m) {
  Vec6 s;
  s << Vec3::Constant(m.length_unit_km), Vec3::Constant(m.velocity_unit_km_s());
  return s;
}

const char* kAxisNames[6] = {"x", "y", "z", "vx", "vy", "vz"};

json without_sampling(json cfg) {
  cfg.erase("monte_carlo");
  return cfg;
}

}  // namespace

json policy_to_json(const ScenarioConfig& config, const scvx::ConvergedPolicy& result) {
  const auto& m = config.problem.model;
  json nodes = json::array();
  for (int k = 0; k < config.problem.nodes(); ++k) {
    json n{{"node", k},
           {"epoch_nd", config.problem.grid.epochs[k]},
           {"cut_mean_nd", vec(result.cut_means[k])},
           {"cut_three_sigma_nd", vec(result.moments[k].three_sigma)},
           {"cut_skewness", vec(result.moments[k].skewness)},
           {"cut_kurtosis", vec(result.moments[k].kurtosis)}};
    if (k < result.policy.segments()) {
      n["feedforward_nd"] = vec(result.policy.feedforward[k]);
      json g = json::array();
      for (int r = 0; r < 3; ++r) g.push_back(vec(result.policy.gain[k].row(r).transpose()));
      n["gain_nd"] = g;
    }
    nodes.push_back(n);
  }
  return json{{"format", "cutsteer-policy"},
              {"version", 1},
              {"scenario", config.name},
              {"config", config.effective},
              {"units", {{"length_km", m.length_unit_km}, {"time_s", m.time_unit_s}, {"velocity_km_s", m.velocity_unit_km_s()}}},
              {"converged", result.converged},
              {"iterations", result.iterations},
              {"merit", result.merit},
              {"chi", result.chi},
              {"dv99_ub_nd", result.dv99_ub},
              {"expected_fuel_nd", result.expected_fuel},
              {"dv99_ub_km_s", result.dv99_ub * m.velocity_unit_km_s()},
              {"expected_fuel_km_s", result.expected_fuel * m.velocity_unit_km_s()},
              {"nodes", nodes}};
}

StoredPolicy policy_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "cutsteer-policy")
    throw Error(ErrorCode::schema, "not a policy file");
  StoredPolicy p;
  try {
    p.converged = doc.at("converged").get<bool>();
    p.iterations = doc.at("iterations").get<int>();
    p.dv99_ub = doc.at("dv99_ub_nd").get<double>();
    p.expected_fuel = doc.at("expected_fuel_nd").get<double>();
    const json& nodes = doc.at("nodes");
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const json& n = nodes[k];
      const std::string where = "nodes[" + std::to_string(k) + "]";
      p.cut_means.push_back(read_vec(n.at("cut_mean_nd"), 6, where));
      scvx::NodeMoments mo;
      mo.mean = p.cut_means.back();
      mo.three_sigma = read_vec(n.at("cut_three_sigma_nd"), 6, where);
      mo.skewness = read_vec(n.at("cut_skewness"), 6, where);
      mo.kurtosis = read_vec(n.at("cut_kurtosis"), 6, where);
      p.moments.push_back(mo);
      if (n.contains("feedforward_nd")) {
        p.policy.feedforward.push_back(read_vec(n["feedforward_nd"], 3, where));
        dyn::Mat36 g;
        const json& rows = n.at("gain_nd");
        if (!rows.is_array() || rows.size() != 3) throw Error(ErrorCode::schema, "policy file: malformed gain", where);
        for (int r = 0; r < 3; ++r) g.row(r) = read_vec(rows[r], 6, where).transpose();
        p.policy.gain.push_back(g);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::schema, "policy file: missing or mistyped field", e.what());
  }
  if (p.policy.segments() + 1 != static_cast<int>(p.cut_means.size()))
    throw Error(ErrorCode::schema, "policy file: every node but the last needs a control");
  return p;
}

namespace {

scvx::Reference initial_reference_for(const ScenarioConfig& cfg, const RunOptions& opt) {
  if (!cfg.warm_start) return scvx::initial_reference(cfg.problem).reference;
  // The warm start comes from the named preset's solution, solved here when
  // the output directory does not already hold a matching one.
  const ScenarioConfig warm = preset(*cfg.warm_start, cfg.fast);
  const fs::path dir = opt.out / "warm_start";
  const fs::path file = dir / "policy.json";
  json doc;
  bool reuse = false;
  if (fs::exists(file)) {
    doc = read_json(file, ErrorCode::missing_policy);
    reuse = doc.contains("config") && without_sampling(doc["config"]) == without_sampling(warm.effective);
  }
  if (!reuse) {
    RunOptions inner;
    inner.out = dir;
    inner.on_iteration = opt.on_iteration;
    run(Command::solve, warm, inner);
    doc = read_json(file, ErrorCode::missing_policy);
  }
  const StoredPolicy stored = policy_from_json(doc);
  if (stored.policy.segments() != cfg.problem.segments())
    throw Error(ErrorCode::reference, "warm start policy does not match the node grid");
  return scvx::propagate_reference(cfg.problem, stored.policy);
}

std::string sigma_points_csv(const ScenarioConfig& cfg, const scvx::Reference& ref) {
  const Vec6 scale = state_scale(cfg.problem.model);
  std::ostringstream os;
  os << "node,point,weight,x_km,y_km,z_km,vx_km_s,vy_km_s,vz_km_s\n";
  for (std::size_t k = 0; k < ref.nodes.size(); ++k) {
    const auto pts = ref.nodes[k].as_matrix();
    for (int i = 0; i < ref.nodes[k].n_s(); ++i) {
      os << k << ',' << i << ',' << num(ref.nodes[k].weights(i));
      for (int a = 0; a < 6; ++a) os << ',' << num(pts(a, i) * scale(a));
      os << '\n';
    }
  }
  return os.str();
}

json solve(const ScenarioConfig& cfg, const RunOptions& opt) {
  fs::create_directories(opt.out);
  const scvx::Reference start = initial_reference_for(cfg, opt);
  const scvx::ConvergedPolicy res = scvx::solve_moment_steering(cfg.problem, cfg.params, start, opt.on_iteration);
  const json policy = policy_to_json(cfg, res);
  write_text(opt.out / "policy.json", policy.dump(2) + "\n");
  std::ostringstream it;
  scvx::write_iteration_csv(it, res.log);
  write_text(opt.out / "iterations.csv", it.str());
  write_text(opt.out / "sigma_points.csv", sigma_points_csv(cfg, res.reference));
  write_text(opt.out / "effective_config.json", cfg.effective.dump(2) + "\n");
  return json{{"command", "solve"},
              {"scenario", cfg.name},
              {"converged", res.converged},
              {"iterations", res.iterations},
              {"chi", res.chi},
              {"dv99_ub_km_s", policy["dv99_ub_km_s"]},
              {"expected_fuel_km_s", policy["expected_fuel_km_s"]}};
}

StoredPolicy load_policy(const ScenarioConfig& cfg, const fs::path& out) {
  const json doc = read_json(out / "policy.json", ErrorCode::missing_policy);
  if (!doc.contains("config") || without_sampling(doc["config"]) != without_sampling(cfg.effective))
    throw Error(ErrorCode::reference, "policy was produced by a different scenario", (out / "policy.json").string());
  return policy_from_json(doc);
}

json validate(const ScenarioConfig& cfg, const RunOptions& opt) {
  const StoredPolicy stored = load_policy(cfg, opt.out);
  const int samples = opt.samples.value_or(cfg.samples);
  const std::uint64_t seed = opt.seed.value_or(cfg.seed);
  const mc::EnsembleRun ens = mc::run_ensemble(cfg.problem, stored.policy, stored.cut_means, samples, seed);
  const auto& model = cfg.problem.model;
  const Vec6 scale = state_scale(model);
  const double v = model.velocity_unit_km_s();

  std::ostringstream mom;
  mom << "node,axis,mean,three_sigma,skewness,kurtosis\n";
  for (std::size_t k = 0; k < ens.moments.size(); ++k) {
    const auto& s = ens.moments[k];
    for (int a = 0; a < 6; ++a)
      mom << k << ',' << kAxisNames[a] << ',' << num(s.mean(a) * scale(a)) << ',' << num(s.three_sigma(a) * scale(a))
          << ',' << num(s.skewness(a)) << ',' << num(s.kurtosis(a)) << '\n';
  }
  write_text(opt.out / "mc_moments.csv", mom.str());

  std::vector<int> ids;
  for (int s = 0, f = 0; s < samples; ++s) {
    if (f < static_cast<int>(ens.flagged.size()) && ens.flagged[f] == s) {
      ++f;
      continue;
    }
    ids.push_back(s);
  }
  std::ostringstream dv;
  dv << "sample";
  for (Eigen::Index k = 0; k < ens.dv.cols(); ++k) dv << ",dv" << k << "_km_s";
  dv << ",total_km_s\n";
  std::ostringstream cloud;
  cloud << "sample,x_km,y_km,z_km,vx_km_s,vy_km_s,vz_km_s\n";
  for (int j = 0; j < ens.valid(); ++j) {
    dv << ids[j];
    for (Eigen::Index k = 0; k < ens.dv.cols(); ++k) dv << ',' << num(ens.dv(j, k) * v);
    dv << ',' << num(ens.dv_total(j) * v) << '\n';
    cloud << ids[j];
    for (int a = 0; a < 6; ++a) cloud << ',' << num(ens.terminal()(a, j) * scale(a));
    cloud << '\n';
  }
  write_text(opt.out / "dv.csv", dv.str());
  write_text(opt.out / "terminal_cloud.csv", cloud.str());

  const mc::DvStatistics st = mc::dv_statistics(ens, stored.dv99_ub, stored.expected_fuel);
  double worst_sigma = 0.0;
  for (std::size_t k = 0; k < ens.moments.size(); ++k)
    for (int a = 0; a < 6; ++a) {
      const double c = stored.moments[k].three_sigma(a);
      if (c > 0.0) worst_sigma = std::max(worst_sigma, std::abs(ens.moments[k].three_sigma(a) - c) / c);
    }
  const auto& term = ens.moments.back();
  json out{{"command", "validate"},
           {"scenario", cfg.name},
           {"config", cfg.effective},
           {"seed", seed},
           {"samples", samples},
           {"flagged", ens.flagged.size()},
           {"dv",
            {{"mean_total_km_s", st.total.mean * v},
             {"p99_total_km_s", st.total.p99 * v},
             {"dv99_ub_km_s", st.dv99_bound * v},
             {"expected_fuel_km_s", st.expected_fuel * v},
             {"p99_over_bound", st.total.p99 / st.dv99_bound},
             {"mean_vs_expected_fuel", st.expected_fuel_error}}},
           {"terminal",
            {{"skewness", vec(term.skewness.head<3>())},
             {"kurtosis", vec(term.kurtosis.head<3>())},
             {"cut_skewness", vec(stored.moments.back().skewness.head<3>())},
             {"cut_kurtosis", vec(stored.moments.back().kurtosis.head<3>())}}},
           {"three_sigma_max_relative_error", worst_sigma}};
  write_text(opt.out / "validation.json", out.dump(2) + "\n");
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::missing_policy, "required file not found", path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

json report(const ScenarioConfig& cfg, const RunOptions& opt) {
  const StoredPolicy stored = load_policy(cfg, opt.out);
  const auto rows = read_csv(opt.out / "mc_moments.csv");
  const Vec6 scale = state_scale(cfg.problem.model);
  if (rows.empty() || rows[0].size() != 6 || rows[0][0] != "node")
    throw Error(ErrorCode::schema, "unexpected Monte Carlo moment file", (opt.out / "mc_moments.csv").string());
  std::ostringstream os;
  os << "node,axis,quantity,cut,mc,difference\n";
  int lines = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& c = rows[r];
    if (c.size() != 6) throw Error(ErrorCode::schema, "malformed Monte Carlo moment row", std::to_string(r));
    const int k = std::stoi(c[0]);
    int a = 0;
    while (a < 6 && c[1] != kAxisNames[a]) ++a;
    if (k < 0 || k >= static_cast<int>(stored.moments.size()) || a == 6)
      throw Error(ErrorCode::schema, "Monte Carlo moment row does not match the policy", std::to_string(r));
    const auto& m = stored.moments[k];
    const double cut[4] = {m.mean(a) * scale(a), m.three_sigma(a) * scale(a), m.skewness(a), m.kurtosis(a)};
    const char* names[4] = {"mean", "three_sigma", "skewness", "kurtosis"};
    for (int q = 0; q < 4; ++q) {
      const double mcv = std::stod(c[2 + q]);
      os << k << ',' << c[1] << ',' << names[q] << ',' << num(cut[q]) << ',' << num(mcv) << ',' << num(mcv - cut[q])
         << '\n';
      ++lines;
    }
  }
  write_text(opt.out / "moment_comparison.csv", os.str());
  return json{{"command", "report"}, {"scenario", cfg.name}, {"rows", lines}};
}

}  // namespace

json run(Command command, const ScenarioConfig& config, const RunOptions& options) {
  switch (command) {
    case Command::solve: return solve(config, options);
    case Command::validate: return validate(config, options);
    case Command::report: return report(config, options);
  }
  throw Error(ErrorCode::invalid_argument, "unknown command");
}

int write_cut_info(int order, int dimension, const fs::path& out) {
  const cut::SigmaSet set = cut::cut_standard(order, dimension);
  fs::create_directories(out);
  std::ostringstream os;
  os << "point,weight";
  for (int a = 0; a < dimension; ++a) os << ",c" << a;
  os << '\n';
  for (int i = 0; i < set.count(); ++i) {
    os << i << ',' << num(set.weights(i));
    for (int a = 0; a < dimension; ++a) os << ',' << num(set.points(a, i));
    os << '\n';
  }
  write_text(out / "sigma_set.csv", os.str());
  return set.count();
}

}  // namespace cutsteer::scenario
