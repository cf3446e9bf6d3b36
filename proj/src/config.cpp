#include "qfgp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qfgp/digest.hpp"
#include "qfgp/error.hpp"

namespace qfgp {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  throw Error("validation", key + ": " + what);
}

// Reads one object section, recording defaults and rejecting unknown keys.
class Section {
 public:
  Section(const json& doc, std::string name, std::vector<std::string>& defaulted)
      : name_(std::move(name)), defaulted_(defaulted) {
    if (doc.contains(name_)) {
      const json& s = doc.at(name_);
      if (!s.is_object()) invalid(name_, "must be an object");
      obj_ = &s;
    }
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

  void number(const std::string& key, double& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_number()) invalid(path(key), "expected a number");
    out = v->get<double>();
    if (!std::isfinite(out)) invalid(path(key), "must be finite");
  }

  void integer(const std::string& key, int& out) {
    const json* v = take(key);
    if (!v) return;
    if (v->is_number_integer()) {
      out = v->get<int>();
    } else if (v->is_number_float() && v->get<double>() == std::floor(v->get<double>()) &&
               std::abs(v->get<double>()) < 1e9) {
      out = static_cast<int>(v->get<double>());
    } else {
      invalid(path(key), "expected an integer");
    }
  }

  void text(const std::string& key, std::string& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_string()) invalid(path(key), "expected a string");
    out = v->get<std::string>();
  }

  void boolean(const std::string& key, bool& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_boolean()) invalid(path(key), "expected true or false");
    out = v->get<bool>();
  }

  const json* raw(const std::string& key) { return take(key); }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!used_.count(it.key())) invalid(path(it.key()), "unknown key");
    }
  }

 private:
  const json* take(const std::string& key) {
    if (!has(key)) {
      defaulted_.push_back(path(key));
      return nullptr;
    }
    used_.insert(key);
    return &obj_->at(key);
  }

  std::string name_;
  std::vector<std::string>& defaulted_;
  const json* obj_ = nullptr;
  std::set<std::string> used_;
};

template <class F>
auto rethrow_as(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == "validation") throw;
    invalid(key, e.what());
  }
}

void read_material(const json& doc, RunConfig& cfg) {
  Section s(doc, "material", cfg.defaulted);
  std::string name = "paper-metal";
  const bool spelled_out = s.has("omega_pl") && s.has("gamma_ratio") && s.has("omega0_ratio");
  if (!spelled_out || s.has("preset")) s.text("preset", name);
  cfg.sim.material = rethrow_as("material.preset", [&] { return preset(name); });
  s.number("omega_pl", cfg.sim.material.omega_pl);
  s.number("gamma_ratio", cfg.sim.material.gamma_ratio);
  s.number("omega0_ratio", cfg.sim.material.omega0_ratio);
  s.text("label", cfg.sim.material.label);
  s.finish();
}

void read_geometry(const json& doc, RunConfig& cfg) {
  Section s(doc, "geometry", cfg.defaulted);
  GeometryConfig& g = cfg.sim.geometry;
  s.number("alpha", g.alpha);
  s.number("gamma_dip", g.gamma_dip);
  s.number("gap_a", g.gap_a);
  s.number("u", g.u);
  s.finish();
}

void read_system(const json& doc, RunConfig& cfg) {
  Section s(doc, "system", cfg.defaulted);
  SystemParams& sys = cfg.sim.system;
  s.number("delta_ratio", sys.delta_ratio);
  s.number("theta0", sys.theta0);
  const bool coupling_given = s.has("coupling_g");
  s.number("coupling_g", sys.coupling_g);
  if (const json* a = s.raw("alpha_pol"); a && !a->is_null()) {
    if (!a->is_number()) invalid("system.alpha_pol", "expected a number");
    sys.alpha_pol = a->get<double>();
  }
  s.integer("n_cycles", cfg.sim.n_cycles);
  s.finish();
  validate(sys);
  sys = resolve_coupling(sys, cfg.sim.geometry, coupling_given);
}

void read_numerics(const json& doc, RunConfig& cfg) {
  Section s(doc, "numerics", cfg.defaulted);
  NumericsConfig& n = cfg.sim.numerics;
  std::string mode = to_string(n.resonance_mode);
  s.text("resonance_mode", mode);
  n.resonance_mode = resonance_mode_from_string(mode);
  std::string sign = to_string(n.sign_convention);
  s.text("sign_convention", sign);
  n.sign_convention = sign_convention_from_string(sign);
  s.number("ir_cutoff", n.ir_cutoff);
  s.number("omega_max", n.omega_max);
  s.integer("n_theta", n.n_theta);
  s.number("omega_tol", n.omega_tol);
  s.number("kernel_dt", n.kernel_dt);
  s.integer("min_table_cycles", n.min_table_cycles);
  s.number("rel_tol", n.integrator.rel_tol);
  s.number("abs_tol", n.integrator.abs_tol);
  s.integer("samples_per_cycle", n.integrator.samples_per_cycle);
  s.number("initial_step", n.integrator.initial_step);
  s.number("min_step", n.integrator.min_step);
  s.number("purity_guard", n.integrator.purity_guard);
  std::string phase = to_string(n.phase_mode);
  s.text("phase_mode", phase);
  n.phase_mode = phase_mode_from_string(phase);
  s.finish();
}

void read_output(const json& doc, RunConfig& cfg) {
  Section s(doc, "output", cfg.defaulted);
  std::string dir = cfg.output.directory.string();
  s.text("directory", dir);
  if (dir.empty()) invalid("output.directory", "must not be empty");
  cfg.output.directory = dir;
  if (const json* f = s.raw("formats")) {
    if (!f->is_array() || f->empty()) invalid("output.formats", "expected a non-empty list");
    cfg.output.csv = cfg.output.json = false;
    for (const json& v : *f) {
      if (v == "csv") {
        cfg.output.csv = true;
      } else if (v == "json") {
        cfg.output.json = true;
      } else {
        invalid("output.formats", "entries must be \"csv\" or \"json\"");
      }
    }
  }
  s.integer("stride", cfg.output.stride);
  if (cfg.output.stride < 1) invalid("output.stride", "must be >= 1");
  s.finish();
}

void read_sweep(const json& doc, RunConfig& cfg) {
  if (!doc.contains("sweep")) return;
  std::vector<std::string> ignored;
  Section s(doc, "sweep", ignored);
  SweepSection sw;
  s.text("name", sw.name);
  int budget = static_cast<int>(sw.budget);
  s.integer("budget", budget);
  if (budget < 1) invalid("sweep.budget", "must be >= 1");
  sw.budget = static_cast<std::size_t>(budget);
  std::string rows = sw.all_cycles ? "all" : "final";
  s.text("rows", rows);
  if (rows != "all" && rows != "final") invalid("sweep.rows", "expected \"all\" or \"final\"");
  sw.all_cycles = rows == "all";
  const json* axes = s.raw("axes");
  if (!axes) invalid("sweep.axes", "required");
  sw.axes = axes_from_json(*axes);
  s.finish();
  cfg.sweep = std::move(sw);
  // Checks names, budget and that every point applies cleanly.
  expand_grid(cfg.sweep_spec());
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

SweepSpec RunConfig::sweep_spec() const {
  if (!sweep) throw Error("validation", "sweep: section missing from configuration");
  SweepSpec spec;
  spec.name = sweep->name;
  spec.base = sim;
  spec.axes = sweep->axes;
  spec.budget = sweep->budget;
  return spec;
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.sim.material = preset("paper-metal");
  cfg.sim.system.coupling_g = kCalibratedCoupling;
  return cfg;
}

json parse_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::ostringstream os;
    os << "syntax error at line " << line << ", column " << col << ": " << e.what();
    throw Error("syntax", os.str());
  }
  if (!doc.is_object()) throw Error("syntax", "configuration must be a JSON object");
  return doc;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw Error("validation", "override '" + std::string(assignment) + "': expected key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() ||
      key.find('.', dot + 1) != std::string::npos) {
    throw Error("validation", "override '" + key + "': expected section.key");
  }
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  const std::string section = key.substr(0, dot);
  if (doc.contains(section) && !doc.at(section).is_object()) {
    invalid(section, "must be an object");
  }
  doc[section][key.substr(dot + 1)] = parsed;
}

RunConfig from_document(const json& doc) {
  static const std::set<std::string> sections = {"material", "geometry", "system",
                                                 "numerics", "output",   "sweep"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!sections.count(it.key())) invalid(it.key(), "unknown section");
  }
  RunConfig cfg = default_config();
  read_material(doc, cfg);
  read_geometry(doc, cfg);
  read_system(doc, cfg);
  read_numerics(doc, cfg);
  read_output(doc, cfg);
  validate(cfg.sim.material);
  validate(cfg.sim.geometry, cfg.sim.material);
  cfg.sim.validate();
  read_sweep(doc, cfg);
  return cfg;
}

RunConfig from_document(const json& doc, const json& base) {
  json merged = base;
  merged.erase("sweep");
  if (doc.contains("material") && doc.at("material").is_object() &&
      doc.at("material").contains("preset")) {
    merged["material"] = json::object();
  }
  if (doc.contains("system") && doc.at("system").is_object() &&
      doc.at("system").contains("alpha_pol") && !doc.at("system").contains("coupling_g")) {
    merged["system"].erase("coupling_g");
  }
  merged.merge_patch(doc);
  RunConfig cfg = from_document(merged);
  cfg.defaulted.clear();
  for (auto sec = base.begin(); sec != base.end(); ++sec) {
    if (!sec.value().is_object() || sec.key() == "sweep") continue;
    const bool given = doc.contains(sec.key()) && doc.at(sec.key()).is_object();
    for (auto key = sec.value().begin(); key != sec.value().end(); ++key) {
      if (!given || !doc.at(sec.key()).contains(key.key())) {
        cfg.defaulted.push_back(sec.key() + "." + key.key());
      }
    }
  }
  return cfg;
}

RunConfig parse_config_text(std::string_view text, std::span<const std::string> overrides) {
  json doc = parse_document(text);
  for (const std::string& o : overrides) apply_override(doc, o);
  return from_document(doc);
}

RunConfig parse_config_file(const std::filesystem::path& path,
                            std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read configuration file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

RunConfig parse_config(std::string_view source, std::span<const std::string> overrides) {
  const auto first = source.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && source[first] == '{') {
    return parse_config_text(source, overrides);
  }
  return parse_config_file(std::filesystem::path(std::string(source)), overrides);
}

json canonical_json(const RunConfig& cfg) {
  json doc;
  doc["material"] = cfg.sim.material;
  doc["geometry"] = cfg.sim.geometry;
  json sys = cfg.sim.system;
  sys["n_cycles"] = cfg.sim.n_cycles;
  doc["system"] = sys;
  doc["numerics"] = cfg.sim.numerics;
  json formats = json::array();
  if (cfg.output.csv) formats.push_back("csv");
  if (cfg.output.json) formats.push_back("json");
  doc["output"] = {{"directory", cfg.output.directory.generic_string()},
                   {"formats", formats},
                   {"stride", cfg.output.stride}};
  if (cfg.sweep) {
    doc["sweep"] = {{"name", cfg.sweep->name},
                    {"axes", axes_to_json(cfg.sweep->axes)},
                    {"budget", cfg.sweep->budget},
                    {"rows", cfg.sweep->all_cycles ? "all" : "final"}};
  }
  return doc;
}

std::string canonical_text(const RunConfig& cfg) { return canonical_json(cfg).dump(); }

std::string config_digest(const RunConfig& cfg) { return json_digest(canonical_json(cfg)); }

}  // namespace qfgp
