#include "eotsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eotsim/errors.hpp"
#include "eotsim/io.hpp"

namespace eotsim::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("config: " + path + ": " + message);
}

void require_keys(const json& node, const std::string& path,
                  const std::set<std::string>& allowed) {
  if (!node.is_object()) {
    fail(path, "expected an object");
  }
  for (const auto& [key, value] : node.items()) {
    if (!allowed.contains(key)) {
      fail(path + "." + key, "unknown key");
    }
  }
}

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) {
    fail(path, "expected a number");
  }
  return node.get<double>();
}

double number_or(const json& parent, const std::string& key, const std::string& path,
                 double fallback) {
  if (!parent.contains(key)) {
    return fallback;
  }
  return get_number(parent.at(key), path + "." + key);
}

long integer_or(const json& parent, const std::string& key, const std::string& path,
                long fallback) {
  if (!parent.contains(key)) {
    return fallback;
  }
  const auto& node = parent.at(key);
  if (!node.is_number_integer()) {
    fail(path + "." + key, "expected an integer");
  }
  return node.get<long>();
}

std::string string_or(const json& parent, const std::string& key, const std::string& path,
                      const std::string& fallback) {
  if (!parent.contains(key)) {
    return fallback;
  }
  const auto& node = parent.at(key);
  if (!node.is_string()) {
    fail(path + "." + key, "expected a string");
  }
  return node.get<std::string>();
}

quantum::Arm parse_arm(const std::string& text, const std::string& path) {
  if (text == "probe") return quantum::Arm::probe;
  if (text == "conjugate") return quantum::Arm::conjugate;
  if (text == "both") return quantum::Arm::both;
  fail(path, "expected probe | conjugate | both");
}

std::string arm_name(quantum::Arm arm) {
  switch (arm) {
    case quantum::Arm::probe: return "probe";
    case quantum::Arm::conjugate: return "conjugate";
    default: return "both";
  }
}

// Accepts either an explicit list or {"min": a, "max": b, "step": s}.
std::vector<double> parse_axis(const json& node, const std::string& path) {
  std::vector<double> values;
  if (node.is_array()) {
    for (const auto& v : node) {
      values.push_back(get_number(v, path + "[]"));
    }
  } else if (node.is_object()) {
    require_keys(node, path, {"min", "max", "step"});
    const double lo = get_number(node.at("min"), path + ".min");
    const double hi = get_number(node.at("max"), path + ".max");
    const double step = get_number(node.at("step"), path + ".step");
    if (!(step > 0.0) || hi < lo) {
      fail(path, "need step > 0 and max >= min");
    }
    const long n = std::lround((hi - lo) / step);
    for (long i = 0; i <= n; ++i) {
      values.push_back(lo + static_cast<double>(i) * step);
    }
  } else {
    fail(path, "expected a list or {min, max, step}");
  }
  if (values.empty()) {
    fail(path, "empty axis");
  }
  return values;
}

materials::MaterialModel parse_material(const std::string& name, const json& node,
                                        const std::string& path) {
  require_keys(node, path, {"model", "index", "eps_inf", "poles", "valid_range_nm"});
  const std::string model = string_or(node, "model", path, "constant");
  materials::MaterialModel m;
  m.name = name;
  double lo = 0.0, hi = 1e12;
  if (node.contains("valid_range_nm")) {
    const auto& range = node.at("valid_range_nm");
    if (!range.is_array() || range.size() != 2) {
      fail(path + ".valid_range_nm", "expected [min_nm, max_nm]");
    }
    lo = get_number(range[0], path + ".valid_range_nm[0]");
    hi = get_number(range[1], path + ".valid_range_nm[1]");
  }
  m.lambda_min_nm = lo;
  m.lambda_max_nm = hi;
  if (model == "constant") {
    if (!node.contains("index")) {
      fail(path, "constant material needs \"index\"");
    }
    const double n = get_number(node.at("index"), path + ".index");
    m.eps_inf = n * n;
  } else if (model == "drude_lorentz") {
    m.eps_inf = number_or(node, "eps_inf", path, 1.0);
    if (node.contains("poles")) {
      const auto& poles = node.at("poles");
      if (!poles.is_array()) {
        fail(path + ".poles", "expected a list");
      }
      int index = 0;
      for (const auto& pnode : poles) {
        const std::string ppath = path + ".poles[" + std::to_string(index++) + "]";
        require_keys(pnode, ppath, {"type", "frequency_ev", "damping_ev", "strength"});
        const std::string type = string_or(pnode, "type", ppath, "drude");
        materials::Pole pole;
        if (type == "drude") {
          pole.kind = materials::PoleKind::drude;
        } else if (type == "lorentz") {
          pole.kind = materials::PoleKind::lorentz;
        } else {
          fail(ppath + ".type", "expected drude | lorentz");
        }
        pole.omega_rad_s = materials::ev_to_rad_s(get_number(pnode.at("frequency_ev"), ppath));
        pole.damping_rad_s =
            materials::ev_to_rad_s(number_or(pnode, "damping_ev", ppath, 0.0));
        pole.strength = number_or(pnode, "strength", ppath, 1.0);
        m.poles.push_back(pole);
      }
    }
  } else {
    fail(path + ".model", "expected constant | drude_lorentz");
  }
  try {
    materials::validate_material(m);
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return m;
}

json material_json(const materials::MaterialModel& m) {
  json node;
  if (m.poles.empty()) {
    node["model"] = "constant";
    node["index"] = std::sqrt(m.eps_inf);
  } else {
    node["model"] = "drude_lorentz";
    node["eps_inf"] = m.eps_inf;
    node["poles"] = json::array();
    for (const auto& p : m.poles) {
      node["poles"].push_back(
          {{"type", p.kind == materials::PoleKind::drude ? "drude" : "lorentz"},
           {"frequency_ev", p.omega_rad_s * materials::kReducedPlanck / materials::kElectronVolt},
           {"damping_ev", p.damping_rad_s * materials::kReducedPlanck / materials::kElectronVolt},
           {"strength", p.strength}});
    }
  }
  node["valid_range_nm"] = {m.lambda_min_nm, m.lambda_max_nm};
  return node;
}

const materials::MaterialModel& lookup(const std::map<std::string, materials::MaterialModel>& table,
                                       const std::string& name, const std::string& path) {
  const auto it = table.find(name);
  if (it == table.end()) {
    fail(path, "unknown material '" + name + "'");
  }
  return it->second;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require_keys(root, "$",
               {"materials", "stack", "grid", "source", "monitors", "run", "quantum",
                "polarization", "output"});

  RunConfig cfg;
  for (auto& m : materials::library::builtins()) {
    cfg.materials.emplace(m.name, m);
  }
  if (root.contains("materials")) {
    for (const auto& [name, node] : root.at("materials").items()) {
      cfg.materials.insert_or_assign(name, parse_material(name, node, "materials." + name));
    }
  }

  if (root.contains("stack")) {
    const auto& s = root.at("stack");
    const std::string path = "stack";
    require_keys(s, path,
                 {"substrate", "ito", "ito_thickness_nm", "film", "film_thickness_nm",
                  "superstrate", "pitch_nm", "hole"});
    cfg.stack.substrate = lookup(cfg.materials, string_or(s, "substrate", path, "borosilicate"),
                                 path + ".substrate");
    cfg.stack.ito = lookup(cfg.materials, string_or(s, "ito", path, "ito"), path + ".ito");
    cfg.stack.ito_thickness_nm = number_or(s, "ito_thickness_nm", path, 20.0);
    cfg.stack.film = lookup(cfg.materials, string_or(s, "film", path, "silver"), path + ".film");
    cfg.stack.film_thickness_nm = number_or(s, "film_thickness_nm", path, 80.0);
    cfg.stack.superstrate = lookup(cfg.materials, string_or(s, "superstrate", path, "vacuum"),
                                   path + ".superstrate");
    cfg.stack.pitch_nm = number_or(s, "pitch_nm", path, 400.0);
    if (s.contains("hole")) {
      const auto& h = s.at("hole");
      if (h.is_null()) {
        cfg.stack.hole.reset();
      } else {
        require_keys(h, path + ".hole", {"shape", "base_nm", "leg_nm", "orientation_deg"});
        const std::string shape = string_or(h, "shape", path + ".hole", "triangle");
        if (shape != "triangle") {
          fail(path + ".hole.shape", "only 'triangle' is supported");
        }
        fdtd::TriangleHole hole;
        hole.base_nm = number_or(h, "base_nm", path + ".hole", hole.base_nm);
        hole.leg_nm = number_or(h, "leg_nm", path + ".hole", hole.leg_nm);
        hole.orientation_deg = number_or(h, "orientation_deg", path + ".hole", hole.orientation_deg);
        cfg.stack.hole = hole;
      }
    }
    try {
      fdtd::validate_stack(cfg.stack);
    } catch (const std::exception& e) {
      fail(path, e.what());
    }
  }

  if (root.contains("grid")) {
    const auto& g = root.at("grid");
    const std::string path = "grid";
    require_keys(g, path,
                 {"dx_nm", "dy_nm", "dz_nm", "courant_factor", "pml_cells", "air_gap_nm",
                  "substrate_gap_nm", "dt_fs"});
    cfg.grid.dx_nm = number_or(g, "dx_nm", path, 5.0);
    cfg.grid.dy_nm = number_or(g, "dy_nm", path, cfg.grid.dx_nm);
    cfg.grid.dz_nm = number_or(g, "dz_nm", path, cfg.grid.dx_nm);
    cfg.grid.courant = number_or(g, "courant_factor", path, 0.99);
    cfg.grid.pml_cells = static_cast<int>(integer_or(g, "pml_cells", path, 10));
    cfg.grid.air_gap_nm = number_or(g, "air_gap_nm", path, 220.0);
    cfg.grid.substrate_gap_nm = number_or(g, "substrate_gap_nm", path, 200.0);
    if (g.contains("dt_fs")) {
      cfg.grid.dt_override_s = get_number(g.at("dt_fs"), path + ".dt_fs") * 1e-15;
    }
    if (!(cfg.grid.courant > 0.0 && cfg.grid.courant < 1.0)) {
      fail(path + ".courant_factor", "must lie in (0, 1)");
    }
    if (cfg.grid.pml_cells < 0) {
      fail(path + ".pml_cells", "must be >= 0");
    }
  }

  if (root.contains("source")) {
    const auto& s = root.at("source");
    const std::string path = "source";
    require_keys(s, path, {"type", "wavelength_min_nm", "wavelength_max_nm", "polarization_deg"});
    const std::string type = string_or(s, "type", path, "gaussian_pulse");
    if (type != "gaussian_pulse") {
      fail(path + ".type", "only 'gaussian_pulse' is supported");
    }
    cfg.source.lambda_min_nm = number_or(s, "wavelength_min_nm", path, 400.0);
    cfg.source.lambda_max_nm = number_or(s, "wavelength_max_nm", path, 1000.0);
    cfg.source.polarization_deg = number_or(s, "polarization_deg", path, 0.0);
    if (!(cfg.source.lambda_min_nm > 0.0 &&
          cfg.source.lambda_max_nm > cfg.source.lambda_min_nm)) {
      fail(path, "need 0 < wavelength_min_nm < wavelength_max_nm");
    }
  }

  cfg.monitors.wavelengths_nm = {};
  if (root.contains("monitors")) {
    const auto& m = root.at("monitors");
    const std::string path = "monitors";
    require_keys(m, path,
                 {"wavelengths_nm", "fieldmap_z_nm", "fieldmap_wavelength_nm", "fieldmap_crop_nm"});
    if (m.contains("wavelengths_nm")) {
      cfg.monitors.wavelengths_nm = parse_axis(m.at("wavelengths_nm"), path + ".wavelengths_nm");
    }
    cfg.monitors.fieldmap_z_nm = number_or(m, "fieldmap_z_nm", path, -10.0);
    if (m.contains("fieldmap_wavelength_nm")) {
      cfg.monitors.fieldmap_wavelength_nm =
          get_number(m.at("fieldmap_wavelength_nm"), path + ".fieldmap_wavelength_nm");
    }
    cfg.monitors.fieldmap_crop_nm = number_or(m, "fieldmap_crop_nm", path, 0.0);
  }
  if (cfg.monitors.wavelengths_nm.empty()) {
    for (double wl = 400.0; wl <= 1000.0 + 1e-9; wl += 5.0) {
      cfg.monitors.wavelengths_nm.push_back(wl);
    }
  }
  for (const double wl : cfg.monitors.wavelengths_nm) {
    if (wl < cfg.source.lambda_min_nm - 1e-9 || wl > cfg.source.lambda_max_nm + 1e-9) {
      fail("monitors.wavelengths_nm",
           "wavelength " + io::format_double(wl) + " outside the source band");
    }
  }

  if (root.contains("run")) {
    const auto& r = root.at("run");
    const std::string path = "run";
    require_keys(r, path, {"decay_threshold", "max_steps", "normalization"});
    cfg.run.decay_threshold = number_or(r, "decay_threshold", path, 1e-5);
    cfg.run.max_steps = integer_or(r, "max_steps", path, 200000);
    const std::string norm = string_or(r, "normalization", path, "vacuum");
    if (norm == "vacuum") {
      cfg.run.normalization = fdtd::NormalizationKind::vacuum;
    } else if (norm == "substrate") {
      cfg.run.normalization = fdtd::NormalizationKind::substrate;
    } else {
      fail(path + ".normalization", "expected vacuum | substrate");
    }
    if (!(cfg.run.decay_threshold > 0.0 && cfg.run.decay_threshold < 1.0)) {
      fail(path + ".decay_threshold", "must lie in (0, 1)");
    }
    if (cfg.run.max_steps < 1) {
      fail(path + ".max_steps", "must be positive");
    }
  }

  if (root.contains("quantum")) {
    const auto& q = root.at("quantum");
    const std::string path = "quantum";
    require_keys(q, path,
                 {"gain", "chain", "normalization_set", "eta_axis", "nd_arm", "eot_element",
                  "sweep_csv"});
    cfg.quantum.gain = number_or(q, "gain", path, 4.0);
    if (!(cfg.quantum.gain >= 1.0)) {
      fail(path + ".gain", "must be >= 1");
    }
    if (q.contains("chain")) {
      const auto& c = q.at("chain");
      if (!c.is_array()) {
        fail(path + ".chain", "expected a list of elements");
      }
      int index = 0;
      for (const auto& e : c) {
        const std::string epath = path + ".chain[" + std::to_string(index++) + "]";
        require_keys(e, epath, {"name", "eta", "arm"});
        chain::LossElement elem;
        elem.name = string_or(e, "name", epath, "");
        if (!e.contains("eta")) {
          fail(epath, "element needs \"eta\"");
        }
        elem.eta = get_number(e.at("eta"), epath + ".eta");
        elem.arm = parse_arm(string_or(e, "arm", epath, "both"), epath + ".arm");
        try {
          cfg.quantum.chain.add(elem);
        } catch (const std::exception& ex) {
          fail(epath, ex.what());
        }
      }
    }
    if (q.contains("normalization_set")) {
      const auto& n = q.at("normalization_set");
      if (!n.is_array()) {
        fail(path + ".normalization_set", "expected a list of element names");
      }
      std::set<std::string> names;
      for (const auto& v : n) {
        if (!v.is_string()) {
          fail(path + ".normalization_set", "expected strings");
        }
        names.insert(v.get<std::string>());
      }
      try {
        cfg.quantum.chain.set_normalization(names);
      } catch (const std::exception& ex) {
        fail(path + ".normalization_set", ex.what());
      }
    }
    if (q.contains("eta_axis")) {
      cfg.quantum.eta_axis = parse_axis(q.at("eta_axis"), path + ".eta_axis");
      for (const double eta : cfg.quantum.eta_axis) {
        if (!(eta >= 0.0 && eta <= 1.0)) {
          fail(path + ".eta_axis", "transmission values must lie in [0, 1]");
        }
      }
    }
    cfg.quantum.nd_arm = parse_arm(string_or(q, "nd_arm", path, "both"), path + ".nd_arm");
    cfg.quantum.eot_element = string_or(q, "eot_element", path, "eot");
    if (q.contains("sweep_csv")) {
      cfg.quantum.sweep_csv = string_or(q, "sweep_csv", path, "");
    }
  }
  if (cfg.quantum.eta_axis.empty()) {
    for (int i = 0; i <= 20; ++i) {
      cfg.quantum.eta_axis.push_back(i * 0.05);
    }
  }

  if (root.contains("polarization")) {
    const auto& p = root.at("polarization");
    const std::string path = "polarization";
    require_keys(p, path, {"angles_deg", "wavelength_nm", "method"});
    if (p.contains("angles_deg")) {
      cfg.polarization.angles_deg = parse_axis(p.at("angles_deg"), path + ".angles_deg");
    }
    cfg.polarization.wavelength_nm = number_or(p, "wavelength_nm", path, 795.0);
    const std::string method = string_or(p, "method", path, "basis");
    if (method == "basis") {
      cfg.polarization.method = scenarios::SweepMethod::basis;
    } else if (method == "direct") {
      cfg.polarization.method = scenarios::SweepMethod::direct;
    } else {
      fail(path + ".method", "expected basis | direct");
    }
  }
  if (cfg.polarization.angles_deg.empty()) {
    for (int a = 0; a <= 175; a += 5) {
      cfg.polarization.angles_deg.push_back(a);
    }
  }

  if (root.contains("output")) {
    const auto& o = root.at("output");
    require_keys(o, "output", {"directory"});
    cfg.output_dir = string_or(o, "directory", "output", "out");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string resolved_json(const RunConfig& cfg) {
  json root;
  for (const auto& [name, m] : cfg.materials) {
    root["materials"][name] = material_json(m);
  }
  json stack;
  stack["substrate"] = cfg.stack.substrate.name;
  stack["ito"] = cfg.stack.ito.name;
  stack["ito_thickness_nm"] = cfg.stack.ito_thickness_nm;
  stack["film"] = cfg.stack.film.name;
  stack["film_thickness_nm"] = cfg.stack.film_thickness_nm;
  stack["superstrate"] = cfg.stack.superstrate.name;
  stack["pitch_nm"] = cfg.stack.pitch_nm;
  if (cfg.stack.hole) {
    stack["hole"] = {{"shape", "triangle"},
                     {"base_nm", cfg.stack.hole->base_nm},
                     {"leg_nm", cfg.stack.hole->leg_nm},
                     {"orientation_deg", cfg.stack.hole->orientation_deg}};
  } else {
    stack["hole"] = nullptr;
  }
  root["stack"] = stack;

  json grid;
  grid["dx_nm"] = cfg.grid.dx_nm;
  grid["dy_nm"] = cfg.grid.dy_nm;
  grid["dz_nm"] = cfg.grid.dz_nm;
  grid["courant_factor"] = cfg.grid.courant;
  grid["pml_cells"] = cfg.grid.pml_cells;
  grid["air_gap_nm"] = cfg.grid.air_gap_nm;
  grid["substrate_gap_nm"] = cfg.grid.substrate_gap_nm;
  if (cfg.grid.dt_override_s) {
    grid["dt_fs"] = *cfg.grid.dt_override_s * 1e15;
  }
  root["grid"] = grid;

  root["source"] = {{"type", "gaussian_pulse"},
                    {"wavelength_min_nm", cfg.source.lambda_min_nm},
                    {"wavelength_max_nm", cfg.source.lambda_max_nm},
                    {"polarization_deg", cfg.source.polarization_deg}};

  json monitors;
  monitors["wavelengths_nm"] = cfg.monitors.wavelengths_nm;
  monitors["fieldmap_z_nm"] = cfg.monitors.fieldmap_z_nm;
  if (cfg.monitors.fieldmap_wavelength_nm) {
    monitors["fieldmap_wavelength_nm"] = *cfg.monitors.fieldmap_wavelength_nm;
  }
  monitors["fieldmap_crop_nm"] = cfg.monitors.fieldmap_crop_nm;
  root["monitors"] = monitors;

  root["run"] = {{"decay_threshold", cfg.run.decay_threshold},
                 {"max_steps", cfg.run.max_steps},
                 {"normalization",
                  cfg.run.normalization == fdtd::NormalizationKind::vacuum ? "vacuum"
                                                                           : "substrate"}};

  json quantum;
  quantum["gain"] = cfg.quantum.gain;
  quantum["chain"] = json::array();
  for (const auto& e : cfg.quantum.chain.elements()) {
    quantum["chain"].push_back({{"name", e.name}, {"eta", e.eta}, {"arm", arm_name(e.arm)}});
  }
  quantum["normalization_set"] = cfg.quantum.chain.normalization_set();
  quantum["eta_axis"] = cfg.quantum.eta_axis;
  quantum["nd_arm"] = arm_name(cfg.quantum.nd_arm);
  quantum["eot_element"] = cfg.quantum.eot_element;
  if (cfg.quantum.sweep_csv) {
    quantum["sweep_csv"] = *cfg.quantum.sweep_csv;
  }
  root["quantum"] = quantum;

  root["polarization"] = {
      {"angles_deg", cfg.polarization.angles_deg},
      {"wavelength_nm", cfg.polarization.wavelength_nm},
      {"method",
       cfg.polarization.method == scenarios::SweepMethod::basis ? "basis" : "direct"}};

  root["output"] = {{"directory", cfg.output_dir}};
  return root.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& config) {
  return io::fnv1a64(resolved_json(config));
}

fdtd::RunPolicy run_policy(const RunConfig& config, int workers) {
  fdtd::RunPolicy policy;
  policy.decay_threshold = config.run.decay_threshold;
  policy.max_steps = config.run.max_steps;
  policy.workers = workers;
  return policy;
}

}  // namespace eotsim::config
