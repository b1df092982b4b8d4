#include "latpair/config.hpp"

#include <yaml-cpp/yaml.h>

#include <boost/uuid/detail/sha1.hpp>
#include <cstdio>
#include <fstream>
#include "json.hpp"
#include <set>
#include <sstream>

namespace latpair {

using nlohmann::json;

Task parse_task(const std::string& s) {
  static const std::map<std::string, Task> names{{"solve", Task::solve}, {"sweep", Task::sweep},
                                                 {"densities", Task::densities}, {"cuts", Task::cuts},
                                                 {"map", Task::map}, {"fit", Task::fit}};
  const auto it = names.find(s);
  if (it == names.end()) throw config_error("unknown task '" + s + "' (solve|sweep|densities|cuts|map|fit)");
  return it->second;
}

const char* to_string(Task t) {
  switch (t) {
    case Task::solve: return "solve";
    case Task::sweep: return "sweep";
    case Task::densities: return "densities";
    case Task::cuts: return "cuts";
    case Task::map: return "map";
    case Task::fit: return "fit";
  }
  return "?";
}

TrapSpec RunConfig::trap(int order) const { return TrapSpec::cubic(wavelength_nm, depth[0], depth[1], order); }

std::string config_hash(const std::string& text) {
  boost::uuids::detail::sha1 h;
  h.process_bytes(text.data(), text.size());
  boost::uuids::detail::sha1::digest_type d;
  h.get_digest(d);
  char buf[41];
  for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", d[i]);
  return std::string(buf, 40);
}

namespace {

// YAML -> JSON, recording the source line of every node path.
json to_json(const YAML::Node& n, const std::string& path, std::map<std::string, int>& lines) {
  lines[path] = n.Mark().line + 1;
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      json j = json::object();
      for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        j[key] = to_json(kv.second, path.empty() ? key : path + "." + key, lines);
      }
      return j;
    }
    case YAML::NodeType::Sequence: {
      json j = json::array();
      for (std::size_t i = 0; i < n.size(); ++i) j.push_back(to_json(n[i], path + "[" + std::to_string(i) + "]", lines));
      return j;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (n.Tag() == "!") return s;  // quoted
      if (s == "true" || s == "false") return s == "true";
      try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos == s.size()) return v;
      } catch (...) {
      }
      try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
      } catch (...) {
      }
      return s;
    }
    default: return nullptr;
  }
}

class Reader {
 public:
  Reader(json root, std::map<std::string, int> lines, std::string origin)
      : root_(std::move(root)), lines_(std::move(lines)), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::string where = origin_;
    std::string p = path;
    while (true) {
      const auto it = lines_.find(p);
      if (it != lines_.end()) {
        where += ":" + std::to_string(it->second);
        break;
      }
      const auto dot = p.find_last_of(".[");
      if (dot == std::string::npos) break;
      p.erase(dot);
    }
    throw config_error(where + ": " + (path.empty() ? "" : "field '" + path + "': ") + msg);
  }

  const json* find(const std::string& path) const {
    const json* n = &root_;
    std::stringstream ss(path);
    for (std::string key; std::getline(ss, key, '.');) {
      if (!n->is_object() || !n->contains(key)) return nullptr;
      n = &(*n)[key];
    }
    return n;
  }
  bool has(const std::string& path) const { return find(path) != nullptr; }
  const json& get(const std::string& path) const {
    const json* n = find(path);
    if (!n) fail(path, "required field is missing");
    return *n;
  }

  void allow_keys(const std::string& path, std::set<std::string> keys) const {
    const json* n = path.empty() ? &root_ : find(path);
    if (!n) return;
    if (!n->is_object()) fail(path, "expected a table");
    for (const auto& [k, v] : n->items())
      if (!keys.count(k)) fail(path.empty() ? k : path + "." + k, "unknown key");
  }

  std::string str(const std::string& path) const {
    const auto& n = get(path);
    if (!n.is_string()) fail(path, "expected a string");
    return n.get<std::string>();
  }
  double number(const std::string& path) const {
    const auto& n = get(path);
    if (!n.is_number()) fail(path, "expected a number");
    return n.get<double>();
  }
  int integer(const std::string& path) const {
    const auto& n = get(path);
    if (!n.is_number_integer()) fail(path, "expected an integer");
    return n.get<int>();
  }
  bool boolean(const std::string& path) const {
    const auto& n = get(path);
    if (!n.is_boolean()) fail(path, "expected true or false");
    return n.get<bool>();
  }

  /// {value, unit} with the unit among `allowed` (name -> factor to the base unit).
  double quantity(const std::string& path, const std::map<std::string, double>& allowed) const {
    return quantity_of(get(path), path, allowed);
  }

  double quantity_of(const json& n, const std::string& path, const std::map<std::string, double>& allowed) const {
    if (n.is_number()) fail(path, "missing unit key (write {value: ..., unit: ...})");
    if (!n.is_object()) fail(path, "expected {value: ..., unit: ...}");
    if (!n.contains("unit")) fail(path, "missing unit key");
    if (!n.contains("value") || !n["value"].is_number()) fail(path, "missing numeric value");
    const auto unit = n["unit"].is_string() ? n["unit"].get<std::string>() : std::string();
    const auto it = allowed.find(unit);
    if (it == allowed.end()) {
      std::string list;
      for (const auto& [u, f] : allowed) list += " " + u;
      fail(path + ".unit", "unit '" + unit + "' not accepted here (allowed:" + list + ")");
    }
    return n["value"].get<double>() * it->second;
  }

  /// {values: [...], unit}
  std::vector<double> quantity_list(const std::string& path, const std::map<std::string, double>& allowed) const {
    const auto& n = get(path);
    if (!n.is_object() || !n.contains("unit")) fail(path, "missing unit key (write {values: [...], unit: ...})");
    if (!n.contains("values") || !n["values"].is_array()) fail(path, "expected a 'values' array");
    std::vector<double> out;
    for (const auto& v : n["values"]) {
      if (!v.is_number()) fail(path + ".values", "expected numbers");
      out.push_back(quantity_of(json{{"value", v}, {"unit", n["unit"]}}, path, allowed));
    }
    return out;
  }

 private:
  json root_;
  std::map<std::string, int> lines_;
  std::string origin_;
};

const std::map<std::string, double> length_units{{"a0", 1.0}, {"bohr", 1.0}, {"nm", 1.0 / constants::bohr_in_nm}};
const std::map<std::string, double> field_units{{"G", 1.0}, {"gauss", 1.0}, {"T", 1e4}};
const std::map<std::string, double> au_units{{"au", 1.0}};
const std::map<std::string, double> mass_units{{"u", constants::dalton_in_me}, {"Da", constants::dalton_in_me},
                                               {"me", 1.0}};
const std::map<std::string, double> intensity_units{{"au", 1.0},
                                                    {"W/cm2", 1.0 / constants::au_intensity_w_per_cm2}};

std::map<std::string, double> energy_units() {
  return {{"hartree", 1.0}, {"Eh", 1.0}, {"Hz", 1.0 / constants::hartree_in_hz},
          {"kHz", 1e3 / constants::hartree_in_hz}};
}

AtomSpecies read_atom(const Reader& r, const std::string& path) {
  const auto& n = r.get(path);
  if (n.is_string()) {
    try {
      return find_atom(n.get<std::string>());
    } catch (const std::exception& e) {
      r.fail(path, e.what());
    }
  }
  r.allow_keys(path, {"name", "mass", "polarizability"});
  AtomSpecies a;
  a.name = r.str(path + ".name");
  a.mass = r.quantity(path + ".mass", mass_units);
  a.polarizability = r.quantity(path + ".polarizability", au_units);
  if (!(a.mass > 0) || !(a.polarizability > 0)) r.fail(path, "mass and polarizability must be positive");
  return a;
}

ParityLabel parse_sector(const Reader& r, const std::string& path) {
  const auto s = r.str(path);
  if (s.size() != 3) r.fail(path, "sector must be three characters of + or -, e.g. \"+++\"");
  ParityLabel p;
  for (int c = 0; c < 3; ++c) {
    if (s[c] != '+' && s[c] != '-') r.fail(path, "sector must be three characters of + or -");
    p.p[c] = s[c] == '+' ? 1 : -1;
  }
  return p;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json root;
  std::map<std::string, int> lines;
  try {
    root = to_json(YAML::Load(text), "", lines);  // JSON is valid YAML flow syntax
  } catch (const YAML::Exception& e) {
    throw config_error(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.is_object()) throw config_error(origin + ": top level must be a table");
  const Reader r(root, lines, origin);
  r.allow_keys("", {"task", "atoms", "trap", "interaction", "basis", "ci", "sweep", "feshbach", "fit", "output"});

  RunConfig c;
  c.source = text;
  if (r.has("task")) {
    try {
      c.task = parse_task(r.str("task"));
    } catch (const config_error& e) {
      r.fail("task", e.what());
    }
  }

  // atoms
  const auto& atoms = r.get("atoms");
  if (!atoms.is_array() || atoms.size() != 2) r.fail("atoms", "expected a list of two atoms");
  {
    // list entries are addressed as atoms[0], atoms[1]
    auto entry = [&](int i) -> AtomSpecies {
      const std::string p = "atoms[" + std::to_string(i) + "]";
      const auto& n = atoms[static_cast<std::size_t>(i)];
      if (n.is_string()) {
        try {
          return find_atom(n.get<std::string>());
        } catch (const std::exception& e) {
          r.fail(p, e.what());
        }
      }
      json wrapped{{"atom", n}};
      const Reader sub(wrapped, {{"atom", 0}}, origin);
      try {
        return read_atom(sub, "atom");
      } catch (const config_error& e) {
        r.fail(p, e.what());
      }
    };
    c.atom1 = entry(0);
    c.atom2 = entry(1);
  }

  // trap
  r.allow_keys("trap", {"wavelength", "depth", "intensity", "taylor_orders"});
  c.wavelength_nm = r.quantity("trap.wavelength", length_units) * constants::bohr_in_nm;
  if (!(c.wavelength_nm > 0)) r.fail("trap.wavelength", "must be positive");
  const double k = wave_number(c.wavelength_nm);
  if (r.has("trap.depth") == r.has("trap.intensity")) r.fail("trap", "give exactly one of 'depth' and 'intensity'");
  if (r.has("trap.depth")) {
    const auto& d = r.get("trap.depth");
    if (!d.is_array() || d.size() != 2) r.fail("trap.depth", "expected one depth per atom");
    for (int j = 0; j < 2; ++j) {
      const std::string p = "trap.depth[" + std::to_string(j) + "]";
      const auto& n = d[static_cast<std::size_t>(j)];
      auto units = energy_units();
      if (n.is_object() && n.contains("unit") && n["unit"] == "Er") {
        if (!n.contains("reference") || !n["reference"].is_string())
          r.fail(p, "recoil units need 'reference' (atom1, atom2 or reduced)");
        const auto ref = n["reference"].get<std::string>();
        double mass = 0;
        if (ref == "atom1")
          mass = c.atom1.mass;
        else if (ref == "atom2")
          mass = c.atom2.mass;
        else if (ref == "reduced")
          mass = c.atom1.mass * c.atom2.mass / (c.atom1.mass + c.atom2.mass);
        else
          r.fail(p + ".reference", "expected atom1, atom2 or reduced");
        units["Er"] = k * k / (2.0 * mass);
      }
      json plain = n;
      if (plain.is_object()) plain.erase("reference");
      c.depth[j] = r.quantity_of(plain, p, units);
      if (!(c.depth[j] > 0)) r.fail(p, "depth must be positive");
    }
  } else {
    // V_j = I0 * alpha_j
    const double i0 = r.quantity("trap.intensity", intensity_units);
    c.depth = {i0 * c.atom1.polarizability, i0 * c.atom2.polarizability};
  }
  if (r.has("trap.taylor_orders")) {
    c.taylor_orders.clear();
    for (const auto& o : r.get("trap.taylor_orders")) {
      if (!o.is_number_integer()) r.fail("trap.taylor_orders", "expected integers");
      c.taylor_orders.push_back(o.get<int>());
    }
    for (int o : c.taylor_orders)
      try {
        check_taylor_order(o);
      } catch (const std::exception& e) {
        r.fail("trap.taylor_orders", e.what());
      }
  }

  // interaction
  if (r.has("interaction")) {
    r.allow_keys("interaction", {"kind", "synthetic", "curve_file", "long_range", "joins", "target_scattering_length",
                                 "wall_shift", "shift_window"});
    const auto kind = r.str("interaction.kind");
    if (kind == "none")
      c.interaction = InteractionKind::none;
    else if (kind == "synthetic")
      c.interaction = InteractionKind::synthetic;
    else if (kind == "table")
      c.interaction = InteractionKind::table;
    else
      r.fail("interaction.kind", "expected none, synthetic or table");
    if (c.interaction == InteractionKind::table) c.curve_file = r.str("interaction.curve_file");
    if (r.has("interaction.synthetic")) {
      r.allow_keys("interaction.synthetic", {"well_depth", "r_equilibrium", "r_start", "r_end", "step"});
      auto& s = c.synthetic;
      const auto e = energy_units();
      if (r.has("interaction.synthetic.well_depth")) s.well_depth = r.quantity("interaction.synthetic.well_depth", e);
      if (r.has("interaction.synthetic.r_equilibrium"))
        s.r_equilibrium = r.quantity("interaction.synthetic.r_equilibrium", length_units);
      if (r.has("interaction.synthetic.r_start")) s.r_start = r.quantity("interaction.synthetic.r_start", length_units);
      if (r.has("interaction.synthetic.r_end")) s.r_end = r.quantity("interaction.synthetic.r_end", length_units);
      if (r.has("interaction.synthetic.step")) s.step = r.quantity("interaction.synthetic.step", length_units);
    }
    if (r.has("interaction.long_range")) {
      r.allow_keys("interaction.long_range",
                   {"c6", "c8", "c10", "dissociation", "exchange_c", "exchange_alpha", "exchange_beta"});
      auto& l = c.long_range;
      auto opt = [&](const char* key, double& dst, const std::map<std::string, double>& u) {
        const std::string p = std::string("interaction.long_range.") + key;
        if (r.has(p)) dst = r.quantity(p, u);
      };
      opt("c6", l.c6, au_units);
      opt("c8", l.c8, au_units);
      opt("c10", l.c10, au_units);
      opt("dissociation", l.dissociation, energy_units());
      opt("exchange_c", l.exchange_c, au_units);
      opt("exchange_alpha", l.exchange_alpha, au_units);
      opt("exchange_beta", l.exchange_beta, au_units);
    }
    if (r.has("interaction.joins")) {
      r.allow_keys("interaction.joins", {"sr_end", "lr_start"});
      c.sr_end = r.quantity("interaction.joins.sr_end", length_units);
      c.lr_start = r.quantity("interaction.joins.lr_start", length_units);
    }
    if (r.has("interaction.target_scattering_length"))
      c.target_scattering_length = r.quantity("interaction.target_scattering_length", length_units);
    if (r.has("interaction.wall_shift")) c.wall_shift = r.quantity("interaction.wall_shift", length_units);
    if (c.target_scattering_length && c.wall_shift)
      r.fail("interaction", "give either target_scattering_length or wall_shift, not both");
    if (r.has("interaction.shift_window")) {
      const auto v = r.quantity_list("interaction.shift_window", length_units);
      if (v.size() != 2 || !(v[0] < v[1])) r.fail("interaction.shift_window", "expected [start, end] with start < end");
      c.shift_window = std::array<double, 2>{v[0], v[1]};
    }
  }

  // basis
  if (r.has("basis")) {
    r.allow_keys("basis", {"rel", "com", "l_max"});
    if (r.has("basis.l_max")) c.l_max = r.integer("basis.l_max");
    if (c.l_max < 0) r.fail("basis.l_max", "must be non-negative");
    if (r.has("basis.rel")) {
      r.allow_keys("basis.rel", {"wall_level", "inner_radius", "split", "outer_factor", "linear_intervals",
                                 "geometric_intervals", "order"});
      auto& b = c.rel_basis;
      if (r.has("basis.rel.wall_level")) b.wall_level = r.quantity("basis.rel.wall_level", energy_units());
      if (r.has("basis.rel.inner_radius")) b.inner_radius = r.quantity("basis.rel.inner_radius", length_units);
      if (r.has("basis.rel.split")) b.split = r.quantity("basis.rel.split", length_units);
      if (r.has("basis.rel.outer_factor")) b.outer_factor = r.number("basis.rel.outer_factor");
      if (r.has("basis.rel.linear_intervals")) b.linear_intervals = r.integer("basis.rel.linear_intervals");
      if (r.has("basis.rel.geometric_intervals")) b.geometric_intervals = r.integer("basis.rel.geometric_intervals");
      if (r.has("basis.rel.order")) b.order = r.integer("basis.rel.order");
    }
    if (r.has("basis.com")) {
      r.allow_keys("basis.com", {"outer_factor", "intervals", "order"});
      auto& b = c.com_basis;
      if (r.has("basis.com.outer_factor")) b.outer_factor = r.number("basis.com.outer_factor");
      if (r.has("basis.com.intervals")) b.intervals = r.integer("basis.com.intervals");
      if (r.has("basis.com.order")) b.order = r.integer("basis.com.order");
    }
  }

  // ci
  if (r.has("ci")) {
    r.allow_keys("ci", {"enabled", "com_orbitals", "rel_orbitals", "sector", "node_hysteresis"});
    if (r.has("ci.enabled")) c.ci = r.boolean("ci.enabled");
    if (r.has("ci.com_orbitals")) c.com_orbitals = r.integer("ci.com_orbitals");
    if (r.has("ci.rel_orbitals")) c.rel_orbitals = r.integer("ci.rel_orbitals");
    if (r.has("ci.sector")) c.sector = parse_sector(r, "ci.sector");
    if (r.has("ci.node_hysteresis")) c.node_hysteresis = r.number("ci.node_hysteresis");
    if (c.com_orbitals < 1 || c.rel_orbitals < 1) r.fail("ci", "orbital counts must be positive");
  }

  if (r.has("sweep")) {
    r.allow_keys("sweep", {"scattering_lengths"});
    c.sweep = r.quantity_list("sweep.scattering_lengths", length_units);
  }

  if (r.has("feshbach")) {
    r.allow_keys("feshbach", {"B0", "dB", "abg", "energy_dependent"});
    FeshbachParams p;
    p.B0 = r.quantity("feshbach.B0", field_units);
    p.dB = r.quantity("feshbach.dB", field_units);
    p.abg = r.quantity("feshbach.abg", length_units);
    try {
      p.validate();
    } catch (const std::exception& e) {
      r.fail("feshbach", e.what());
    }
    c.feshbach = p;
    if (r.has("feshbach.energy_dependent")) c.energy_dependent = r.boolean("feshbach.energy_dependent");
  }

  if (r.has("fit")) {
    r.allow_keys("fit", {"data_file", "synthetic_fields", "start", "free", "half_width", "grid_points"});
    if (r.has("fit.data_file")) c.data_file = r.str("fit.data_file");
    if (r.has("fit.synthetic_fields")) c.synthetic_fields = r.quantity_list("fit.synthetic_fields", field_units);
    if (r.has("fit.start")) {
      r.allow_keys("fit.start", {"B0", "dB", "abg"});
      FeshbachParams s = c.feshbach.value_or(FeshbachParams{});
      if (r.has("fit.start.B0")) s.B0 = r.quantity("fit.start.B0", field_units);
      if (r.has("fit.start.dB")) s.dB = r.quantity("fit.start.dB", field_units);
      if (r.has("fit.start.abg")) s.abg = r.quantity("fit.start.abg", length_units);
      c.fit_start = s;
    }
    if (r.has("fit.free")) {
      c.fit.free.clear();
      for (const auto& f : r.get("fit.free")) {
        if (!f.is_string()) r.fail("fit.free", "expected parameter names");
        try {
          c.fit.free.push_back(parse_fit_parameter(f.get<std::string>()));
        } catch (const std::exception& e) {
          r.fail("fit.free", e.what());
        }
      }
    }
    if (r.has("fit.half_width")) {
      r.allow_keys("fit.half_width", {"B0", "dB", "abg"});
      if (r.has("fit.half_width.B0")) c.fit.half_width[FitParameter::B0] = r.quantity("fit.half_width.B0", field_units);
      if (r.has("fit.half_width.dB")) c.fit.half_width[FitParameter::dB] = r.quantity("fit.half_width.dB", field_units);
      if (r.has("fit.half_width.abg"))
        c.fit.half_width[FitParameter::abg] = r.quantity("fit.half_width.abg", length_units);
    }
    if (r.has("fit.grid_points")) c.fit.grid_points = r.integer("fit.grid_points");
  }

  if (r.has("output")) {
    r.allow_keys("output", {"directory", "states", "tags", "density_points_per_interval", "cut_points", "cut_tag"});
    if (r.has("output.directory")) c.output_dir = r.str("output.directory");
    if (r.has("output.states")) c.states = r.integer("output.states");
    if (r.has("output.tags")) {
      c.tags.clear();
      for (const auto& t : r.get("output.tags")) {
        if (!t.is_string() || (t != "lb" && t != "1ti")) r.fail("output.tags", "tags are lb and 1ti");
        c.tags.push_back(t.get<std::string>());
      }
    }
    if (r.has("output.density_points_per_interval"))
      c.density_points_per_interval = r.integer("output.density_points_per_interval");
    if (r.has("output.cut_points")) c.cut_points = r.integer("output.cut_points");
    if (r.has("output.cut_tag")) c.cut_tag = r.str("output.cut_tag");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse_config(ss.str(), path);
  c.path = path;
  return c;
}

}  // namespace latpair
