#include "latpair/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "latpair/version.hpp"

namespace latpair {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

// ---------------------------------------------------------------------------
// LevelSolve accessors

std::optional<double> LevelSolve::uncoupled_energy(const std::string& tag) const {
  const auto j = tag == "lb" ? targets.lb : targets.ti;
  if (!j) return std::nullopt;
  return (*com)[targets.com_ground].energy + (*rel)[*j].energy;
}

std::optional<double> LevelSolve::ci_energy(const std::string& tag) const {
  for (const auto& s : states)
    if (s.tag == tag) return s.energy;
  return std::nullopt;
}

PairWavefunction LevelSolve::product_state(const std::string& tag, double mu1, double mu2) const {
  const auto j = tag == "lb" ? targets.lb : targets.ti;
  if (!j) throw classification_error("no REL orbital tagged " + tag);
  auto w = PairWavefunction::product(com, rel, targets.com_ground, *j, mu1, mu2);
  w.tag = tag;
  w.level = "E" + std::to_string(order);
  return w;
}

PairWavefunction LevelSolve::ci_state(const std::string& tag, double mu1, double mu2) const {
  auto w = PairWavefunction::from_ci(find_tag(states, tag), configs, com, rel, mu1, mu2);
  w.level = "CI" + std::to_string(order);
  return w;
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {
  pair_ = derive_pair_parameters(cfg_.atom1, cfg_.atom2, cfg_.trap(2));
  if (cfg_.interaction != InteractionKind::none) {
    const RadialTable sr = cfg_.interaction == InteractionKind::synthetic
                               ? synthetic_short_range(cfg_.synthetic, cfg_.long_range)
                               : read_curve_file(cfg_.curve_file);
    base_curve_ = build_interaction(sr, cfg_.long_range, cfg_.sr_end, cfg_.lr_start);
  }
}

PreparedInteraction Pipeline::prepare(std::optional<double> a) const {
  PreparedInteraction in;
  if (!base_curve_) return in;
  std::optional<WallWindow> window;
  if (cfg_.shift_window) window = WallWindow{(*cfg_.shift_window)[0], (*cfg_.shift_window)[1]};
  if (!a) a = cfg_.target_scattering_length;
  if (a) {
    TuningOptions o;
    o.length_scale = pair_.oscillator_length();
    o.window = window;
    auto t = tune_to_scattering_length(*base_curve_, pair_.reduced_mass, *a, o);
    in.curve = std::move(t.curve);
    in.shift = t.shift;
    in.scattering_length = t.scattering.scattering_length;
    in.bound_states = t.scattering.nodes;
    in.evaluations = t.evaluations;
  } else {
    in.shift = cfg_.wall_shift.value_or(0.0);
    in.curve = base_curve_->shifted(in.shift, window);
    const auto s = extract_scattering_length(*in.curve, pair_.reduced_mass);
    in.scattering_length = s.scattering_length;
    in.bound_states = s.nodes;
    in.evaluations = 1;
  }
  return in;
}

LevelSolve Pipeline::solve_level(const PreparedInteraction& in, int order) const {
  LevelSolve L;
  L.order = order;
  const TrapSpec trap = cfg_.trap(order);
  L.poly = separate_lattice(trap, pair_);
  const double half = nm_to_bohr(cfg_.wavelength_nm) / 2.0;

  const auto& rb = cfg_.rel_basis;
  const double rin = in.curve ? in.curve->wall_radius(rb.wall_level) : rb.inner_radius;
  auto rel_basis = std::make_shared<const BSplineBasis>(KnotSequence::composite(
      rin, std::max(rb.split, rin + 1.0), rb.outer_factor * half, rb.linear_intervals, rb.geometric_intervals, rb.order));
  const auto& cb = cfg_.com_basis;
  auto com_basis =
      std::make_shared<const BSplineBasis>(KnotSequence::linear(0.0, cb.outer_factor * half, cb.intervals, cb.order));
  L.rel_basis_size = rel_basis->size();
  L.com_basis_size = com_basis->size();

  EigensolveOptions eo;
  eo.node_hysteresis = cfg_.node_hysteresis;
  std::function<double(double)> v;
  if (in.curve) {
    const PotentialCurve curve = *in.curve;
    v = [curve](double r) { return curve(r); };
  }
  auto rel_all = solve_sectors(rel_spec(L.poly, pair_.reduced_mass, rel_basis, v, cfg_.l_max), all_sectors(), eo);
  auto com_all = solve_sectors(com_spec(L.poly, pair_.total_mass, com_basis, cfg_.l_max), all_sectors(), eo);

  double floor = -std::numeric_limits<double>::infinity();
  if (in.curve && in.bound_states > 0) {
    L.classification = classify(rel_all, in.bound_states);
    floor = rel_all[L.classification->lb].energy;
  }
  auto com = select_orbitals(com_all, cfg_.com_orbitals);
  auto rel = select_orbitals(rel_all, cfg_.rel_orbitals, floor);
  for (const auto& o : com) L.max_residual = std::max(L.max_residual, o.residual);
  for (const auto& o : rel) L.max_residual = std::max(L.max_residual, o.residual);
  L.targets = TagTargets::from_orbitals(com, rel);
  L.com = std::make_shared<const std::vector<Orbital>>(std::move(com));
  L.rel = std::make_shared<const std::vector<Orbital>>(std::move(rel));

  L.configs = build_configurations(*L.com, *L.rel, cfg_.sector);
  for (const auto& k : L.configs) L.uncoupled.push_back((*L.com)[k.com].energy + (*L.rel)[k.rel].energy);
  std::sort(L.uncoupled.begin(), L.uncoupled.end());
  if (cfg_.ci) {
    const Eigen::MatrixXd H = ci_hamiltonian(L.configs, *L.com, *L.rel, L.poly);
    L.states = diagonalize_ci(H, L.configs, L.targets, order);
  }
  return L;
}

PointSolve Pipeline::solve_point(std::optional<double> a) const {
  PointSolve p;
  p.pair = pair_;
  p.interaction = prepare(a);
  p.pair.scattering_length = p.interaction.scattering_length;
  for (int order : cfg_.taylor_orders) p.levels.emplace(order, solve_level(p.interaction, order));
  if (cfg_.ci && p.levels.count(2) && p.levels.count(6)) {
    const auto& l2 = p.levels.at(2);
    const auto& l6 = p.levels.at(6);
    for (const auto& tag : cfg_.tags) {
      if (!l2.uncoupled_energy(tag) || !l6.uncoupled_energy(tag)) continue;
      p.ledgers.push_back(EnergyLedger::make(tag, l2.uncoupled_energy(tag), l6.uncoupled_energy(tag),
                                             l2.ci_energy(tag), l6.ci_energy(tag)));
    }
  }
  return p;
}

std::vector<PointSolve> Pipeline::solve_points(const std::vector<double>& a) const {
  std::vector<std::optional<PointSolve>> out(a.size());
  std::vector<std::exception_ptr> errors(a.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < a.size();) {
      try {
        out[i] = solve_point(a[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(cfg_.threads, static_cast<int>(a.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<PointSolve> res;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        throw std::runtime_error("sweep point a_sc = " + format_double(a[i]) + " a0: " + e.what());
      }
    }
    res.push_back(std::move(*out[i]));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Artifact writers

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, RunReport& report) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    report.files.push_back(path.filename().string());
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  std::ofstream out_;
};

std::string level_label(bool ci, int order) { return (ci ? "CI" : "E") + std::to_string(order); }

void write_energies(CsvWriter& w, const PointSolve& p, int states) {
  const double omega = p.pair.omega_rel.value_or(0.0);
  const double a = p.interaction.scattering_length.value_or(0.0);
  auto emit = [&](const std::string& level, int index, const std::string& tag, double e) {
    w.row(level, a, index, tag, e, hartree_to_khz(e), omega > 0 ? e / omega : 0.0);
  };
  for (const auto& [order, L] : p.levels) {
    // uncoupled configuration energies
    for (int i = 0; i < std::min<int>(states, static_cast<int>(L.uncoupled.size())); ++i)
      emit(level_label(false, order), i, "", L.uncoupled[i]);
    for (const char* tag : {"lb", "1ti"})
      if (const auto e = L.uncoupled_energy(tag)) emit(level_label(false, order), -1, tag, *e);
    for (int i = 0; i < static_cast<int>(L.states.size()); ++i) {
      const auto& s = L.states[i];
      if (i < states || s.tag != "other") emit(level_label(true, order), i, s.tag == "other" ? "" : s.tag, s.energy);
    }
  }
}

void write_ledger_header(CsvWriter& w) {
  w.row("a_sc_bohr", "tag", "E2_hartree", "E6_hartree", "CI2_hartree", "CI6_hartree", "geom_kHz", "coup2_kHz",
        "coup6_kHz", "tot_kHz", "geom_omega", "coup2_omega", "coup6_omega", "tot_omega");
}

void write_ledger(CsvWriter& w, const PointSolve& p) {
  const double om = p.pair.omega_rel.value_or(1.0);
  for (const auto& l : p.ledgers)
    w.row(p.interaction.scattering_length.value_or(0.0), l.tag, l.E2, l.E6, l.CE2, l.CE6, l.geom_khz(), l.coup2_khz(),
          l.coup6_khz(), l.tot_khz(), l.geom / om, l.coup2 / om, l.coup6 / om, l.tot / om);
}

ordered_json point_diagnostics(const PointSolve& p) {
  ordered_json d;
  d["scattering_length_bohr"] = p.interaction.scattering_length.value_or(0.0);
  d["wall_shift_bohr"] = p.interaction.shift;
  d["trap_free_bound_states"] = p.interaction.bound_states;
  d["tuning_evaluations"] = p.interaction.evaluations;
  for (const auto& [order, L] : p.levels) {
    ordered_json l;
    l["rel_basis_size"] = L.rel_basis_size;
    l["com_basis_size"] = L.com_basis_size;
    l["com_orbitals"] = L.com->size();
    l["rel_orbitals"] = L.rel->size();
    l["configurations"] = L.configs.size();
    l["max_orbital_residual_hartree"] = L.max_residual;
    ordered_json warn = ordered_json::array();
    for (const auto& s : L.states)
      if (!s.warning.empty()) warn.push_back(s.tag + ": " + s.warning);
    l["tag_warnings"] = warn;
    d["order_" + std::to_string(order)] = l;
  }
  return d;
}

/// Energies (hartree) that feed the binding-energy branches: CI at the highest
/// order when available, otherwise uncoupled.
LevelSample level_sample(const PointSolve& p) {
  const auto& L = p.levels.rbegin()->second;
  auto pick = [&](const char* tag) {
    auto e = L.states.empty() ? L.uncoupled_energy(tag) : L.ci_energy(tag);
    if (!e) throw classification_error(std::string("no ") + tag + " state at a_sc = " +
                                       format_double(p.interaction.scattering_length.value_or(0.0)));
    return *e;
  };
  return {p.interaction.scattering_length.value_or(0.0), pick("lb"), pick("1ti")};
}

std::vector<LevelSample> sweep_samples(const std::vector<PointSolve>& pts, const RunConfig& cfg) {
  std::vector<LevelSample> s;
  std::vector<double> harmonic;
  for (const auto& p : pts) {
    s.push_back(level_sample(p));
    if (cfg.energy_dependent) {
      if (!p.levels.count(2)) throw config_error("energy-dependent mapping needs Taylor order 2 in trap.taylor_orders");
      const auto& L2 = p.levels.at(2);
      if (!L2.targets.ti) throw classification_error("no harmonic 1ti orbital for the energy-dependent mapping");
      harmonic.push_back((*L2.rel)[*L2.targets.ti].energy / p.pair.omega_rel.value());
    }
  }
  if (cfg.energy_dependent && !pts.empty())
    s = remap_energy_dependent(std::move(s), harmonic, pts.front().pair.oscillator_length());
  return s;
}

void write_density(const fs::path& dir, RunReport& report, const PairWavefunction& w, int per_interval) {
  const auto& B = w.rel_basis();
  std::vector<double> grid;
  const auto& bp = B.knots().breakpoints();
  for (std::size_t i = 0; i + 1 < bp.size(); ++i)
    for (int k = 0; k < per_interval; ++k) grid.push_back(bp[i] + (bp[i + 1] - bp[i]) * k / per_interval);
  grid.push_back(bp.back());
  const auto d = radial_pair_density(w, grid);
  CsvWriter out(dir / ("density_" + w.tag + "_" + w.level + ".csv"), report);
  out.row("r_bohr", "rho_per_bohr");
  for (std::size_t i = 0; i < d.r.size(); ++i) out.row(d.r[i], d.rho[i]);
}

void write_cut(const fs::path& dir, RunReport& report, const AbsoluteCut& c, const std::string& kind) {
  CsvWriter out(dir / ("cut_" + kind + ".csv"), report);
  out.row("x1_bohr", "x2_bohr", "value");
  for (std::size_t i = 0; i < c.x1.size(); ++i)
    for (std::size_t j = 0; j < c.x2.size(); ++j)
      out.row(c.x1[i], c.x2[j], c.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
}

std::vector<double> with_background(std::vector<double> a, const RunConfig& cfg) {
  if (cfg.feshbach && std::find(a.begin(), a.end(), cfg.feshbach->abg) == a.end()) a.push_back(cfg.feshbach->abg);
  std::sort(a.begin(), a.end());
  return a;
}

ordered_json params_json(const FeshbachParams& p) {
  return ordered_json{{"B0_gauss", p.B0}, {"dB_gauss", p.dB}, {"abg_bohr", p.abg}};
}

}  // namespace

RunReport run(const RunConfig& cfg, std::ostream* log) {
  RunReport report;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  auto say = [&](const std::string& s) {
    if (log) *log << s << std::endl;
  };
  Pipeline pipe(cfg);
  ordered_json manifest;
  manifest["program"] = "latpair";
  manifest["version"] = version_string;
  manifest["task"] = to_string(cfg.task);
  manifest["config_path"] = cfg.path;
  manifest["config_sha1"] = config_hash(cfg.source);
  manifest["omega_rel_kHz"] = pipe.pair().omega_rel ? pipe.pair().omega_rel_khz() : 0.0;
  manifest["omega_com_kHz"] = pipe.pair().omega_com ? pipe.pair().omega_com_khz() : 0.0;
  ordered_json diag = ordered_json::array();

  auto single = [&]() {
    say("solving at a_sc = " + (cfg.target_scattering_length ? format_double(*cfg.target_scattering_length) : "config"));
    auto p = pipe.solve_point(std::nullopt);
    diag.push_back(point_diagnostics(p));
    return p;
  };
  auto sweep = [&](std::vector<double> a) {
    if (a.empty()) throw config_error("task needs sweep.scattering_lengths");
    say("sweeping " + std::to_string(a.size()) + " scattering lengths on " + std::to_string(cfg.threads) + " thread(s)");
    auto pts = pipe.solve_points(a);
    for (const auto& p : pts) diag.push_back(point_diagnostics(p));
    return pts;
  };
  auto energies_header = [](CsvWriter& w) {
    w.row("level", "a_sc_bohr", "index", "tag", "energy_hartree", "energy_kHz", "energy_omega");
  };

  switch (cfg.task) {
    case Task::solve: {
      const auto p = single();
      CsvWriter e(dir / "energies.csv", report);
      energies_header(e);
      write_energies(e, p, cfg.states);
      if (!p.ledgers.empty()) {
        CsvWriter l(dir / "ledger.csv", report);
        write_ledger_header(l);
        write_ledger(l, p);
      }
      break;
    }
    case Task::sweep: {
      const auto pts = sweep(cfg.sweep);
      CsvWriter e(dir / "energies.csv", report);
      energies_header(e);
      for (const auto& p : pts) write_energies(e, p, cfg.states);
      CsvWriter l(dir / "ledger.csv", report);
      write_ledger_header(l);
      for (const auto& p : pts) write_ledger(l, p);
      break;
    }
    case Task::densities: {
      const auto p = single();
      const double m1 = p.pair.mu1, m2 = p.pair.mu2;
      for (const auto& tag : cfg.tags)
        for (const auto& [order, L] : p.levels) {
          write_density(dir, report, L.product_state(tag, m1, m2), cfg.density_points_per_interval);
          if (!L.states.empty()) write_density(dir, report, L.ci_state(tag, m1, m2), cfg.density_points_per_interval);
        }
      break;
    }
    case Task::cuts: {
      const auto p = single();
      if (!p.levels.count(2) || !p.levels.count(6) || !cfg.ci)
        throw config_error("cuts need Taylor orders 2 and 6 with CI enabled");
      const double m1 = p.pair.mu1, m2 = p.pair.mu2;
      const auto grid = symmetric_grid(nm_to_bohr(cfg.wavelength_nm) / 2.0, cfg.cut_points);
      const auto& l2 = p.levels.at(2);
      const auto& l6 = p.levels.at(6);
      LevelCuts c{evaluate_cut(l2.product_state(cfg.cut_tag, m1, m2), grid, grid),
                  evaluate_cut(l6.product_state(cfg.cut_tag, m1, m2), grid, grid),
                  evaluate_cut(l2.ci_state(cfg.cut_tag, m1, m2), grid, grid),
                  evaluate_cut(l6.ci_state(cfg.cut_tag, m1, m2), grid, grid)};
      for (auto k : {DifferenceKind::geom, DifferenceKind::coup2, DifferenceKind::coup6, DifferenceKind::tot})
        write_cut(dir, report, absolute_cut(c, k), to_string(k));
      break;
    }
    case Task::map: {
      if (!cfg.feshbach) throw config_error("task map needs the feshbach table");
      const auto pts = sweep(with_background(cfg.sweep, cfg));
      auto samples = sweep_samples(pts, cfg);
      std::optional<double> anchor;
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (std::abs(pts[i].interaction.scattering_length.value_or(0.0) - cfg.feshbach->abg) <=
            1e-5 * std::max(std::abs(cfg.feshbach->abg), pts[i].pair.oscillator_length()))
          anchor = samples[i].ti;
      const auto curve = binding_energy_curve(samples, anchor, *cfg.feshbach);
      CsvWriter out(dir / "curve.csv", report);
      out.row("a_sc_bohr", "B_gauss", "E_b_hartree", "E_b_kHz", "branch");
      for (const auto& pt : curve.points) out.row(pt.a, pt.B, pt.energy, hartree_to_khz(pt.energy), to_string(pt.branch));
      break;
    }
    case Task::fit: {
      if (!cfg.feshbach) throw config_error("task fit needs the feshbach table (reference parameters)");
      const auto pts = sweep(with_background(cfg.sweep, cfg));
      const CurveFamily family(sweep_samples(pts, cfg), pts.front().pair.oscillator_length());
      std::vector<ExperimentalPoint> data;
      std::string source;
      if (!cfg.data_file.empty()) {
        data = read_experimental_csv(cfg.data_file);
        source = cfg.data_file;
      } else if (!cfg.synthetic_fields.empty()) {
        for (double B : cfg.synthetic_fields) {
          const double a = a_of_B(*cfg.feshbach, B);
          const Branch br = a < 0 ? Branch::CIM : Branch::RIP;
          data.push_back({B, model_binding_khz(family, *cfg.feshbach, B, br), br, std::nullopt});
        }
        source = "synthetic";
      } else {
        throw config_error("task fit needs fit.data_file or fit.synthetic_fields");
      }
      const FeshbachParams start = cfg.fit_start.value_or(*cfg.feshbach);
      const auto res = fit_resonance(family, data, start, cfg.fit);
      ordered_json j;
      j["data"] = source;
      j["points"] = data.size();
      j["start"] = params_json(start);
      j["fitted"] = params_json(res.params);
      j["free"] = ordered_json::array();
      for (auto f : res.free) j["free"].push_back(to_string(f));
      j["objective"] = res.objective;
      j["iterations"] = res.iterations;
      ordered_json cov = ordered_json::array();
      for (Eigen::Index r = 0; r < res.covariance.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < res.covariance.cols(); ++c) row.push_back(res.covariance(r, c));
        cov.push_back(row);
      }
      j["covariance"] = cov;
      ordered_json per = ordered_json::array();
      for (std::size_t i = 0; i < data.size(); ++i)
        per.push_back({{"B_gauss", data[i].B}, {"E_b_kHz", data[i].energy}, {"branch", to_string(data[i].branch)},
                       {"delta", res.deltas[i]}});
      j["per_point"] = per;
      j["reference"] = params_json(*cfg.feshbach);
      try {
        j["reference_objective"] = fit_objective(family, *cfg.feshbach, data);
      } catch (const std::exception& e) {
        j["reference_objective"] = std::string("not evaluable: ") + e.what();
      }
      std::ofstream out(dir / "fit.json");
      out << std::setprecision(17) << j.dump(2) << '\n';
      report.files.push_back("fit.json");
      break;
    }
  }
  manifest["diagnostics"] = diag;
  manifest["files"] = report.files;
  report.manifest = (dir / "manifest.json").string();
  std::ofstream(report.manifest) << manifest.dump(2) << '\n';
  return report;
}

}  // namespace latpair
