#pragma once

// Run configuration: a YAML (or JSON) document resolved into atomic units.
// Every physical quantity is written as {value: ..., unit: ...}.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latpair/angular.hpp"
#include "latpair/feshbach.hpp"
#include "latpair/potentials.hpp"
#include "latpair/quantities.hpp"

namespace latpair {

enum class Task { solve, sweep, densities, cuts, map, fit };

Task parse_task(const std::string& s);
const char* to_string(Task t);

struct RelBasisConfig {
  double wall_level = 0.05;       // hartree; inner boundary where the wall reaches this energy
  double inner_radius = 0.0;      // bohr; used without interaction
  double split = 20.0;            // bohr; linear/geometric junction
  double outer_factor = 1.2;      // outer radius in units of lambda/2
  int linear_intervals = 200;
  int geometric_intervals = 100;
  int order = 8;
};

struct ComBasisConfig {
  double outer_factor = 1.0;
  int intervals = 60;
  int order = 8;
};

enum class InteractionKind { none, synthetic, table };

struct RunConfig {
  std::string source;  // document text, hashed into the manifest
  std::string path;

  AtomSpecies atom1, atom2;

  double wavelength_nm = 0.0;
  std::array<double, 2> depth{};  // hartree, per atom
  std::vector<int> taylor_orders{2, 6};

  InteractionKind interaction = InteractionKind::none;
  SyntheticShortRange synthetic;
  std::string curve_file;
  LongRangeParams long_range = LongRangeParams::rbk_triplet(4.27e5, 4.9e7);
  double sr_end = 18.2, lr_start = 18.6;  // bohr
  std::optional<double> target_scattering_length;  // bohr
  std::optional<double> wall_shift;                // bohr
  std::optional<std::array<double, 2>> shift_window;

  RelBasisConfig rel_basis;
  ComBasisConfig com_basis;
  int l_max = 3;

  bool ci = true;
  int com_orbitals = 60;
  int rel_orbitals = 120;
  ParityLabel sector;
  double node_hysteresis = 1e-8;

  std::vector<double> sweep;  // scattering lengths, bohr

  std::optional<FeshbachParams> feshbach;
  bool energy_dependent = false;
  std::string data_file;
  std::vector<double> synthetic_fields;  // gauss; synthetic data for the fit task
  std::optional<FeshbachParams> fit_start;
  FitOptions fit;

  Task task = Task::solve;
  std::string output_dir = "out";
  int states = 10;              // lowest states listed per level in energies.csv
  std::vector<std::string> tags{"lb", "1ti"};
  int density_points_per_interval = 16;
  int cut_points = 201;
  std::string cut_tag = "1ti";
  int threads = 1;

  /// Lattice of the given Taylor order.
  TrapSpec trap(int order) const;
};

/// Parses a YAML or JSON document. `origin` names it in error messages.
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::string& path);

/// Hex SHA-1 of the document text.
std::string config_hash(const std::string& text);

}  // namespace latpair
