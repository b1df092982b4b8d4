#pragma once

// End-to-end computations driven by a RunConfig: interaction tuning, orbital
// solves per Taylor order, CI, ledgers, and the task runners behind the CLI.

#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "latpair/ci.hpp"
#include "latpair/config.hpp"
#include "latpair/feshbach.hpp"
#include "latpair/observables.hpp"
#include "latpair/scattering.hpp"
#include "latpair/solver.hpp"

namespace latpair {

/// Interaction prepared for one target scattering length.
struct PreparedInteraction {
  std::optional<PotentialCurve> curve;  // empty: non-interacting
  double shift = 0.0;
  std::optional<double> scattering_length;
  int bound_states = 0;
  int evaluations = 0;
};

/// All results of one Taylor order at one interaction.
struct LevelSolve {
  int order = 2;
  SeparatedLatticePolynomial poly;
  std::shared_ptr<const std::vector<Orbital>> com, rel;  // CI-retained orbitals
  std::optional<Classification> classification;
  TagTargets targets;
  std::vector<Configuration> configs;
  std::vector<CIState> states;  // empty when CI is disabled
  std::vector<double> uncoupled;  // configuration energies, ascending
  double max_residual = 0.0;
  int rel_basis_size = 0, com_basis_size = 0;

  /// Uncoupled energy of a tagged state (COM ground + tagged REL orbital).
  std::optional<double> uncoupled_energy(const std::string& tag) const;
  std::optional<double> ci_energy(const std::string& tag) const;
  PairWavefunction product_state(const std::string& tag, double mu1, double mu2) const;
  PairWavefunction ci_state(const std::string& tag, double mu1, double mu2) const;
};

struct PointSolve {
  PairParameters pair;  // harmonic frequencies of the configured lattice
  PreparedInteraction interaction;
  std::map<int, LevelSolve> levels;  // by Taylor order
  std::vector<EnergyLedger> ledgers;  // lb / 1ti when n = 2 and 6 and CI are present
};

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const PairParameters& pair() const { return pair_; }

  /// Curve tuned to a (or at the configured shift when a is empty).
  PreparedInteraction prepare(std::optional<double> a) const;
  LevelSolve solve_level(const PreparedInteraction& in, int order) const;
  PointSolve solve_point(std::optional<double> a) const;
  /// Independent points, distributed over cfg.threads workers.
  std::vector<PointSolve> solve_points(const std::vector<double>& a) const;

 private:
  RunConfig cfg_;
  PairParameters pair_;
  std::optional<PotentialCurve> base_curve_;
};

/// Number formatting used by every artifact (17 significant digits).
std::string format_double(double v);

struct RunReport {
  std::vector<std::string> files;
  std::string manifest;
};

/// Executes cfg.task and writes artifacts into cfg.output_dir.
RunReport run(const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace latpair
