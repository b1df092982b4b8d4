#pragma once

// Units, constants, atom catalog and derived trap parameters.
//
// Everything inside the library is in Hartree atomic units. Conversions to
// laboratory units (kHz, nm, Gauss) happen only at I/O boundaries through
// convert() and the accessors on PairParameters.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latpair/errors.hpp"

namespace latpair {

namespace constants {
// CODATA 2018
inline constexpr double hartree_in_hz = 6.579683920502e15;  // E_h / h
inline constexpr double bohr_in_nm = 0.0529177210903;
inline constexpr double dalton_in_me = 1822.888486209;
inline constexpr double gauss_per_au_field = 2.35051756758e9;
inline constexpr double au_intensity_w_per_cm2 = 3.50944758e16;
inline constexpr double pi = std::numbers::pi;
}  // namespace constants

struct AtomSpecies {
  std::string name;
  double mass = 0.0;            // electron masses
  double polarizability = 0.0;  // a0^3

  void validate() const {
    if (!(mass > 0.0)) throw domain_error("atom '" + name + "': mass must be positive");
    if (!(polarizability > 0.0))
      throw domain_error("atom '" + name + "': polarizability must be positive");
  }
};

/// Isotope masses (AME) and static dipole polarizabilities. Rb and K use the
/// values quoted for the RbK lattice experiment (324 and 301 a.u.).
inline const std::vector<AtomSpecies>& atom_catalog() {
  using constants::dalton_in_me;
  static const std::vector<AtomSpecies> catalog = {
      {"Rb87", 86.909180531 * dalton_in_me, 324.0},
      {"K40", 39.963998166 * dalton_in_me, 301.0},
      {"Li6", 6.0151228874 * dalton_in_me, 164.1},
      {"Li7", 7.0160034366 * dalton_in_me, 164.1},
      {"Cs133", 132.905451961 * dalton_in_me, 401.0},
  };
  return catalog;
}

inline AtomSpecies find_atom(std::string_view name) {
  for (const auto& a : atom_catalog())
    if (a.name == name) return a;
  throw domain_error("unknown atom '" + std::string(name) + "' (catalog: Rb87 K40 Li6 Li7 Cs133)");
}

inline double wave_number(double wavelength_nm) {
  return 2.0 * constants::pi / (wavelength_nm / constants::bohr_in_nm);
}

/// k^2 / (2 m) in hartree.
inline double recoil_energy(double mass, double wavelength_nm) {
  const double k = wave_number(wavelength_nm);
  return k * k / (2.0 * mass);
}

/// Lattice V_trap,j = sum_c V_c^j sin^2(k_c c_j), Taylor-truncated at degree taylor_order.
struct TrapSpec {
  std::array<double, 3> wavelength_nm{};
  /// depth[j][c]: depth felt by atom j along axis c, hartree.
  std::array<std::array<double, 3>, 2> depth{};
  int taylor_order = 6;

  void validate() const {
    for (double l : wavelength_nm)
      if (!(l > 0.0)) throw domain_error("trap wavelength must be positive");
    for (const auto& d : depth)
      for (double v : d)
        if (!(v > 0.0)) throw domain_error("trap depth must be positive");
    if (taylor_order < 2 || taylor_order % 2 != 0)
      throw domain_error("taylor order must be an even integer >= 2");
  }

  double k(int axis) const { return wave_number(wavelength_nm[axis]); }

  bool isotropic() const {
    auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(a); };
    for (int c = 1; c < 3; ++c) {
      if (!same(wavelength_nm[0], wavelength_nm[c])) return false;
      for (int j = 0; j < 2; ++j)
        if (!same(depth[j][0], depth[j][c])) return false;
    }
    return true;
  }

  /// Cubic lattice, depths given per atom in hartree.
  static TrapSpec cubic(double wavelength_nm, double depth1, double depth2, int order) {
    TrapSpec t;
    t.wavelength_nm = {wavelength_nm, wavelength_nm, wavelength_nm};
    t.depth[0] = {depth1, depth1, depth1};
    t.depth[1] = {depth2, depth2, depth2};
    t.taylor_order = order;
    return t;
  }

  /// Cubic lattice from a laser intensity (atomic units) and the polarizabilities: V_j = I0 * alpha_j.
  static TrapSpec from_intensity(double wavelength_nm, double intensity_au, const AtomSpecies& a1,
                                 const AtomSpecies& a2, int order) {
    return cubic(wavelength_nm, intensity_au * a1.polarizability, intensity_au * a2.polarizability, order);
  }
};

struct PairParameters {
  double mass1 = 0, mass2 = 0;
  double reduced_mass = 0;  // mu
  double total_mass = 0;    // M
  double mu1 = 0;           // mu / m2
  double mu2 = 0;           // mu / m1
  std::array<double, 2> recoil{};  // E_r per atom at the x-axis wavelength
  /// Mean frequencies; unavailable for anisotropic traps.
  std::optional<double> omega_rel;  // omega_ho
  std::optional<double> omega_com;  // Omega_ho
  std::optional<double> scattering_length;

  double oscillator_length() const {
    if (!omega_rel) throw domain_error("oscillator length needs the mean REL frequency (isotropic trap)");
    return 1.0 / std::sqrt(reduced_mass * *omega_rel);
  }
  std::optional<double> xi() const {
    if (!scattering_length || !omega_rel) return std::nullopt;
    return *scattering_length / oscillator_length();
  }
  double omega_rel_khz() const { return omega_rel.value() * constants::hartree_in_hz * 1e-3; }
  double omega_com_khz() const { return omega_com.value() * constants::hartree_in_hz * 1e-3; }
};

/// Mean harmonic frequencies of one lattice site:
///   omega_ho = k sqrt(2 (V1 mu2^2 + V2 mu1^2) / mu),  Omega_ho = k sqrt(2 (V1 + V2) / M).
inline PairParameters derive_pair_parameters(const AtomSpecies& a1, const AtomSpecies& a2,
                                             const TrapSpec& trap,
                                             std::optional<double> scattering_length = std::nullopt) {
  a1.validate();
  a2.validate();
  trap.validate();
  PairParameters p;
  p.mass1 = a1.mass;
  p.mass2 = a2.mass;
  p.total_mass = a1.mass + a2.mass;
  p.reduced_mass = a1.mass * a2.mass / p.total_mass;
  p.mu1 = a1.mass / p.total_mass;
  p.mu2 = a2.mass / p.total_mass;
  p.recoil = {recoil_energy(a1.mass, trap.wavelength_nm[0]), recoil_energy(a2.mass, trap.wavelength_nm[0])};
  p.scattering_length = scattering_length;
  if (trap.isotropic()) {
    const double k = trap.k(0);
    const double v1 = trap.depth[0][0];
    const double v2 = trap.depth[1][0];
    p.omega_rel = k * std::sqrt(2.0 * (v1 * p.mu2 * p.mu2 + v2 * p.mu1 * p.mu1) / p.reduced_mass);
    p.omega_com = k * std::sqrt(2.0 * (v1 + v2) / p.total_mass);
  }
  return p;
}

enum class Unit { hartree, hertz, kilohertz, recoil, bohr, nanometer, gauss, tesla };

inline Unit parse_unit(std::string_view s) {
  if (s == "hartree" || s == "Eh") return Unit::hartree;
  if (s == "Hz") return Unit::hertz;
  if (s == "kHz") return Unit::kilohertz;
  if (s == "Er" || s == "recoil") return Unit::recoil;
  if (s == "a0" || s == "bohr") return Unit::bohr;
  if (s == "nm") return Unit::nanometer;
  if (s == "G" || s == "gauss") return Unit::gauss;
  if (s == "T" || s == "tesla") return Unit::tesla;
  throw domain_error("unknown unit '" + std::string(s) + "'");
}

namespace detail {
enum class Dimension { energy, length, field };

inline Dimension dimension_of(Unit u) {
  switch (u) {
    case Unit::hartree:
    case Unit::hertz:
    case Unit::kilohertz:
    case Unit::recoil: return Dimension::energy;
    case Unit::bohr:
    case Unit::nanometer: return Dimension::length;
    case Unit::gauss:
    case Unit::tesla: return Dimension::field;
  }
  return Dimension::energy;
}

// Factor taking a value in `u` to the base unit of its dimension (hartree, a0, Gauss).
inline double to_base(Unit u, std::optional<double> recoil_hartree) {
  switch (u) {
    case Unit::hartree: return 1.0;
    case Unit::hertz: return 1.0 / constants::hartree_in_hz;
    case Unit::kilohertz: return 1e3 / constants::hartree_in_hz;
    case Unit::recoil:
      if (!recoil_hartree) throw domain_error("recoil-energy conversion needs a recoil energy");
      return *recoil_hartree;
    case Unit::bohr: return 1.0;
    case Unit::nanometer: return 1.0 / constants::bohr_in_nm;
    case Unit::gauss: return 1.0;
    case Unit::tesla: return 1e4;
  }
  return 1.0;
}
}  // namespace detail

/// Linear conversion between units of the same dimension. Conversions involving
/// recoil energies need the recoil energy (hartree) of the reference atom.
inline double convert(double value, Unit from, Unit to, std::optional<double> recoil_hartree = std::nullopt) {
  if (detail::dimension_of(from) != detail::dimension_of(to))
    throw domain_error("cannot convert between units of different dimension");
  if (from == to) return value;
  return value * detail::to_base(from, recoil_hartree) / detail::to_base(to, recoil_hartree);
}

inline double hartree_to_khz(double e) { return convert(e, Unit::hartree, Unit::kilohertz); }
inline double khz_to_hartree(double f) { return convert(f, Unit::kilohertz, Unit::hartree); }
inline double nm_to_bohr(double l) { return convert(l, Unit::nanometer, Unit::bohr); }

}  // namespace latpair
