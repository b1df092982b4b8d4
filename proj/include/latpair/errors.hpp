#pragma once

#include <stdexcept>
#include <string>

namespace latpair {

/// Invalid argument or value outside the supported domain of an operation.
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// Taylor order of the lattice expansion not supported (only 2 and 6 are).
struct unsupported_order_error : domain_error {
  using domain_error::domain_error;
};

/// Overlap matrix or shifted Hamiltonian failed to factorize.
struct conditioning_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input sits on (or too close to) a pole of a singular relation.
struct pole_error : domain_error {
  pole_error(const std::string& what, double location)
      : domain_error(what), location(location) {}
  double location;
};

/// A root search would have to cross a pole of a(s) to reach its target.
struct branch_error : std::runtime_error {
  branch_error(const std::string& what, double pole_shift)
      : std::runtime_error(what), pole_shift(pole_shift) {}
  double pole_shift;
};

/// lb / 1ti identification failed (node counting inconsistent).
struct classification_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested symmetry sector contains no configurations.
struct symmetry_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An energy ledger lacks one of its four energies.
struct incomplete_ledger_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two states or orbital sets do not share the same bases.
struct incompatibility_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Binding-energy curve requested without the a_bg reference solve.
struct anchor_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Configuration file violates the schema.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Optimizer could not establish a well-defined minimum.
struct fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace latpair
