#pragma once

// Umbrella header for the header-only numerical core.

#include "latpair/angular.hpp"
#include "latpair/basis.hpp"
#include "latpair/ci.hpp"
#include "latpair/errors.hpp"
#include "latpair/feshbach.hpp"
#include "latpair/observables.hpp"
#include "latpair/potentials.hpp"
#include "latpair/quantities.hpp"
#include "latpair/scattering.hpp"
#include "latpair/solver.hpp"
#include "latpair/version.hpp"
