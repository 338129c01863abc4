#pragma once

// Umbrella header for the numerical library (the CLI lives in chernlab/cli).

#include "chernlab/errors.hpp"
#include "chernlab/grid/bitorus_grid.hpp"
#include "chernlab/grid/random_field.hpp"
#include "chernlab/grid/torus_grid.hpp"
#include "chernlab/theta/theta_bundle.hpp"
#include "chernlab/cym/system.hpp"
#include "chernlab/solvers/adjoint.hpp"
#include "chernlab/solvers/continuation.hpp"
#include "chernlab/solvers/corrector.hpp"
#include "chernlab/solvers/krylov.hpp"
#include "chernlab/solvers/vortex.hpp"
#include "chernlab/chern/conformal.hpp"
#include "chernlab/chern/vortex_chern.hpp"
#include "chernlab/segre/monge_ampere.hpp"
#include "chernlab/segre/synthetic.hpp"
#include "chernlab/io/config.hpp"
#include "chernlab/io/cwf1.hpp"
#include "chernlab/io/manifest.hpp"
