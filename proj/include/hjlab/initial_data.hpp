#pragma once

#include "hjlab/config.hpp"
#include "hjlab/torus_grid.hpp"

namespace hjlab {

/// Samples an initial datum on the grid. random-nodal data are piecewise
/// (bi)linear through seeded knot values; the knot lattice does not depend on
/// the grid, so refinements sample the same function.
ValueFunction make_initial_datum(const InitialDatumSpec& spec, const TorusGrid& grid);

/// Evaluates the datum at an arbitrary point of the torus.
double initial_datum_at(const InitialDatumSpec& spec, int dim, const Vec& x);

}  // namespace hjlab
