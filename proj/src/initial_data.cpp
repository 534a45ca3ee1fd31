#include "hjlab/initial_data.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hjlab {

namespace {

Vec center_of(const InitialDatumSpec& spec, int dim, double fallback) {
  if (spec.center.empty()) return dim == 1 ? make_vec(fallback) : make_vec(fallback, fallback);
  if (static_cast<int>(spec.center.size()) != dim) throw std::invalid_argument("center has wrong dimension");
  return dim == 1 ? make_vec(spec.center[0]) : make_vec(spec.center[0], spec.center[1]);
}

double frac(double x) { return x - std::floor(x); }

// Knot values in [-amplitude, amplitude], drawn in flat knot order.
std::vector<double> knot_values(const InitialDatumSpec& spec, int dim) {
  if (!spec.seed) throw std::invalid_argument("random-nodal datum requires a seed");
  std::mt19937_64 rng(*spec.seed);
  std::size_t count = static_cast<std::size_t>(spec.knots);
  if (dim == 2) count *= static_cast<std::size_t>(spec.knots);
  std::vector<double> values(count);
  for (double& v : values) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = spec.amplitude * (2.0 * unit - 1.0);
  }
  return values;
}

double interpolate(const std::vector<double>& knots, int m, int dim, const Vec& x) {
  int i[2] = {0, 0};
  double w[2] = {0.0, 0.0};
  for (int k = 0; k < dim; ++k) {
    const double s = frac(x[k]) * m;
    const double f = std::floor(s);
    i[k] = static_cast<int>(f) % m;
    w[k] = s - f;
  }
  auto at = [&](int a, int b) { return knots[static_cast<std::size_t>(a % m) + static_cast<std::size_t>(m) * (b % m)]; };
  if (dim == 1) return (1.0 - w[0]) * at(i[0], 0) + w[0] * at(i[0] + 1, 0);
  return (1.0 - w[0]) * (1.0 - w[1]) * at(i[0], i[1]) + w[0] * (1.0 - w[1]) * at(i[0] + 1, i[1]) +
         (1.0 - w[0]) * w[1] * at(i[0], i[1] + 1) + w[0] * w[1] * at(i[0] + 1, i[1] + 1);
}

}  // namespace

double initial_datum_at(const InitialDatumSpec& spec, int dim, const Vec& x) {
  if (spec.name == "sqrt-cusp") {
    return spec.amplitude * std::sqrt(TorusGrid::distance(x, center_of(spec, dim, 0.3)));
  }
  if (spec.name == "holder") {
    return spec.amplitude * std::pow(TorusGrid::distance(x, center_of(spec, dim, 0.7)), spec.exponent);
  }
  if (spec.name == "sawtooth") {
    return spec.amplitude * 2.0 * std::abs(frac(spec.teeth * x[0]) - 0.5);
  }
  if (spec.name == "cosine") {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += std::cos(two_pi * x[k]);
    return spec.amplitude * s;
  }
  if (spec.name == "random-nodal") {
    return interpolate(knot_values(spec, dim), spec.knots, dim, x);
  }
  if (spec.name == "constant") return spec.value;
  throw std::invalid_argument("unknown initial datum '" + spec.name + "'");
}

ValueFunction make_initial_datum(const InitialDatumSpec& spec, const TorusGrid& grid) {
  std::vector<double> values(grid.size());
  if (spec.name == "random-nodal") {
    const std::vector<double> knots = knot_values(spec, grid.dim());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      values[i] = interpolate(knots, spec.knots, grid.dim(), grid.point(i));
    }
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = initial_datum_at(spec, grid.dim(), grid.point(i));
  }
  return ValueFunction(grid, std::move(values), 0.0);
}

}  // namespace hjlab
