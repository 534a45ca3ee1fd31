#include "hjlab/torus_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hjlab {

TorusGrid::TorusGrid(int dim, int points) : dim_(dim), points_(points) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points per dimension");
  size_ = dim == 1 ? static_cast<std::size_t>(points)
                   : static_cast<std::size_t>(points) * static_cast<std::size_t>(points);
}

int TorusGrid::wrap(int i) const {
  const int r = i % points_;
  return r < 0 ? r + points_ : r;
}

Offset TorusGrid::multi_index(std::size_t flat) const {
  if (dim_ == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat % points_), static_cast<int>(flat / points_)};
}

std::size_t TorusGrid::flat_index(Offset idx) const {
  if (dim_ == 1) return static_cast<std::size_t>(wrap(idx[0]));
  return static_cast<std::size_t>(wrap(idx[0])) +
         static_cast<std::size_t>(points_) * static_cast<std::size_t>(wrap(idx[1]));
}

Vec TorusGrid::point(std::size_t flat) const {
  const Offset m = multi_index(flat);
  const double h = spacing();
  return dim_ == 1 ? make_vec(m[0] * h) : make_vec(m[0] * h, m[1] * h);
}

std::size_t TorusGrid::shifted(std::size_t flat, Offset k) const {
  const Offset m = multi_index(flat);
  return flat_index({m[0] + k[0], m[1] + k[1]});
}

Offset TorusGrid::displacement(std::size_t from, std::size_t to) const {
  const Offset a = multi_index(from);
  const Offset b = multi_index(to);
  Offset d{0, 0};
  for (int i = 0; i < dim_; ++i) {
    int k = wrap(b[i] - a[i]);  // in [0, N)
    if (2 * k > points_) k -= points_;
    d[i] = k;
  }
  return d;
}

double TorusGrid::distance(std::size_t a, std::size_t b) const {
  const Offset d = displacement(a, b);
  const double h = spacing();
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) s += (d[i] * h) * (d[i] * h);
  return std::sqrt(s);
}

double TorusGrid::distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double d = std::abs(a[i] - b[i]);
    d -= std::floor(d);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

ValueFunction::ValueFunction(TorusGrid g, std::vector<double> v, double t)
    : grid(g), values(std::move(v)), time(t) {
  if (values.size() != grid.size()) throw std::invalid_argument("value count does not match grid");
  for (double x : values) {
    if (!std::isfinite(x)) throw std::invalid_argument("value function must be finite");
  }
}

ValueFunction ValueFunction::constant(TorusGrid g, double c, double t) {
  return ValueFunction(g, std::vector<double>(g.size(), c), t);
}

double ValueFunction::min() const { return *std::min_element(values.begin(), values.end()); }
double ValueFunction::max() const { return *std::max_element(values.begin(), values.end()); }
double ValueFunction::mean() const {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sup_distance(const ValueFunction& a, const ValueFunction& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("grids differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

}  // namespace hjlab
