#pragma once

#include "hjlab/vec.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace hjlab {

using Offset = std::array<int, 2>;

/// Uniform periodic grid on T^n with `points` nodes per dimension.
/// Flat index = i0 + points * i1.
class TorusGrid {
 public:
  TorusGrid(int dim, int points);

  int dim() const { return dim_; }
  int points() const { return points_; }
  double spacing() const { return 1.0 / points_; }
  std::size_t size() const { return size_; }

  Offset multi_index(std::size_t flat) const;
  std::size_t flat_index(Offset idx) const;  // wraps each coordinate
  Vec point(std::size_t flat) const;

  /// Node reached from `flat` by the integer displacement `k`.
  std::size_t shifted(std::size_t flat, Offset k) const;

  /// Minimal periodic displacement from `from` to `to` in index units. For
  /// even N antipodal ties take the positive representative.
  Offset displacement(std::size_t from, std::size_t to) const;

  /// Periodic Euclidean distance between two nodes.
  double distance(std::size_t a, std::size_t b) const;

  /// Periodic distance between arbitrary points.
  static double distance(const Vec& a, const Vec& b);

  bool operator==(const TorusGrid& other) const {
    return dim_ == other.dim_ && points_ == other.points_;
  }

 private:
  int wrap(int i) const;
  int dim_;
  int points_;
  std::size_t size_;
};

struct ValueFunction {
  TorusGrid grid;
  std::vector<double> values;
  double time = 0.0;

  ValueFunction(TorusGrid g, std::vector<double> v, double t = 0.0);
  static ValueFunction constant(TorusGrid g, double c, double t = 0.0);

  double min() const;
  double max() const;
  double mean() const;
};

double sup_distance(const ValueFunction& a, const ValueFunction& b);

}  // namespace hjlab
