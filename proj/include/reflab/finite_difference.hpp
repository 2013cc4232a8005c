#pragma once

#include <array>
#include <cmath>
#include <type_traits>

#include "reflab/types.hpp"

namespace reflab {

/// Axis-aligned coordinate box of a chart with per-axis periodicity.
template <typename Scalar>
struct BasicChartBox {
  VectorN<Scalar> lo;
  VectorN<Scalar> hi;
  std::array<bool, kMaxDim> periodic{false, false};

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const VectorN<Scalar>& x) const {
    for (int i = 0; i < dim(); ++i) {
      if (periodic[i]) continue;
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }

  /// Maps periodic coordinates back into [lo, hi).
  VectorN<Scalar> wrap(VectorN<Scalar> x) const {
    for (int i = 0; i < dim(); ++i) {
      if (!periodic[i]) continue;
      const Scalar period = hi[i] - lo[i];
      Scalar shifted = std::fmod(x[i] - lo[i], period);
      if (shifted < 0) shifted += period;
      x[i] = lo[i] + shifted;
    }
    return x;
  }

  Scalar diameter() const { return (hi - lo).norm(); }
};

using ChartBox = BasicChartBox<double>;

/// Fourth-order first derivative along one chart axis.
///
/// Central five-point stencil where x +- 2h stays in the box; otherwise the
/// one-sided five-point stencil pointing into the box. Periodic axes always
/// use the central stencil. Works for any callable whose result supports
/// `+`, `-` and scalar `*`, `/` (double, Eigen dense types, ...).
template <typename F, typename Scalar>
auto partial(const BasicChartBox<Scalar>& box, F&& f, const VectorN<Scalar>& x, int axis, Scalar h) {
  using R = std::decay_t<std::invoke_result_t<F&, const VectorN<Scalar>&>>;
  auto at = [&](Scalar steps) {
    VectorN<Scalar> y = x;
    y[axis] += steps * h;
    return R(f(y));
  };
  const bool central = box.periodic[axis] ||
                       (x[axis] - 2 * h >= box.lo[axis] && x[axis] + 2 * h <= box.hi[axis]);
  if (central) {
    R out = (at(-2) - at(-1) * Scalar(8) + at(1) * Scalar(8) - at(2)) / (Scalar(12) * h);
    return out;
  }
  const Scalar dir = (x[axis] + 4 * h <= box.hi[axis]) ? Scalar(1) : Scalar(-1);
  R out = (at(0) * Scalar(-25) + at(dir) * Scalar(48) - at(2 * dir) * Scalar(36) +
           at(3 * dir) * Scalar(16) - at(4 * dir) * Scalar(3)) /
          (Scalar(12) * h * dir);
  return out;
}

/// Chart differential (covector of partial derivatives) of a scalar field.
template <typename F, typename Scalar>
VectorN<Scalar> differential(const BasicChartBox<Scalar>& box, F&& f, const VectorN<Scalar>& x, Scalar h) {
  VectorN<Scalar> df(x.size());
  for (int i = 0; i < x.size(); ++i) df[i] = partial(box, f, x, i, h);
  return df;
}

/// Matrix of second chart partials d_i d_j f by nested first derivatives.
template <typename F, typename Scalar>
MatrixN<Scalar> second_partials(const BasicChartBox<Scalar>& box, F&& f, const VectorN<Scalar>& x, Scalar h) {
  const int d = static_cast<int>(x.size());
  MatrixN<Scalar> out(d, d);
  for (int j = 0; j < d; ++j) {
    auto dj = [&](const VectorN<Scalar>& y) { return partial(box, f, y, j, h); };
    for (int i = 0; i <= j; ++i) {
      out(i, j) = partial(box, dj, x, i, h);
      out(j, i) = out(i, j);
    }
  }
  return out;
}

}  // namespace reflab
