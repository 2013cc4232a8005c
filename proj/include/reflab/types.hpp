#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace reflab {

/// Largest chart dimension handled by the library.
inline constexpr int kMaxDim = 2;

/// Small dense types with a compile-time capacity of kMaxDim, so nothing on
/// the hot path touches the heap.
template <typename Scalar>
using VectorN = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

template <typename Scalar>
using MatrixN = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using Vec = VectorN<double>;
using Mat = MatrixN<double>;

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;
using MetricField = std::function<Mat(const Vec&)>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
VectorN<Scalar> make_vec(std::initializer_list<Scalar> values) {
  VectorN<Scalar> v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (Scalar s : values) v[i++] = s;
  return v;
}

inline Vec vec1(double a) { return make_vec<double>({a}); }
inline Vec vec2(double a, double b) { return make_vec<double>({a, b}); }

}  // namespace reflab
