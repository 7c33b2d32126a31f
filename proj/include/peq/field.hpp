#pragma once

#include <Eigen/Core>

#include <array>
#include <cassert>
#include <cstddef>

#include "peq/grid.hpp"

namespace peq {

/// Ghost rule on one face of the box. Reflection rules act at the face midpoint:
///   NeumannZero / Symmetric: ghost = interior
///   Antisymmetric:           ghost = -interior
///   Robin:                   ghost = robin_factor * interior
enum class BcKind { NeumannZero, Symmetric, Antisymmetric, Robin };

struct FaceBc {
  BcKind kind = BcKind::NeumannZero;
  double robin_factor = 1.0;

  double factor() const {
    switch (kind) {
      case BcKind::NeumannZero:
      case BcKind::Symmetric: return 1.0;
      case BcKind::Antisymmetric: return -1.0;
      case BcKind::Robin: return robin_factor;
    }
    return 1.0;
  }
  bool operator==(const FaceBc&) const = default;
};

enum Face { West = 0, East, South, North, Bottom, Top };

struct FieldBc {
  std::array<FaceBc, 6> faces{};

  const FaceBc& operator[](Face f) const { return faces[f]; }
  FaceBc& operator[](Face f) { return faces[f]; }
  bool operator==(const FieldBc&) const = default;
};

/// Robin ghost factor for (1/rt2) dT/dz + alpha T = 0 closed at the face midpoint.
inline double robin_ghost_factor(double rt2, double alpha, double dz) {
  const double a = 1.0 / (rt2 * dz);
  return (a - 0.5 * alpha) / (a + 0.5 * alpha);
}

/// x-component of horizontal velocity: normal on x-faces, tangential on y-faces.
inline FieldBc bc_velocity_x() {
  FieldBc b;
  b[West] = b[East] = {BcKind::Antisymmetric};
  b[South] = b[North] = {BcKind::Symmetric};
  b[Bottom] = b[Top] = {BcKind::NeumannZero};
  return b;
}

inline FieldBc bc_velocity_y() {
  FieldBc b;
  b[West] = b[East] = {BcKind::Symmetric};
  b[South] = b[North] = {BcKind::Antisymmetric};
  b[Bottom] = b[Top] = {BcKind::NeumannZero};
  return b;
}

inline FieldBc bc_temperature(const Parameters& p, const Grid& g) {
  FieldBc b;
  b[West] = b[East] = b[South] = b[North] = {BcKind::Symmetric};
  b[Bottom] = {BcKind::NeumannZero};
  b[Top] = {BcKind::Robin, robin_ghost_factor(p.rt2, p.alpha, g.dz)};
  return b;
}

/// Even reflection on every face.
inline FieldBc bc_neumann() { return FieldBc{}; }

/// Vertical velocity at cell centres: vanishes on the top and bottom faces.
inline FieldBc bc_vertical_velocity() {
  FieldBc b;
  b[Bottom] = b[Top] = {BcKind::Antisymmetric};
  return b;
}

/// Cell-centred scalar on the 3D grid with one ghost layer on every face.
/// Storage is z-fastest, then y, then x.
template <typename Scalar>
class Field {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Field() = default;
  explicit Field(Shape s, FieldBc bc = {})
      : shape_(s), bc_(bc), data_(Array::Zero(padded_size(s))) {}

  const Shape& shape() const { return shape_; }
  const FieldBc& bc() const { return bc_; }
  void set_bc(const FieldBc& bc) { bc_ = bc; }

  /// Valid for -1 <= i <= nx (and likewise for j, k).
  Scalar& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  const Scalar& operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

  std::size_t index(int i, int j, int k) const {
    assert(i >= -1 && i <= shape_.nx && j >= -1 && j <= shape_.ny && k >= -1 && k <= shape_.nz);
    return (std::size_t(i + 1) * std::size_t(shape_.ny + 2) + std::size_t(j + 1)) *
               std::size_t(shape_.nz + 2) +
           std::size_t(k + 1);
  }

  Array& data() { return data_; }
  const Array& data() const { return data_; }

  /// Interior values packed z-fastest, then y, then x.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> interior() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(shape_.cells());
    std::size_t n = 0;
    for (int i = 0; i < shape_.nx; ++i)
      for (int j = 0; j < shape_.ny; ++j)
        for (int k = 0; k < shape_.nz; ++k) out[n++] = (*this)(i, j, k);
    return out;
  }

  template <typename Derived>
  void set_interior(const Eigen::DenseBase<Derived>& expr) {
    // Evaluate once: lazy solver and sparse-product expressions recompute per coefficient.
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = expr;
    assert(std::size_t(v.size()) == shape_.cells());
    std::size_t n = 0;
    for (int i = 0; i < shape_.nx; ++i)
      for (int j = 0; j < shape_.ny; ++j)
        for (int k = 0; k < shape_.nz; ++k) (*this)(i, j, k) = v[n++];
  }

  template <typename F>
  void for_each_interior(F&& f) {
    for (int i = 0; i < shape_.nx; ++i)
      for (int j = 0; j < shape_.ny; ++j)
        for (int k = 0; k < shape_.nz; ++k) f(i, j, k, (*this)(i, j, k));
  }

  Field& operator+=(const Field& o) { data_ += o.data_; return *this; }
  Field& operator-=(const Field& o) { data_ -= o.data_; return *this; }
  Field& operator*=(Scalar s) { data_ *= s; return *this; }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Scalar s, Field a) { return a *= s; }

  /// Bitwise comparison of interior values.
  bool interior_equal(const Field& o) const {
    if (!(shape_ == o.shape_)) return false;
    for (int i = 0; i < shape_.nx; ++i)
      for (int j = 0; j < shape_.ny; ++j)
        for (int k = 0; k < shape_.nz; ++k)
          if ((*this)(i, j, k) != o(i, j, k)) return false;
    return true;
  }

  static std::size_t padded_size(Shape s) {
    return std::size_t(s.nx + 2) * std::size_t(s.ny + 2) * std::size_t(s.nz + 2);
  }

 private:
  Shape shape_{};
  FieldBc bc_{};
  Array data_;
};

/// Cell-centred scalar over the horizontal domain M, one ghost layer per lateral face.
template <typename Scalar>
class Field2D {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Field2D() = default;
  Field2D(int nx, int ny) : nx_(nx), ny_(ny), data_(Array::Zero(std::size_t(nx + 2) * (ny + 2))) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  Scalar& operator()(int i, int j) { return data_[index(i, j)]; }
  const Scalar& operator()(int i, int j) const { return data_[index(i, j)]; }
  std::size_t index(int i, int j) const {
    assert(i >= -1 && i <= nx_ && j >= -1 && j <= ny_);
    return std::size_t(i + 1) * std::size_t(ny_ + 2) + std::size_t(j + 1);
  }

  Array& data() { return data_; }
  const Array& data() const { return data_; }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> interior() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(std::size_t(nx_) * ny_);
    std::size_t n = 0;
    for (int i = 0; i < nx_; ++i)
      for (int j = 0; j < ny_; ++j) out[n++] = (*this)(i, j);
    return out;
  }
  template <typename Derived>
  void set_interior(const Eigen::DenseBase<Derived>& expr) {
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = expr;
    std::size_t n = 0;
    for (int i = 0; i < nx_; ++i)
      for (int j = 0; j < ny_; ++j) (*this)(i, j) = v[n++];
  }

  /// Mirror ghosts: sx, sy are the reflection signs on x-faces and y-faces.
  void fill_ghost(Scalar sx = Scalar(1), Scalar sy = Scalar(1)) {
    for (int j = 0; j < ny_; ++j) {
      (*this)(-1, j) = sx * (*this)(0, j);
      (*this)(nx_, j) = sx * (*this)(nx_ - 1, j);
    }
    for (int i = 0; i < nx_; ++i) {
      (*this)(i, -1) = sy * (*this)(i, 0);
      (*this)(i, ny_) = sy * (*this)(i, ny_ - 1);
    }
  }

 private:
  int nx_ = 0;
  int ny_ = 0;
  Array data_;
};

/// Values on the nz+1 horizontal cell faces of every column (no ghosts).
/// Level 0 is z=-h, level nz is z=0.
template <typename Scalar>
class LevelField {
 public:
  LevelField() = default;
  explicit LevelField(Shape s) : shape_(s), data_(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(
                                                s.columns() * std::size_t(s.nz + 1))) {}

  const Shape& shape() const { return shape_; }
  int levels() const { return shape_.nz + 1; }
  Scalar& operator()(int i, int j, int kf) { return data_[index(i, j, kf)]; }
  const Scalar& operator()(int i, int j, int kf) const { return data_[index(i, j, kf)]; }
  std::size_t index(int i, int j, int kf) const {
    assert(i >= 0 && i < shape_.nx && j >= 0 && j < shape_.ny && kf >= 0 && kf <= shape_.nz);
    return (std::size_t(i) * shape_.ny + std::size_t(j)) * std::size_t(shape_.nz + 1) + std::size_t(kf);
  }
  Eigen::Array<Scalar, Eigen::Dynamic, 1>& data() { return data_; }
  const Eigen::Array<Scalar, Eigen::Dynamic, 1>& data() const { return data_; }

 private:
  Shape shape_{};
  Eigen::Array<Scalar, Eigen::Dynamic, 1> data_;
};

using ScalarField = Field<double>;
using SurfaceField = Field2D<double>;

}  // namespace peq
