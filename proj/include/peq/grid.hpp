#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace peq {

/// One separable heat-source term a * cos(p pi x/lx) cos(q pi y/ly) cos(r pi (z+h)/h).
struct TrigMode {
  double amplitude = 0.0;
  int p = 0;
  int q = 0;
  int r = 0;
};

enum class QKind { Zero, Constant, Trig };

struct QProfile {
  QKind kind = QKind::Zero;
  double value = 0.0;             // used by Constant
  std::vector<TrigMode> modes;    // used by Trig

  static QProfile zero() { return {}; }
  static QProfile constant(double c) { return {QKind::Constant, c, {}}; }
  static QProfile trig(std::vector<TrigMode> m) { return {QKind::Trig, 0.0, std::move(m)}; }
};

/// Physical and numerical constants of the model. All positive except f0.
struct Parameters {
  double re1 = 1.0;
  double re2 = 1.0;
  double rt1 = 1.0;
  double rt2 = 1.0;
  double alpha = 1.0;
  double f0 = 0.0;
  double h = 1.0;
  double lx = 1.0;
  double ly = 1.0;
  QProfile q;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Returns `p` unchanged or throws ParameterError naming the violated rule.
Parameters validate_parameters(const Parameters& p);

/// max(2h/alpha, 2 rt2 h^2): constant of the Poincare-type bound ||T||_2^2 <= K2 ||T||^2.
double k2_constant(const Parameters& p);

struct Shape {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t cells() const { return std::size_t(nx) * std::size_t(ny) * std::size_t(nz); }
  std::size_t columns() const { return std::size_t(nx) * std::size_t(ny); }
  bool operator==(const Shape&) const = default;
};

/// Uniform cell-centred grid over [0,lx] x [0,ly] x [-h,0].
struct Grid {
  Shape shape;
  double lx = 1.0;
  double ly = 1.0;
  double h = 1.0;
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;

  Grid() = default;
  Grid(Shape s, double lx_, double ly_, double h_);
  Grid(const Parameters& p, int nx, int ny, int nz) : Grid(Shape{nx, ny, nz}, p.lx, p.ly, p.h) {}

  int nx() const { return shape.nx; }
  int ny() const { return shape.ny; }
  int nz() const { return shape.nz; }

  double x(int i) const { return (i + 0.5) * dx; }
  double y(int j) const { return (j + 0.5) * dy; }
  double z(int k) const { return -h + (k + 0.5) * dz; }
  /// Height of the k-th horizontal cell face; face 0 is z=-h, face nz is z=0.
  double z_face(int k) const { return -h + k * dz; }

  double cell_volume() const { return dx * dy * dz; }
  double cell_area() const { return dx * dy; }
  double volume() const { return lx * ly * h; }

  bool operator==(const Grid& o) const {
    return shape == o.shape && lx == o.lx && ly == o.ly && h == o.h;
  }
};

/// Heat source evaluated at a point of the domain.
double q_value(const QProfile& q, const Parameters& p, double x, double y, double z);

/// Closed-form ||Q||_2^2 over the domain.
double q_norm_sq(const Parameters& p);

}  // namespace peq
