#pragma once

/// @file grid.hpp
/// @brief Uniform periodic grids, cell-valued fields and their Fourier
///        representation.
///
/// The box is [-L, L)^dim with `cells` nodes per axis at x_i = -L + i*dx, so
/// the origin is a grid node and the grid is symmetric under i -> (n - i) mod n.
/// Fourier coefficients use the wavevector convention xi = pi*k/L with
/// k in {-n/2, ..., n/2 - 1}, stored in FFT order, normalized so that
///
///     f(x) = sum_k fhat_k exp(i xi_k . x).
///
/// Nyquist modes (k = -n/2 along an axis) are dropped by odd-symbol operators
/// such as derivatives and are treated as cosines by interpolation and
/// translation, which keeps real fields real.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fpme {

inline constexpr int kMaxDim = 3;

/// Spatial point or vector; components past Grid::dim() are ignored.
using Vec = std::array<double, kMaxDim>;
using Index = std::array<int, kMaxDim>;
using Complex = std::complex<double>;

class Grid {
public:
  /// Throws GridError unless dim in {1, 2}, cells >= 8 is a power of two and
  /// half_width > 0.
  Grid(int dim, int cells, double half_width);

  int dim() const noexcept { return dim_; }
  int cells() const noexcept { return cells_; }
  double half_width() const noexcept { return half_width_; }
  double dx() const noexcept { return dx_; }
  std::size_t size() const noexcept { return size_; }
  double volume() const noexcept;
  double cell_volume() const noexcept;

  double coord(int i) const noexcept { return -half_width_ + i * dx_; }
  Index index(std::size_t flat) const noexcept;
  /// Row-major flat index; components are wrapped periodically.
  std::size_t flat(const Index& idx) const noexcept;
  Vec position(std::size_t flat) const noexcept;

  /// Integer wavenumber k of FFT-ordered slot i along one axis.
  int wavenumber(int i) const noexcept { return i < cells_ / 2 ? i : i - cells_; }
  bool is_nyquist(int i) const noexcept { return i == cells_ / 2; }
  double frequency(int i) const noexcept;
  /// Wavevector of FFT-ordered flat mode index.
  Vec wavevector(std::size_t flat) const noexcept;

  /// Minimum-image displacement from b to a.
  Vec displacement(const Vec& a, const Vec& b) const noexcept;
  double norm(const Vec& v) const noexcept;

  bool operator==(const Grid& other) const noexcept = default;

private:
  int dim_;
  int cells_;
  double half_width_;
  double dx_;
  std::size_t size_;
};

/// Real cell values on a Grid, row-major. Immutable once built; every public
/// constructor rejects non-finite input with InvalidField.
class Field {
public:
  Field(Grid grid, std::vector<double> values);
  static Field constant(const Grid& grid, double value);
  static Field from_function(const Grid& grid, const std::function<double(const Vec&)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  double max() const noexcept;
  double min() const noexcept;
  double mean() const noexcept;

  Field operator+(const Field& other) const;
  Field operator-(const Field& other) const;
  Field operator*(double a) const;

  /// Moves the value buffer out (the Field is left empty).
  std::vector<double> release() && { return std::move(values_); }

private:
  Grid grid_;
  std::vector<double> values_;
};

class SpectralField {
public:
  SpectralField(Grid grid, std::vector<Complex> modes);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const Complex> modes() const noexcept { return modes_; }
  Complex operator[](std::size_t i) const noexcept { return modes_[i]; }
  /// Coefficient of the integer wavevector k (components wrapped into range).
  Complex at(const Index& k) const noexcept;

private:
  Grid grid_;
  std::vector<Complex> modes_;
};

SpectralField to_spectral(const Field& f);
/// Real part of the inverse transform.
Field from_spectral(const SpectralField& f);

/// Applies a Fourier multiplier m(xi, slot) modewise and returns the real
/// field. `slot` is the FFT-ordered multi-index, for Nyquist handling.
Field apply_multiplier(const Field& f, const std::function<Complex(const Vec&, const Index&)>& m);

/// True if any axis of the slot sits on the Nyquist frequency.
bool touches_nyquist(const Grid& grid, const Index& slot) noexcept;

/// Spectral derivative along each axis.
std::vector<Field> gradient(const Field& f);

/// Midpoint rule: sum(values) * dx^dim.
double integrate(const Field& f);

/// Pointwise product, used for integrands.
Field multiply(const Field& a, const Field& b);

/// Trigonometric interpolant evaluated on the tensor product of per-axis
/// coordinate lists (row-major output). Coordinates need not lie in the box;
/// the interpolant is periodic.
std::vector<double> interpolate_tensor(const Field& f, const std::array<std::vector<double>, kMaxDim>& axes);

/// g(x) = f(center + x / factor) on the same grid. Points whose source
/// position leaves the box [-L, L) take the value 0, so only fields supported
/// inside the box dilate meaningfully.
Field dilate(const Field& f, const Vec& center, double factor);

/// g(x) = f(x + shift) by exact phase shift.
Field translate(const Field& f, const Vec& shift);

/// Maps values to the mirrored node -x; used by parity checks.
Field reflect(const Field& f);

}  // namespace fpme
