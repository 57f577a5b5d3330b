#include "fpme/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "fpme/error.hpp"

namespace fpme {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is. Plans are
// created once per shape under a lock and reused with fftw_execute_dft.
class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(n);
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    std::array<int, kMaxDim> dims{n, n, n};
    fftw_plan plan = fftw_plan_dft(dim, dims.data(), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void fft(const Grid& g, std::vector<Complex>& in, std::vector<Complex>& out, int sign) {
  out.resize(in.size());
  fftw_plan plan = PlanCache::instance().get(g.dim(), g.cells(), sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int slot_parity(const Index& slot, int dim) {
  int s = 0;
  for (int a = 0; a < dim; ++a) s += slot[a];
  return s & 1;
}

void check_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) fail(ErrorCode::InvalidField, "non-finite value in field");
}

void check_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) fail(ErrorCode::GridError, "fields live on different grids");
}

// Per-axis trigonometric basis evaluated at x for FFT slot i.
Complex axis_basis(const Grid& g, int slot, double x) {
  double xi = g.frequency(slot);
  if (g.is_nyquist(slot)) return {std::cos(xi * x), 0.0};
  return std::polar(1.0, xi * x);
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(int dim, int cells, double half_width)
    : dim_(dim), cells_(cells), half_width_(half_width), dx_(0.0), size_(1) {
  if (dim < 1 || dim > 2) fail(ErrorCode::GridError, "dimension must be 1 or 2");
  if (cells < 8 || !is_power_of_two(cells)) fail(ErrorCode::GridError, "cells per axis must be a power of two >= 8");
  if (!(half_width > 0.0) || !std::isfinite(half_width)) fail(ErrorCode::GridError, "half width must be positive");
  dx_ = 2.0 * half_width / cells;
  for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(cells);
}

double Grid::volume() const noexcept { return std::pow(2.0 * half_width_, dim_); }
double Grid::cell_volume() const noexcept { return std::pow(dx_, dim_); }

Index Grid::index(std::size_t flat) const noexcept {
  Index idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(cells_));
    flat /= static_cast<std::size_t>(cells_);
  }
  return idx;
}

std::size_t Grid::flat(const Index& idx) const noexcept {
  std::size_t f = 0;
  for (int a = 0; a < dim_; ++a) {
    int i = ((idx[a] % cells_) + cells_) % cells_;
    f = f * static_cast<std::size_t>(cells_) + static_cast<std::size_t>(i);
  }
  return f;
}

Vec Grid::position(std::size_t flat_index) const noexcept {
  Index idx = index(flat_index);
  Vec x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = coord(idx[a]);
  return x;
}

double Grid::frequency(int i) const noexcept {
  return std::numbers::pi * wavenumber(i) / half_width_;
}

Vec Grid::wavevector(std::size_t flat_index) const noexcept {
  Index idx = index(flat_index);
  Vec xi{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) xi[a] = frequency(idx[a]);
  return xi;
}

Vec Grid::displacement(const Vec& a, const Vec& b) const noexcept {
  Vec d{0.0, 0.0, 0.0};
  const double period = 2.0 * half_width_;
  for (int k = 0; k < dim_; ++k) {
    double v = a[k] - b[k];
    v -= period * std::floor(v / period + 0.5);
    d[k] = v;
  }
  return d;
}

double Grid::norm(const Vec& v) const noexcept {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) s += v[k] * v[k];
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Field

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) fail(ErrorCode::InvalidField, "value count does not match grid");
  check_finite(values_);
}

Field Field::constant(const Grid& grid, double value) {
  return Field(grid, std::vector<double>(grid.size(), value));
}

Field Field::from_function(const Grid& grid, const std::function<double(const Vec&)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.position(i));
  return Field(grid, std::move(v));
}

double Field::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }
double Field::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

double Field::mean() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

Field Field::operator+(const Field& other) const {
  check_same_grid(grid_, other.grid_);
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] + other.values_[i];
  return Field(grid_, std::move(v));
}

Field Field::operator-(const Field& other) const {
  check_same_grid(grid_, other.grid_);
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[i] - other.values_[i];
  return Field(grid_, std::move(v));
}

Field Field::operator*(double a) const {
  std::vector<double> v(values_.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * values_[i];
  return Field(grid_, std::move(v));
}

// ---------------------------------------------------------------------------
// SpectralField

SpectralField::SpectralField(Grid grid, std::vector<Complex> modes) : grid_(grid), modes_(std::move(modes)) {
  if (modes_.size() != grid_.size()) fail(ErrorCode::InvalidField, "mode count does not match grid");
}

Complex SpectralField::at(const Index& k) const noexcept { return modes_[grid_.flat(k)]; }

SpectralField to_spectral(const Field& f) {
  const Grid& g = f.grid();
  std::vector<Complex> in(g.size());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] = {f[i], 0.0};
  std::vector<Complex> out;
  fft(g, in, out, FFTW_FORWARD);
  const double inv = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sign = slot_parity(g.index(i), g.dim()) ? -1.0 : 1.0;
    out[i] *= sign * inv;
  }
  return SpectralField(g, std::move(out));
}

Field from_spectral(const SpectralField& f) {
  const Grid& g = f.grid();
  std::vector<Complex> in(f.modes().begin(), f.modes().end());
  for (std::size_t i = 0; i < in.size(); ++i)
    if (slot_parity(g.index(i), g.dim())) in[i] = -in[i];
  std::vector<Complex> out;
  fft(g, in, out, FFTW_BACKWARD);
  std::vector<double> v(out.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = out[i].real();
  return Field(g, std::move(v));
}

bool touches_nyquist(const Grid& grid, const Index& slot) noexcept {
  for (int a = 0; a < grid.dim(); ++a)
    if (grid.is_nyquist(slot[a])) return true;
  return false;
}

Field apply_multiplier(const Field& f, const std::function<Complex(const Vec&, const Index&)>& m) {
  SpectralField hat = to_spectral(f);
  const Grid& g = f.grid();
  std::vector<Complex> modes(hat.modes().begin(), hat.modes().end());
  for (std::size_t i = 0; i < modes.size(); ++i) modes[i] *= m(g.wavevector(i), g.index(i));
  return from_spectral(SpectralField(g, std::move(modes)));
}

std::vector<Field> gradient(const Field& f) {
  const Grid& g = f.grid();
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) {
    out.push_back(apply_multiplier(f, [&g, a](const Vec& xi, const Index& slot) -> Complex {
      if (g.is_nyquist(slot[a])) return 0.0;
      return {0.0, xi[a]};
    }));
  }
  return out;
}

double integrate(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

Field multiply(const Field& a, const Field& b) {
  check_same_grid(a.grid(), b.grid());
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return Field(a.grid(), std::move(v));
}

std::vector<double> interpolate_tensor(const Field& f, const std::array<std::vector<double>, kMaxDim>& axes) {
  const Grid& g = f.grid();
  const int n = g.cells();
  SpectralField hat = to_spectral(f);

  // basis[a][p * n + slot]
  std::array<std::vector<Complex>, kMaxDim> basis;
  for (int a = 0; a < g.dim(); ++a) {
    const auto& pts = axes[a];
    basis[a].resize(pts.size() * static_cast<std::size_t>(n));
    for (std::size_t p = 0; p < pts.size(); ++p)
      for (int k = 0; k < n; ++k) basis[a][p * n + k] = axis_basis(g, k, pts[p]);
  }

  if (g.dim() == 1) {
    const auto& pts = axes[0];
    std::vector<double> out(pts.size());
    for (std::size_t p = 0; p < pts.size(); ++p) {
      Complex acc = 0.0;
      for (int k = 0; k < n; ++k) acc += hat[static_cast<std::size_t>(k)] * basis[0][p * n + k];
      out[p] = acc.real();
    }
    return out;
  }

  const auto& px = axes[0];
  const auto& py = axes[1];
  // Contract the second axis first: partial[k1][q].
  std::vector<Complex> partial(static_cast<std::size_t>(n) * py.size());
  for (int k1 = 0; k1 < n; ++k1)
    for (std::size_t q = 0; q < py.size(); ++q) {
      Complex acc = 0.0;
      for (int k2 = 0; k2 < n; ++k2)
        acc += hat[static_cast<std::size_t>(k1) * n + k2] * basis[1][q * n + k2];
      partial[static_cast<std::size_t>(k1) * py.size() + q] = acc;
    }
  std::vector<double> out(px.size() * py.size());
  for (std::size_t p = 0; p < px.size(); ++p)
    for (std::size_t q = 0; q < py.size(); ++q) {
      Complex acc = 0.0;
      for (int k1 = 0; k1 < n; ++k1) acc += basis[0][p * n + k1] * partial[static_cast<std::size_t>(k1) * py.size() + q];
      out[p * py.size() + q] = acc.real();
    }
  return out;
}

Field dilate(const Field& f, const Vec& center, double factor) {
  const Grid& g = f.grid();
  if (!(factor > 0.0)) fail(ErrorCode::InvalidScale, "dilation factor must be positive");
  std::array<std::vector<double>, kMaxDim> axes;
  std::array<std::vector<bool>, kMaxDim> inside;
  const double L = g.half_width();
  for (int a = 0; a < g.dim(); ++a) {
    axes[a].resize(static_cast<std::size_t>(g.cells()));
    inside[a].resize(static_cast<std::size_t>(g.cells()));
    for (int i = 0; i < g.cells(); ++i) {
      double src = center[a] + g.coord(i) / factor;
      axes[a][i] = src;
      inside[a][i] = src >= -L && src < L;
    }
  }
  std::vector<double> v = interpolate_tensor(f, axes);
  for (std::size_t i = 0; i < v.size(); ++i) {
    Index idx = g.index(i);
    for (int a = 0; a < g.dim(); ++a)
      if (!inside[a][idx[a]]) v[i] = 0.0;
  }
  return Field(g, std::move(v));
}

Field translate(const Field& f, const Vec& shift) {
  const Grid& g = f.grid();
  return apply_multiplier(f, [&g, &shift](const Vec& xi, const Index& slot) -> Complex {
    Complex m = 1.0;
    for (int a = 0; a < g.dim(); ++a) {
      if (g.is_nyquist(slot[a]))
        m *= std::cos(xi[a] * shift[a]);
      else
        m *= std::polar(1.0, xi[a] * shift[a]);
    }
    return m;
  });
}

Field reflect(const Field& f) {
  const Grid& g = f.grid();
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    Index idx = g.index(i);
    for (int a = 0; a < g.dim(); ++a) idx[a] = -idx[a];
    v[i] = f[g.flat(idx)];
  }
  return Field(g, std::move(v));
}

}  // namespace fpme
