#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fpme/error.hpp"
#include "fpme/grid.hpp"
#include "fpme/snapshot_io.hpp"

using namespace fpme;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an fpme::Error");
  return ErrorCode::InvalidArgument;
}

Field gaussian(const Grid& g, double w, Vec c = {}) {
  return Field::from_function(g, [&](const Vec& x) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    return std::exp(-r2 / (w * w));
  });
}

}  // namespace

TEST_CASE("grid construction rejects bad shapes") {
  CHECK(code_of([] { Grid(3, 16, 1.0); }) == ErrorCode::GridError);
  CHECK(code_of([] { Grid(0, 16, 1.0); }) == ErrorCode::GridError);
  CHECK(code_of([] { Grid(1, 12, 1.0); }) == ErrorCode::GridError);
  CHECK(code_of([] { Grid(1, 4, 1.0); }) == ErrorCode::GridError);
  CHECK(code_of([] { Grid(1, 16, 0.0); }) == ErrorCode::GridError);
  CHECK(code_of([] { Grid(1, 16, -2.0); }) == ErrorCode::GridError);
}

TEST_CASE("grid geometry") {
  Grid g(2, 16, 4.0);
  CHECK(g.size() == 256);
  CHECK(g.dx() == doctest::Approx(0.5));
  CHECK(g.volume() == doctest::Approx(64.0));
  CHECK(g.cell_volume() == doctest::Approx(0.25));
  CHECK(g.coord(0) == -4.0);
  CHECK(g.coord(8) == 0.0);
  for (std::size_t f = 0; f < g.size(); ++f) CHECK(g.flat(g.index(f)) == f);
  CHECK(g.flat(Index{-1, 16, 0}) == g.flat(Index{15, 0, 0}));
  CHECK(g.wavenumber(3) == 3);
  CHECK(g.wavenumber(8) == -8);
  CHECK(g.is_nyquist(8));
  CHECK(g.frequency(1) == doctest::Approx(std::numbers::pi / 4.0));

  Vec d = g.displacement(Vec{3.5, 0.0, 0.0}, Vec{-3.5, 0.0, 0.0});
  CHECK(d[0] == doctest::Approx(-1.0));
  CHECK(g.norm(Vec{3.0, 4.0, 100.0}) == doctest::Approx(5.0));
}

TEST_CASE("field rejects non-finite values and mismatched sizes") {
  Grid g(1, 8, 1.0);
  std::vector<double> v(8, 0.0);
  v[3] = std::nan("");
  CHECK(code_of([&] { Field(g, v); }) == ErrorCode::InvalidField);
  v[3] = INFINITY;
  CHECK(code_of([&] { Field(g, v); }) == ErrorCode::InvalidField);
  CHECK(code_of([&] { Field(g, std::vector<double>(7, 0.0)); }) == ErrorCode::InvalidField);
  Field a = Field::constant(g, 2.0);
  Field b = Field::constant(Grid(1, 16, 1.0), 1.0);
  CHECK_THROWS_AS(a + b, Error);
  CHECK((a * 1.5).max() == 3.0);
  CHECK((a - a).max() == 0.0);
}

TEST_CASE("spectral round trip and integral") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int dim : {1, 2}) {
    Grid g(dim, 32, 3.0);
    std::vector<double> v(g.size());
    for (double& x : v) x = U(rng);
    Field f(g, v);
    Field back = from_spectral(to_spectral(f));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-12));
    // Zero mode times volume equals the midpoint integral.
    CHECK(to_spectral(f)[0].real() * g.volume() == doctest::Approx(integrate(f)).epsilon(1e-12));
  }
}

TEST_CASE("spectral gradient of a resolved Gaussian matches the analytic derivative") {
  Grid g(1, 128, 8.0);
  Field f = gaussian(g, 1.0);
  Field d = gradient(f)[0];
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coord(static_cast<int>(i));
    CHECK(d[i] == doctest::Approx(-2.0 * x * std::exp(-x * x)).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("translate is an exact phase shift and composes") {
  Grid g(2, 32, 4.0);
  Field f = gaussian(g, 0.8);
  Field t = translate(f, Vec{0.5, -1.0, 0.0});
  // g(x) = f(x + shift): the peak moves to -shift.
  Vec x{-0.5, 1.0, 0.0};
  std::size_t at = g.flat(Index{14, 20, 0});
  CHECK(g.position(at)[0] == doctest::Approx(x[0]));
  CHECK(g.position(at)[1] == doctest::Approx(x[1]));
  CHECK(t[at] == doctest::Approx(1.0).epsilon(1e-10));
  Field back = translate(t, Vec{-0.5, 1.0, 0.0});
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == doctest::Approx(f[i]).scale(1.0).epsilon(1e-12));
  CHECK(integrate(t) == doctest::Approx(integrate(f)).epsilon(1e-12));
}

TEST_CASE("dilate samples f(center + x / factor)") {
  Grid g(1, 256, 8.0);
  Field f = gaussian(g, 1.0, Vec{0.5, 0.0, 0.0});
  Field d = dilate(f, Vec{0.5, 0.0, 0.0}, 2.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double x = g.coord(static_cast<int>(i));
    CHECK(d[i] == doctest::Approx(std::exp(-x * x / 4.0)).scale(1.0).epsilon(1e-9));
  }
  // factor < 1 reads outside the box there: zero.
  Field far = dilate(f, Vec{}, 0.5);
  CHECK(far[0] == 0.0);
}

TEST_CASE("interpolation reproduces band-limited data off the grid") {
  Grid g(1, 64, std::numbers::pi);
  Field f = Field::from_function(g, [](const Vec& x) { return std::cos(3.0 * x[0]) + 0.5 * std::sin(x[0]); });
  std::array<std::vector<double>, kMaxDim> axes{std::vector<double>{0.1234, -2.5, 7.0}, {}, {}};
  auto v = interpolate_tensor(f, axes);
  for (std::size_t i = 0; i < 3; ++i) {
    double x = axes[0][i];
    CHECK(v[i] == doctest::Approx(std::cos(3.0 * x) + 0.5 * std::sin(x)).epsilon(1e-12));
  }
}

TEST_CASE("reflect mirrors about the origin node") {
  Grid g(1, 16, 2.0);
  Field f = Field::from_function(g, [](const Vec& x) { return x[0] + 3.0; });
  Field r = reflect(f);
  for (int i = 1; i < 16; ++i) CHECK(r[static_cast<std::size_t>(i)] == doctest::Approx(-g.coord(i) + 3.0));
}

TEST_CASE("snapshot encode / decode round trip is bit exact") {
  Grid g(2, 16, 2.5);
  Field f = gaussian(g, 0.7);
  auto bytes = encode_snapshot(f, 0.3, 1.25);
  CHECK(bytes.size() == 4 + 4 * 3 + 8 * 3 + 8 * g.size());
  Snapshot s = decode_snapshot(bytes);
  CHECK(s.s == 0.3);
  CHECK(s.time == 1.25);
  CHECK(s.field.grid() == g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(s.field[i] == f[i]);
}

TEST_CASE("corrupt snapshots raise FormatError") {
  Grid g(1, 8, 1.0);
  auto bytes = encode_snapshot(Field::constant(g, 1.0), 0.5, 0.0);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK(code_of([&] { decode_snapshot(bad); }) == ErrorCode::FormatError);
  bad = bytes;
  bad[4] = 2;
  CHECK(code_of([&] { decode_snapshot(bad); }) == ErrorCode::FormatError);
  bad = bytes;
  bad.pop_back();
  CHECK(code_of([&] { decode_snapshot(bad); }) == ErrorCode::FormatError);
  bad = bytes;
  bad.push_back(0);
  CHECK(code_of([&] { decode_snapshot(bad); }) == ErrorCode::FormatError);
  CHECK(code_of([&] { decode_snapshot(std::span<const unsigned char>()); }) == ErrorCode::FormatError);
}

TEST_CASE("snapshot files round trip and missing files raise IoError") {
  auto dir = std::filesystem::temp_directory_path() / "fpme_test_grid";
  std::filesystem::create_directories(dir);
  Grid g(1, 8, 1.0);
  write_snapshot(dir / "a.fpme", Field::constant(g, 0.25), 0.5, 2.0);
  CHECK(read_snapshot(dir / "a.fpme").field[3] == 0.25);
  CHECK(code_of([&] { read_snapshot(dir / "missing.fpme"); }) == ErrorCode::IoError);
  write_text_atomic(dir / "t.txt", "hello\n");
  std::ifstream in(dir / "t.txt");
  std::string line;
  std::getline(in, line);
  CHECK(line == "hello");
  std::filesystem::remove_all(dir);
}
