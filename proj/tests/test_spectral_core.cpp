#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>
#include <cstring>

#include "nls/complex_field.hpp"
#include "nls/fft.hpp"
#include "nls/field_io.hpp"
#include "nls/norms.hpp"
#include "nls/spectral_grid.hpp"

using namespace nls;

namespace {

constexpr double pi = std::numbers::pi;

ComplexField random_field(const SpectralGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexField f(g, Space::physical);
  for (auto& z : f.values()) z = Complex(n(rng), n(rng));
  return f;
}

// Direct O(M^2) evaluation of c(xi) = M^{-1/2} sum_j u_j exp(-i xi.x_j).
ComplexField naive_forward(const ComplexField& f) {
  const auto& g = f.grid();
  ComplexField out(g, Space::frequency);
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.total_points()));
  for (std::size_t k = 0; k < g.total_points(); ++k) {
    const auto kk = g.unflatten(k);
    Complex acc = 0.0;
    for (std::size_t j = 0; j < g.total_points(); ++j) {
      const auto jj = g.unflatten(j);
      double phase = 0.0;
      for (int a = 0; a < g.dim(); ++a) phase += g.wavenumber(kk[a]) * g.coordinate(jj[a]);
      acc += f[j] * std::polar(1.0, -phase);
    }
    out[k] = acc * scale;
  }
  return out;
}

double rel_gap(const ComplexField& a, const ComplexField& b) { return l2_distance(a, b) / l2_norm(b); }

}  // namespace

TEST(SpectralGrid, AxisWavenumbersUnitLattice) {
  const auto g = make_grid(1, 8, pi);
  const std::vector<double> expect = {-4, -3, -2, -1, 0, 1, 2, 3};
  const auto got = g.axis_wavenumbers();
  ASSERT_EQ(got.size(), expect.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expect[i], 1e-15);
}

TEST(SpectralGrid, HalfUnitLattice) {
  const auto g = make_grid(1, 8, 2.0 * pi);
  const auto got = g.axis_wavenumbers();
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], -2.0 + 0.5 * i, 1e-15);
}

TEST(SpectralGrid, TwoDimensionalCounts) {
  const auto g = make_grid(2, 8, pi);
  EXPECT_EQ(g.total_points(), 64u);
  EXPECT_NEAR(g.max_wavenumber_norm(), 4.0 * std::sqrt(2.0), 1e-14);
}

TEST(SpectralGrid, Invariants) {
  for (int d = 1; d <= 3; ++d) {
    const auto g = make_grid(d, 16, 3.0);
    EXPECT_EQ(g.total_points(), static_cast<std::size_t>(std::pow(16, d)));
    EXPECT_DOUBLE_EQ(g.spacing(), 6.0 / 16.0);
    const auto axis = g.axis_wavenumbers();
    EXPECT_EQ(std::count(axis.begin(), axis.end(), 0.0), 1);
    for (double k : axis) EXPECT_LE(std::abs(k), pi * 16 / (2 * 3.0) + 1e-12);
    EXPECT_DOUBLE_EQ(g.coordinate(0), -3.0);
  }
}

TEST(SpectralGrid, FlattenRoundTrip) {
  const auto g = make_grid(3, 8, 1.0);
  for (std::size_t i = 0; i < g.total_points(); i += 7) EXPECT_EQ(g.flatten(g.unflatten(i)), i);
}

TEST(SpectralGrid, RejectsBadParameters) {
  EXPECT_THROW(make_grid(1, 12, 1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(1, 4, 1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(1, 8, 0.0), std::invalid_argument);
  EXPECT_THROW(make_grid(1, 8, -1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(0, 8, 1.0), std::invalid_argument);
  EXPECT_THROW(make_grid(4, 8, 1.0), std::invalid_argument);
}

TEST(ComplexField, SizeMustMatchGrid) {
  const auto g = make_grid(1, 8, 1.0);
  EXPECT_THROW(ComplexField(g, ComplexBuffer(7), Space::physical), std::invalid_argument);
  ComplexField f(g, Space::physical);
  EXPECT_EQ(f.size(), 8u);
}

TEST(Transform, MatchesDirectSum1D) {
  const auto g = make_grid(1, 16, 2.5);
  const auto f = random_field(g, 3);
  EXPECT_LT(rel_gap(forward_transform(f), naive_forward(f)), 1e-13);
}

TEST(Transform, MatchesDirectSum2D) {
  const auto g = make_grid(2, 8, 1.7);
  const auto f = random_field(g, 4);
  EXPECT_LT(rel_gap(forward_transform(f), naive_forward(f)), 1e-13);
}

TEST(Transform, MatchesDirectSum3D) {
  const auto g = make_grid(3, 8, 0.9);
  const auto f = random_field(g, 5);
  EXPECT_LT(rel_gap(forward_transform(f), naive_forward(f)), 1e-13);
}

TEST(Transform, ConstantIsDcOnly) {
  const auto g = make_grid(1, 8, pi);
  ComplexField f(g, Space::physical);
  for (auto& z : f.values()) z = 1.0;
  const auto c = forward_transform(f);
  EXPECT_EQ(c.space(), Space::frequency);
  EXPECT_NEAR(std::abs(c[0]), std::sqrt(8.0), 1e-14);
  for (std::size_t i = 1; i < 8; ++i) EXPECT_LT(std::abs(c[i]), 1e-14);
}

TEST(Transform, PureModeHasOneCoefficient) {
  const auto g = make_grid(1, 16, pi);
  ComplexField f(g, Space::physical);
  for (std::size_t j = 0; j < 16; ++j) f[j] = std::polar(1.0, 2.0 * g.coordinate(j));
  const auto c = forward_transform(f);
  for (std::size_t i = 0; i < 16; ++i) {
    if (g.mode(i) == 2) {
      EXPECT_NEAR(c[i].real(), 4.0, 1e-13);
      EXPECT_NEAR(c[i].imag(), 0.0, 1e-13);
    } else {
      EXPECT_LT(std::abs(c[i]), 1e-13);
    }
  }
}

TEST(Transform, ParsevalOnRandomFields) {
  for (unsigned s = 0; s < 100; ++s) {
    const auto g = make_grid(1 + s % 3, s % 3 == 2 ? 8 : 64, 2.0);
    const auto f = random_field(g, s);
    const auto c = forward_transform(f);
    EXPECT_NEAR(l2_norm(c) / l2_norm(f), 1.0, 1e-13);
  }
}

TEST(Transform, RoundTrip) {
  for (unsigned s = 0; s < 10; ++s) {
    const auto g = make_grid(2, 32, 5.0);
    const auto f = random_field(g, 100 + s);
    const auto back = inverse_transform(forward_transform(f));
    EXPECT_EQ(back.space(), Space::physical);
    EXPECT_LT(rel_gap(back, f), 1e-12);
  }
}

TEST(Transform, WrongTagThrows) {
  const auto g = make_grid(1, 8, 1.0);
  EXPECT_THROW(inverse_transform(ComplexField(g, Space::physical)), std::invalid_argument);
  EXPECT_THROW(forward_transform(ComplexField(g, Space::frequency)), std::invalid_argument);
}

TEST(Norms, PlaneWave) {
  const auto g = make_grid(1, 32, pi);
  ComplexField f(g, Space::physical);
  for (std::size_t j = 0; j < 32; ++j) f[j] = std::polar(1.0, 2.0 * g.coordinate(j));
  EXPECT_NEAR(norm(f, L2{}), std::sqrt(2.0 * pi), 1e-13);
  EXPECT_NEAR(norm(f, Hs{1.0}), std::sqrt(2.0 * pi) * std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(norm(f, Lr{infinity}), 1.0, 1e-15);
  EXPECT_NEAR(norm(f, Lr{4.0}), std::pow(2.0 * pi, 0.25), 1e-13);
  EXPECT_NEAR(norm(f, HlogS{0.5}), std::sqrt(2.0 * pi) * std::sqrt(std::log(4.0)), 1e-12);
}

TEST(Norms, GaussianL2) {
  const auto g = make_grid(1, 1024, 16.0);
  ComplexField f(g, Space::physical);
  for (std::size_t j = 0; j < 1024; ++j) f[j] = std::exp(-g.coordinate(j) * g.coordinate(j));
  EXPECT_NEAR(norm(f, L2{}), std::pow(pi / 2.0, 0.25), 1e-6);
}

TEST(Norms, HsZeroIsL2) {
  const auto g = make_grid(2, 32, 3.0);
  const auto f = random_field(g, 9);
  EXPECT_NEAR(norm(f, Hs{0.0}), norm(f, L2{}), 1e-13 * norm(f, L2{}));
  EXPECT_NEAR(norm(f, HlogS{0.0}), norm(f, L2{}), 1e-13 * norm(f, L2{}));
}

TEST(Norms, Homogeneity) {
  const auto g = make_grid(1, 64, 3.0);
  const auto f = random_field(g, 11);
  const Complex c(-1.5, 2.0);
  const auto cf = c * f;
  const std::vector<NormKind> kinds = {L2{}, Lr{1.0}, Lr{3.0}, Lr{infinity}, Hs{0.7}, HlogS{1.3}};
  for (const auto& k : kinds) EXPECT_NEAR(norm(cf, k), std::abs(c) * norm(f, k), 1e-13 * norm(cf, k));
}

TEST(Norms, FrequencyTaggedInputTransformsInternally) {
  const auto g = make_grid(1, 64, 3.0);
  const auto f = random_field(g, 12);
  const auto c = forward_transform(f);
  EXPECT_NEAR(norm(c, Lr{3.0}), norm(f, Lr{3.0}), 1e-12 * norm(f, Lr{3.0}));
  EXPECT_NEAR(norm(c, Hs{2.0}), norm(f, Hs{2.0}), 1e-12 * norm(f, Hs{2.0}));
}

TEST(Norms, LrAgainstDirectSum) {
  const auto g = make_grid(1, 64, 3.0);
  const auto f = random_field(g, 13);
  double s = 0.0;
  for (const auto& z : f.values()) s += std::pow(std::abs(z), 3.0);
  EXPECT_NEAR(norm(f, Lr{3.0}), std::cbrt(g.spacing() * s), 1e-12);
}

TEST(Norms, RejectsBadExponents) {
  const auto g = make_grid(1, 8, 1.0);
  const ComplexField f(g, Space::physical);
  EXPECT_THROW(norm(f, Lr{0.5}), std::invalid_argument);
  EXPECT_THROW(norm(f, Hs{-1.0}), std::invalid_argument);
  EXPECT_THROW(norm(f, HlogS{-0.1}), std::invalid_argument);
}

TEST(FieldIo, RoundTripIsExact) {
  const auto g = make_grid(2, 8, 1.25);
  auto f = forward_transform(random_field(g, 21));
  std::stringstream ss;
  write_field(ss, f);
  const auto back = read_field(ss);
  EXPECT_EQ(back.grid(), g);
  EXPECT_EQ(back.space(), Space::frequency);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(back[i], f[i]);
}

TEST(FieldIo, HeaderLayout) {
  const auto g = make_grid(1, 8, 2.0);
  ComplexField f(g, Space::physical);
  f[0] = Complex(1.0, -2.0);
  std::stringstream ss;
  write_field(ss, f);
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 4u + 4u + 1u + 8u + 8u + 1u + 8u * 16u);
  EXPECT_EQ(bytes.substr(0, 4), "NLSF");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[8], 1);   // dim
  EXPECT_EQ(bytes[9], 8);   // n, low byte
  EXPECT_EQ(bytes[25], 0);  // space tag
  double re = 0.0;
  std::memcpy(&re, bytes.data() + 26, 8);
  EXPECT_EQ(re, 1.0);
}

TEST(FieldIo, RejectsBadMagic) {
  std::stringstream ss("XXXX");
  EXPECT_THROW(read_field(ss), std::runtime_error);
}
