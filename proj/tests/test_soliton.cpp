#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "zr/soliton.hpp"

using namespace zr;

namespace {

ZRCoefficients bright_set() {
  // B = sigma2 + W(a + bD) = 1 - 2 < 0 at c = 0.
  return ZRCoefficients::direct(1.0, 1.0, -1.0, 0.5, 1.0, 1.0, 1.0, 1.0);
}

ZRCoefficients dark_set() {
  // B = sigma2 - W(M^2+D^2) = 2 - 1 > 0 at c = 0.
  return ZRCoefficients::direct(1.0, 2.0, -1.0, 0.25, 0.5, 1.0, 1.0, 1.0);
}

// Closed-form second derivative of the profile, independent of profile().
double profile_second_derivative(const SolitonSpec& s, double x) {
  const double u = s.width * x;
  if (s.family == SolitonFamily::bright) {
    const double se = 1.0 / std::cosh(u);
    return s.amp * sq(s.width) * se * (1.0 - 2.0 * se * se);
  }
  const double th = std::tanh(u);
  return -2.0 * s.amp * sq(s.width) * th * (1.0 - th * th);
}

double ode_residual(const SolitonSpec& s, double x) {
  const ZRCoefficients& zc = s.coeffs;
  const double A = sq(s.c + zc.sigma3) / (4.0 * zc.delta) - s.lambda;
  const double B = zc.sigma2 + zc.W * (s.a + s.b * zc.D);
  const double R = profile(s, x).R;
  return zc.delta * profile_second_derivative(s, x) + A * R - B * R * R * R;
}

}  // namespace

TEST_CASE("acoustic amplitudes") {
  SECTION("closed form at rest") {
    const ZRCoefficients zc =
        ZRCoefficients::direct(1.0, 1.0, -1.0, 0.5, 1.0, 2.0, 0.5, 1.0);
    const auto [a, b] = acoustic_amplitudes(0.0, zc);
    CHECK(a == Catch::Approx(-0.25).epsilon(1e-14));
    CHECK(b == Catch::Approx(-2.0).epsilon(1e-14));
  }
  SECTION("a + D b = -(M^2 + D^2) at rest") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> um(0.2, 3.0), ud(-2.0, 2.0);
    for (int i = 0; i < 100; ++i) {
      const double M = um(rng), D = ud(rng);
      const ZRCoefficients zc =
          ZRCoefficients::direct(1.0, 1.0, -1.0, 0.5, 1.0, D, M, 1.0);
      const auto [a, b] = acoustic_amplitudes(0.0, zc);
      CHECK(a + D * b == Catch::Approx(-(M * M + D * D)).epsilon(1e-12));
    }
  }
  SECTION("near-resonant speed stays finite") {
    const ZRCoefficients zc =
        ZRCoefficients::direct(1.0, 1.0, -1.0, 0.5, 1.0, 1.0, 1.0, 1.0);
    const auto [a, b] = acoustic_amplitudes(0.9, zc);
    // frozen from the exact rationals: a = b = -1.9/0.19 = -10
    CHECK(a == Catch::Approx(-10.0).epsilon(1e-13));
    CHECK(b == Catch::Approx(-10.0).epsilon(1e-13));
  }
  SECTION("resonance is an error") {
    const ZRCoefficients zc =
        ZRCoefficients::direct(1.0, 1.0, -1.0, 0.5, 1.0, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(acoustic_amplitudes(1.0, zc), Error);
    CHECK_THROWS_AS(acoustic_amplitudes(-0.1, zc), Error);
  }
}

TEST_CASE("classification") {
  SECTION("subsonic speed with large frequency is bright") {
    const ZRCoefficients zc = bright_set();
    CHECK(classify(0.95, 8.0, zc) == SolitonClass::bright);
  }
  SECTION("supersonic speed below the phase threshold is dark") {
    const ZRCoefficients zc =
        ZRCoefficients::direct(1.0, 2.0, -1.0, 0.5, 0.5, 1.0, 1.0, 1.0);
    const double c = 1.5;  // > 1/M
    const double lam = 0.0;  // < (c+sigma3)^2/(4 delta)
    CHECK(classify(c, lam, zc) == SolitonClass::dark);
  }
  SECTION("boundary values classify as none") {
    const ZRCoefficients zc = bright_set();
    // lambda at (c+sigma3)^2/(4 delta) makes the first quantity zero.
    CHECK(classify(0.0, 0.5, zc) == SolitonClass::none);
  }
  SECTION("never both families") {
    const ZRCoefficients zc = dark_set();
    for (int i = 0; i <= 40; ++i) {
      for (int j = 0; j <= 40; ++j) {
        const double c = 0.9 * i / 40.0;
        const double lam = -3.0 + 6.0 * j / 40.0;
        const SolitonClass cls = classify(c, lam, zc);
        const auto k = zr::detail::ode_constants(c, lam, zc);
        const bool bright = k.A / zc.delta < 0 && k.B / zc.delta < 0;
        const bool dark = k.A / zc.delta > 0 && k.B / zc.delta > 0;
        CHECK_FALSE((bright && dark));
        if (bright) CHECK(cls == SolitonClass::bright);
        if (dark) CHECK(cls == SolitonClass::dark);
      }
    }
  }
}

TEST_CASE("profiles") {
  const SolitonSpec b = SolitonSpec::make(0.0, 1.0, bright_set());
  const SolitonSpec d = SolitonSpec::make(0.0, 0.1, dark_set());
  REQUIRE(b.family == SolitonFamily::bright);
  REQUIRE(d.family == SolitonFamily::dark);

  SECTION("center values") {
    CHECK(profile(b, 0.0).R == Catch::Approx(b.amp));
    CHECK(profile(b, 0.0).P == 0.0);
    CHECK(profile(d, 0.0).R == 0.0);
    CHECK(profile(d, 0.0).P == 0.0);
  }
  SECTION("dark asymptotes") {
    CHECK(profile(d, 60.0).R == Catch::Approx(d.amp).epsilon(1e-12));
    CHECK(profile(d, -60.0).R == Catch::Approx(-d.amp).epsilon(1e-12));
  }
  SECTION("profile equation residual at random points") {
    std::mt19937_64 rng(31);
    for (const SolitonSpec& s : {b, d}) {
      std::uniform_real_distribution<double> ux(-10.0 / s.width,
                                                10.0 / s.width);
      for (int i = 0; i < 100; ++i)
        REQUIRE(std::abs(ode_residual(s, ux(rng))) < 1e-10);
    }
  }
  SECTION("P differentiates back to R^2") {
    for (const SolitonSpec& s : {b, d}) {
      const double h = 1e-6;
      for (double x : {-2.1, -0.3, 0.0, 0.7, 1.9}) {
        const double dP =
            (profile(s, x + h).P - profile(s, x - h).P) / (2.0 * h);
        CHECK(dP == Catch::Approx(sq(profile(s, x).R)).margin(1e-8));
      }
    }
  }
}

TEST_CASE("line soliton values") {
  const SolitonSpec b = SolitonSpec::make(0.0, 1.0, bright_set());
  SECTION("center at t = 0, ungauged") {
    const auto v = line_soliton(b, 0.0, 0.0, false);
    CHECK(v.psi.real() == Catch::Approx(b.amp));
    CHECK(v.psi.imag() == 0.0);
    CHECK(v.rho == Catch::Approx(b.a * sq(b.amp)));
    CHECK(v.dphi == Catch::Approx(b.b * sq(b.amp)));
  }
  SECTION("gauged profile is real everywhere") {
    const SolitonSpec d = SolitonSpec::make(0.0, 0.1, dark_set());
    for (double x : {-5.0, -1.0, 0.4, 3.3})
      CHECK(line_soliton(d, x, 1.7, true).psi.imag() == 0.0);
  }
  SECTION("gauged form needs c = 0") {
    const ZRCoefficients zc = bright_set();
    const SolitonSpec moving = SolitonSpec::make(0.5, 8.0, zc);
    CHECK_THROWS_AS(line_soliton(moving, 0.0, 0.0, true), Error);
  }
  SECTION("acoustic slope equals b R^2") {
    const SolitonSpec d = SolitonSpec::make(0.0, 0.1, dark_set());
    for (double x : {-3.0, 0.2, 1.5}) {
      const auto v = line_soliton(d, x, 0.0, false);
      CHECK(v.dphi == Catch::Approx(d.b * sq(profile(d, x).R)).margin(1e-14));
    }
  }
}

TEST_CASE("sampled residuals") {
  SECTION("bright member solves the system to spectral accuracy") {
    const SolitonSpec s = SolitonSpec::make(0.0, 1.0, bright_set());
    const Grid g = Grid::line(2048, 80.0 / s.width);
    const auto res = soliton_residual(s, g);
    CHECK(res[0] < 1e-8);
    CHECK(res[1] < 1e-10);
    CHECK(res[2] < 1e-10);
  }
  SECTION("moving bright member") {
    const ZRCoefficients zc =
        ZRCoefficients::direct(1.0, 2.0, -1.0, 0.5, 0.5, 1.0, 1.0, 1.0);
    const SolitonSpec s = SolitonSpec::make(0.9, 1.0, zc);
    REQUIRE(s.family == SolitonFamily::bright);
    const Grid g = Grid::line(2048, 80.0 / s.width);
    const auto res = soliton_residual(s, g);
    CHECK(res[0] < 1e-8);
    CHECK(res[1] < 1e-10);
    CHECK(res[2] < 1e-10);
  }
  SECTION("residual decreases under refinement until the roundoff floor") {
    const SolitonSpec s = SolitonSpec::make(0.0, 1.0, bright_set());
    double prev = 1e9;
    bool at_floor = false;
    for (int n : {64, 128, 256, 512, 1024, 2048}) {
      const auto res = soliton_residual(s, Grid::line(n, 80.0 / s.width));
      if (!at_floor) {
        CHECK(res[0] < prev);
      }
      if (res[0] < 1e-10) at_floor = true;
      prev = res[0];
    }
    CHECK(at_floor);
  }
  SECTION("degenerate boundary member has zero fields and zero residual") {
    // lambda exactly at the admissibility boundary.
    const SolitonSpec s = SolitonSpec::make(0.0, 0.5, bright_set());
    CHECK(s.degenerate());
    const auto res = soliton_residual(s, Grid::line(64, 10.0));
    CHECK(res[0] == 0.0);
    CHECK(res[1] == 0.0);
    CHECK(res[2] == 0.0);
  }
  SECTION("grid too small is an error") {
    const SolitonSpec s = SolitonSpec::make(0.0, 1.0, bright_set());
    CHECK_THROWS_AS(soliton_residual(s, Grid::line(64, 8.0)), Error);
  }
  SECTION("periodized dark forcing is small and reported") {
    const SolitonSpec s = SolitonSpec::make(0.0, 0.1, dark_set());
    const Grid g = Grid::line(512, 14.0 * pi);
    const auto res = soliton_residual(s, g);
    CHECK(res[0] < 1e-4);   // measured forcing of the seam matching
    CHECK(res[1] < 1e-10);  // acoustic identities hold for any profile
    CHECK(res[2] < 1e-10);
  }
}

TEST_CASE("localized 2d existence predicate") {
  const ZRCoefficients focusing =
      ZRCoefficients::direct(1.0, 2.0, -1.0, 0.5, 1.0, 1.0, 1.0, 1.0);
  // sigma2 - W M^2 = 1 > 0, so negative coupling speed qualifies.
  CHECK(focusing_case_2d(-1.0, focusing));
  CHECK_FALSE(focusing_case_2d(0.0, focusing));  // strict inequality
  CHECK_FALSE(focusing_case_2d(1.0, focusing));
  const ZRCoefficients nonelliptic =
      ZRCoefficients::direct(1.0, 2.0, -1.0, -0.5, 1.0, 1.0, 1.0, 1.0);
  CHECK_FALSE(focusing_case_2d(-1.0, nonelliptic));
}

TEST_CASE("sampled backgrounds") {
  const SolitonSpec d = SolitonSpec::make(0.0, 0.1, dark_set());
  const Grid g = Grid::box(64, 16, 14.0 * pi, 7.0 * pi);
  SECTION("acoustic components follow the envelope pointwise") {
    const SolitonBackground bg = make_background(d, g, true);
    const double md = sq(d.coeffs.M) + sq(d.coeffs.D);
    double err = 0.0;
    for (std::size_t i = 0; i < bg.phi1.size(); ++i)
      err = std::max(err, std::abs(bg.phi2.v[i] + d.coeffs.D * bg.dphi3.v[i] +
                                   md * std::norm(bg.phi1.v[i])));
    CHECK(err < 1e-12);
  }
  SECTION("gauged background is real and y-independent") {
    const SolitonBackground bg = make_background(d, g, true);
    for (int i = 0; i < g.nx; ++i) {
      CHECK(bg.phi1.at(i, 0).imag() == 0.0);
      CHECK(bg.phi1.at(i, 0) == bg.phi1.at(i, g.ny / 2));
    }
  }
  SECTION("ungauged dark background needs a grid-periodic phase") {
    // phase_rate = -2 here, so lx must be a multiple of pi.
    const Grid bad = Grid::box(64, 16, 10.0, 5.0);
    CHECK_THROWS_AS(make_background(d, bad, false), Error);
    CHECK_NOTHROW(make_background(d, g, false));
  }
}
