#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "zr/diagnostics.hpp"
#include "zr/initial.hpp"
#include "zr/simulator.hpp"

using namespace zr;

namespace {

ZRCoefficients dark_set() {
  return ZRCoefficients::direct(1.0, 2.0, -1.0, 0.25, 0.5, 1.0, 1.0, 1.0);
}

}  // namespace

TEST_CASE("mass") {
  const Grid g = Grid::box(32, 32, 2 * pi, 2 * pi);
  SECTION("zero field") { CHECK(mass(FieldState(g)) == 0.0); }
  SECTION("constant-modulus mode") {
    FieldState fs(g);
    const double A = 0.7;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        fs.psi.at(i, j) = A * std::exp(cplx(0.0, g.x(i)));
    CHECK(mass(fs) == Catch::Approx(A * A * sq(2 * pi)).epsilon(1e-13));
  }
  SECTION("matches the Parseval sum") {
    FieldState fs = make_random_state(g, 0.9, 41);
    ComplexField hat = fs.psi;
    fft_forward(hat);
    const double parseval = sum_sq(hat) / g.size() * g.cell();
    CHECK(std::abs(mass(fs) - parseval) < 1e-12 * parseval);
  }
}

TEST_CASE("hamiltonian") {
  const ZRCoefficients zc = dark_set();
  const Grid g = Grid::box(32, 32, 2 * pi, 2 * pi);
  SECTION("zero fields") { CHECK(hamiltonian(FieldState(g), zc) == 0.0); }
  SECTION("acoustic-only content is a nonnegative quadratic") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      FieldState fs = make_random_state(g, 1.0, 100 + trial);
      for (auto& v : fs.psi.v) v = 0.0;
      CHECK(hamiltonian(fs, zc) >= 0.0);
    }
  }
  SECTION("conserved on a comoving free run") {
    Scenario sc;
    sc.kind = ScenarioKind::free_run;
    sc.coeffs = zc;
    sc.grid = g;
    sc.eps = 1.0;
    sc.comoving = true;
    sc.dt = 0.005;
    sc.t_end = 1.0;
    const FieldState fs0 = make_trig_state(g, 0.2);
    const double h0 = hamiltonian(fs0, zc);
    const RunResult rr = run(sc, fs0);
    CHECK(std::abs(hamiltonian(rr.final_state, zc) - h0) < 1e-7 * std::abs(h0));
  }
}

TEST_CASE("perturbed energy") {
  const ZRCoefficients zc = dark_set();
  const Grid g = Grid::box(64, 16, 14 * pi, 7 * pi);
  const SolitonSpec s = SolitonSpec::make(0.0, 0.1, zc);
  const SolitonBackground bg = make_background(s, g, true);
  SECTION("zero perturbation has zero energy, term by term") {
    const PerturbedEnergy e = perturbed_energy(FieldState(g), bg, zc, s.lambda);
    CHECK(e.total == 0.0);
    for (double t : e.terms) CHECK(t == 0.0);
  }
  SECTION("the two algebraic forms agree") {
    const FieldState fs = make_random_state(g, 0.4, 57);
    const PerturbedEnergy a = perturbed_energy(fs, bg, zc, s.lambda, true);
    const PerturbedEnergy b = perturbed_energy(fs, bg, zc, s.lambda, false);
    CHECK(std::abs(a.total - b.total) <=
          1e-12 * std::max(1.0, std::abs(a.total)));
  }
  SECTION("ungauged backgrounds are rejected") {
    const SolitonBackground ub = make_background(s, g, false);
    CHECK_THROWS_AS(perturbed_energy(FieldState(g), ub, zc, s.lambda), Error);
  }
}

TEST_CASE("coercivity bound") {
  const ZRCoefficients zc = dark_set();
  const Grid g = Grid::box(64, 16, 14 * pi, 7 * pi);
  const SolitonSpec s = SolitonSpec::make(0.0, 0.1, zc);
  const SolitonBackground bg = make_background(s, g, true);
  SECTION("threshold arithmetic") {
    // W(M^2+D^2) = 1 < sigma2 = 2, so eps* = (1 - 1/2)/2.
    const CoercivityResult r =
        coercivity_check(FieldState(g), bg, zc, s.lambda);
    CHECK(r.eps_star == Catch::Approx(0.25).epsilon(1e-15));
    CHECK(r.holds);  // both sides vanish
    CHECK(r.lhs == 0.0);
  }
  SECTION("holds on random localized fields in the admissible regime") {
    for (int trial = 0; trial < 100; ++trial) {
      const FieldState fs = make_random_state(g, 0.5, 500 + trial);
      const CoercivityResult r = coercivity_check(fs, bg, zc, s.lambda);
      REQUIRE(r.holds);
    }
  }
  SECTION("regime preconditions are enforced") {
    const ZRCoefficients weak =
        ZRCoefficients::direct(1.0, 0.5, -1.0, 0.25, 0.5, 1.0, 1.0, 1.0);
    CHECK_THROWS_AS(coercivity_check(FieldState(g), bg, weak, s.lambda), Error);
    CHECK_THROWS_AS(coercivity_check(FieldState(g), bg, zc, 5.0), Error);
  }
}

TEST_CASE("drift report") {
  SECTION("constant series has zero drifts") {
    std::vector<EnergyReport> series;
    for (int i = 0; i < 5; ++i) {
      EnergyReport r;
      r.time = 0.1 * i;
      r.mass = 2.5;
      r.hamiltonian = -0.7;
      r.perturbed_energy = 0.3;
      series.push_back(r);
    }
    const DriftSummary s = drift_report(series);
    CHECK(s.mass_drift == 0.0);
    CHECK(s.hamiltonian_drift == 0.0);
    CHECK(s.perturbed_drift == 0.0);
    CHECK(s.coercivity_all);
    CHECK(std::abs(s.kappa) < 1e-12);
  }
  SECTION("exponential growth is fitted") {
    std::vector<EnergyReport> series;
    for (int i = 0; i < 20; ++i) {
      EnergyReport r;
      r.time = 0.05 * i;
      r.mass = 1.3 * std::exp(0.8 * r.time);
      r.hamiltonian = 1.0;
      series.push_back(r);
    }
    const DriftSummary s = drift_report(series);
    CHECK(s.kappa == Catch::Approx(0.8).epsilon(1e-6));
    CHECK(s.envelope_factor == Catch::Approx(1.0).epsilon(1e-6));
  }
  SECTION("needs two reports") {
    std::vector<EnergyReport> series(1);
    CHECK_THROWS_AS(drift_report(series), Error);
  }
}
