#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "fieldclick/numerics.hpp"
#include "fieldclick/signal_gen.hpp"

using namespace fieldclick;

namespace {

FieldState two_cells(Complex a, Complex b) {
  Grid::Coordinates pts(2, 1);
  pts << 0.0, 1.0;
  FieldState::Amplitudes v(2);
  v << a, b;
  return FieldState(std::make_shared<const Grid>(pts, 1.0), v);
}

}  // namespace

TEST_CASE("driver is reproducible per (seed, stream)") {
  ProcessParams p;
  p.seed = 7;
  SignalDriver a(p, 3);
  SignalDriver b(p, 3);
  SignalDriver c(p, 4);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    CHECK(a.eta() == b.eta());
    differs = differs || a.eta() != c.eta();
    a.advance();
    b.advance();
    c.advance();
  }
  CHECK(differs);
  CHECK(a.steps() == 1000);
  CHECK(a.time() == doctest::Approx(1000 * p.dt));
}

TEST_CASE("step_driver leaves its argument untouched") {
  const auto d0 = init_driver(ProcessParams{}, 0);
  const auto d1 = step_driver(d0);
  const auto d1_again = step_driver(d0);
  CHECK(d0.steps() == 0);
  CHECK(d1.steps() == 1);
  CHECK(d1.eta() == d1_again.eta());
  CHECK(d1.eta() != d0.eta());
}

TEST_CASE("field is eta times the shape") {
  const auto psi = two_cells({1.0, 0.0}, {0.0, 2.0});
  ProcessParams p;
  p.initial_eta = Complex(0.5, -1.0);
  const SignalDriver d(p);
  CHECK(field_at(d, psi, 0) == Complex(0.5, -1.0));
  CHECK(field_at(d, psi, 1) == Complex(0.0, 2.0) * Complex(0.5, -1.0));
  const auto phi = field_of(d, psi);
  CHECK(phi[1] == field_at(d, psi, 1));
}

TEST_CASE("stationary intensity has unit mean") {
  const auto psi = two_cells({1.0, 0.0}, {0.0, 0.0});
  const std::size_t n = 100000;
  const auto samples = sample_ensemble(psi, n, 11);
  RunningStats intensity;
  RunningStats re;
  RunningStats im;
  for (const auto& s : samples) {
    intensity.push(std::norm(s[0]));
    re.push(s[0].real());
    im.push(s[0].imag());
    CHECK(s[1] == Complex(0.0, 0.0));
  }
  // |eta|^2 is exponential with unit mean and unit variance.
  CHECK(std::abs(intensity.mean() - 1.0) <= 3.0 * intensity.standard_error());
  CHECK(std::abs(intensity.variance() - 1.0) < 0.05);
  CHECK(std::abs(re.mean()) <= 3.0 * re.standard_error());
  CHECK(std::abs(im.mean()) <= 3.0 * im.standard_error());
  CHECK(re.variance() == doctest::Approx(0.5).epsilon(0.03));
  CHECK(im.variance() == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("trajectory autocorrelation decays as exp(-lag / tau)") {
  ProcessParams p;
  p.tau_pq = 1e-4;
  p.dt = 1e-5;
  p.seed = 5;
  SignalDriver d(p);
  const std::size_t n = 1'000'000;
  const std::vector<std::size_t> lags{1, 5, 10, 20};
  std::vector<Complex> history(n);
  RunningStats intensity;
  for (std::size_t k = 0; k < n; ++k) {
    history[k] = d.eta();
    intensity.push(std::norm(d.eta()));
    d.advance();
  }
  // Roughly 1e5 decorrelated blocks; the mean is good to about 1%.
  CHECK(std::abs(intensity.mean() - 1.0) < 0.03);
  for (const auto lag : lags) {
    CompensatedSum<double> re;
    for (std::size_t k = 0; k + lag < n; ++k) re += (history[k + lag] * std::conj(history[k])).real();
    const double rho = re.value() / static_cast<double>(n - lag);
    const double expected = std::exp(-static_cast<double>(lag) * p.dt / p.tau_pq);
    CAPTURE(lag);
    CHECK(std::abs(rho - expected) < 0.03);
  }
}

TEST_CASE("frozen driver never moves") {
  const auto p = ProcessParams::frozen(Complex(0.3, 0.4), 0.01);
  CHECK(p.is_frozen());
  SignalDriver d(p);
  for (int k = 0; k < 100; ++k) d.advance();
  CHECK(d.eta() == Complex(0.3, 0.4));
  CHECK(d.time() == doctest::Approx(1.0));
}

TEST_CASE("process parameter validation") {
  ProcessParams p;
  p.dt = 2e-5;
  CHECK(violations(p).size() == 1);
  CHECK_THROWS_AS(SignalDriver{p}, Error);
  try {
    validate(p);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("tau_pq / 10") != std::string::npos);
  }

  ProcessParams bad;
  bad.tau_pq = -1;
  bad.gamma = 0;
  CHECK(violations(bad).size() >= 2);

  ProcessParams edge;
  edge.dt = edge.tau_pq / 10;
  CHECK(violations(edge).empty());
}

TEST_CASE("sample_ensemble rejects empty ensembles and is seeded") {
  const auto psi = two_cells({1.0, 0.0}, {1.0, 0.0});
  CHECK_THROWS_AS(sample_ensemble(psi, 0, 1), Error);
  const auto a = sample_ensemble(psi, 10, 1);
  const auto b = sample_ensemble(psi, 10, 1);
  const auto c = sample_ensemble(psi, 10, 2);
  CHECK(a[9][0] == b[9][0]);
  CHECK(a[9][0] != c[9][0]);
  // Rank one: every sample is proportional to psi.
  for (const auto& s : a) CHECK(s[0] == s[1]);
}
