#ifndef FIELDCLICK_SIGNAL_GEN_HPP
#define FIELDCLICK_SIGNAL_GEN_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fieldclick/field_space.hpp"

namespace fieldclick {

/// Time scales of the driving process, in seconds.
struct ProcessParams {
  double tau_pq = 1e-4;  ///< correlation time of the fine-scale fluctuations
  double dt = 1e-5;      ///< integration step
  double gamma = 1.0;    ///< time unit converting collected intensity to energy
  std::uint64_t seed = 0;
  /// Fixed eta(0). When empty, eta(0) is drawn from the stationary law.
  std::optional<Complex> initial_eta;

  /// tau_pq = infinity: eta stays at eta0 forever.
  static ProcessParams frozen(Complex eta0, double dt, double gamma = 1.0) {
    ProcessParams p;
    p.tau_pq = std::numeric_limits<double>::infinity();
    p.dt = dt;
    p.gamma = gamma;
    p.initial_eta = eta0;
    return p;
  }

  bool is_frozen() const { return std::isinf(tau_pq); }

  /// One-step autocorrelation a = exp(-dt / tau_pq).
  double step_correlation() const { return std::exp(-dt / tau_pq); }
};

/// Human-readable list of violated constraints; empty when valid.
std::vector<std::string> violations(const ProcessParams& params);
void validate(const ProcessParams& params);

/// Independent reproducible generator for (seed, stream).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// Complex circular Gaussian with E|z|^2 = 1.
class ComplexNormal {
 public:
  template <typename Engine>
  Complex operator()(Engine& engine) {
    const double re = normal_(engine);
    const double im = normal_(engine);
    return {re, im};
  }

 private:
  std::normal_distribution<double> normal_{0.0, std::sqrt(0.5)};
};

/**
 * Stationary complex Ornstein-Uhlenbeck driver eta(s) with E|eta|^2 = 1.
 *
 * Uses the exact discrete-time update
 *   eta' = a eta + sqrt(1 - a^2) xi,   a = exp(-dt / tau_pq),
 * so the stationary law is preserved for any dt.
 */
class SignalDriver {
 public:
  explicit SignalDriver(const ProcessParams& params, std::uint64_t stream = 0);

  Complex eta() const { return eta_; }
  double time() const { return static_cast<double>(steps_) * params_.dt; }
  std::uint64_t steps() const { return steps_; }
  const ProcessParams& params() const { return params_; }

  void advance() {
    ++steps_;
    if (frozen_) return;
    eta_ = decay_ * eta_ + innovation_ * normal_(engine_);
  }

 private:
  ProcessParams params_;
  std::mt19937_64 engine_;
  ComplexNormal normal_;
  Complex eta_;
  double decay_;
  double innovation_;
  bool frozen_;
  std::uint64_t steps_ = 0;
};

SignalDriver init_driver(const ProcessParams& params, std::uint64_t stream = 0);

/// Value-semantics step: returns the driver advanced by dt.
SignalDriver step_driver(SignalDriver driver);

/// phi(s, x_cell) = eta(s) psi(x_cell).
inline Complex field_at(const SignalDriver& driver, const FieldState& psi,
                        std::size_t cell) {
  return driver.eta() * psi[cell];
}

/// The whole field phi(s) = eta(s) psi.
FieldState field_of(const SignalDriver& driver, const FieldState& psi);

/// n i.i.d. draws phi_k = eta_k psi.
std::vector<FieldState> sample_ensemble(const FieldState& psi, std::size_t n,
                                        std::uint64_t seed);

}  // namespace fieldclick

#endif  // FIELDCLICK_SIGNAL_GEN_HPP
