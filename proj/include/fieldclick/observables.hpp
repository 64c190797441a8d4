#ifndef FIELDCLICK_OBSERVABLES_HPP
#define FIELDCLICK_OBSERVABLES_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "fieldclick/field_space.hpp"
#include "fieldclick/signal_gen.hpp"

namespace fieldclick {

/**
 * Self-adjoint operator acting on grid amplitudes, defining the quadratic
 * functional f_A(phi) = <A phi, phi> = dV * phi^H A phi.
 */
template <typename Real>
class BasicQuadraticObservable {
 public:
  using Matrix =
      Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

  static constexpr Real kHermitianTolerance = Real(1e-12);

  explicit BasicQuadraticObservable(Matrix matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw Error("quadratic observable: matrix must be square");
    }
    Eigen::Index worst_row = 0;
    Eigen::Index worst_col = 0;
    const Real deviation = (matrix_ - matrix_.adjoint())
                               .cwiseAbs()
                               .maxCoeff(&worst_row, &worst_col);
    if (deviation > kHermitianTolerance) {
      throw Error("quadratic observable: matrix is not Hermitian (|A - A^H| = " +
                  std::to_string(deviation) + " at (" +
                  std::to_string(worst_row) + ", " + std::to_string(worst_col) +
                  "))");
    }
  }

  static BasicQuadraticObservable identity(std::size_t cells) {
    const auto n = static_cast<Eigen::Index>(cells);
    return BasicQuadraticObservable(Matrix::Identity(n, n));
  }

  /// Projector onto the normalized delta at `cell`; f = |phi(x_cell)|^2 dV.
  static BasicQuadraticObservable position(std::size_t cells, std::size_t cell) {
    if (cell >= cells) throw Error("quadratic observable: cell out of range");
    const auto n = static_cast<Eigen::Index>(cells);
    Matrix m = Matrix::Zero(n, n);
    m(static_cast<Eigen::Index>(cell), static_cast<Eigen::Index>(cell)) = Real(1);
    return BasicQuadraticObservable(std::move(m));
  }

  /// |e><e| on the grid, so f = |<phi, e>|^2 for normalized e.
  static BasicQuadraticObservable projector(const BasicFieldState<Real>& e) {
    const auto& v = e.amplitudes();
    return BasicQuadraticObservable(Matrix(e.grid()->cell_volume() * v * v.adjoint()));
  }

  const Matrix& matrix() const { return matrix_; }
  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }

  friend BasicQuadraticObservable operator+(const BasicQuadraticObservable& a,
                                            const BasicQuadraticObservable& b) {
    if (a.size() != b.size()) throw Error("quadratic observable: size mismatch");
    return BasicQuadraticObservable(Matrix(a.matrix_ + b.matrix_));
  }

 private:
  Matrix matrix_;
};

template <typename Real>
Real evaluate_quadratic(const BasicQuadraticObservable<Real>& observable,
                        const BasicFieldState<Real>& phi) {
  if (observable.size() != phi.size()) {
    throw Error("evaluate quadratic: observable is " +
                std::to_string(observable.size()) + "x" +
                std::to_string(observable.size()) + ", field has " +
                std::to_string(phi.size()) + " cells");
  }
  const auto& v = phi.amplitudes();
  const std::complex<Real> value =
      phi.grid()->cell_volume() * v.dot(observable.matrix() * v);
  if (std::abs(value.imag()) > Real(1e-10) * std::max(Real(1), std::abs(value.real()))) {
    throw Error("evaluate quadratic: non-real result, imaginary part " +
                std::to_string(value.imag()));
  }
  return value.real();
}

/// Energy density |phi(x_cell)|^2.
template <typename Real>
Real position_density(const BasicFieldState<Real>& phi, std::size_t cell) {
  if (cell >= phi.size()) throw Error("position density: cell out of range");
  return std::norm(phi[cell]);
}

/// Sample covariance (1/n) sum_k phi_k phi_k^H of an ensemble.
template <typename Real>
Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> sample_covariance(
    std::span<const BasicFieldState<Real>> samples) {
  if (samples.empty()) throw Error("sample covariance: no samples");
  const auto n = static_cast<Eigen::Index>(samples.front().size());
  Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> cov =
      Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (const auto& s : samples) {
    cov.noalias() += s.amplitudes() * s.amplitudes().adjoint();
  }
  return cov / static_cast<Real>(samples.size());
}

using QuadraticObservable = BasicQuadraticObservable<double>;

/**
 * Real-valued functional of a field state. Quadratic kinds expose
 * `quadratic_scale` so that f(eta psi) = |eta|^2 * scale can be evaluated
 * without forming the field.
 */
class Functional {
 public:
  using Closure = std::function<double(const FieldState&)>;

  explicit Functional(Closure closure, std::string name = "custom");

  static Functional quadratic(QuadraticObservable observable,
                              std::string name = "quadratic");
  static Functional position_density(std::size_t cell);
  static Functional total_energy();
  static Functional constant(double value);

  double operator()(const FieldState& phi) const;

  /// c such that f(eta psi) = |eta|^2 c, for quadratic kinds.
  std::optional<double> quadratic_scale(const FieldState& psi) const;
  std::optional<double> constant_value() const;
  const std::string& name() const { return name_; }

 private:
  struct PositionDensity {
    std::size_t cell;
  };
  struct TotalEnergy {};
  struct Constant {
    double value;
  };
  using Kind = std::variant<Closure, QuadraticObservable, PositionDensity,
                            TotalEnergy, Constant>;

  struct FromKind {};
  Functional(FromKind, Kind kind, std::string name);

  Kind kind_;
  std::string name_;
};

/// Smallest accepted Delta / tau_pq for a time average.
inline constexpr double kMinErgodicWindow = 100.0;

struct TimeAverage {
  double value = 0;
  double std_error = 0;  ///< batch-means estimate
  std::size_t steps = 0;
  double window = 0;  ///< Delta in seconds
};

/// (1/Delta) sum_steps f(phi(s)) dt over [0, Delta), advancing `driver`.
TimeAverage time_average(const Functional& f, SignalDriver& driver,
                         const FieldState& psi, double delta);

struct EnsembleAverage {
  double value = 0;
  double std_error = 0;
  std::size_t count = 0;
};

/// Mean over samples; `workers` > 1 splits the work and merges the partial
/// (mean, M2) pairs in order.
EnsembleAverage ensemble_average(const Functional& f,
                                 std::span<const FieldState> samples,
                                 std::size_t workers = 1);

struct ErgodicityReport {
  std::string functional;
  TimeAverage time;
  EnsembleAverage ensemble;
  double difference = 0;      ///< time - ensemble
  double combined_error = 0;  ///< sqrt(se_time^2 + se_ensemble^2)
  double window_ratio = 0;    ///< Delta / tau_pq
  bool converged = false;     ///< window_ratio >= kMinErgodicWindow
  bool consistent = false;    ///< |difference| <= 3 combined_error
};

/// Compares a single-trajectory time average against an ensemble average.
/// The window precondition is relaxed: short windows are reported as
/// non-converged instead of rejected.
ErgodicityReport ergodicity_report(const Functional& f, const FieldState& psi,
                                   const ProcessParams& params, double delta,
                                   std::size_t n);

struct DecayPoint {
  double window = 0;     ///< Delta in seconds
  double rms_error = 0;  ///< RMS of (time average - truth) over replicas
  double predicted = 0;  ///< truth * sqrt(tau_pq / Delta)
};

struct DecaySweep {
  std::vector<DecayPoint> points;
  double slope = 0;  ///< log-log slope of rms_error against Delta
};

/// Time-average error across windows, each from `replicas` independent
/// trajectories. `truth` defaults to the analytic ensemble mean of a
/// quadratic functional.
DecaySweep time_average_decay(const Functional& f, const FieldState& psi,
                              const ProcessParams& params,
                              std::span<const double> windows,
                              std::size_t replicas,
                              std::optional<double> truth = std::nullopt);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace fieldclick

#endif  // FIELDCLICK_OBSERVABLES_HPP
