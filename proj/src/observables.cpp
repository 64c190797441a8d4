#include "fieldclick/observables.hpp"

#include <algorithm>
#include <thread>

namespace fieldclick {

namespace {

constexpr std::size_t kBatches = 32;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

TimeAverage time_average_unchecked(const Functional& f, SignalDriver& driver,
                                   const FieldState& psi, double delta) {
  const double dt = driver.params().dt;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(delta / dt)));
  const std::size_t batches = std::min(kBatches, steps);
  const std::size_t batch_length = steps / batches;

  RunningStats overall;
  RunningStats batch_means;
  RunningStats current_batch;

  const auto scale = f.quadratic_scale(psi);
  const auto constant = f.constant_value();
  FieldState phi = psi;

  for (std::size_t k = 0; k < steps; ++k) {
    double value;
    if (constant) {
      value = *constant;
    } else if (scale) {
      value = std::norm(driver.eta()) * *scale;
    } else {
      phi.assign(psi.amplitudes() * driver.eta());
      value = f(phi);
    }
    overall.push(value);
    current_batch.push(value);
    if (current_batch.count() == batch_length &&
        batch_means.count() < batches) {
      batch_means.push(current_batch.mean());
      current_batch = RunningStats{};
    }
    driver.advance();
  }

  TimeAverage out;
  out.value = overall.mean();
  out.steps = steps;
  out.window = static_cast<double>(steps) * dt;
  out.std_error = batch_means.count() >= 2 ? batch_means.standard_error() : 0.0;
  return out;
}

}  // namespace

Functional::Functional(Closure closure, std::string name)
    : kind_(std::move(closure)), name_(std::move(name)) {
  if (!std::get<Closure>(kind_)) throw Error("functional: empty closure");
}

Functional::Functional(FromKind, Kind kind, std::string name)
    : kind_(std::move(kind)), name_(std::move(name)) {}

Functional Functional::quadratic(QuadraticObservable observable, std::string name) {
  return Functional(FromKind{}, Kind(std::move(observable)), std::move(name));
}

Functional Functional::position_density(std::size_t cell) {
  return Functional(FromKind{}, Kind(PositionDensity{cell}),
                    "position_density[" + std::to_string(cell) + "]");
}

Functional Functional::total_energy() {
  return Functional(FromKind{}, Kind(TotalEnergy{}), "total_energy");
}

Functional Functional::constant(double value) {
  return Functional(FromKind{}, Kind(Constant{value}), "constant");
}

double Functional::operator()(const FieldState& phi) const {
  return std::visit(
      Overloaded{
          [&](const Closure& c) { return c(phi); },
          [&](const QuadraticObservable& a) { return evaluate_quadratic(a, phi); },
          [&](const PositionDensity& p) {
            return fieldclick::position_density(phi, p.cell);
          },
          [&](const TotalEnergy&) { return norm_squared(phi); },
          [&](const Constant& c) { return c.value; },
      },
      kind_);
}

std::optional<double> Functional::quadratic_scale(const FieldState& psi) const {
  if (std::holds_alternative<Closure>(kind_) ||
      std::holds_alternative<Constant>(kind_)) {
    return std::nullopt;
  }
  return (*this)(psi);
}

std::optional<double> Functional::constant_value() const {
  if (const auto* c = std::get_if<Constant>(&kind_)) return c->value;
  return std::nullopt;
}

TimeAverage time_average(const Functional& f, SignalDriver& driver,
                         const FieldState& psi, double delta) {
  const double tau = driver.params().tau_pq;
  if (!driver.params().is_frozen() && !(delta >= kMinErgodicWindow * tau)) {
    throw Error("ergodic window too short: Delta = " + std::to_string(delta) +
                " s, need >= " + std::to_string(kMinErgodicWindow * tau) + " s");
  }
  return time_average_unchecked(f, driver, psi, delta);
}

EnsembleAverage ensemble_average(const Functional& f,
                                 std::span<const FieldState> samples,
                                 std::size_t workers) {
  if (samples.empty()) throw Error("ensemble average: no samples");
  workers = std::clamp<std::size_t>(workers, 1, samples.size());

  std::vector<RunningStats> partial(workers);
  const std::size_t chunk = (samples.size() + workers - 1) / workers;
  auto work = [&](std::size_t w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(samples.size(), begin + chunk);
    for (std::size_t i = begin; i < end; ++i) partial[w].push(f(samples[i]));
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  RunningStats total;
  for (const auto& p : partial) total.merge(p);
  EnsembleAverage out;
  out.value = total.mean();
  out.count = total.count();
  out.std_error = total.count() >= 2 ? total.standard_error() : 0.0;
  return out;
}

ErgodicityReport ergodicity_report(const Functional& f, const FieldState& psi,
                                   const ProcessParams& params, double delta,
                                   std::size_t n) {
  ErgodicityReport report;
  report.functional = f.name();
  SignalDriver driver(params, 0);
  report.time = time_average_unchecked(f, driver, psi, delta);
  const auto samples = sample_ensemble(psi, n, params.seed);
  report.ensemble = ensemble_average(f, samples);
  report.difference = report.time.value - report.ensemble.value;
  report.combined_error = std::hypot(report.time.std_error, report.ensemble.std_error);
  report.window_ratio = delta / params.tau_pq;
  report.converged = report.window_ratio >= kMinErgodicWindow;
  report.consistent = std::abs(report.difference) <= 3.0 * report.combined_error;
  return report;
}

DecaySweep time_average_decay(const Functional& f, const FieldState& psi,
                              const ProcessParams& params,
                              std::span<const double> windows,
                              std::size_t replicas, std::optional<double> truth) {
  if (windows.size() < 2) throw Error("decay sweep: need at least two windows");
  if (replicas < 2) throw Error("decay sweep: need at least two replicas");
  if (!truth) truth = f.quadratic_scale(psi);
  if (!truth) throw Error("decay sweep: truth required for non-quadratic functionals");

  DecaySweep sweep;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    CompensatedSum<double> squared;
    for (std::size_t r = 0; r < replicas; ++r) {
      SignalDriver driver(params, 1 + w * replicas + r);
      const auto avg = time_average(f, driver, psi, windows[w]);
      const double err = avg.value - *truth;
      squared += err * err;
    }
    DecayPoint point;
    point.window = windows[w];
    point.rms_error = std::sqrt(squared.value() / static_cast<double>(replicas));
    point.predicted = std::abs(*truth) * std::sqrt(params.tau_pq / windows[w]);
    sweep.points.push_back(point);
    xs.push_back(point.window);
    ys.push_back(point.rms_error);
  }
  sweep.slope = loglog_slope(xs, ys);
  return sweep;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error("log-log fit: need at least two paired points");
  }
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(x[k] > 0) || !(y[k] > 0)) throw Error("log-log fit: values must be > 0");
    design(i, 0) = 1.0;
    design(i, 1) = std::log(x[k]);
    rhs(i) = std::log(y[k]);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  return coef(1);
}

}  // namespace fieldclick
