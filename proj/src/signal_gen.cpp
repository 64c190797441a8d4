#include "fieldclick/signal_gen.hpp"

#include <sstream>

namespace fieldclick {

namespace {

// Keeps ensemble draws disjoint from replica streams 0, 1, 2, ...
constexpr std::uint64_t kEnsembleStream = 0x656e73656d626c65ULL;

}  // namespace

std::vector<std::string> violations(const ProcessParams& params) {
  std::vector<std::string> out;
  if (!(params.tau_pq > 0)) out.emplace_back("tau_pq must be > 0");
  if (!(params.dt > 0) || !std::isfinite(params.dt)) {
    out.emplace_back("dt must be finite and > 0");
  }
  if (!(params.gamma > 0) || !std::isfinite(params.gamma)) {
    out.emplace_back("gamma must be finite and > 0");
  }
  if (params.tau_pq > 0 && params.dt > 0 && params.dt > params.tau_pq / 10) {
    std::ostringstream msg;
    msg << "dt must be <= tau_pq / 10 (dt = " << params.dt
        << ", tau_pq = " << params.tau_pq << ")";
    out.push_back(msg.str());
  }
  if (params.initial_eta && !std::isfinite(std::abs(*params.initial_eta))) {
    out.emplace_back("initial eta must be finite");
  }
  return out;
}

void validate(const ProcessParams& params) {
  const auto problems = violations(params);
  if (problems.empty()) return;
  std::string msg = "invalid process parameters:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw Error(msg);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

SignalDriver::SignalDriver(const ProcessParams& params, std::uint64_t stream)
    : params_(params), engine_(make_stream(params.seed, stream)) {
  validate(params_);
  frozen_ = params_.is_frozen();
  decay_ = frozen_ ? 1.0 : params_.step_correlation();
  innovation_ = std::sqrt(1.0 - decay_ * decay_);
  eta_ = params_.initial_eta ? *params_.initial_eta : normal_(engine_);
}

SignalDriver init_driver(const ProcessParams& params, std::uint64_t stream) {
  return SignalDriver(params, stream);
}

SignalDriver step_driver(SignalDriver driver) {
  driver.advance();
  return driver;
}

FieldState field_of(const SignalDriver& driver, const FieldState& psi) {
  return FieldState(psi.grid(), psi.amplitudes() * driver.eta());
}

std::vector<FieldState> sample_ensemble(const FieldState& psi, std::size_t n,
                                        std::uint64_t seed) {
  if (n == 0) throw Error("sample ensemble: n must be >= 1");
  auto engine = make_stream(seed, kEnsembleStream);
  ComplexNormal normal;
  std::vector<FieldState> samples;
  samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    samples.emplace_back(psi.grid(), psi.amplitudes() * normal(engine));
  }
  return samples;
}

}  // namespace fieldclick
