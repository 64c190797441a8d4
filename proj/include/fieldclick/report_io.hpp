#ifndef FIELDCLICK_REPORT_IO_HPP
#define FIELDCLICK_REPORT_IO_HPP

#include <cstddef>
#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "fieldclick/experiment.hpp"
#include "fieldclick/observables.hpp"

// CSV output is UTF-8 with a header row and '.' decimals; numbers use the
// shortest round-trip representation.
namespace fieldclick::io {

std::string format_number(double value);

nlohmann::json to_json(const RunStatistics& stats);
nlohmann::json to_json(const EpsilonScanReport& report);
nlohmann::json to_json(const CoincidenceScanReport& report);
nlohmann::json to_json(const ErgodicityReport& report);
nlohmann::json to_json(const DecaySweep& sweep);

/// epsilon,replica_id,detector_id,name,count,lambda,P,P_oracle
void write_run_csv(std::ostream& out, const RunStatistics& stats);

/// detector_id,click_time_s for one replica.
void write_clicks_csv(std::ostream& out, std::span<const ClickRecord> clicks,
                      std::size_t replica);

/// epsilon,detector_id,P,P_oracle,lambda,stderr
void write_epsilon_scan_csv(std::ostream& out, const EpsilonScanReport& report);

/// C,w,n_double,bound_T_over_2C
void write_coincidence_csv(std::ostream& out, const CoincidenceScanReport& report);

/// functional,Delta_s,n,time_average,time_stderr,ensemble_average,
/// ensemble_stderr,difference,combined_error,converged,consistent
void write_ergodicity_csv(std::ostream& out, const ErgodicityReport& report);

/// Delta_s,rms_error,predicted
void write_decay_csv(std::ostream& out, const DecaySweep& sweep);

/// basis_id,name,count,lambda,P,P_oracle,stderr
void write_basis_csv(std::ostream& out, const RunStatistics& stats);

}  // namespace fieldclick::io

#endif  // FIELDCLICK_REPORT_IO_HPP
