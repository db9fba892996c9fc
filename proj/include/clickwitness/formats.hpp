#pragma once

#include <iosfwd>
#include <string>

#include "clickwitness/click_core.hpp"
#include "clickwitness/estimation.hpp"
#include "clickwitness/photon_models.hpp"

namespace clickwitness {

// All numeric output uses 12 significant digits so files diff cleanly.
std::string format_double(double value);

// Statistics file: a version stamp, an `N=<int> K=<int>` header, then one
// line per configuration in lexicographic order: `N_0 ... N_K probability`.
void write_statistics(std::ostream& out, const ClickStatistics& stats);
ClickStatistics read_statistics(std::istream& in);

// Records file: first line `N=<int> K=<int> seed=<int|none>`, then one shot
// per line as N whitespace-separated outcomes.
void write_records(std::ostream& out, const ShotRecords& records);
ShotRecords read_records(std::istream& in);

// Witness report: matrix M row-major, eigenvalues ascending, minimal
// eigenvalue, interval fields when estimated from records, verdict.
void write_report(std::ostream& out, const WitnessReport& report, int detector_count,
                  const EstimatedWitness* estimate = nullptr);

// Plain-text response matrix: rows m = 0..m_max, columns k = 0..K,
// whitespace-separated; `#` starts a comment. Validated on load.
DetectorResponse read_detector_response(std::istream& in);

enum class InputKind {
    statistics,
    records,
};

// Statistics files start with the stamp line; records files with their
// `N=... K=... seed=...` header.
InputKind detect_input_kind(std::istream& in);

// File-opening wrappers. Throw ParseError with the path in the message.
ClickStatistics read_statistics_file(const std::string& path);
ShotRecords read_records_file(const std::string& path);
DetectorResponse read_detector_response_file(const std::string& path);
InputKind detect_input_kind_file(const std::string& path);

} // namespace clickwitness
