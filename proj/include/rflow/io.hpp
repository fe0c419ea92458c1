#pragma once

#include <string>

#include "rflow/flow.hpp"
#include "rflow/verify.hpp"

namespace rflow {

/// 12-significant-digit float formatting: the trace CSV contract.
std::string format_short(double value);

/// 17-significant-digit float formatting: round-trip exact, the JSON and
/// snapshot contract.
std::string format_exact(double value);

/// Path of the u-snapshot sidecar belonging to a trace CSV:
/// "trace.csv" -> "trace.u.csv".
std::string u_sidecar_path(const std::string& trace_csv_path);

/**
 * Writes the trace as CSV with the exact header
 * step,t,lambda1,total_area,max_dev,min_corner_angle and one row per sample,
 * floats at 12 significant digits. The u snapshots go to the sidecar next to
 * it (one row per sample, V columns, 17 significant digits) so the main file
 * stays plottable. Identical traces produce byte-identical files.
 */
void write_trace_csv(const FlowTrace& trace, const std::string& path);

/// Fixed-key-order report JSON with 17-significant-digit floats; the
/// u_sidecar argument is recorded so a reader can find the snapshots
/// (empty when no trace was written).
void write_report_json(const VerificationReport& report, const FlowTrace& trace,
                       const std::string& u_sidecar, const std::string& path);

}  // namespace rflow
