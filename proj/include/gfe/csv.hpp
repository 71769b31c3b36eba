#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfe/metrics.hpp"
#include "gfe/types.hpp"

namespace gfe::csv {

/// Shortest round-trip decimal representation of a double (bit-exact after
/// re-parsing).
std::string format_double(double value);

/// Session CSV: optional leading '#' comment lines, a header
/// `t_ms,emg1..emgN,force`, then one row per sample. The writer emits
/// `# sample_rate_hz=...` (and the config hash when provided) so a written
/// file reloads bit-identically.
void write_session(const std::string& path, const SessionRecording& rec,
                   const std::string& config_hash = {});

/// Parses a session CSV. When `mvc_newtons` is given the force column is
/// divided by it. Malformed or non-finite rows raise ParseError with the
/// offending line number.
SessionRecording read_session(const std::string& path,
                              std::optional<double> mvc_newtons = std::nullopt);

/// Feature matrix CSV: the feature layout as header plus a trailing force
/// column.
void write_features(const std::string& path, const FeatureMatrix& fm,
                    const std::string& config_hash = {});

/// Per-window estimates for plotting: measured force, raw model output and
/// (when present) the filtered output.
void write_estimates(const std::string& path, double ts_s, const std::vector<double>& measured,
                     const std::vector<double>& model_output,
                     const std::vector<double>* filtered_output,
                     const std::string& config_hash = {});

/// Wide per-subject metric table (one row per subject, two columns per
/// model) with trailing average and SD rows.
void write_report(const std::string& path, const metrics::EvalReport& report,
                  const std::vector<std::string>& model_order, const std::string& config_hash = {});

}  // namespace gfe::csv
