#pragma once

#include <span>
#include <vector>

#include "gfe/types.hpp"

namespace gfe::features {

/// Mean absolute value: (1/N) * sum |x(k)|. Throws on an empty window.
double mav(std::span<const double> window);

/// Root mean square: sqrt((1/N) * sum x(k)^2). Throws on an empty window.
double rms(std::span<const double> window);

/// Waveform length: sum |x(k) - x(k-1)| over the window. Needs >= 2 samples.
double wl(std::span<const double> window);

double compute_feature(Feature f, std::span<const double> window);

/// Slides the window over the recording and emits one feature row per
/// position; the force target of a row is the mean force over the same
/// window. `channels` are 1-based electrode numbers; when empty the default
/// set {6, 7, 8} (flexor carpi ulnaris, palmaris longus, flexor carpi
/// radialis) is used. Trailing samples that do not fill a window are dropped.
FeatureMatrix extract_features(const SessionRecording& rec, const WindowSpec& spec,
                               std::vector<int> channels = {},
                               std::vector<Feature> features = {Feature::Mav, Feature::Rms,
                                                                Feature::Wl});

/// Fits per-column min/max ranges on `u` itself.
std::vector<NormRange> fit_norm_ranges(const Eigen::MatrixXd& u);

/// Min-max normalizes every column using ranges fit on this matrix; the
/// ranges are stored in the result. Constant columns map to zero and are
/// reported in norm_warnings.
FeatureMatrix normalize(const FeatureMatrix& m);

/// Applies previously fitted ranges without clamping, so entries outside the
/// fitting range land outside [0, 1]. Degenerate columns map to zero.
FeatureMatrix apply_norm_ranges(const FeatureMatrix& m, const std::vector<NormRange>& ranges);

}  // namespace gfe::features
