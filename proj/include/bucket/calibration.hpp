#pragma once

#include <span>

#include "bucket/core.hpp"

namespace bucket {

/// Sigmoid map from a signed margin f to P(+1 | f) = 1 / (1 + exp(-(slope*f + offset))).
struct SigmoidCalibration {
    double slope = 1.0;
    double offset = 0.0;
    /// True when the fit degenerated and the identity sigmoid is in use.
    bool fallback = true;

    double positive_probability(double margin) const noexcept;
};

/// Two-parameter Platt fit on training margins, with smoothed targets and a
/// Newton solver with backtracking. Falls back to slope 1, offset 0 when the
/// fit does not converge, is non-finite, or yields a non-positive slope.
SigmoidCalibration fit_platt(std::span<const double> margins, std::span<const Label> labels);

double sigmoid(double z) noexcept;

}  // namespace bucket
