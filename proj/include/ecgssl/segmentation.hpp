#pragma once

#include "ecgssl/filters.hpp"

namespace ecgssl::sigproc {

struct SigprocConfig {
    double low_hz = 0.5;
    double high_hz = 40.0;
    int filter_order = 2;
    double target_hz = kTargetRateHz;
    double stride_s = 10.0;  // non-overlapping by default
    bool znormalize = true;
};

struct SegmentationResult {
    std::vector<Segment> segments;
    bool too_short = false;  // recording shorter than one segment
};

// Non-overlapping 1000-sample windows by default; a trailing remainder
// shorter than one segment is dropped.
SegmentationResult segment(const CleanRecording& rec, double stride_s = 10.0);

// Per-segment mean 0, population std 1. Constant strips (std below the
// 1e-8 guard) map to all zeros.
std::vector<double> znormalize_values(std::span<const double> values);
Segment znormalize(const Segment& seg);

// bandpass at the native rate, then resample to the 100 Hz grid
CleanRecording preprocess(const RawRecording& rec, const SigprocConfig& config = {});

// full pipeline: preprocess + segment (+ znormalize)
std::vector<Segment> preprocess_and_segment(const RawRecording& rec,
                                            const SigprocConfig& config = {});

}  // namespace ecgssl::sigproc
