#pragma once

#include <array>
#include <vector>

#include "ecgssl/dataset.hpp"

namespace ecgssl::sigproc {

// One second-order section, normalized so a0 == 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a0 = 1.0, a1 = 0.0, a2 = 0.0;

    std::array<double, 6> coeffs() const { return {b0, b1, b2, a0, a1, a2}; }
};

struct BandpassFilter {
    double low_hz = 0.5;
    double high_hz = 40.0;
    double sample_rate_hz = 100.0;
    int order = 2;  // Butterworth prototype order; the bandpass has 2*order poles
    std::vector<Biquad> sections;

    std::vector<std::array<double, 6>> coefficient_rows() const;
};

// Butterworth design through the analog prototype: prototype poles, band
// transform, bilinear transform with frequency prewarping, then grouping into
// second-order sections. Throws ConfigError on invalid band edges and
// NumericError if any resulting pole lands on or outside the unit circle.
BandpassFilter design_bandpass(double low_hz, double high_hz, double sample_rate_hz,
                               int order = 2);
std::vector<Biquad> design_lowpass(double cutoff_hz, double sample_rate_hz, int order);

double max_pole_magnitude(const std::vector<Biquad>& sections);

// Single forward pass (direct form II transposed), zero initial state.
std::vector<double> sosfilt(const std::vector<Biquad>& sections, std::span<const double> x);

// Zero-phase forward-backward filtering with odd-reflection edge padding, so
// QRS morphology is not phase-shifted. Output length equals input length.
std::vector<double> filtfilt(const std::vector<Biquad>& sections, std::span<const double> x);

// Identity fields pass through untouched; only samples change.
RawRecording apply_filter(const RawRecording& rec, const BandpassFilter& filt);

// Resample to the 100 Hz grid: anti-alias lowpass (when downsampling) followed
// by linear interpolation. Output length is round(n * target / fs). Upsampling
// is not supported and raises ConfigError.
CleanRecording resample(const RawRecording& rec, double target_hz = kTargetRateHz);

}  // namespace ecgssl::sigproc
