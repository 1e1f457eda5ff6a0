#include "ecgssl/segmentation.hpp"

#include <cmath>

namespace ecgssl::sigproc {

SegmentationResult segment(const CleanRecording& rec, double stride_s) {
    if (!(stride_s > 0.0)) throw ConfigError("segment: stride must be positive");
    const std::size_t n = rec.samples.size();
    const std::size_t stride =
        static_cast<std::size_t>(std::llround(stride_s * rec.sample_rate_hz));
    if (stride == 0) throw ConfigError("segment: stride shorter than one sample");

    SegmentationResult result;
    if (n < kSegmentSamples) {
        result.too_short = true;
        return result;
    }
    for (std::size_t start = 0; start + kSegmentSamples <= n; start += stride) {
        Segment seg;
        seg.patient_id = rec.patient_id;
        seg.recording_id = rec.recording_id;
        seg.start_index = start;
        seg.label = rec.label;
        seg.values.assign(rec.samples.begin() + static_cast<std::ptrdiff_t>(start),
                          rec.samples.begin() + static_cast<std::ptrdiff_t>(start) +
                              kSegmentSamples);
        result.segments.push_back(std::move(seg));
    }
    return result;
}

std::vector<double> znormalize_values(std::span<const double> values) {
    const std::size_t n = values.size();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double stddev = std::sqrt(var);
    std::vector<double> out(n);
    if (stddev < 1e-8) return out;  // constant strip -> zeros
    for (std::size_t i = 0; i < n; ++i) out[i] = (values[i] - mean) / stddev;
    return out;
}

Segment znormalize(const Segment& seg) {
    if (seg.values.size() != kSegmentSamples)
        throw ShapeError("znormalize: segment has " + std::to_string(seg.values.size()) +
                         " samples, expected " + std::to_string(kSegmentSamples));
    Segment out = seg;
    out.values = znormalize_values(seg.values);
    return out;
}

CleanRecording preprocess(const RawRecording& rec, const SigprocConfig& config) {
    const BandpassFilter filt =
        design_bandpass(config.low_hz, config.high_hz, rec.sample_rate_hz, config.filter_order);
    return resample(apply_filter(rec, filt), config.target_hz);
}

std::vector<Segment> preprocess_and_segment(const RawRecording& rec,
                                            const SigprocConfig& config) {
    auto segs = segment(preprocess(rec, config), config.stride_s).segments;
    if (config.znormalize)
        for (auto& s : segs) s.values = znormalize_values(s.values);
    return segs;
}

}  // namespace ecgssl::sigproc
