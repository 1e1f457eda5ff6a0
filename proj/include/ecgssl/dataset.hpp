#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecgssl/common.hpp"

namespace ecgssl::sigproc {

inline constexpr int kSegmentSamples = 1000;  // 10 s at 100 Hz
inline constexpr double kTargetRateHz = 100.0;

struct RawRecording {
    std::string patient_id;
    std::string recording_id;
    double sample_rate_hz = 0.0;
    int visit_index = 0;
    std::optional<int> label;  // 0 = control, 1 = P-AF, nullopt = unlabeled
    std::vector<double> samples;
};

// Bandpass-filtered and resampled to the common 100 Hz grid.
struct CleanRecording {
    std::string patient_id;
    std::string recording_id;
    double sample_rate_hz = kTargetRateHz;
    int visit_index = 0;
    std::optional<int> label;
    std::vector<double> samples;
};

struct Segment {
    std::string patient_id;
    std::string recording_id;
    std::size_t start_index = 0;  // sample offset within the clean recording
    std::optional<int> label;
    std::vector<double> values;  // exactly kSegmentSamples

    double start_time_s() const { return static_cast<double>(start_index) / kTargetRateHz; }
};

// throws DataError when samples are empty/non-finite or the rate is invalid
void validate_recording(const RawRecording& rec);

// --------------------------------------------------------------------------
// Dataset manifest: JSON array of
//   {patient_id, recording_id, label|null, visit_index, sample_rate_hz, path}
// Signal paths are resolved relative to the manifest's directory. Formats:
// .csv (one decimal sample per line) or .f32 (raw little-endian float32).
// --------------------------------------------------------------------------

struct ManifestEntry {
    std::string patient_id;
    std::string recording_id;
    std::optional<int> label;
    int visit_index = 0;
    double sample_rate_hz = 0.0;
    std::string path;
};

void write_manifest(const std::filesystem::path& manifest_path,
                    const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path);

void write_signal_f32(const std::filesystem::path& path, std::span<const double> samples);
void write_signal_csv(const std::filesystem::path& path, std::span<const double> samples);
std::vector<double> read_signal_file(const std::filesystem::path& path);

// manifest + signal files -> in-memory corpus
std::vector<RawRecording> load_corpus(const std::filesystem::path& manifest_path);

}  // namespace ecgssl::sigproc
