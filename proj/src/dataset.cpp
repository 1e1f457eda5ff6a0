#include "ecgssl/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace ecgssl::sigproc {

using nlohmann::json;

void validate_recording(const RawRecording& rec) {
    if (!(rec.sample_rate_hz > 0.0))
        throw DataError("recording " + rec.recording_id + ": sample rate must be positive");
    if (rec.samples.empty()) throw DataError("recording " + rec.recording_id + ": empty signal");
    if (!all_finite(rec.samples))
        throw DataError("recording " + rec.recording_id + ": non-finite sample");
}

void write_manifest(const std::filesystem::path& manifest_path,
                    const std::vector<ManifestEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries) {
        json item{{"patient_id", e.patient_id},
                  {"recording_id", e.recording_id},
                  {"visit_index", e.visit_index},
                  {"sample_rate_hz", e.sample_rate_hz},
                  {"path", e.path}};
        if (e.label)
            item["label"] = *e.label;
        else
            item["label"] = nullptr;
        arr.push_back(std::move(item));
    }
    atomic_write_file(manifest_path, arr.dump(2) + "\n");
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest_path) {
    json arr;
    try {
        arr = json::parse(read_text_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw DataError("manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!arr.is_array()) throw DataError("manifest must be a JSON array");
    std::vector<ManifestEntry> entries;
    entries.reserve(arr.size());
    for (const auto& item : arr) {
        ManifestEntry e;
        try {
            e.patient_id = item.at("patient_id").get<std::string>();
            e.recording_id = item.at("recording_id").get<std::string>();
            e.visit_index = item.value("visit_index", 0);
            e.sample_rate_hz = item.at("sample_rate_hz").get<double>();
            e.path = item.at("path").get<std::string>();
            if (item.contains("label") && !item["label"].is_null())
                e.label = item["label"].get<int>();
        } catch (const json::exception& ex) {
            throw DataError("manifest entry malformed: " + std::string(ex.what()));
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_signal_f32(const std::filesystem::path& path, std::span<const double> samples) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(samples.size() * 4);
    for (double v : samples) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        for (int i = 0; i < 4; ++i)
            bytes.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
    }
    atomic_write_file(path, std::span<const std::uint8_t>(bytes));
}

void write_signal_csv(const std::filesystem::path& path, std::span<const double> samples) {
    std::ostringstream ss;
    ss.precision(17);
    for (double v : samples) ss << v << '\n';
    atomic_write_file(path, ss.str());
}

std::vector<double> read_signal_file(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".f32") {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open signal file: " + path.string());
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        if (bytes.size() % 4 != 0)
            throw DataError("signal file " + path.string() + ": size not a multiple of 4");
        std::vector<double> samples(bytes.size() / 4);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b)
                bits |= static_cast<std::uint32_t>(bytes[i * 4 + static_cast<std::size_t>(b)])
                        << (8 * b);
            float f;
            std::memcpy(&f, &bits, 4);
            samples[i] = static_cast<double>(f);
        }
        return samples;
    }
    if (ext == ".csv") {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open signal file: " + path.string());
        std::vector<double> samples;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                samples.push_back(std::stod(line));
            } catch (const std::exception&) {
                throw DataError("signal file " + path.string() + ": bad sample '" + line + "'");
            }
        }
        return samples;
    }
    throw ConfigError("unknown signal format '" + ext + "' (expected .csv or .f32): " +
                      path.string());
}

std::vector<RawRecording> load_corpus(const std::filesystem::path& manifest_path) {
    const auto entries = read_manifest(manifest_path);
    const auto base = manifest_path.parent_path();
    std::vector<RawRecording> corpus;
    corpus.reserve(entries.size());
    for (const auto& e : entries) {
        RawRecording rec;
        rec.patient_id = e.patient_id;
        rec.recording_id = e.recording_id;
        rec.sample_rate_hz = e.sample_rate_hz;
        rec.visit_index = e.visit_index;
        rec.label = e.label;
        std::filesystem::path p(e.path);
        rec.samples = read_signal_file(p.is_absolute() ? p : base / p);
        validate_recording(rec);
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

}  // namespace ecgssl::sigproc
