#include "ecgssl/synthetic.hpp"

#include <cmath>
#include <cstdio>

namespace ecgssl::sigproc {

namespace {

struct PatientProfile {
    double p_amp;
    double rr_cv;
    double mean_rr;
    double qrs_amp;
    double t_amp;
    double wander_amp;
    double wander_freq;
    double noise_stddev;
};

PatientProfile draw_profile(const ClassMorphology& morph, double base_noise, Rng& rng) {
    PatientProfile prof;
    prof.p_amp = rng.uniform(morph.p_amp_lo, morph.p_amp_hi);
    prof.rr_cv = rng.uniform(morph.rr_cv_lo, morph.rr_cv_hi);
    prof.mean_rr = rng.uniform(0.70, 0.95);
    prof.qrs_amp = rng.uniform(0.75, 1.30);
    prof.t_amp = rng.uniform(0.18, 0.38);
    prof.wander_amp = rng.uniform(0.02, 0.10);
    prof.wander_freq = rng.uniform(0.08, 0.30);
    prof.noise_stddev = base_noise * rng.uniform(0.7, 1.3);
    return prof;
}

void add_bump(std::vector<double>& y, double fs, double center_s, double amp, double sigma_s) {
    const double half = 4.0 * sigma_s;
    const long long i0 = std::max(0LL, static_cast<long long>(std::ceil((center_s - half) * fs)));
    const long long i1 = std::min(static_cast<long long>(y.size()) - 1,
                                  static_cast<long long>(std::floor((center_s + half) * fs)));
    const double inv2s2 = 1.0 / (2.0 * sigma_s * sigma_s);
    for (long long i = i0; i <= i1; ++i) {
        const double dt = static_cast<double>(i) / fs - center_s;
        y[static_cast<std::size_t>(i)] += amp * std::exp(-dt * dt * inv2s2);
    }
}

std::vector<double> synth_signal(const PatientProfile& prof, double duration_s, double fs,
                                 Rng& rng) {
    const std::size_t n = static_cast<std::size_t>(std::llround(duration_s * fs));
    std::vector<double> y(n, 0.0);

    // RR point process; refractory floor keeps beats physical under high CV
    double t = rng.uniform(0.1, prof.mean_rr);
    while (t < duration_s + 0.5) {
        add_bump(y, fs, t - 0.17, prof.p_amp * prof.qrs_amp, 0.025);   // P
        add_bump(y, fs, t, prof.qrs_amp, 0.012);                       // R
        add_bump(y, fs, t + 0.035, -0.18 * prof.qrs_amp, 0.012);      // S
        add_bump(y, fs, t + 0.28, prof.t_amp * prof.qrs_amp, 0.060);  // T
        const double rr = rng.normal(prof.mean_rr, prof.rr_cv * prof.mean_rr);
        t += std::max(0.35, rr);
    }

    const double phase = rng.uniform(0.0, 6.283185307179586);
    for (std::size_t i = 0; i < n; ++i) {
        const double ts = static_cast<double>(i) / fs;
        y[i] += prof.wander_amp * std::sin(6.283185307179586 * prof.wander_freq * ts + phase);
        y[i] += rng.normal(0.0, prof.noise_stddev);
    }
    return y;
}

}  // namespace

void validate_spec(const SyntheticSpec& spec) {
    if (spec.patients_per_class < 1)
        throw ConfigError("synthetic spec: need at least one patient per class");
    if (spec.recordings_per_patient < 2)
        throw ConfigError("synthetic spec: need at least two recordings per patient");
    if (!(spec.duration_s >= 20.0))
        throw ConfigError("synthetic spec: duration must be at least 20 s");
    if (!(spec.sample_rate_hz >= 100.0))
        throw ConfigError("synthetic spec: sample rate must be at least 100 Hz");
    if (!(spec.noise_stddev >= 0.0)) throw ConfigError("synthetic spec: negative noise level");
}

std::vector<RawRecording> generate_synthetic_corpus(const SyntheticSpec& spec) {
    validate_spec(spec);
    const Rng root(spec.seed);
    std::vector<RawRecording> corpus;
    corpus.reserve(static_cast<std::size_t>(2 * spec.patients_per_class *
                                            spec.recordings_per_patient));
    for (int cls = 0; cls < 2; ++cls) {
        const ClassMorphology& morph = cls == 0 ? spec.control : spec.paf;
        for (int pi = 0; pi < spec.patients_per_class; ++pi) {
            const int pid_num = cls * spec.patients_per_class + pi;
            char pid[16];
            std::snprintf(pid, sizeof(pid), "p%04d", pid_num);
            Rng patient_rng = root.child(static_cast<std::uint64_t>(pid_num) * 1000 + 1);
            const PatientProfile prof =
                draw_profile(morph, spec.noise_stddev, patient_rng);
            for (int v = 0; v < spec.recordings_per_patient; ++v) {
                Rng rec_rng = root.child(static_cast<std::uint64_t>(pid_num) * 1000 + 2 +
                                         static_cast<std::uint64_t>(v));
                RawRecording rec;
                rec.patient_id = pid;
                rec.recording_id = std::string(pid) + "_v" + std::to_string(v);
                rec.sample_rate_hz = spec.sample_rate_hz;
                rec.visit_index = v;
                if (spec.with_labels) rec.label = cls;
                rec.samples = synth_signal(prof, spec.duration_s, spec.sample_rate_hz, rec_rng);
                corpus.push_back(std::move(rec));
            }
        }
    }
    return corpus;
}

}  // namespace ecgssl::sigproc
