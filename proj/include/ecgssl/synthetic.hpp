#pragma once

#include "ecgssl/dataset.hpp"

namespace ecgssl::sigproc {

// Desk-scale stand-in for a screening cohort. Each beat is a sum of Gaussian
// bumps (P, R, S, T) on an RR-interval point process; the class contrast
// lives in RR variability and P-wave amplitude, while per-patient nuisance
// parameters (overall amplitude, rate, baseline wander, noise) vary freely so
// patient identity is not a shortcut for class.
struct ClassMorphology {
    double p_amp_lo = 0.12, p_amp_hi = 0.22;  // P bump amplitude range
    double rr_cv_lo = 0.01, rr_cv_hi = 0.04;  // RR coefficient-of-variation range
};

struct SyntheticSpec {
    int patients_per_class = 40;
    int recordings_per_patient = 2;  // >= 2 so cross-recording pairing is exercised
    double duration_s = 240.0;
    double sample_rate_hz = 200.0;
    ClassMorphology control{0.12, 0.22, 0.01, 0.04};
    ClassMorphology paf{0.02, 0.07, 0.10, 0.18};
    double noise_stddev = 0.04;
    bool with_labels = true;
    std::uint64_t seed = 1;
};

void validate_spec(const SyntheticSpec& spec);

// Pure function of the spec: the same spec yields a bit-identical corpus.
std::vector<RawRecording> generate_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace ecgssl::sigproc
