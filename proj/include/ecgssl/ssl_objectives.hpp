#pragma once

#include <map>

#include "ecgssl/encoder.hpp"
#include "ecgssl/segmentation.hpp"

namespace ecgssl::ssl {

using numcore::Tape;
using numcore::Tensor;

// Label-free view of a segment. Pretraining code only ever sees this type, so
// the label field is unreachable by construction.
struct PretextSegment {
    std::string patient_id;
    std::string recording_id;
    std::size_t start_index = 0;
    std::vector<double> values;

    double start_time_s() const {
        return static_cast<double>(start_index) / sigproc::kTargetRateHz;
    }
};

struct PretextCorpus {
    std::vector<PretextSegment> segments;
    // per recording: segment indices ordered by start_index
    std::map<std::string, std::vector<std::size_t>> by_recording;
    std::map<std::string, std::vector<std::string>> recordings_by_patient;

    static PretextCorpus from_segments(const std::vector<sigproc::Segment>& labeled);
};

enum class PairProvenance { augmented, consecutive, cross_recording, mixup };

// 2N strips; indices (2k, 2k+1) form the k-th positive pair.
struct ViewPairBatch {
    std::vector<std::vector<double>> views;
    std::vector<PairProvenance> provenance;  // one entry per pair

    std::size_t n_pairs() const { return provenance.size(); }
};

// --------------------------------------------------------------------------
// Samplers
// --------------------------------------------------------------------------

struct AugmentConfig {
    double jitter_stddev = 0.05;
    double scale_lo = 0.8;
    double scale_hi = 1.25;
    double crop_fraction = 0.10;  // time crop-and-resize within +-10%
    bool enabled = true;
};

std::vector<double> augment_view(std::span<const double> strip, const AugmentConfig& config,
                                 Rng& rng);

// two augmented views of each sampled segment
ViewPairBatch sample_simclr_pairs(const PretextCorpus& corpus, int n_pairs,
                                  const AugmentConfig& config, Rng& rng);

struct MixupViews {
    std::vector<double> mixed1;  // paired with x1
    std::vector<double> mixed2;  // paired with x2
    double lambda = 0.0;
};

// lambda ~ Beta(alpha, alpha); mixed1 = l*x1 + (1-l)*x2, mixed2 mirrors it
MixupViews mixup_views(std::span<const double> x1, std::span<const double> x2, double beta_alpha,
                       Rng& rng);

// each source strip pair contributes the positive pairs (x1, mixed1) and
// (x2, mixed2); n_pairs must be even
ViewPairBatch sample_mixup_pairs(const PretextCorpus& corpus, int n_pairs, double beta_alpha,
                                 bool cross_recording, Rng& rng);

struct ClocsPool {
    // disjoint adjacent segment-index pairs (k, k+1), per recording
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    int skipped_recordings = 0;  // recordings with < 2 segments
};

ClocsPool clocs_pair_pool(const PretextCorpus& corpus);
ViewPairBatch sample_clocs_pairs(const PretextCorpus& corpus, int n_pairs, Rng& rng);

// patients with >= 2 recordings; throws ConfigError listing recording counts
// when none qualify
std::vector<std::string> pclr_eligible_patients(const PretextCorpus& corpus);
ViewPairBatch sample_pclr_pairs(const PretextCorpus& corpus, int n_pairs, Rng& rng);

struct TripletBatch {
    std::vector<std::vector<double>> anchors;
    std::vector<std::vector<double>> nears;
    std::vector<std::vector<double>> fars;

    std::size_t size() const { return anchors.size(); }
};

// same-recording triplets: |t_near - t_anchor| <= gap_near,
// |t_far - t_anchor| >= gap_far (start-time distances)
TripletBatch sample_deaps_triplets(const PretextCorpus& corpus, int n_triplets, double gap_near_s,
                                   double gap_far_s, Rng& rng);

// --------------------------------------------------------------------------
// Masking
// --------------------------------------------------------------------------

struct MaskSpec {
    int patch_len = 50;   // samples per patch
    double ratio = 0.5;   // fraction of patches masked
};

struct MaskedView {
    std::vector<double> values;             // masked samples zero-filled
    std::vector<std::uint8_t> sample_mask;  // 1 = masked
    std::vector<std::uint8_t> patch_mask;
};

MaskedView apply_mask(std::span<const double> segment, const MaskSpec& spec, Rng& rng);
MaskedView apply_patch_mask(std::span<const double> segment, const MaskSpec& spec,
                            const std::vector<std::uint8_t>& patch_mask);
std::vector<std::uint8_t> complement_mask(const std::vector<std::uint8_t>& patch_mask);

// --------------------------------------------------------------------------
// Losses
// --------------------------------------------------------------------------

double cosine_sim(std::span<const double> u, std::span<const double> v);

// embeddings [2N, D], raw; rows are L2-normalized internally before the
// cosine-similarity matrix, so the loss is invariant to positive rescaling
Tensor nt_xent_loss(Tape& tape, const Tensor& embeddings, double tau);

struct DeapsWeights {
    double variance = 1.0;
    double covariance = 0.01;
    double dynamics = 1.0;
    double margin = 1.0;
};

// invariance + variance + covariance regularization + temporal-dynamics hinge
Tensor deaps_loss(Tape& tape, const Tensor& anchors, const Tensor& nears, const Tensor& fars,
                  const DeapsWeights& weights);

// mean squared error over masked samples only
Tensor mtae_loss(Tape& tape, const Tensor& prediction, const Tensor& target,
                 const std::vector<std::uint8_t>& sample_mask);

struct NerulaLoss {
    Tensor total;
    double reconstruction = 0.0;
    double alignment = 0.0;
};

// generative pathway: reconstruct the strip from the masked view; discriminative
// pathway: align the projections of the two complementary masked views, with a
// stop-gradient on the second branch
NerulaLoss nerula_loss(Tape& tape, const model::Encoder& encoder,
                       const model::ProjectionHead& projector,
                       const model::ReconstructionDecoder& decoder,
                       const std::vector<std::vector<double>>& originals, const MaskSpec& spec,
                       double lambda_d, Rng& rng);

}  // namespace ecgssl::ssl
