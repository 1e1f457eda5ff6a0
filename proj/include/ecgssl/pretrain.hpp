#pragma once

#include "ecgssl/ssl_objectives.hpp"

namespace ecgssl::ssl {

enum class Method { simclr, mixup, clocs, pclr, deaps, mtae, nerula };

Method method_from_string(const std::string& name);
std::string method_name(Method method);
const std::vector<Method>& all_methods();

struct PretrainConfig {
    model::EncoderConfig encoder;
    double tau = 0.1;
    int batch_pairs = 64;  // N positive pairs (contrastive) or strips (masked)
    int epochs = 10;
    int batches_per_epoch = 10;
    double lr0 = 1e-3;
    double eta_min = 0.0;
    double clip_norm = 0.0;
    AugmentConfig augment;
    double beta_alpha = 0.5;
    bool mixup_cross_recording = false;
    MaskSpec mask;
    double gap_near_s = 10.0;
    double gap_far_s = 120.0;
    DeapsWeights deaps;
    int deaps_triplets = 32;
    double nerula_lambda_d = 1.0;
    int decoder_hidden = 128;
};

struct LossCurvePoint {
    int epoch;  // 0 is the pre-training evaluation of a fresh encoder
    double loss;
};

struct PretrainResult {
    model::Encoder encoder;
    std::vector<LossCurvePoint> loss_curve;
};

// Optimizes the encoder (plus per-method auxiliaries) on the label-free
// corpus. Deterministic given (corpus, method, config, seed). Raises
// ConfigError when the method's sampling requirement cannot be met.
PretrainResult pretrain(const PretextCorpus& corpus, Method method, const PretrainConfig& config,
                        std::uint64_t seed);

}  // namespace ecgssl::ssl
