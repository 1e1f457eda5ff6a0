#pragma once

#include "ecgssl/dataset.hpp"
#include "ecgssl/optim.hpp"
#include "ecgssl/tape.hpp"

namespace ecgssl::model {

using numcore::Tape;
using numcore::Tensor;

struct EncoderConfig {
    std::vector<int> channels{16, 32, 64};
    int kernel_size = 7;
    int stride = 2;
    int embed_dim = 64;
};

struct Embedding {
    std::string segment_id;
    std::vector<double> values;
};

// 1-D conv stack with ReLU blocks, global average pooling, and a linear map
// to the embedding dimension. One trunk serves every pretraining objective
// and the supervised baseline.
class Encoder {
  public:
    Encoder(const EncoderConfig& config, Rng& rng);
    Encoder(const EncoderConfig& config, const std::vector<Tensor>& params);

    // x [B, 1, L] -> [B, embed_dim]
    Tensor forward(Tape& tape, const Tensor& x) const;

    // inference helpers; segments must be kSegmentSamples long
    std::vector<double> embed(std::span<const double> segment) const;
    std::vector<std::vector<double>> embed_batch(
        const std::vector<std::vector<double>>& segments) const;

    std::vector<Tensor> parameters() const;
    const EncoderConfig& config() const { return config_; }

  private:
    EncoderConfig config_;
    std::vector<Tensor> conv_w_, conv_b_;
    Tensor head_w_, head_b_;
};

Embedding encode(const Encoder& encoder, const sigproc::Segment& segment);

// Builds the conv input tensor [B, 1, kSegmentSamples] from raw strips.
Tensor batch_input(const std::vector<std::vector<double>>& strips, bool requires_grad = false);

// 2-layer MLP (D -> D -> D) used during contrastive pretraining and discarded
// before probing.
class ProjectionHead {
  public:
    ProjectionHead(int dim, Rng& rng);
    Tensor forward(Tape& tape, const Tensor& x) const;
    std::vector<Tensor> parameters() const;

  private:
    Tensor w1_, b1_, w2_, b2_;
};

// Maps an embedding back to a full strip for reconstruction objectives.
class ReconstructionDecoder {
  public:
    ReconstructionDecoder(int embed_dim, int hidden_dim, int out_len, Rng& rng);
    Tensor forward(Tape& tape, const Tensor& z) const;  // [B,D] -> [B,out_len]
    std::vector<Tensor> parameters() const;

  private:
    Tensor w1_, b1_, w2_, b2_;
};

// Affine map D -> 1 plus sigmoid; output strictly inside (0, 1).
class SupervisedHead {
  public:
    SupervisedHead(int dim, Rng& rng);
    Tensor probabilities(Tape& tape, const Tensor& embeddings) const;  // [B,D] -> [B,1]
    std::vector<Tensor> parameters() const;

  private:
    Tensor w_, b_;
};

// -[y log p + (1-y) log(1-p)], probabilities clamped at 1e-12 from both ends
Tensor bce_loss(Tape& tape, const Tensor& p, const Tensor& y);

struct TrainRecipe {
    double lr0 = 1e-3;
    double eta_min = 0.0;
    int max_epochs = 50;
    int patience = 5;
    int batch_size = 32;
    double clip_norm = 0.0;  // global-norm gradient clip; 0 disables
};

struct SupervisedModel {
    Encoder encoder;
    SupervisedHead head;

    std::vector<double> predict_proba(const std::vector<std::vector<double>>& strips) const;
};

struct SupervisedTrainResult {
    SupervisedModel model;
    std::vector<double> train_losses;
    std::vector<double> val_losses;
    int best_epoch = 0;  // 1-based
};

// BCE + Adam(lr 1e-3) + cosine annealing + early stopping on validation loss;
// returns the parameters from the best validation epoch.
SupervisedTrainResult train_supervised(const std::vector<sigproc::Segment>& train,
                                       const std::vector<sigproc::Segment>& validation,
                                       const EncoderConfig& config, const TrainRecipe& recipe,
                                       std::uint64_t seed);

}  // namespace ecgssl::model
