#pragma once

#include <limits>
#include <vector>

#include "ecgssl/tensor.hpp"

namespace ecgssl::numcore {

struct AdamConfig {
    double lr0 = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a fixed parameter list. Gradients are read from
// each parameter's grad buffer and zeroed after the update.
class Adam {
  public:
    explicit Adam(std::vector<Tensor> params, AdamConfig config = {});

    // throws TrainError (with the step index) on a non-finite gradient
    void step(double lr);

    long long step_count() const { return step_; }
    const AdamConfig& config() const { return config_; }

  private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamConfig config_;
    long long step_ = 0;
};

struct CosineSchedule {
    double lr0 = 1e-3;
    double eta_min = 0.0;
    long long total_steps = 1;

    // eta_min + 0.5*(lr0 - eta_min)*(1 + cos(pi*t/T)); t past T clamps to eta_min
    double lr_at(long long t) const;
};

// Stops after `patience` consecutive epochs without strict improvement.
class EarlyStopper {
  public:
    explicit EarlyStopper(int patience, double min_delta = 0.0)
        : patience_(patience), min_delta_(min_delta) {}

    // feed one validation loss per epoch; returns false once training should stop
    bool update(double val_loss);

    bool stopped() const { return stopped_; }
    double best_loss() const { return best_loss_; }
    int best_epoch() const { return best_epoch_; }  // 1-based
    int epoch() const { return epoch_; }

  private:
    int patience_;
    double min_delta_;
    int epoch_ = 0;
    int best_epoch_ = 0;
    int since_best_ = 0;
    double best_loss_ = std::numeric_limits<double>::infinity();
    bool stopped_ = false;
};

// Global-norm gradient clipping; returns the pre-clip norm. Off by default in
// every training recipe, exposed through config.
double clip_grad_norm(std::vector<Tensor>& params, double max_norm);

}  // namespace ecgssl::numcore
