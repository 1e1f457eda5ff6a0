#include "ecgssl/optim.hpp"

#include <cmath>

namespace ecgssl::numcore {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step(double lr) {
    ++step_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        auto pv = p.values();
        auto gv = p.grad();
        auto& m = m_[pi];
        auto& v = v_[pi];
        for (std::size_t i = 0; i < pv.size(); ++i) {
            const double g = gv[i];
            if (!std::isfinite(g))
                throw TrainError("adam: non-finite gradient at step " + std::to_string(step_));
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            pv[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
        p.zero_grad();
    }
}

double CosineSchedule::lr_at(long long t) const {
    if (total_steps < 1) throw ConfigError("cosine schedule: total_steps must be >= 1");
    if (t >= total_steps) return eta_min;
    if (t < 0) t = 0;
    const double frac = static_cast<double>(t) / static_cast<double>(total_steps);
    return eta_min + 0.5 * (lr0 - eta_min) * (1.0 + std::cos(3.141592653589793238462643 * frac));
}

bool EarlyStopper::update(double val_loss) {
    if (!std::isfinite(val_loss)) throw TrainError("early stopper: non-finite validation loss");
    ++epoch_;
    if (val_loss < best_loss_ - min_delta_) {
        best_loss_ = val_loss;
        best_epoch_ = epoch_;
        since_best_ = 0;
    } else {
        ++since_best_;
        if (since_best_ >= patience_) stopped_ = true;
    }
    return !stopped_;
}

double clip_grad_norm(std::vector<Tensor>& params, double max_norm) {
    double sq = 0.0;
    for (Tensor& p : params)
        for (double g : p.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (Tensor& p : params)
            for (double& g : p.grad()) g *= s;
    }
    return norm;
}

}  // namespace ecgssl::numcore
