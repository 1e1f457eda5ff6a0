#include "ecgssl/encoder.hpp"

#include <algorithm>
#include <cmath>

namespace ecgssl::model {

namespace {

Tensor uniform_init(numcore::Shape shape, double fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(std::max(fan_in, 1.0));
    std::vector<double> vals(numcore::shape_numel(shape));
    for (double& v : vals) v = rng.uniform(-bound, bound);
    return Tensor::from_vector(std::move(shape), std::move(vals), true);
}

void validate_config(const EncoderConfig& c) {
    if (c.channels.empty()) throw ConfigError("encoder: need at least one conv block");
    if (c.embed_dim < 2) throw ConfigError("encoder: embedding dimension must be >= 2");
    if (c.kernel_size < 1 || c.stride < 1)
        throw ConfigError("encoder: kernel size and stride must be positive");
    for (int ch : c.channels)
        if (ch < 1) throw ConfigError("encoder: channel widths must be positive");
}

}  // namespace

Encoder::Encoder(const EncoderConfig& config, Rng& rng) : config_(config) {
    validate_config(config_);
    int cin = 1;
    for (int cout : config_.channels) {
        conv_w_.push_back(uniform_init({cout, cin, config_.kernel_size},
                                       static_cast<double>(cin * config_.kernel_size), rng));
        conv_b_.push_back(uniform_init({cout}, static_cast<double>(cin * config_.kernel_size),
                                       rng));
        cin = cout;
    }
    head_w_ = uniform_init({cin, config_.embed_dim}, static_cast<double>(cin), rng);
    head_b_ = uniform_init({config_.embed_dim}, static_cast<double>(cin), rng);
}

Encoder::Encoder(const EncoderConfig& config, const std::vector<Tensor>& params)
    : config_(config) {
    validate_config(config_);
    const std::size_t expected = config_.channels.size() * 2 + 2;
    if (params.size() != expected)
        throw DataError("encoder: checkpoint has " + std::to_string(params.size()) +
                        " tensors, config expects " + std::to_string(expected));
    std::size_t i = 0;
    int cin = 1;
    for (int cout : config_.channels) {
        const numcore::Shape want_w{cout, cin, config_.kernel_size};
        if (params[i].shape() != want_w)
            throw DataError("encoder: checkpoint weight shape " +
                            numcore::shape_str(params[i].shape()) + " does not match config " +
                            numcore::shape_str(want_w));
        conv_w_.push_back(params[i++].clone(true));
        conv_b_.push_back(params[i++].clone(true));
        cin = cout;
    }
    head_w_ = params[i++].clone(true);
    head_b_ = params[i++].clone(true);
}

Tensor Encoder::forward(Tape& tape, const Tensor& x) const {
    Tensor h = x;
    const int pad = config_.kernel_size / 2;
    for (std::size_t blk = 0; blk < conv_w_.size(); ++blk)
        h = tape.relu(tape.conv1d(h, conv_w_[blk], conv_b_[blk], config_.stride, pad));
    Tensor pooled = tape.mean_last_axis(h);  // [B, C]
    return tape.add_rowvec(tape.matmul(pooled, head_w_), head_b_);
}

std::vector<double> Encoder::embed(std::span<const double> segment) const {
    if (segment.size() != sigproc::kSegmentSamples)
        throw ShapeError("embed: segment has " + std::to_string(segment.size()) +
                         " samples, expected " + std::to_string(sigproc::kSegmentSamples));
    Tape tape;
    Tensor x = Tensor::from_vector({1, 1, static_cast<int>(segment.size())},
                                   std::vector<double>(segment.begin(), segment.end()));
    Tensor e = forward(tape, x);
    return std::vector<double>(e.values().begin(), e.values().end());
}

std::vector<std::vector<double>> Encoder::embed_batch(
    const std::vector<std::vector<double>>& segments) const {
    std::vector<std::vector<double>> out;
    out.reserve(segments.size());
    constexpr std::size_t kChunk = 64;
    for (std::size_t at = 0; at < segments.size(); at += kChunk) {
        const std::size_t take = std::min(kChunk, segments.size() - at);
        std::vector<std::vector<double>> chunk(segments.begin() + static_cast<std::ptrdiff_t>(at),
                                               segments.begin() +
                                                   static_cast<std::ptrdiff_t>(at + take));
        Tape tape;
        Tensor e = forward(tape, batch_input(chunk));
        const int d = e.dim(1);
        for (std::size_t r = 0; r < take; ++r)
            out.emplace_back(e.values().begin() + static_cast<std::ptrdiff_t>(r) * d,
                             e.values().begin() + static_cast<std::ptrdiff_t>(r + 1) * d);
    }
    return out;
}

std::vector<Tensor> Encoder::parameters() const {
    std::vector<Tensor> params;
    for (std::size_t i = 0; i < conv_w_.size(); ++i) {
        params.push_back(conv_w_[i]);
        params.push_back(conv_b_[i]);
    }
    params.push_back(head_w_);
    params.push_back(head_b_);
    return params;
}

Embedding encode(const Encoder& encoder, const sigproc::Segment& segment) {
    Embedding e;
    e.segment_id = segment.recording_id + ":" + std::to_string(segment.start_index);
    e.values = encoder.embed(segment.values);
    return e;
}

Tensor batch_input(const std::vector<std::vector<double>>& strips, bool requires_grad) {
    if (strips.empty()) throw ShapeError("batch_input: empty batch");
    const std::size_t len = strips[0].size();
    std::vector<double> flat;
    flat.reserve(strips.size() * len);
    for (const auto& s : strips) {
        if (s.size() != len)
            throw ShapeError("batch_input: ragged strip lengths " + std::to_string(len) +
                             " vs " + std::to_string(s.size()));
        flat.insert(flat.end(), s.begin(), s.end());
    }
    return Tensor::from_vector({static_cast<int>(strips.size()), 1, static_cast<int>(len)},
                               std::move(flat), requires_grad);
}

ProjectionHead::ProjectionHead(int dim, Rng& rng) {
    w1_ = uniform_init({dim, dim}, dim, rng);
    b1_ = uniform_init({dim}, dim, rng);
    w2_ = uniform_init({dim, dim}, dim, rng);
    b2_ = uniform_init({dim}, dim, rng);
}

Tensor ProjectionHead::forward(Tape& tape, const Tensor& x) const {
    Tensor h = tape.relu(tape.add_rowvec(tape.matmul(x, w1_), b1_));
    return tape.add_rowvec(tape.matmul(h, w2_), b2_);
}

std::vector<Tensor> ProjectionHead::parameters() const { return {w1_, b1_, w2_, b2_}; }

ReconstructionDecoder::ReconstructionDecoder(int embed_dim, int hidden_dim, int out_len,
                                             Rng& rng) {
    w1_ = uniform_init({embed_dim, hidden_dim}, embed_dim, rng);
    b1_ = uniform_init({hidden_dim}, embed_dim, rng);
    w2_ = uniform_init({hidden_dim, out_len}, hidden_dim, rng);
    b2_ = uniform_init({out_len}, hidden_dim, rng);
}

Tensor ReconstructionDecoder::forward(Tape& tape, const Tensor& z) const {
    Tensor h = tape.relu(tape.add_rowvec(tape.matmul(z, w1_), b1_));
    return tape.add_rowvec(tape.matmul(h, w2_), b2_);
}

std::vector<Tensor> ReconstructionDecoder::parameters() const { return {w1_, b1_, w2_, b2_}; }

SupervisedHead::SupervisedHead(int dim, Rng& rng) {
    w_ = uniform_init({dim, 1}, dim, rng);
    b_ = uniform_init({1}, dim, rng);
}

Tensor SupervisedHead::probabilities(Tape& tape, const Tensor& embeddings) const {
    return tape.sigmoid(tape.add_rowvec(tape.matmul(embeddings, w_), b_));
}

std::vector<Tensor> SupervisedHead::parameters() const { return {w_, b_}; }

Tensor bce_loss(Tape& tape, const Tensor& p, const Tensor& y) {
    if (p.shape() != y.shape())
        throw ShapeError("bce_loss: shape mismatch " + numcore::shape_str(p.shape()) + " vs " +
                         numcore::shape_str(y.shape()));
    Tensor pc = tape.clamp(p, 1e-12, 1.0 - 1e-12);
    Tensor pos = tape.mul(y, tape.log(pc));
    Tensor one_minus_y = tape.add_const(tape.scale(y, -1.0), 1.0);
    Tensor one_minus_p = tape.add_const(tape.scale(pc, -1.0), 1.0);
    Tensor neg = tape.mul(one_minus_y, tape.log(one_minus_p));
    return tape.scale(tape.mean_all(tape.add(pos, neg)), -1.0);
}

std::vector<double> SupervisedModel::predict_proba(
    const std::vector<std::vector<double>>& strips) const {
    std::vector<double> out;
    out.reserve(strips.size());
    constexpr std::size_t kChunk = 64;
    for (std::size_t at = 0; at < strips.size(); at += kChunk) {
        const std::size_t take = std::min(kChunk, strips.size() - at);
        std::vector<std::vector<double>> chunk(strips.begin() + static_cast<std::ptrdiff_t>(at),
                                               strips.begin() +
                                                   static_cast<std::ptrdiff_t>(at + take));
        Tape tape;
        Tensor p = head.probabilities(tape, encoder.forward(tape, batch_input(chunk)));
        out.insert(out.end(), p.values().begin(), p.values().end());
    }
    return out;
}

SupervisedTrainResult train_supervised(const std::vector<sigproc::Segment>& train,
                                       const std::vector<sigproc::Segment>& validation,
                                       const EncoderConfig& config, const TrainRecipe& recipe,
                                       std::uint64_t seed) {
    if (train.empty() || validation.empty())
        throw ConfigError("train_supervised: empty train or validation split");
    bool has0 = false, has1 = false;
    for (const auto& s : train) {
        if (!s.label) throw ConfigError("train_supervised: unlabeled segment in training set");
        (*s.label == 0 ? has0 : has1) = true;
    }
    if (!has0 || !has1)
        throw ConfigError("train_supervised: training set contains a single class");

    Rng rng(seed);
    SupervisedTrainResult result{
        {Encoder(config, rng), SupervisedHead(config.embed_dim, rng)}, {}, {}, 0};
    Encoder& encoder = result.model.encoder;
    SupervisedHead& head = result.model.head;

    std::vector<Tensor> params = encoder.parameters();
    for (const Tensor& t : head.parameters()) params.push_back(t);
    numcore::Adam adam(params, {recipe.lr0});

    const int steps_per_epoch =
        static_cast<int>((train.size() + recipe.batch_size - 1) / recipe.batch_size);
    numcore::CosineSchedule schedule{recipe.lr0, recipe.eta_min,
                                     static_cast<long long>(recipe.max_epochs) * steps_per_epoch};
    numcore::EarlyStopper stopper(recipe.patience);

    auto eval_loss = [&](const std::vector<sigproc::Segment>& segs) {
        double total = 0.0;
        std::size_t count = 0;
        constexpr std::size_t kChunk = 128;
        for (std::size_t at = 0; at < segs.size(); at += kChunk) {
            const std::size_t take = std::min(kChunk, segs.size() - at);
            std::vector<std::vector<double>> strips;
            std::vector<double> labels;
            strips.reserve(take);
            for (std::size_t i = at; i < at + take; ++i) {
                strips.push_back(segs[i].values);
                labels.push_back(static_cast<double>(segs[i].label.value_or(0)));
            }
            Tape tape;
            Tensor p = head.probabilities(tape, encoder.forward(tape, batch_input(strips)));
            Tensor y = Tensor::from_vector({static_cast<int>(take), 1}, std::move(labels));
            total += bce_loss(tape, p, y).item() * static_cast<double>(take);
            count += take;
        }
        return total / static_cast<double>(count);
    };

    std::vector<std::vector<double>> best_params;
    auto snapshot = [&] {
        best_params.clear();
        for (const Tensor& p : params)
            best_params.emplace_back(p.values().begin(), p.values().end());
    };

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    long long step = 0;
    for (int epoch = 1; epoch <= recipe.max_epochs; ++epoch) {
        Rng erng = rng.child(static_cast<std::uint64_t>(epoch));
        erng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t at = 0; at < order.size(); at += recipe.batch_size) {
            const std::size_t take =
                std::min(static_cast<std::size_t>(recipe.batch_size), order.size() - at);
            std::vector<std::vector<double>> strips;
            std::vector<double> labels;
            strips.reserve(take);
            for (std::size_t i = at; i < at + take; ++i) {
                strips.push_back(train[order[i]].values);
                labels.push_back(static_cast<double>(*train[order[i]].label));
            }
            Tape tape;
            Tensor p = head.probabilities(tape, encoder.forward(tape, batch_input(strips)));
            Tensor y = Tensor::from_vector({static_cast<int>(take), 1}, std::move(labels));
            Tensor loss = bce_loss(tape, p, y);
            tape.backward(loss);
            if (recipe.clip_norm > 0.0) numcore::clip_grad_norm(params, recipe.clip_norm);
            adam.step(schedule.lr_at(step++));
            epoch_loss += loss.item() * static_cast<double>(take);
            seen += take;
        }
        result.train_losses.push_back(epoch_loss / static_cast<double>(seen));

        const double val = eval_loss(validation);
        result.val_losses.push_back(val);
        const bool was_best = val < stopper.best_loss();
        const bool keep_going = stopper.update(val);
        if (was_best) snapshot();
        if (!keep_going) break;
    }
    result.best_epoch = stopper.best_epoch();

    if (!best_params.empty())
        for (std::size_t i = 0; i < params.size(); ++i)
            std::copy(best_params[i].begin(), best_params[i].end(), params[i].values().begin());
    return result;
}

}  // namespace ecgssl::model
