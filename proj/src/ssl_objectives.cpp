#include "ecgssl/ssl_objectives.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ecgssl::ssl {

PretextCorpus PretextCorpus::from_segments(const std::vector<sigproc::Segment>& labeled) {
    PretextCorpus corpus;
    corpus.segments.reserve(labeled.size());
    for (const auto& s : labeled) {
        PretextSegment p;
        p.patient_id = s.patient_id;
        p.recording_id = s.recording_id;
        p.start_index = s.start_index;
        p.values = s.values;
        corpus.segments.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < corpus.segments.size(); ++i)
        corpus.by_recording[corpus.segments[i].recording_id].push_back(i);
    for (auto& [rid, idxs] : corpus.by_recording) {
        std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
            return corpus.segments[a].start_index < corpus.segments[b].start_index;
        });
        const std::string& pid = corpus.segments[idxs.front()].patient_id;
        corpus.recordings_by_patient[pid].push_back(rid);
    }
    return corpus;
}

// --------------------------------------------------------------------------
// Augmentation
// --------------------------------------------------------------------------

namespace {

std::vector<double> resize_linear(std::span<const double> x, std::size_t target_len) {
    std::vector<double> out(target_len);
    if (x.size() == 1) {
        std::fill(out.begin(), out.end(), x[0]);
        return out;
    }
    const double step = static_cast<double>(x.size() - 1) / static_cast<double>(target_len - 1);
    for (std::size_t k = 0; k < target_len; ++k) {
        const double u = static_cast<double>(k) * step;
        const std::size_t i0 = std::min(static_cast<std::size_t>(u), x.size() - 2);
        const double frac = u - static_cast<double>(i0);
        out[k] = x[i0] + frac * (x[i0 + 1] - x[i0]);
    }
    return out;
}

const std::vector<double>& segment_values(const PretextCorpus& corpus, std::size_t idx) {
    return corpus.segments[idx].values;
}

std::size_t pick_segment(const PretextCorpus& corpus, Rng& rng) {
    return rng.bounded(corpus.segments.size());
}

}  // namespace

std::vector<double> augment_view(std::span<const double> strip, const AugmentConfig& config,
                                 Rng& rng) {
    std::vector<double> out(strip.begin(), strip.end());
    if (!config.enabled) return out;
    const std::size_t n = strip.size();

    // time crop-and-resize: crop a window of n/f samples (f in 1 +- crop_fraction),
    // reflect-extend when the window overruns, then resize back to n
    if (config.crop_fraction > 0.0) {
        const double f = rng.uniform(1.0 - config.crop_fraction, 1.0 + config.crop_fraction);
        const std::size_t w = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::llround(static_cast<double>(n) / f)));
        std::vector<double> window(w);
        if (w <= n) {
            const std::size_t start = rng.bounded(n - w + 1);
            std::copy(out.begin() + static_cast<std::ptrdiff_t>(start),
                      out.begin() + static_cast<std::ptrdiff_t>(start + w), window.begin());
        } else {
            for (std::size_t i = 0; i < w; ++i) {
                std::size_t j = i;
                if (j >= n) j = 2 * n - 2 - j;  // reflect past the end
                window[i] = out[j];
            }
        }
        out = resize_linear(window, n);
    }

    const double amp = rng.uniform(config.scale_lo, config.scale_hi);
    for (double& v : out) v *= amp;
    if (config.jitter_stddev > 0.0)
        for (double& v : out) v += rng.normal(0.0, config.jitter_stddev);
    return out;
}

// --------------------------------------------------------------------------
// Samplers
// --------------------------------------------------------------------------

ViewPairBatch sample_simclr_pairs(const PretextCorpus& corpus, int n_pairs,
                                  const AugmentConfig& config, Rng& rng) {
    if (corpus.segments.empty()) throw ConfigError("simclr sampler: empty corpus");
    ViewPairBatch batch;
    for (int k = 0; k < n_pairs; ++k) {
        const auto& base = segment_values(corpus, pick_segment(corpus, rng));
        batch.views.push_back(augment_view(base, config, rng));
        batch.views.push_back(augment_view(base, config, rng));
        batch.provenance.push_back(PairProvenance::augmented);
    }
    return batch;
}

MixupViews mixup_views(std::span<const double> x1, std::span<const double> x2, double beta_alpha,
                       Rng& rng) {
    if (x1.size() != x2.size())
        throw ShapeError("mixup_views: strip lengths differ, " + std::to_string(x1.size()) +
                         " vs " + std::to_string(x2.size()));
    MixupViews mv;
    mv.lambda = rng.beta(beta_alpha, beta_alpha);
    mv.mixed1.resize(x1.size());
    mv.mixed2.resize(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) {
        mv.mixed1[i] = mv.lambda * x1[i] + (1.0 - mv.lambda) * x2[i];
        mv.mixed2[i] = (1.0 - mv.lambda) * x1[i] + mv.lambda * x2[i];
    }
    return mv;
}

ViewPairBatch sample_mixup_pairs(const PretextCorpus& corpus, int n_pairs, double beta_alpha,
                                 bool cross_recording, Rng& rng) {
    ViewPairBatch batch;
    const int n_sources = n_pairs / 2;
    if (n_sources < 1) throw ConfigError("mixup sampler: need at least 2 pairs per batch");

    std::vector<std::string> multi_segment_recordings;
    for (const auto& [rid, idxs] : corpus.by_recording)
        if (idxs.size() >= 2) multi_segment_recordings.push_back(rid);
    if (!cross_recording && multi_segment_recordings.empty())
        throw ConfigError("mixup sampler: no recording yields two disjoint strips");
    if (cross_recording && corpus.by_recording.size() < 2)
        throw ConfigError("mixup sampler: need at least two recordings");

    for (int s = 0; s < n_sources; ++s) {
        std::size_t ia, ib;
        if (cross_recording) {
            do {
                ia = pick_segment(corpus, rng);
                ib = pick_segment(corpus, rng);
            } while (corpus.segments[ia].recording_id == corpus.segments[ib].recording_id);
        } else {
            const auto& rid =
                multi_segment_recordings[rng.bounded(multi_segment_recordings.size())];
            const auto& idxs = corpus.by_recording.at(rid);
            const std::size_t a = rng.bounded(idxs.size());
            std::size_t b = rng.bounded(idxs.size() - 1);
            if (b >= a) ++b;
            ia = idxs[a];
            ib = idxs[b];
        }
        const auto& x1 = segment_values(corpus, ia);
        const auto& x2 = segment_values(corpus, ib);
        MixupViews mv = mixup_views(x1, x2, beta_alpha, rng);
        batch.views.push_back(x1);
        batch.views.push_back(std::move(mv.mixed1));
        batch.provenance.push_back(PairProvenance::mixup);
        batch.views.push_back(x2);
        batch.views.push_back(std::move(mv.mixed2));
        batch.provenance.push_back(PairProvenance::mixup);
    }
    return batch;
}

ClocsPool clocs_pair_pool(const PretextCorpus& corpus) {
    ClocsPool pool;
    for (const auto& [rid, idxs] : corpus.by_recording) {
        if (idxs.size() < 2) {
            ++pool.skipped_recordings;
            continue;
        }
        for (std::size_t k = 0; k + 1 < idxs.size(); k += 2)
            pool.pairs.emplace_back(idxs[k], idxs[k + 1]);
    }
    return pool;
}

ViewPairBatch sample_clocs_pairs(const PretextCorpus& corpus, int n_pairs, Rng& rng) {
    const ClocsPool pool = clocs_pair_pool(corpus);
    if (pool.pairs.empty())
        throw ConfigError("clocs sampler: no recording yields two consecutive strips");
    ViewPairBatch batch;
    for (int k = 0; k < n_pairs; ++k) {
        const auto& [a, b] = pool.pairs[rng.bounded(pool.pairs.size())];
        batch.views.push_back(segment_values(corpus, a));
        batch.views.push_back(segment_values(corpus, b));
        batch.provenance.push_back(PairProvenance::consecutive);
    }
    return batch;
}

std::vector<std::string> pclr_eligible_patients(const PretextCorpus& corpus) {
    std::vector<std::string> eligible;
    for (const auto& [pid, recs] : corpus.recordings_by_patient)
        if (recs.size() >= 2) eligible.push_back(pid);
    if (eligible.empty()) {
        std::ostringstream msg;
        msg << "pclr sampler: no patient has two recordings; counts:";
        int shown = 0;
        for (const auto& [pid, recs] : corpus.recordings_by_patient) {
            msg << ' ' << pid << '=' << recs.size();
            if (++shown >= 16) {
                msg << " ...";
                break;
            }
        }
        throw ConfigError(msg.str());
    }
    return eligible;
}

ViewPairBatch sample_pclr_pairs(const PretextCorpus& corpus, int n_pairs, Rng& rng) {
    const auto eligible = pclr_eligible_patients(corpus);
    ViewPairBatch batch;
    for (int k = 0; k < n_pairs; ++k) {
        const auto& pid = eligible[rng.bounded(eligible.size())];
        const auto& recs = corpus.recordings_by_patient.at(pid);
        const std::size_t a = rng.bounded(recs.size());
        std::size_t b = rng.bounded(recs.size() - 1);
        if (b >= a) ++b;
        const auto& idxs_a = corpus.by_recording.at(recs[a]);
        const auto& idxs_b = corpus.by_recording.at(recs[b]);
        batch.views.push_back(segment_values(corpus, idxs_a[rng.bounded(idxs_a.size())]));
        batch.views.push_back(segment_values(corpus, idxs_b[rng.bounded(idxs_b.size())]));
        batch.provenance.push_back(PairProvenance::cross_recording);
    }
    return batch;
}

TripletBatch sample_deaps_triplets(const PretextCorpus& corpus, int n_triplets, double gap_near_s,
                                   double gap_far_s, Rng& rng) {
    if (!(gap_near_s < gap_far_s))
        throw ConfigError("deaps sampler: gap_near must be smaller than gap_far");

    // anchors that have both a near and a far partner in their recording
    struct Candidate {
        std::size_t anchor;
        std::vector<std::size_t> nears, fars;
    };
    std::vector<Candidate> candidates;
    for (const auto& [rid, idxs] : corpus.by_recording) {
        for (std::size_t a : idxs) {
            Candidate c{a, {}, {}};
            const double ta = corpus.segments[a].start_time_s();
            for (std::size_t other : idxs) {
                if (other == a) continue;
                const double dt = std::abs(corpus.segments[other].start_time_s() - ta);
                if (dt <= gap_near_s) c.nears.push_back(other);
                if (dt >= gap_far_s) c.fars.push_back(other);
            }
            if (!c.nears.empty() && !c.fars.empty()) candidates.push_back(std::move(c));
        }
    }
    if (candidates.empty())
        throw ConfigError("deaps sampler: no recording is long enough for far strips (need >= " +
                          std::to_string(gap_far_s) + " s of separation)");

    TripletBatch batch;
    for (int k = 0; k < n_triplets; ++k) {
        const Candidate& c = candidates[rng.bounded(candidates.size())];
        batch.anchors.push_back(segment_values(corpus, c.anchor));
        batch.nears.push_back(segment_values(corpus, c.nears[rng.bounded(c.nears.size())]));
        batch.fars.push_back(segment_values(corpus, c.fars[rng.bounded(c.fars.size())]));
    }
    return batch;
}

// --------------------------------------------------------------------------
// Masking
// --------------------------------------------------------------------------

MaskedView apply_patch_mask(std::span<const double> segment, const MaskSpec& spec,
                            const std::vector<std::uint8_t>& patch_mask) {
    const std::size_t n = segment.size();
    const std::size_t n_patches =
        (n + static_cast<std::size_t>(spec.patch_len) - 1) / static_cast<std::size_t>(spec.patch_len);
    if (patch_mask.size() != n_patches)
        throw ShapeError("apply_patch_mask: mask has " + std::to_string(patch_mask.size()) +
                         " patches, expected " + std::to_string(n_patches));
    MaskedView view;
    view.values.assign(segment.begin(), segment.end());
    view.sample_mask.assign(n, 0);
    view.patch_mask = patch_mask;
    for (std::size_t p = 0; p < n_patches; ++p) {
        if (!patch_mask[p]) continue;
        const std::size_t lo = p * static_cast<std::size_t>(spec.patch_len);
        const std::size_t hi = std::min(n, lo + static_cast<std::size_t>(spec.patch_len));
        for (std::size_t i = lo; i < hi; ++i) {
            view.values[i] = 0.0;
            view.sample_mask[i] = 1;
        }
    }
    return view;
}

MaskedView apply_mask(std::span<const double> segment, const MaskSpec& spec, Rng& rng) {
    if (spec.ratio < 0.0 || spec.ratio > 1.0)
        throw ConfigError("mask: ratio must lie in [0, 1], got " + std::to_string(spec.ratio));
    if (spec.patch_len < 1) throw ConfigError("mask: patch length must be positive");
    const std::size_t n = segment.size();
    const std::size_t n_patches =
        (n + static_cast<std::size_t>(spec.patch_len) - 1) / static_cast<std::size_t>(spec.patch_len);
    const std::size_t n_masked =
        static_cast<std::size_t>(std::llround(spec.ratio * static_cast<double>(n_patches)));
    std::vector<std::size_t> order(n_patches);
    for (std::size_t i = 0; i < n_patches; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::uint8_t> patch_mask(n_patches, 0);
    for (std::size_t i = 0; i < n_masked; ++i) patch_mask[order[i]] = 1;
    return apply_patch_mask(segment, spec, patch_mask);
}

std::vector<std::uint8_t> complement_mask(const std::vector<std::uint8_t>& patch_mask) {
    std::vector<std::uint8_t> inv(patch_mask.size());
    for (std::size_t i = 0; i < patch_mask.size(); ++i) inv[i] = patch_mask[i] ? 0 : 1;
    return inv;
}

// --------------------------------------------------------------------------
// Losses
// --------------------------------------------------------------------------

double cosine_sim(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw ShapeError("cosine_sim: dimension mismatch " + std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw NumericError("cosine_sim: zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

Tensor nt_xent_loss(Tape& tape, const Tensor& embeddings, double tau) {
    if (!(tau > 0.0)) throw ConfigError("nt_xent: temperature must be positive");
    if (embeddings.rank() != 2 || embeddings.dim(0) < 4 || embeddings.dim(0) % 2 != 0)
        throw ConfigError("nt_xent: need an even batch of at least 4 embeddings, got " +
                          numcore::shape_str(embeddings.shape()));
    const int two_n = embeddings.dim(0);

    Tensor z = tape.l2_normalize_rows(embeddings);
    Tensor sims = tape.scale(tape.matmul(z, tape.transpose(z)), 1.0 / tau);

    // strike the diagonal from each anchor's denominator
    std::vector<double> offdiag(static_cast<std::size_t>(two_n) * two_n, 1.0);
    std::vector<double> pospick(static_cast<std::size_t>(two_n) * two_n, 0.0);
    for (int i = 0; i < two_n; ++i) {
        offdiag[static_cast<std::size_t>(i) * two_n + i] = 0.0;
        const int j = (i % 2 == 0) ? i + 1 : i - 1;
        pospick[static_cast<std::size_t>(i) * two_n + j] = 1.0;
    }
    Tensor mask = Tensor::from_vector({two_n, two_n}, std::move(offdiag));
    Tensor pos_mask = Tensor::from_vector({two_n, two_n}, std::move(pospick));

    Tensor log_denom = tape.log(tape.sum_last_axis(tape.mul(tape.exp(sims), mask)));
    Tensor positives = tape.sum_last_axis(tape.mul(sims, pos_mask));
    return tape.mean_all(tape.sub(log_denom, positives));
}

Tensor deaps_loss(Tape& tape, const Tensor& anchors, const Tensor& nears, const Tensor& fars,
                  const DeapsWeights& weights) {
    if (anchors.shape() != nears.shape() || anchors.shape() != fars.shape())
        throw ShapeError("deaps: triplet tensors disagree, " +
                         numcore::shape_str(anchors.shape()) + " vs " +
                         numcore::shape_str(nears.shape()) + " vs " +
                         numcore::shape_str(fars.shape()));
    const int b = anchors.dim(0);
    if (b < 4) throw ConfigError("deaps: degenerate batch, need at least 4 triplets");
    const int d = anchors.dim(1);

    // invariance: mean squared anchor-near distance
    Tensor diff_an = tape.sub(anchors, nears);
    Tensor inv = tape.mean_all(tape.sum_last_axis(tape.mul(diff_an, diff_an)));

    // variance + covariance over all embeddings in the batch
    Tensor all = tape.concat_rows(tape.concat_rows(anchors, nears), fars);  // [3B, D]
    const int rows = 3 * b;
    Tensor col_mean = tape.mean_last_axis(tape.transpose(all));             // [D]
    Tensor centered = tape.add_rowvec(all, tape.scale(col_mean, -1.0));     // [3B, D]
    Tensor col_var = tape.mean_last_axis(tape.transpose(tape.mul(centered, centered)));
    Tensor col_std = tape.sqrt(tape.add_const(col_var, 1e-8));
    Tensor var_term = tape.sum_all(tape.relu(tape.add_const(tape.scale(col_std, -1.0), 1.0)));

    Tensor cov = tape.scale(tape.matmul(tape.transpose(centered), centered),
                            1.0 / static_cast<double>(rows - 1));  // [D, D]
    std::vector<double> offdiag(static_cast<std::size_t>(d) * d, 1.0);
    for (int i = 0; i < d; ++i) offdiag[static_cast<std::size_t>(i) * d + i] = 0.0;
    Tensor cov_mask = Tensor::from_vector({d, d}, std::move(offdiag));
    Tensor cov_term = tape.sum_all(tape.mul(tape.mul(cov, cov), cov_mask));

    // temporal dynamics: push far strips at least `margin` apart
    Tensor diff_af = tape.sub(anchors, fars);
    Tensor far_dist = tape.sqrt(tape.add_const(tape.sum_last_axis(tape.mul(diff_af, diff_af)),
                                               1e-12));
    Tensor dyn = tape.mean_all(
        tape.relu(tape.add_const(tape.scale(far_dist, -1.0), weights.margin)));

    Tensor total = tape.add(inv, tape.scale(var_term, weights.variance));
    total = tape.add(total, tape.scale(cov_term, weights.covariance));
    return tape.add(total, tape.scale(dyn, weights.dynamics));
}

Tensor mtae_loss(Tape& tape, const Tensor& prediction, const Tensor& target,
                 const std::vector<std::uint8_t>& sample_mask) {
    if (prediction.shape() != target.shape())
        throw ShapeError("mtae: prediction " + numcore::shape_str(prediction.shape()) +
                         " vs target " + numcore::shape_str(target.shape()));
    if (sample_mask.size() != prediction.size())
        throw ShapeError("mtae: mask covers " + std::to_string(sample_mask.size()) +
                         " samples, tensors have " + std::to_string(prediction.size()));
    std::size_t count = 0;
    std::vector<double> mask(sample_mask.size());
    for (std::size_t i = 0; i < sample_mask.size(); ++i) {
        mask[i] = sample_mask[i] ? 1.0 : 0.0;
        count += sample_mask[i] ? 1 : 0;
    }
    if (count == 0) throw ConfigError("mtae: empty mask, reconstruction loss undefined");
    Tensor mask_t = Tensor::from_vector(prediction.shape(), std::move(mask));
    Tensor diff = tape.sub(prediction, target);
    Tensor masked_sq = tape.mul(tape.mul(diff, diff), mask_t);
    return tape.scale(tape.sum_all(masked_sq), 1.0 / static_cast<double>(count));
}

NerulaLoss nerula_loss(Tape& tape, const model::Encoder& encoder,
                       const model::ProjectionHead& projector,
                       const model::ReconstructionDecoder& decoder,
                       const std::vector<std::vector<double>>& originals, const MaskSpec& spec,
                       double lambda_d, Rng& rng) {
    if (originals.empty()) throw ConfigError("nerula: empty batch");
    const std::size_t len = originals[0].size();

    std::vector<std::vector<double>> views_a, views_b;
    std::vector<std::uint8_t> batch_mask;
    views_a.reserve(originals.size());
    views_b.reserve(originals.size());
    for (const auto& strip : originals) {
        MaskedView a = apply_mask(strip, spec, rng);
        MaskedView b = apply_patch_mask(strip, spec, complement_mask(a.patch_mask));
        batch_mask.insert(batch_mask.end(), a.sample_mask.begin(), a.sample_mask.end());
        views_a.push_back(std::move(a.values));
        views_b.push_back(std::move(b.values));
    }

    Tensor za = encoder.forward(tape, model::batch_input(views_a));
    Tensor recon = decoder.forward(tape, za);

    std::vector<double> flat_target;
    flat_target.reserve(originals.size() * len);
    for (const auto& strip : originals)
        flat_target.insert(flat_target.end(), strip.begin(), strip.end());
    Tensor target = Tensor::from_vector(
        {static_cast<int>(originals.size()), static_cast<int>(len)}, std::move(flat_target));

    NerulaLoss out;
    Tensor l_recon = mtae_loss(tape, recon, target, batch_mask);

    Tensor pa = projector.forward(tape, za);
    Tensor pb_stopped =
        tape.detach(projector.forward(tape, encoder.forward(tape, model::batch_input(views_b))));
    Tensor diff = tape.sub(pa, pb_stopped);
    Tensor l_disc = tape.mean_all(tape.sum_last_axis(tape.mul(diff, diff)));

    out.total = tape.add(l_recon, tape.scale(l_disc, lambda_d));
    out.reconstruction = l_recon.item();
    out.alignment = l_disc.item();
    return out;
}

}  // namespace ecgssl::ssl
