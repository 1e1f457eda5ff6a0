#pragma once

// Independent oracles used by the test suites. Everything here recomputes
// expected values from first principles, by a different route than the
// implementation under test, and must stay free of implementation includes
// beyond the tensor/tape plumbing needed to drive finite differences.

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "ecgssl/common.hpp"
#include "ecgssl/tape.hpp"
#include "ecgssl/tensor.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// Finite-difference gradient checking (central differences, h = 1e-6).
// ---------------------------------------------------------------------------

struct GradCheckResult {
    bool ok = true;
    double worst_rel = 0.0;
    std::string note;
};

// `build` must construct the scalar loss from the given params on a fresh
// tape; it is invoked repeatedly while param values are perturbed in place.
inline GradCheckResult check_gradients(
    std::vector<ecgssl::numcore::Tensor> params,
    const std::function<ecgssl::numcore::Tensor(ecgssl::numcore::Tape&)>& build,
    double h = 1e-6, double rtol = 1e-5, double atol = 1e-8, int max_checks_per_tensor = 0,
    ecgssl::Rng* pick_rng = nullptr) {
    using ecgssl::numcore::Tape;
    using ecgssl::numcore::Tensor;

    for (auto& p : params) p.zero_grad();
    Tape tape;
    Tensor loss = build(tape);
    tape.backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& p : params) analytic.emplace_back(p.grad().begin(), p.grad().end());

    GradCheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto vals = params[pi].values();
        std::vector<std::size_t> idx(vals.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (max_checks_per_tensor > 0 && pick_rng &&
            idx.size() > static_cast<std::size_t>(max_checks_per_tensor)) {
            pick_rng->shuffle(idx);
            idx.resize(static_cast<std::size_t>(max_checks_per_tensor));
        }
        for (std::size_t i : idx) {
            const double saved = vals[i];
            vals[i] = saved + h;
            Tape t1;
            const double fp = build(t1).item();
            vals[i] = saved - h;
            Tape t2;
            const double fm = build(t2).item();
            vals[i] = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double an = analytic[pi][i];
            const double denom = std::max(std::abs(fd), std::abs(an));
            const double rel = denom > 0 ? std::abs(fd - an) / denom : 0.0;
            if (std::abs(fd - an) > atol && rel > rtol) {
                result.ok = false;
                result.note = "param " + std::to_string(pi) + " elem " + std::to_string(i) +
                              ": analytic " + std::to_string(an) + " vs fd " + std::to_string(fd);
            }
            result.worst_rel = std::max(result.worst_rel, std::abs(fd - an) > atol ? rel : 0.0);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Frequency response of cascaded biquad sections (b0,b1,b2,a0,a1,a2).
// ---------------------------------------------------------------------------

inline double sos_magnitude(std::span<const std::array<double, 6>> sections, double freq_hz,
                            double sample_rate_hz) {
    const double omega = 2.0 * 3.141592653589793238462643 * freq_hz / sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -omega);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h(1.0, 0.0);
    for (const auto& s : sections) {
        const std::complex<double> num = s[0] + s[1] * z1 + s[2] * z2;
        const std::complex<double> den = s[3] + s[4] * z1 + s[5] * z2;
        h *= num / den;
    }
    return std::abs(h);
}

// Largest pole magnitude over all sections (stability oracle).
inline double max_pole_radius(std::span<const std::array<double, 6>> sections) {
    double worst = 0.0;
    for (const auto& s : sections) {
        // a0 z^2 + a1 z + a2 = 0
        const std::complex<double> a0(s[3]), a1(s[4]), a2(s[5]);
        const std::complex<double> disc = std::sqrt(a1 * a1 - 4.0 * a0 * a2);
        const std::complex<double> r1 = (-a1 + disc) / (2.0 * a0);
        const std::complex<double> r2 = (-a1 - disc) / (2.0 * a0);
        worst = std::max({worst, std::abs(r1), std::abs(r2)});
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Naive DFT: index of the dominant nonzero-frequency bin.
// ---------------------------------------------------------------------------

inline std::size_t dominant_bin(std::span<const double> x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    std::size_t best = 1;
    double best_mag = -1.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * 3.141592653589793238462643 * static_cast<double>(k) *
                               static_cast<double>(t) / static_cast<double>(n);
            acc += (x[t] - mean) * std::polar(1.0, ang);
        }
        const double mag = std::abs(acc);
        if (mag > best_mag) {
            best_mag = mag;
            best = k;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Brute-force NT-Xent: direct transliteration of the loss definition, with
// explicit per-anchor denominators. Inputs are raw (unnormalized) embeddings
// in (2k, 2k+1) pair order.
// ---------------------------------------------------------------------------

inline double brute_nt_xent(const std::vector<std::vector<double>>& z, double tau) {
    const std::size_t two_n = z.size();
    auto cosine = [](const std::vector<double>& u, const std::vector<double>& v) {
        double dot = 0, nu = 0, nv = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            dot += u[i] * v[i];
            nu += u[i] * u[i];
            nv += v[i] * v[i];
        }
        return dot / std::max(std::sqrt(nu) * std::sqrt(nv), 1e-24);
    };
    double total = 0.0;
    for (std::size_t i = 0; i < two_n; ++i) {
        const std::size_t j = (i % 2 == 0) ? i + 1 : i - 1;
        const double num = std::exp(cosine(z[i], z[j]) / tau);
        double den = 0.0;
        for (std::size_t k = 0; k < two_n; ++k) {
            if (k == i) continue;
            den += std::exp(cosine(z[i], z[k]) / tau);
        }
        total += -std::log(num / den);
    }
    return total / static_cast<double>(two_n);
}

// ---------------------------------------------------------------------------
// Pairwise-counting AUC (Mann-Whitney; ties count 1/2).
// ---------------------------------------------------------------------------

inline double pairwise_auc(std::span<const int> labels, std::span<const double> scores) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    return pairs ? wins / static_cast<double>(pairs) : std::nan("");
}

// ---------------------------------------------------------------------------
// Crude R-peak detector for the synthetic corpus: threshold at fraction of
// max, then local-maximum within a refractory window. Good enough to measure
// RR statistics on clean generated signals.
// ---------------------------------------------------------------------------

inline std::vector<double> detect_r_peaks_s(std::span<const double> x, double fs) {
    std::vector<double> peaks;
    double mx = 0.0;
    for (double v : x) mx = std::max(mx, v);
    const double thr = 0.5 * mx;
    const std::size_t refractory = static_cast<std::size_t>(0.3 * fs);
    std::size_t last = 0;
    bool has_last = false;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (x[i] < thr) continue;
        if (x[i] >= x[i - 1] && x[i] > x[i + 1]) {
            if (has_last && i - last < refractory) {
                if (x[i] > x[last]) {
                    peaks.back() = static_cast<double>(i) / fs;
                    last = i;
                }
                continue;
            }
            peaks.push_back(static_cast<double>(i) / fs);
            last = i;
            has_last = true;
        }
    }
    return peaks;
}

inline double rr_coefficient_of_variation(std::span<const double> peak_times_s) {
    if (peak_times_s.size() < 3) return 0.0;
    std::vector<double> rr;
    for (std::size_t i = 1; i < peak_times_s.size(); ++i)
        rr.push_back(peak_times_s[i] - peak_times_s[i - 1]);
    double mean = 0.0;
    for (double v : rr) mean += v;
    mean /= static_cast<double>(rr.size());
    double var = 0.0;
    for (double v : rr) var += (v - mean) * (v - mean);
    var /= static_cast<double>(rr.size());
    return mean > 0 ? std::sqrt(var) / mean : 0.0;
}

// ---------------------------------------------------------------------------
// Newton's method for L2-regularized logistic regression. Minimizes
//   J(w,b) = mean_i log(1 + exp(-y~_i (w.x_i + b))) + ||w||^2 / (2C)
// with y~ in {-1,+1}; an independent route to the same optimum the probe's
// gradient-descent fit targets.
// ---------------------------------------------------------------------------

inline std::pair<std::vector<double>, double> logistic_newton(
    const std::vector<std::vector<double>>& xs, const std::vector<int>& ys, double C,
    int iters = 100) {
    const std::size_t n = xs.size();
    const std::size_t d = xs.empty() ? 0 : xs[0].size();
    std::vector<double> w(d + 1, 0.0);  // last entry is bias
    auto sigma = [](double t) {
        return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
    };
    for (int it = 0; it < iters; ++it) {
        std::vector<double> grad(d + 1, 0.0);
        std::vector<double> hess((d + 1) * (d + 1), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double m = w[d];
            for (std::size_t j = 0; j < d; ++j) m += w[j] * xs[i][j];
            const double p = sigma(m);
            const double y01 = ys[i] > 0 ? 1.0 : 0.0;
            const double r = (p - y01) / static_cast<double>(n);
            const double s = p * (1.0 - p) / static_cast<double>(n);
            for (std::size_t j = 0; j <= d; ++j) {
                const double xj = j < d ? xs[i][j] : 1.0;
                grad[j] += r * xj;
                for (std::size_t k = 0; k <= d; ++k) {
                    const double xk = k < d ? xs[i][k] : 1.0;
                    hess[j * (d + 1) + k] += s * xj * xk;
                }
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            grad[j] += w[j] / C;
            hess[j * (d + 1) + j] += 1.0 / C;
        }
        hess[d * (d + 1) + d] += 1e-10;  // keep the bias row invertible
        // solve hess * step = grad (gaussian elimination, partial pivoting)
        const std::size_t m = d + 1;
        std::vector<double> a(hess);
        std::vector<double> rhs(grad);
        for (std::size_t col = 0; col < m; ++col) {
            std::size_t piv = col;
            for (std::size_t r2 = col + 1; r2 < m; ++r2)
                if (std::abs(a[r2 * m + col]) > std::abs(a[piv * m + col])) piv = r2;
            for (std::size_t c2 = 0; c2 < m; ++c2) std::swap(a[col * m + c2], a[piv * m + c2]);
            std::swap(rhs[col], rhs[piv]);
            const double pv = a[col * m + col];
            for (std::size_t r2 = col + 1; r2 < m; ++r2) {
                const double f = a[r2 * m + col] / pv;
                for (std::size_t c2 = col; c2 < m; ++c2) a[r2 * m + c2] -= f * a[col * m + c2];
                rhs[r2] -= f * rhs[col];
            }
        }
        std::vector<double> step(m, 0.0);
        for (std::size_t r2 = m; r2-- > 0;) {
            double s = rhs[r2];
            for (std::size_t c2 = r2 + 1; c2 < m; ++c2) s -= a[r2 * m + c2] * step[c2];
            step[r2] = s / a[r2 * m + r2];
        }
        double step_norm = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            w[j] -= step[j];
            step_norm += step[j] * step[j];
        }
        if (std::sqrt(step_norm) < 1e-12) break;
    }
    std::vector<double> weights(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d));
    return {weights, w[d]};
}

// Linear SVM objective: ||w||^2/(2C) + mean hinge.
inline double svm_objective(const std::vector<std::vector<double>>& xs, const std::vector<int>& ys,
                            std::span<const double> w, double b, double C) {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    reg /= 2.0 * C;
    double hinge = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double m = b;
        for (std::size_t j = 0; j < w.size(); ++j) m += w[j] * xs[i][j];
        const double y = ys[i] > 0 ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - y * m);
    }
    hinge /= static_cast<double>(xs.size());
    return reg + hinge;
}

}  // namespace oracles
