#include "ecgssl/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace ecgssl::sigproc {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

using cd = std::complex<double>;

struct Zpk {
    std::vector<cd> zeros;
    std::vector<cd> poles;
    double gain = 1.0;
};

// Butterworth analog prototype: unit cutoff, poles on the left half circle.
Zpk butter_prototype(int order) {
    Zpk zpk;
    for (int k = 0; k < order; ++k) {
        const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order) + kPi / 2.0;
        zpk.poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return zpk;
}

// analog frequency after bilinear prewarping
double prewarp(double f_hz, double fs) { return 2.0 * fs * std::tan(kPi * f_hz / fs); }

Zpk lp2bp(const Zpk& proto, double w_low, double w_high) {
    const double bw = w_high - w_low;
    const double w0 = std::sqrt(w_low * w_high);
    Zpk out;
    out.gain = proto.gain * std::pow(bw, static_cast<double>(proto.poles.size()) -
                                             static_cast<double>(proto.zeros.size()));
    for (const cd& p : proto.poles) {
        const cd ps = p * (bw / 2.0);
        const cd disc = std::sqrt(ps * ps - w0 * w0);
        out.poles.push_back(ps + disc);
        out.poles.push_back(ps - disc);
    }
    // one zero at s = 0 per prototype pole
    out.zeros.assign(proto.poles.size(), cd(0.0, 0.0));
    return out;
}

Zpk lp2lp(const Zpk& proto, double w_cut) {
    Zpk out;
    out.gain = proto.gain * std::pow(w_cut, static_cast<double>(proto.poles.size()) -
                                                static_cast<double>(proto.zeros.size()));
    for (const cd& p : proto.poles) out.poles.push_back(p * w_cut);
    for (const cd& z : proto.zeros) out.zeros.push_back(z * w_cut);
    return out;
}

Zpk bilinear(const Zpk& analog, double fs) {
    const double fs2 = 2.0 * fs;
    Zpk out;
    cd num(1.0, 0.0), den(1.0, 0.0);
    for (const cd& z : analog.zeros) {
        out.zeros.push_back((fs2 + z) / (fs2 - z));
        num *= fs2 - z;
    }
    for (const cd& p : analog.poles) {
        out.poles.push_back((fs2 + p) / (fs2 - p));
        den *= fs2 - p;
    }
    // the analog pole excess becomes zeros at z = -1
    const std::size_t excess = analog.poles.size() - analog.zeros.size();
    for (std::size_t i = 0; i < excess; ++i) out.zeros.emplace_back(-1.0, 0.0);
    out.gain = analog.gain * (num / den).real();
    return out;
}

// Pair conjugate (or two real) roots into quadratic factors [1, c1, c0].
std::vector<std::array<double, 2>> pair_roots(std::vector<cd> roots) {
    std::vector<std::array<double, 2>> quads;
    const double tol = 1e-9;
    while (!roots.empty()) {
        // take the root with the largest |imag| first
        std::size_t pick = 0;
        for (std::size_t i = 1; i < roots.size(); ++i)
            if (std::abs(roots[i].imag()) > std::abs(roots[pick].imag())) pick = i;
        const cd r = roots[pick];
        roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(pick));
        if (std::abs(r.imag()) > tol) {
            // find its conjugate partner
            std::size_t best = 0;
            double bestd = 1e300;
            for (std::size_t i = 0; i < roots.size(); ++i) {
                const double d = std::abs(roots[i] - std::conj(r));
                if (d < bestd) {
                    bestd = d;
                    best = i;
                }
            }
            roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(best));
            quads.push_back({-2.0 * r.real(), std::norm(r)});
        } else {
            // pair with the nearest remaining real root
            if (roots.empty()) {
                quads.push_back({-r.real(), 0.0});  // degenerate first-order factor
                continue;
            }
            std::size_t best = 0;
            double bestd = 1e300;
            for (std::size_t i = 0; i < roots.size(); ++i) {
                if (std::abs(roots[i].imag()) > tol) continue;
                const double d = std::abs(roots[i].real() - r.real());
                if (d < bestd) {
                    bestd = d;
                    best = i;
                }
            }
            const double r2 = roots[best].real();
            roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(best));
            quads.push_back({-(r.real() + r2), r.real() * r2});
        }
    }
    return quads;
}

std::vector<Biquad> zpk_to_sos(const Zpk& zpk) {
    if (zpk.zeros.size() != zpk.poles.size() || zpk.poles.size() % 2 != 0)
        throw NumericError("zpk_to_sos: expected an even, matched pole/zero count");
    auto num_quads = pair_roots(zpk.zeros);
    auto den_quads = pair_roots(zpk.poles);
    // order sections by pole radius, sharpest last, to tame intermediate growth
    std::sort(den_quads.begin(), den_quads.end(),
              [](const auto& a, const auto& b) { return a[1] < b[1]; });
    const std::size_t nsec = den_quads.size();
    const double g = std::pow(std::abs(zpk.gain), 1.0 / static_cast<double>(nsec));
    const double sign = zpk.gain < 0 ? -1.0 : 1.0;
    std::vector<Biquad> sos(nsec);
    for (std::size_t i = 0; i < nsec; ++i) {
        const double gi = (i == 0 ? sign : 1.0) * g;
        sos[i].b0 = gi;
        sos[i].b1 = gi * num_quads[i][0];
        sos[i].b2 = gi * num_quads[i][1];
        sos[i].a0 = 1.0;
        sos[i].a1 = den_quads[i][0];
        sos[i].a2 = den_quads[i][1];
    }
    return sos;
}

}  // namespace

std::vector<std::array<double, 6>> BandpassFilter::coefficient_rows() const {
    std::vector<std::array<double, 6>> rows;
    rows.reserve(sections.size());
    for (const auto& s : sections) rows.push_back(s.coeffs());
    return rows;
}

double max_pole_magnitude(const std::vector<Biquad>& sections) {
    double worst = 0.0;
    for (const auto& s : sections) {
        const cd a1(s.a1 / s.a0), a2(s.a2 / s.a0);
        const cd disc = std::sqrt(a1 * a1 - 4.0 * a2);
        worst = std::max({worst, std::abs((-a1 + disc) / 2.0), std::abs((-a1 - disc) / 2.0)});
    }
    return worst;
}

BandpassFilter design_bandpass(double low_hz, double high_hz, double sample_rate_hz, int order) {
    if (!(sample_rate_hz > 0.0))
        throw ConfigError("design_bandpass: sample rate must be positive");
    if (!(low_hz > 0.0) || !(low_hz < high_hz) || !(high_hz < sample_rate_hz / 2.0))
        throw ConfigError("design_bandpass: need 0 < low < high < fs/2, got low=" +
                          std::to_string(low_hz) + " high=" + std::to_string(high_hz) +
                          " fs=" + std::to_string(sample_rate_hz));
    if (order < 1 || order > 8) throw ConfigError("design_bandpass: order must be in [1, 8]");

    const Zpk proto = butter_prototype(order);
    const Zpk analog = lp2bp(proto, prewarp(low_hz, sample_rate_hz),
                             prewarp(high_hz, sample_rate_hz));
    const Zpk digital = bilinear(analog, sample_rate_hz);

    BandpassFilter filt;
    filt.low_hz = low_hz;
    filt.high_hz = high_hz;
    filt.sample_rate_hz = sample_rate_hz;
    filt.order = order;
    filt.sections = zpk_to_sos(digital);
    const double radius = max_pole_magnitude(filt.sections);
    if (!(radius < 1.0))
        throw NumericError("design_bandpass: unstable design, pole radius " +
                           std::to_string(radius));
    return filt;
}

std::vector<Biquad> design_lowpass(double cutoff_hz, double sample_rate_hz, int order) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0))
        throw ConfigError("design_lowpass: need 0 < cutoff < fs/2");
    if (order < 2 || order % 2 != 0)
        throw ConfigError("design_lowpass: order must be even and >= 2");
    const Zpk proto = butter_prototype(order);
    const Zpk analog = lp2lp(proto, prewarp(cutoff_hz, sample_rate_hz));
    Zpk digital = bilinear(analog, sample_rate_hz);
    auto sos = zpk_to_sos(digital);
    if (!(max_pole_magnitude(sos) < 1.0)) throw NumericError("design_lowpass: unstable design");
    return sos;
}

std::vector<double> sosfilt(const std::vector<Biquad>& sections, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    for (const auto& s : sections) {
        double w1 = 0.0, w2 = 0.0;  // direct form II transposed state
        const double b0 = s.b0 / s.a0, b1 = s.b1 / s.a0, b2 = s.b2 / s.a0;
        const double a1 = s.a1 / s.a0, a2 = s.a2 / s.a0;
        for (double& v : y) {
            const double in = v;
            const double out = b0 * in + w1;
            w1 = b1 * in - a1 * out + w2;
            w2 = b2 * in - a2 * out;
            v = out;
        }
    }
    return y;
}

std::vector<double> filtfilt(const std::vector<Biquad>& sections, std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t padlen = std::min(n - 1, 3 * (2 * sections.size() + 1));

    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    std::vector<double> y = sosfilt(sections, ext);
    std::reverse(y.begin(), y.end());
    y = sosfilt(sections, y);
    std::reverse(y.begin(), y.end());

    return std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(padlen),
                               y.begin() + static_cast<std::ptrdiff_t>(padlen + n));
}

RawRecording apply_filter(const RawRecording& rec, const BandpassFilter& filt) {
    validate_recording(rec);
    RawRecording out = rec;
    out.samples = filtfilt(filt.sections, rec.samples);
    return out;
}

CleanRecording resample(const RawRecording& rec, double target_hz) {
    validate_recording(rec);
    if (!(target_hz > 0.0)) throw ConfigError("resample: target rate must be positive");

    CleanRecording out;
    out.patient_id = rec.patient_id;
    out.recording_id = rec.recording_id;
    out.visit_index = rec.visit_index;
    out.label = rec.label;
    out.sample_rate_hz = target_hz;

    const double fs = rec.sample_rate_hz;
    if (fs == target_hz) {
        out.samples = rec.samples;
        return out;
    }
    if (fs < target_hz)
        throw ConfigError("resample: upsampling " + std::to_string(fs) + " Hz -> " +
                          std::to_string(target_hz) + " Hz is not supported");

    // anti-alias before decimating; zero-phase so beat timing is preserved
    const auto aa = design_lowpass(0.45 * target_hz, fs, 8);
    const std::vector<double> smoothed = filtfilt(aa, rec.samples);

    const std::size_t n = rec.samples.size();
    const std::size_t m = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * target_hz / fs));
    out.samples.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double u = static_cast<double>(k) * fs / target_hz;
        const std::size_t i0 = std::min(static_cast<std::size_t>(u), n - 1);
        const std::size_t i1 = std::min(i0 + 1, n - 1);
        const double frac = u - static_cast<double>(i0);
        out.samples[k] = smoothed[i0] + frac * (smoothed[i1] - smoothed[i0]);
    }
    return out;
}

}  // namespace ecgssl::sigproc
