#include "ecgssl/tape.hpp"

#include <algorithm>
#include <cmath>

namespace ecgssl::numcore {

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

bool any_grad(std::initializer_list<const Tensor*> ts) {
    for (const Tensor* t : ts)
        if (t->requires_grad()) return true;
    return false;
}

}  // namespace

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    Tensor out = Tensor::zeros(a.shape(), any_grad({&a, &b}));
    auto ov = out.values();
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
    if (out.requires_grad())
        record([a = a, b = b, out]() mutable {
            auto go = out.grad();
            if (a.requires_grad()) {
                auto ga = a.grad();
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
            }
        });
    return out;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
    check_same_shape("sub", a, b);
    Tensor out = Tensor::zeros(a.shape(), any_grad({&a, &b}));
    auto ov = out.values();
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
    if (out.requires_grad())
        record([a = a, b = b, out]() mutable {
            auto go = out.grad();
            if (a.requires_grad()) {
                auto ga = a.grad();
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
            }
        });
    return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
    check_same_shape("mul", a, b);
    Tensor out = Tensor::zeros(a.shape(), any_grad({&a, &b}));
    auto ov = out.values();
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
    if (out.requires_grad())
        record([a = a, b = b, out]() mutable {
            auto go = out.grad();
            auto av2 = a.values();
            auto bv2 = b.values();
            if (a.requires_grad()) {
                auto ga = a.grad();
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * bv2[i];
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * av2[i];
            }
        });
    return out;
}

Tensor Tape::scale(const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * c;
    if (out.requires_grad())
        record([a = a, out, c]() mutable {
            auto go = out.grad();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * c;
        });
    return out;
}

Tensor Tape::add_const(const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + c;
    if (out.requires_grad())
        record([a = a, out]() mutable {
            auto go = out.grad();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
        });
    return out;
}

Tensor Tape::add_rowvec(const Tensor& a, const Tensor& v) {
    if (a.rank() != 2 || v.rank() != 1 || a.dim(1) != v.dim(0))
        throw ShapeError("add_rowvec: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(v.shape()));
    const int m = a.dim(0), n = a.dim(1);
    Tensor out = Tensor::zeros(a.shape(), any_grad({&a, &v}));
    auto ov = out.values();
    auto av = a.values();
    auto vv = v.values();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ov[i * n + j] = av[i * n + j] + vv[j];
    if (out.requires_grad())
        record([a = a, v = v, out, m, n]() mutable {
            auto go = out.grad();
            if (a.requires_grad()) {
                auto ga = a.grad();
                for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
            }
            if (v.requires_grad()) {
                auto gv = v.grad();
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j) gv[j] += go[i * n + j];
            }
        });
    return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out = Tensor::zeros({m, n}, any_grad({&a, &b}));
    auto ov = out.values();
    auto av = a.values();
    auto bv = b.values();
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            for (int j = 0; j < n; ++j) ov[i * n + j] += aip * bv[p * n + j];
        }
    }
    if (out.requires_grad())
        record([a = a, b = b, out, m, k, n]() mutable {
            auto go = out.grad();
            auto av2 = a.values();
            auto bv2 = b.values();
            if (a.requires_grad()) {
                auto ga = a.grad();
                // dA = dOut * B^T
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double g = go[i * n + j];
                        if (g == 0.0) continue;
                        for (int p = 0; p < k; ++p) ga[i * k + p] += g * bv2[p * n + j];
                    }
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                // dB = A^T * dOut
                for (int i = 0; i < m; ++i)
                    for (int p = 0; p < k; ++p) {
                        const double aip = av2[i * k + p];
                        if (aip == 0.0) continue;
                        for (int j = 0; j < n; ++j) gb[p * n + j] += aip * go[i * n + j];
                    }
            }
        });
    return out;
}

Tensor Tape::conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int padding) {
    if (x.rank() != 3 || w.rank() != 3)
        throw ShapeError("conv1d: need x rank 3 and w rank 3, got " + shape_str(x.shape()) +
                         " and " + shape_str(w.shape()));
    if (x.dim(1) != w.dim(1))
        throw ShapeError("conv1d: channel mismatch " + shape_str(x.shape()) + " vs " +
                         shape_str(w.shape()));
    if (bias.rank() != 1 || bias.dim(0) != w.dim(0))
        throw ShapeError("conv1d: bias shape " + shape_str(bias.shape()) + " vs weight " +
                         shape_str(w.shape()));
    if (stride < 1 || padding < 0) throw ConfigError("conv1d: stride must be >=1, padding >=0");
    const int batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
    const int cout = w.dim(0), ksz = w.dim(2);
    const int lout = (len + 2 * padding - ksz) / stride + 1;
    if (lout <= 0)
        throw ShapeError("conv1d: kernel " + shape_str(w.shape()) + " does not fit input " +
                         shape_str(x.shape()));
    Tensor out = Tensor::zeros({batch, cout, lout}, any_grad({&x, &w, &bias}));
    auto ov = out.values();
    auto xv = x.values();
    auto wv = w.values();
    auto bv = bias.values();
    for (int bidx = 0; bidx < batch; ++bidx) {
        for (int co = 0; co < cout; ++co) {
            double* orow = &ov[(bidx * cout + co) * lout];
            for (int t = 0; t < lout; ++t) orow[t] = bv[co];
            for (int ci = 0; ci < cin; ++ci) {
                const double* xrow = &xv[(bidx * cin + ci) * len];
                const double* wrow = &wv[(co * cin + ci) * ksz];
                for (int t = 0; t < lout; ++t) {
                    const int base = t * stride - padding;
                    double acc = 0.0;
                    const int k0 = std::max(0, -base);
                    const int k1 = std::min(ksz, len - base);
                    for (int k = k0; k < k1; ++k) acc += xrow[base + k] * wrow[k];
                    orow[t] += acc;
                }
            }
        }
    }
    if (out.requires_grad())
        record([x = x, w = w, bias = bias, out, stride, padding, batch, cin, len, cout, ksz, lout]() mutable {
            auto go = out.grad();
            auto xv2 = x.values();
            auto wv2 = w.values();
            for (int bidx = 0; bidx < batch; ++bidx) {
                for (int co = 0; co < cout; ++co) {
                    const double* grow = &go[(bidx * cout + co) * lout];
                    if (bias.requires_grad()) {
                        double acc = 0.0;
                        for (int t = 0; t < lout; ++t) acc += grow[t];
                        bias.grad()[co] += acc;
                    }
                    for (int ci = 0; ci < cin; ++ci) {
                        const double* xrow = &xv2[(bidx * cin + ci) * len];
                        const double* wrow = &wv2[(co * cin + ci) * ksz];
                        for (int t = 0; t < lout; ++t) {
                            const double g = grow[t];
                            if (g == 0.0) continue;
                            const int base = t * stride - padding;
                            const int k0 = std::max(0, -base);
                            const int k1 = std::min(ksz, len - base);
                            if (x.requires_grad()) {
                                auto gx = x.grad();
                                double* gxrow = &gx[(bidx * cin + ci) * len];
                                for (int k = k0; k < k1; ++k) gxrow[base + k] += g * wrow[k];
                            }
                            if (w.requires_grad()) {
                                auto gw = w.grad();
                                double* gwrow = &gw[(co * cin + ci) * ksz];
                                for (int k = k0; k < k1; ++k) gwrow[k] += g * xrow[base + k];
                            }
                        }
                    }
                }
            }
        });
    return out;
}

Tensor Tape::relu(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] > 0.0 ? av[i] : 0.0;
    if (out.requires_grad())
        record([a = a, out]() mutable {
            auto go = out.grad();
            auto av2 = a.values();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i)
                if (av2[i] > 0.0) ga[i] += go[i];
        });
    return out;
}

Tensor Tape::sigmoid(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        const double v = av[i];
        ov[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    if (out.requires_grad())
        record([a = a, out]() mutable {
            auto go = out.grad();
            auto ov2 = out.values();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * ov2[i] * (1.0 - ov2[i]);
        });
    return out;
}

Tensor Tape::exp(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::exp(av[i]);
    if (out.requires_grad())
        record([a = a, out]() mutable {
            auto go = out.grad();
            auto ov2 = out.values();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * ov2[i];
        });
    return out;
}

Tensor Tape::log(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::log(av[i]);
    if (out.requires_grad())
        record([a = a, out]() mutable {
            auto go = out.grad();
            auto av2 = a.values();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] / av2[i];
        });
    return out;
}

Tensor Tape::sqrt(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::sqrt(av[i]);
    if (out.requires_grad())
        record([a = a, out]() mutable {
            auto go = out.grad();
            auto ov2 = out.values();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i)
                ga[i] += go[i] * 0.5 / (ov2[i] > 0.0 ? ov2[i] : 1e-300);
        });
    return out;
}

Tensor Tape::clamp(const Tensor& a, double lo, double hi) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::min(hi, std::max(lo, av[i]));
    if (out.requires_grad())
        record([a = a, out, lo, hi]() mutable {
            auto go = out.grad();
            auto av2 = a.values();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i)
                if (av2[i] > lo && av2[i] < hi) ga[i] += go[i];
        });
    return out;
}

Tensor Tape::softmax_rows(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("softmax_rows: need rank 2, got " + shape_str(a.shape()));
    const int m = a.dim(0), n = a.dim(1);
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (int i = 0; i < m; ++i) {
        double mx = av[i * n];
        for (int j = 1; j < n; ++j) mx = std::max(mx, av[i * n + j]);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double e = std::exp(av[i * n + j] - mx);
            ov[i * n + j] = e;
            sum += e;
        }
        for (int j = 0; j < n; ++j) ov[i * n + j] /= sum;
    }
    if (out.requires_grad())
        record([a = a, out, m, n]() mutable {
            auto go = out.grad();
            auto ov2 = out.values();
            auto ga = a.grad();
            for (int i = 0; i < m; ++i) {
                double dot = 0.0;
                for (int j = 0; j < n; ++j) dot += go[i * n + j] * ov2[i * n + j];
                for (int j = 0; j < n; ++j)
                    ga[i * n + j] += ov2[i * n + j] * (go[i * n + j] - dot);
            }
        });
    return out;
}

Tensor Tape::l2_normalize_rows(const Tensor& a) {
    if (a.rank() != 1 && a.rank() != 2)
        throw ShapeError("l2_normalize_rows: need rank 1 or 2, got " + shape_str(a.shape()));
    const int m = a.rank() == 2 ? a.dim(0) : 1;
    const int n = a.rank() == 2 ? a.dim(1) : a.dim(0);
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    std::vector<double> norms(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += av[i * n + j] * av[i * n + j];
        const double r = std::max(std::sqrt(s), 1e-12);
        norms[static_cast<std::size_t>(i)] = r;
        for (int j = 0; j < n; ++j) ov[i * n + j] = av[i * n + j] / r;
    }
    if (out.requires_grad())
        record([a = a, out, norms, m, n]() mutable {
            auto go = out.grad();
            auto ov2 = out.values();
            auto ga = a.grad();
            for (int i = 0; i < m; ++i) {
                const double r = norms[static_cast<std::size_t>(i)];
                double dot = 0.0;
                for (int j = 0; j < n; ++j) dot += go[i * n + j] * ov2[i * n + j];
                for (int j = 0; j < n; ++j)
                    ga[i * n + j] += (go[i * n + j] - ov2[i * n + j] * dot) / r;
            }
        });
    return out;
}

Tensor Tape::sum_all(const Tensor& a) {
    Tensor out = Tensor::zeros({1}, a.requires_grad());
    double s = 0.0;
    for (double v : a.values()) s += v;
    out.values()[0] = s;
    if (out.requires_grad())
        record([a = a, out]() mutable {
            const double g = out.grad()[0];
            auto ga = a.grad();
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
        });
    return out;
}

Tensor Tape::mean_all(const Tensor& a) {
    if (a.size() == 0) throw ShapeError("mean_all: empty tensor");
    const double inv = 1.0 / static_cast<double>(a.size());
    Tensor out = Tensor::zeros({1}, a.requires_grad());
    double s = 0.0;
    for (double v : a.values()) s += v;
    out.values()[0] = s * inv;
    if (out.requires_grad())
        record([a = a, out, inv]() mutable {
            const double g = out.grad()[0] * inv;
            auto ga = a.grad();
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
        });
    return out;
}

Tensor Tape::sum_last_axis(const Tensor& a) {
    if (a.rank() != 2 && a.rank() != 3)
        throw ShapeError("sum_last_axis: need rank 2 or 3, got " + shape_str(a.shape()));
    const int last = a.dim(a.rank() - 1);
    Shape out_shape(a.shape().begin(), a.shape().end() - 1);
    const std::size_t groups = shape_numel(out_shape);
    Tensor out = Tensor::zeros(out_shape, a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (std::size_t g = 0; g < groups; ++g) {
        double s = 0.0;
        for (int j = 0; j < last; ++j) s += av[g * last + j];
        ov[g] = s;
    }
    if (out.requires_grad())
        record([a = a, out, groups, last]() mutable {
            auto go = out.grad();
            auto ga = a.grad();
            for (std::size_t g = 0; g < groups; ++g)
                for (int j = 0; j < last; ++j) ga[g * last + j] += go[g];
        });
    return out;
}

Tensor Tape::mean_last_axis(const Tensor& a) {
    const int last = a.dim(a.rank() - 1);
    if (last == 0) throw ShapeError("mean_last_axis: empty last axis");
    return scale(sum_last_axis(a), 1.0 / last);
}

Tensor Tape::concat_rows(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1))
        throw ShapeError("concat_rows: shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    const int ma = a.dim(0), mb = b.dim(0), n = a.dim(1);
    Tensor out = Tensor::zeros({ma + mb, n}, any_grad({&a, &b}));
    auto ov = out.values();
    std::copy(a.values().begin(), a.values().end(), ov.begin());
    std::copy(b.values().begin(), b.values().end(), ov.begin() + static_cast<std::ptrdiff_t>(ma) * n);
    if (out.requires_grad())
        record([a = a, b = b, out, ma, mb, n]() mutable {
            auto go = out.grad();
            if (a.requires_grad()) {
                auto ga = a.grad();
                for (int i = 0; i < ma * n; ++i) ga[i] += go[i];
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                for (int i = 0; i < mb * n; ++i) gb[i] += go[ma * n + i];
            }
        });
    return out;
}

Tensor Tape::slice_rows(const Tensor& a, int row_begin, int row_end) {
    if (a.rank() != 2) throw ShapeError("slice_rows: need rank 2, got " + shape_str(a.shape()));
    if (row_begin < 0 || row_end > a.dim(0) || row_begin >= row_end)
        throw ShapeError("slice_rows: invalid range [" + std::to_string(row_begin) + "," +
                         std::to_string(row_end) + ") for " + shape_str(a.shape()));
    const int n = a.dim(1), m = row_end - row_begin;
    Tensor out = Tensor::zeros({m, n}, a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    std::copy(av.begin() + static_cast<std::ptrdiff_t>(row_begin) * n,
              av.begin() + static_cast<std::ptrdiff_t>(row_end) * n, ov.begin());
    if (out.requires_grad())
        record([a = a, out, row_begin, m, n]() mutable {
            auto go = out.grad();
            auto ga = a.grad();
            for (int i = 0; i < m * n; ++i) ga[row_begin * n + i] += go[i];
        });
    return out;
}

Tensor Tape::gather_rows(const Tensor& a, std::vector<int> rows) {
    if (a.rank() != 2) throw ShapeError("gather_rows: need rank 2, got " + shape_str(a.shape()));
    const int n = a.dim(1);
    for (int r : rows)
        if (r < 0 || r >= a.dim(0))
            throw ShapeError("gather_rows: row " + std::to_string(r) + " out of range for " +
                             shape_str(a.shape()));
    const int m = static_cast<int>(rows.size());
    Tensor out = Tensor::zeros({m, n}, a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (int i = 0; i < m; ++i)
        std::copy(av.begin() + static_cast<std::ptrdiff_t>(rows[static_cast<std::size_t>(i)]) * n,
                  av.begin() + static_cast<std::ptrdiff_t>(rows[static_cast<std::size_t>(i)] + 1) * n,
                  ov.begin() + static_cast<std::ptrdiff_t>(i) * n);
    if (out.requires_grad())
        record([a = a, out, rows = std::move(rows), m, n]() mutable {
            auto go = out.grad();
            auto ga = a.grad();
            for (int i = 0; i < m; ++i) {
                const int r = rows[static_cast<std::size_t>(i)];
                for (int j = 0; j < n; ++j) ga[r * n + j] += go[i * n + j];
            }
        });
    return out;
}

Tensor Tape::transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose: need rank 2, got " + shape_str(a.shape()));
    const int m = a.dim(0), n = a.dim(1);
    Tensor out = Tensor::zeros({n, m}, a.requires_grad());
    auto ov = out.values();
    auto av = a.values();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ov[j * m + i] = av[i * n + j];
    if (out.requires_grad())
        record([a = a, out, m, n]() mutable {
            auto go = out.grad();
            auto ga = a.grad();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) ga[i * n + j] += go[j * m + i];
        });
    return out;
}

Tensor Tape::reshape(const Tensor& a, Shape new_shape) {
    if (shape_numel(new_shape) != a.size())
        throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                         shape_str(new_shape));
    Tensor out = Tensor::from_vector(std::move(new_shape),
                                     std::vector<double>(a.values().begin(), a.values().end()),
                                     a.requires_grad());
    if (out.requires_grad())
        record([a = a, out]() mutable {
            auto go = out.grad();
            auto ga = a.grad();
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
        });
    return out;
}

Tensor Tape::detach(const Tensor& a) {
    return Tensor::from_vector(a.shape(),
                               std::vector<double>(a.values().begin(), a.values().end()), false);
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1)
        throw ShapeError("backward: loss must be a defined scalar");
    if (!loss.requires_grad())
        throw TrainError("backward: loss does not require grad (no recorded ops?)");
    Tensor seed = loss;
    seed.grad()[0] += 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->backward_fn();
}

}  // namespace ecgssl::numcore
