#pragma once

#include <functional>
#include <vector>

#include "ecgssl/tensor.hpp"

namespace ecgssl::numcore {

// Reverse-mode autodiff tape. Ops compute forward values immediately and,
// when any input requires grad, append a backward closure. backward() replays
// the records in reverse insertion order, which is a reverse topological
// order because every op is recorded after its inputs exist.
//
// A tape and the tensors it records are confined to one thread.
class Tape {
  public:
    // elementwise, same shape
    Tensor add(const Tensor& a, const Tensor& b);
    Tensor sub(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);

    Tensor scale(const Tensor& a, double c);
    Tensor add_const(const Tensor& a, double c);

    // [m,n] + [n], broadcast over rows
    Tensor add_rowvec(const Tensor& a, const Tensor& v);

    // [m,k] x [k,n] -> [m,n]
    Tensor matmul(const Tensor& a, const Tensor& b);

    // x [B,Cin,L], w [Cout,Cin,K], bias [Cout] -> [B,Cout,Lout]
    // Lout = (L + 2*padding - K) / stride + 1
    Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int padding);

    Tensor relu(const Tensor& a);
    Tensor sigmoid(const Tensor& a);
    Tensor exp(const Tensor& a);
    Tensor log(const Tensor& a);
    Tensor sqrt(const Tensor& a);
    // gradient passes through strictly inside (lo, hi), zero where clipped
    Tensor clamp(const Tensor& a, double lo, double hi);

    // row-wise over the last axis of a 2-D tensor
    Tensor softmax_rows(const Tensor& a);
    Tensor l2_normalize_rows(const Tensor& a);

    Tensor sum_all(const Tensor& a);
    Tensor mean_all(const Tensor& a);
    // [m,n] -> [m] or [b,c,l] -> [b,c]
    Tensor sum_last_axis(const Tensor& a);
    Tensor mean_last_axis(const Tensor& a);

    Tensor concat_rows(const Tensor& a, const Tensor& b);
    Tensor slice_rows(const Tensor& a, int row_begin, int row_end);
    Tensor gather_rows(const Tensor& a, std::vector<int> rows);
    Tensor transpose(const Tensor& a);
    Tensor reshape(const Tensor& a, Shape new_shape);

    // stop-gradient copy
    Tensor detach(const Tensor& a);

    void backward(const Tensor& loss);

    std::size_t num_records() const { return records_.size(); }
    void clear() { records_.clear(); }

  private:
    struct Record {
        std::function<void()> backward_fn;
    };
    std::vector<Record> records_;

    void record(std::function<void()> fn) { records_.push_back({std::move(fn)}); }
};

}  // namespace ecgssl::numcore
