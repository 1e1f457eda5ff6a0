#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ecgssl/common.hpp"

namespace ecgssl::numcore {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

// Dense 64-bit tensor. Value-semantic handle over shared storage so the same
// buffer can appear both in the autodiff graph and in optimizer state.
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_vector(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    int rank() const { return static_cast<int>(impl_->shape.size()); }
    int dim(int axis) const { return impl_->shape[static_cast<std::size_t>(axis)]; }
    std::size_t size() const { return impl_->values.size(); }

    std::span<double> values() { return impl_->values; }
    std::span<const double> values() const { return impl_->values; }

    bool requires_grad() const { return impl_->requires_grad; }

    // Gradient buffer, lazily allocated to zeros. Only meaningful on tensors
    // that require grad.
    std::span<double> grad();
    std::span<const double> grad() const;
    bool has_grad() const { return !impl_->grad.empty(); }
    void zero_grad();

    double item() const;

    // Deep copy of values (fresh storage, no grad state).
    Tensor clone(bool requires_grad = false) const;

    // Identity of the underlying buffer, for graph bookkeeping.
    const void* id() const { return impl_.get(); }

  private:
    struct Impl {
        Shape shape;
        std::vector<double> values;
        std::vector<double> grad;
        bool requires_grad = false;
    };
    std::shared_ptr<Impl> impl_;
    explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
};

}  // namespace ecgssl::numcore
