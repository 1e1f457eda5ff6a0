#include "ecgssl/tensor.hpp"

#include <sstream>

namespace ecgssl::numcore {

std::string shape_str(const Shape& s) {
    std::ostringstream ss;
    ss << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) ss << ',';
        ss << s[i];
    }
    ss << ']';
    return ss.str();
}

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) {
        if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(s));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto impl = std::make_shared<Impl>();
    impl->values.assign(shape_numel(shape), 0.0);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& v : t.values()) v = value;
    return t;
}

Tensor Tensor::from_vector(Shape shape, std::vector<double> values, bool requires_grad) {
    if (shape_numel(shape) != values.size())
        throw ShapeError("from_vector: shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
    auto impl = std::make_shared<Impl>();
    impl->shape = std::move(shape);
    impl->values = std::move(values);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_vector({1}, {value}, requires_grad);
}

std::span<double> Tensor::grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
    return impl_->grad;
}

std::span<const double> Tensor::grad() const {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

double Tensor::item() const {
    if (size() != 1)
        throw ShapeError("item() on tensor of shape " + shape_str(shape()));
    return impl_->values[0];
}

Tensor Tensor::clone(bool requires_grad) const {
    return from_vector(impl_->shape, impl_->values, requires_grad);
}

}  // namespace ecgssl::numcore
