#include "freqcast/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace freqcast {

namespace {

thread_local bool g_grad_enabled = true;

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

} // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill, bool requires_grad) {
    impl_ = std::make_shared<Impl>();
    impl_->shape = std::move(shape);
    impl_->data.assign(shape_product(impl_->shape), fill);
    impl_->requires_grad = requires_grad;
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values,
               bool requires_grad) {
    impl_ = std::make_shared<Impl>();
    impl_->shape = std::move(shape);
    if (values.size() != shape_product(impl_->shape))
        throw std::invalid_argument("tensor: value count does not match shape");
    impl_->data = std::move(values);
    impl_->requires_grad = requires_grad;
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
    Tensor t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = {values.size()};
    t.impl_->data = std::move(values);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                      bool requires_grad) {
    if (values.size() != rows * cols)
        throw std::invalid_argument("matrix: value count does not match rows*cols");
    Tensor t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = {rows, cols};
    t.impl_->data = std::move(values);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    return Tensor(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    Tensor t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = {1};
    t.impl_->data = {value};
    t.impl_->requires_grad = requires_grad;
    return t;
}

const std::vector<std::size_t>& Tensor::shape() const { return impl_->shape; }

std::size_t Tensor::size() const { return impl_->data.size(); }

std::size_t Tensor::ndim() const { return impl_->shape.size(); }

std::size_t Tensor::rows() const { return impl_->shape.empty() ? 0 : impl_->shape[0]; }

std::size_t Tensor::cols() const { return impl_->shape.size() >= 2 ? impl_->shape[1] : 1; }

bool Tensor::is_scalar() const { return size() == 1; }

std::vector<double>& Tensor::data() { return impl_->data; }

const std::vector<double>& Tensor::data() const { return impl_->data; }

double Tensor::value() const {
    if (!is_scalar()) throw std::invalid_argument("value: tensor is not a scalar");
    return impl_->data[0];
}

double Tensor::at(std::size_t i) const { return impl_->data.at(i); }

double Tensor::at(std::size_t r, std::size_t c) const {
    return impl_->data.at(r * cols() + c);
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }

std::vector<double>& Tensor::grad() {
    if (impl_->grad.size() != impl_->data.size()) impl_->grad.assign(impl_->data.size(), 0.0);
    return impl_->grad;
}

const std::vector<double>* Tensor::grad_if_any() const {
    if (!impl_ || impl_->grad.size() != impl_->data.size()) return nullptr;
    return &impl_->grad;
}

void Tensor::zero_grad() {
    if (impl_) impl_->grad.assign(impl_->data.size(), 0.0);
}

void Tensor::set_node(std::shared_ptr<GraphNode> node) { impl_->node = std::move(node); }

const std::shared_ptr<GraphNode>& Tensor::node() const { return impl_->node; }

void backward(const Tensor& loss) {
    if (!loss.defined() || !loss.is_scalar())
        throw std::invalid_argument("backward: loss must be a scalar tensor");

    // Depth-first topological order over the recorded graph.
    std::vector<Tensor> order;
    std::unordered_set<const void*> visited;
    std::vector<std::pair<Tensor, std::size_t>> stack;
    stack.emplace_back(loss, 0);
    visited.insert(loss.id());
    while (!stack.empty()) {
        auto& [t, next_child] = stack.back();
        const auto& node = t.node();
        if (node && next_child < node->parents.size()) {
            Tensor child = node->parents[next_child];
            ++next_child;
            if (!visited.count(child.id())) {
                visited.insert(child.id());
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(t);
            stack.pop_back();
        }
    }

    Tensor seed = loss;
    seed.grad()[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto& node = it->node();
        if (node && node->backward) node->backward(*it);
    }
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }

NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

} // namespace freqcast
