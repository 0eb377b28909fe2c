#ifndef FREQCAST_TENSOR_HPP
#define FREQCAST_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace freqcast {

class Tensor;

/// Node in the reverse-mode graph. `backward` reads the output's grad buffer
/// and accumulates into the parents' grad buffers.
struct GraphNode {
    std::vector<Tensor> parents;
    std::function<void(const Tensor& out)> backward;
};

/// Dense 64-bit tensor with optional gradient tracking.
///
/// A Tensor is a cheaply copyable handle onto shared storage; values are
/// written once at construction and treated as immutable afterwards, except
/// for gradient accumulation during backward(). Supports 1-D vectors and
/// 2-D row-major matrices, which is all the model needs.
class Tensor {
public:
    Tensor() = default;

    Tensor(std::vector<std::size_t> shape, double fill, bool requires_grad = false);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values,
           bool requires_grad = false);

    static Tensor vector(std::vector<double> values, bool requires_grad = false);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                         bool requires_grad = false);
    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<std::size_t>& shape() const;
    std::size_t size() const;
    std::size_t ndim() const;
    /// Row/column view: a 1-D tensor of length n counts as n x 1.
    std::size_t rows() const;
    std::size_t cols() const;
    bool is_scalar() const;

    std::vector<double>& data();
    const std::vector<double>& data() const;
    double value() const; // scalar only

    double at(std::size_t i) const;
    double at(std::size_t r, std::size_t c) const;

    bool requires_grad() const;
    /// Grad buffer, allocated zero-filled on first access.
    std::vector<double>& grad();
    const std::vector<double>* grad_if_any() const;
    void zero_grad();

    /// Attach a graph node (op construction only).
    void set_node(std::shared_ptr<GraphNode> node);
    const std::shared_ptr<GraphNode>& node() const;

    /// Identity of the underlying storage, for graph traversal.
    const void* id() const { return impl_.get(); }

private:
    struct Impl {
        std::vector<std::size_t> shape;
        std::vector<double> data;
        std::vector<double> grad;
        bool requires_grad = false;
        std::shared_ptr<GraphNode> node;
    };
    std::shared_ptr<Impl> impl_;
};

/// Reverse-mode sweep from a scalar loss. Populates grad on every tensor
/// reachable through the recorded graph that has requires_grad set.
/// Throws std::invalid_argument if `loss` is not a scalar.
void backward(const Tensor& loss);

/// Thread-local switch for graph recording; inference and benchmarks run with
/// recording off so no nodes are allocated.
bool grad_enabled();

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

} // namespace freqcast

#endif
