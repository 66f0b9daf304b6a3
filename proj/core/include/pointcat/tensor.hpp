#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pointcat/errors.hpp"

namespace pointcat {

using shape_t = std::vector<std::int64_t>;

std::int64_t shape_numel(const shape_t& s);
std::string shape_str(const shape_t& s);

class tensor;

// One recorded operation on the tape. `backward` reads the output's gradient
// and scatters contributions into the parents' gradient buffers. Closures must
// capture parent tensors (and any saved values) but never the output tensor
// itself -- the output is passed in at invocation time to avoid ownership
// cycles through the node.
struct tape_node {
    std::string op;
    std::vector<tensor> parents;
    std::function<void(const tensor& out)> backward;
};

// Dense row-major tensor of doubles with value semantics over shared storage:
// copies alias the same data and gradient buffers. Values are treated as
// immutable once an op has produced them; only optimizers, initializers and
// finite-difference probes write through raw_values().
class tensor {
  public:
    tensor() = default;

    static tensor zeros(shape_t shape, bool requires_grad = false);
    static tensor full(shape_t shape, double value, bool requires_grad = false);
    static tensor from_values(shape_t shape, std::vector<double> values, bool requires_grad = false);
    static tensor scalar_value(double v);  // shape {1}

    bool defined() const { return static_cast<bool>(data_); }
    const shape_t& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::int64_t dim(std::size_t i) const;
    std::int64_t numel() const { return data_ ? static_cast<std::int64_t>(data_->size()) : 0; }

    // 2-D helpers (most ops in this library work on matrices).
    std::int64_t rows() const { return dim(0); }
    std::int64_t cols() const { return dim(1); }
    double at(std::int64_t r, std::int64_t c) const;

    const std::vector<double>& values() const;
    std::vector<double>& raw_values();  // in-place mutation; see class comment

    double scalar() const;  // requires numel() == 1

    bool requires_grad() const { return requires_grad_; }

    // Enabling gradients allocates the gradient buffer immediately so that
    // every copy of this handle -- including copies captured inside backward
    // closures -- aliases the same buffer.
    void set_requires_grad(bool rg);

    bool has_grad() const { return static_cast<bool>(grad_); }
    const std::vector<double>& grad() const;  // throws if no gradient buffer yet

    // Mutable access to the shared gradient buffer (lazily allocated). Const
    // like shared_ptr::operator*: the handle is const, the buffer is shared --
    // backward closures hold const copies of their parent handles.
    std::vector<double>& grad_buffer() const;
    void zero_grad();

    // Set by ops; null for leaves (inputs and parameters).
    std::shared_ptr<tape_node> node;

  private:
    shape_t shape_;
    std::shared_ptr<std::vector<double>> data_;
    mutable std::shared_ptr<std::vector<double>> grad_;  // see grad_buffer()
    bool requires_grad_ = false;
};

// A named trainable tensor. Names are unique within a model and double as
// checkpoint keys and RNG-stream identifiers for initialization.
struct parameter {
    std::string name;
    tensor value;
};

// Thread-local switch for taping. Ops record nodes only while enabled.
bool grad_enabled();
void set_grad_enabled(bool on);

// RAII "no gradient" scope for evaluation and finite-difference probes.
class no_grad_guard {
  public:
    no_grad_guard();
    ~no_grad_guard();
    no_grad_guard(const no_grad_guard&) = delete;
    no_grad_guard& operator=(const no_grad_guard&) = delete;

  private:
    bool previous_;
};

// Thread-local switch: when enabled, every op checks its output for NaN/Inf
// and throws numeric_error naming the op. Off by default (it costs a pass
// over each output); the trainer re-runs a failing sample with this on to
// locate the first non-finite intermediate.
bool finite_checks_enabled();
void set_finite_checks_enabled(bool on);

// Reverse-mode sweep from a scalar. Seeds d(loss)/d(loss) = 1, zeroes the
// gradients of every non-leaf tensor reachable from `loss`, then runs the
// recorded closures in reverse topological order. Leaf gradients accumulate
// across calls; call zero_grad (or let the optimizer do it) between steps.
void backward(const tensor& loss);

}  // namespace pointcat
