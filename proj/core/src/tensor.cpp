#include "pointcat/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace pointcat {

std::int64_t shape_numel(const shape_t& s) {
    std::int64_t n = 1;
    for (std::int64_t d : s) {
        if (d < 0) throw shape_error("negative dimension in shape " + shape_str(s));
        n *= d;
    }
    return n;
}

std::string shape_str(const shape_t& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

tensor tensor::zeros(shape_t shape, bool requires_grad) {
    tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<double>>(static_cast<std::size_t>(shape_numel(t.shape_)), 0.0);
    t.set_requires_grad(requires_grad);
    return t;
}

tensor tensor::full(shape_t shape, double value, bool requires_grad) {
    tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.data_->begin(), t.data_->end(), value);
    return t;
}

tensor tensor::from_values(shape_t shape, std::vector<double> values, bool requires_grad) {
    if (shape_numel(shape) != static_cast<std::int64_t>(values.size()))
        throw shape_error("from_values: " + shape_str(shape) + " does not hold " +
                          std::to_string(values.size()) + " values");
    tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<double>>(std::move(values));
    t.set_requires_grad(requires_grad);
    return t;
}

tensor tensor::scalar_value(double v) {
    return from_values({1}, {v});
}

std::int64_t tensor::dim(std::size_t i) const {
    if (i >= shape_.size())
        throw shape_error("dim " + std::to_string(i) + " out of range for " + shape_str(shape_));
    return shape_[i];
}

double tensor::at(std::int64_t r, std::int64_t c) const {
    if (rank() != 2) throw shape_error("at(r,c) requires a rank-2 tensor, got " + shape_str(shape_));
    if (r < 0 || r >= shape_[0] || c < 0 || c >= shape_[1])
        throw index_error("at(" + std::to_string(r) + "," + std::to_string(c) + ") out of " + shape_str(shape_));
    return (*data_)[static_cast<std::size_t>(r * shape_[1] + c)];
}

const std::vector<double>& tensor::values() const {
    if (!data_) throw contract_error("values() on undefined tensor");
    return *data_;
}

std::vector<double>& tensor::raw_values() {
    if (!data_) throw contract_error("raw_values() on undefined tensor");
    return *data_;
}

double tensor::scalar() const {
    if (numel() != 1) throw shape_error("scalar() on tensor of shape " + shape_str(shape_));
    return (*data_)[0];
}

void tensor::set_requires_grad(bool rg) {
    requires_grad_ = rg;
    if (rg && data_ && !grad_) grad_ = std::make_shared<std::vector<double>>(data_->size(), 0.0);
}

const std::vector<double>& tensor::grad() const {
    if (!grad_) throw contract_error("grad() before any backward pass touched this tensor");
    return *grad_;
}

std::vector<double>& tensor::grad_buffer() const {
    if (!data_) throw contract_error("grad_buffer() on undefined tensor");
    if (!grad_) grad_ = std::make_shared<std::vector<double>>(data_->size(), 0.0);
    return *grad_;
}

void tensor::zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), 0.0);
}

namespace {
thread_local bool g_grad_enabled = true;
thread_local bool g_finite_checks = false;
}  // namespace

bool grad_enabled() {
    return g_grad_enabled;
}

void set_grad_enabled(bool on) {
    g_grad_enabled = on;
}

no_grad_guard::no_grad_guard() : previous_(g_grad_enabled) {
    g_grad_enabled = false;
}

no_grad_guard::~no_grad_guard() {
    g_grad_enabled = previous_;
}

bool finite_checks_enabled() {
    return g_finite_checks;
}

void set_finite_checks_enabled(bool on) {
    g_finite_checks = on;
}

void backward(const tensor& loss) {
    if (!loss.defined()) throw contract_error("backward: undefined tensor");
    if (loss.numel() != 1)
        throw shape_error("backward requires a scalar, got " + shape_str(loss.shape()));
    if (!loss.requires_grad())
        throw contract_error("backward: tensor does not require gradients");

    // Iterative DFS producing reverse topological order over tape nodes.
    std::vector<tensor> topo;
    std::unordered_set<const tape_node*> visited;
    struct frame {
        tensor t;
        std::size_t next_parent;
    };
    std::vector<frame> stack;
    if (loss.node) stack.push_back({loss, 0});
    if (loss.node) visited.insert(loss.node.get());
    while (!stack.empty()) {
        frame& f = stack.back();
        const auto& parents = f.t.node->parents;
        bool descended = false;
        while (f.next_parent < parents.size()) {
            const tensor& p = parents[f.next_parent++];
            if (p.node && !visited.count(p.node.get())) {
                visited.insert(p.node.get());
                stack.push_back({p, 0});
                descended = true;
                break;
            }
        }
        if (!descended && f.next_parent >= f.t.node->parents.size()) {
            topo.push_back(f.t);
            stack.pop_back();
        }
    }

    // Non-leaf gradients belong to this sweep only; leaves accumulate.
    for (tensor& t : topo) {
        t.grad_buffer();
        t.zero_grad();
    }

    tensor seed = loss;
    seed.grad_buffer()[0] += 1.0;  // += so a leaf used as loss still accumulates

    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        it->node->backward(*it);
    }
}

}  // namespace pointcat
