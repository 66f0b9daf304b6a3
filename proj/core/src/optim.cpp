#include "pointcat/optim.hpp"

#include <cmath>

namespace pointcat {

adam::adam(std::vector<parameter*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (parameter* p : params_) {
        if (!p || !p->value.defined()) throw contract_error("adam: undefined parameter");
        m_.emplace_back(p->value.values().size(), 0.0);
        v_.emplace_back(p->value.values().size(), 0.0);
    }
}

void adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        tensor& value = params_[pi]->value;
        auto& theta = value.raw_values();
        auto& g = value.grad_buffer();
        auto& m = m_[pi];
        auto& v = v_[pi];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            theta[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
    zero_grad();
}

void adam::zero_grad() {
    for (parameter* p : params_) p->value.zero_grad();
}

}  // namespace pointcat
