#pragma once

#include <cstdint>
#include <vector>

#include "pointcat/tensor.hpp"

namespace pointcat {

// Adam with bias correction. step() consumes the gradients accumulated on the
// parameters since the last call and zeroes them afterwards, so a batch is
// "run N backward passes (each scaled by 1/N), then step()".
class adam {
  public:
    explicit adam(std::vector<parameter*> params, double lr = 1e-3, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8);

    void step();
    void zero_grad();

    std::int64_t step_count() const { return t_; }
    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

  private:
    std::vector<parameter*> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    std::int64_t t_ = 0;
};

}  // namespace pointcat
