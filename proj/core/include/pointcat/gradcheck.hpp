#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pointcat/tensor.hpp"

namespace pointcat {

struct grad_check_options {
    double h = 1e-5;                  // central-difference half step
    double tolerance = 1e-5;          // max allowed relative error
    std::size_t coords_per_param = 32;  // sampled coordinates per parameter (all, if fewer)
    std::uint64_t seed = 0;           // seeds the coordinate sampler
    // Differences at or below this are treated as agreement. Central
    // differences cannot resolve slopes below ~ulp(loss)/(2h); without this
    // floor a parameter whose true gradient is exactly zero would be flagged
    // over pure round-off noise in the numeric estimate.
    double abs_tolerance = 1e-7;
};

struct grad_check_param_report {
    std::string name;
    std::size_t coords_checked = 0;
    double max_rel_err = 0.0;
    std::int64_t worst_flat_index = -1;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

struct grad_check_report {
    std::vector<grad_check_param_report> per_param;
    std::size_t total_coords = 0;
    double max_rel_err = 0.0;
    std::string worst_param;
    std::int64_t worst_flat_index = -1;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;

    bool passed(double tolerance) const { return max_rel_err <= tolerance; }
};

// Compares analytic gradients against central finite differences.
//
// `forward` must rebuild the loss from scratch on every call and must be
// deterministic: the check evaluates it twice up front and throws check_error
// if the two results differ bit-for-bit. Relative error per coordinate is
// |analytic - numeric| / max(1e-8, |analytic| + |numeric|), taken as zero when
// |analytic - numeric| <= abs_tolerance. Parameters are restored to their
// exact original values afterwards and their gradients are left zeroed.
//
// Finite differences certify gradients only at points where the loss is
// differentiable. Piecewise-linear ops (relu, max-pool) have kinks; callers
// should evaluate at a generic point -- e.g. jiggle freshly built model
// parameters, whose zero-initialized biases otherwise sit exactly on those
// kinks -- rather than expect agreement on a non-smooth boundary.
grad_check_report finite_diff_check(const std::function<tensor()>& forward,
                                    const std::vector<parameter*>& params,
                                    const grad_check_options& opts = {});

}  // namespace pointcat
