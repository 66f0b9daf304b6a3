#include "pointcat/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "pointcat/rng.hpp"

namespace pointcat {

namespace {

bool bits_equal(double a, double b) {
    std::uint64_t ua = 0, ub = 0;
    std::memcpy(&ua, &a, sizeof a);
    std::memcpy(&ub, &b, sizeof b);
    return ua == ub;
}

}  // namespace

grad_check_report finite_diff_check(const std::function<tensor()>& forward,
                                    const std::vector<parameter*>& params,
                                    const grad_check_options& opts) {
    if (!(opts.h > 0.0)) throw contract_error("finite_diff_check: h must be positive");

    // Determinism probe: two untaped evaluations must agree bit-for-bit,
    // otherwise finite differences are meaningless.
    double base1 = 0.0, base2 = 0.0;
    {
        no_grad_guard ng;
        base1 = forward().scalar();
        base2 = forward().scalar();
    }
    if (!bits_equal(base1, base2))
        throw check_error("finite_diff_check: forward pass is not deterministic (" +
                          std::to_string(base1) + " vs " + std::to_string(base2) + ")");

    // One taped pass for the analytic gradients.
    for (parameter* p : params) p->value.zero_grad();
    tensor loss = forward();
    backward(loss);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (parameter* p : params) analytic.push_back(p->value.grad_buffer());

    grad_check_report report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        parameter& p = *params[pi];
        auto& theta = p.value.raw_values();
        const std::size_t nel = theta.size();
        const std::size_t want = std::min(opts.coords_per_param, nel);

        // Distinct coordinates, deterministically chosen per parameter name.
        rng_stream coord_rng(opts.seed, "gradcheck/" + p.name);
        std::vector<std::size_t> coords;
        if (want == nel) {
            coords.resize(nel);
            for (std::size_t i = 0; i < nel; ++i) coords[i] = i;
        } else {
            std::unordered_set<std::size_t> seen;
            while (coords.size() < want) {
                std::size_t c = static_cast<std::size_t>(coord_rng.uniform_index(nel));
                if (seen.insert(c).second) coords.push_back(c);
            }
        }

        grad_check_param_report pr;
        pr.name = p.name;
        for (std::size_t c : coords) {
            const double original = theta[c];
            double f_plus = 0.0, f_minus = 0.0;
            {
                no_grad_guard ng;
                theta[c] = original + opts.h;
                f_plus = forward().scalar();
                theta[c] = original - opts.h;
                f_minus = forward().scalar();
            }
            theta[c] = original;
            const double numeric = (f_plus - f_minus) / (2.0 * opts.h);
            const double a = analytic[pi][c];
            const double diff = std::fabs(a - numeric);
            const double rel =
                diff <= opts.abs_tolerance ? 0.0 : diff / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
            ++pr.coords_checked;
            if (rel > pr.max_rel_err) {
                pr.max_rel_err = rel;
                pr.worst_flat_index = static_cast<std::int64_t>(c);
                pr.analytic_at_worst = a;
                pr.numeric_at_worst = numeric;
            }
        }
        report.total_coords += pr.coords_checked;
        if (pr.max_rel_err > report.max_rel_err || report.worst_param.empty()) {
            report.max_rel_err = pr.max_rel_err;
            report.worst_param = pr.name;
            report.worst_flat_index = pr.worst_flat_index;
            report.analytic_at_worst = pr.analytic_at_worst;
            report.numeric_at_worst = pr.numeric_at_worst;
        }
        report.per_param.push_back(std::move(pr));
    }

    for (parameter* p : params) p->value.zero_grad();
    return report;
}

}  // namespace pointcat
