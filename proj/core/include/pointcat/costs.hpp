#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace pointcat {

// Multiply-accumulate accounting.
//
// Policy: an op reports the multiplications it performs on tensor entries.
//   matmul / linear       n*k*m
//   elementwise multiply  numel (incl. scale-by-constant, broadcast divide)
//   weighted row gather   rows*k*channels
//   everything else       0 (adds, norms, softmax, relu, pooling, gathers)
// Counts are recorded for forward passes only; backward closures are not
// instrumented. Scopes give each count a path like "stack/l0/large/scores" so
// sub-budgets (e.g. attention-score cost) can be isolated.
struct cost_report {
    std::uint64_t total_macs = 0;
    std::map<std::string, std::uint64_t> macs_by_scope;
    std::uint64_t param_count = 0;  // filled in by model-level accounting

    // Sum of scope buckets whose path contains `needle`.
    std::uint64_t macs_matching(const std::string& needle) const;
};

// RAII path segment, e.g. { cost_scope s("stage1"); ... }.
class cost_scope {
  public:
    explicit cost_scope(const std::string& name);
    ~cost_scope();
    cost_scope(const cost_scope&) = delete;
    cost_scope& operator=(const cost_scope&) = delete;
};

// RAII activation of a recorder on this thread. Nesting is a bug.
class cost_collector {
  public:
    explicit cost_collector(cost_report& report);
    ~cost_collector();
    cost_collector(const cost_collector&) = delete;
    cost_collector& operator=(const cost_collector&) = delete;
};

// Called by ops; cheap no-op when no collector is active on this thread.
void record_macs(std::uint64_t macs);

bool cost_collection_active();

}  // namespace pointcat
