#include "pointcat/costs.hpp"

#include <vector>

#include "pointcat/errors.hpp"

namespace pointcat {

namespace {
thread_local cost_report* g_report = nullptr;
// Stack of pre-joined paths, so record_macs never rebuilds strings.
thread_local std::vector<std::string> g_paths;
}  // namespace

std::uint64_t cost_report::macs_matching(const std::string& needle) const {
    std::uint64_t total = 0;
    for (const auto& [path, macs] : macs_by_scope)
        if (path.find(needle) != std::string::npos) total += macs;
    return total;
}

cost_scope::cost_scope(const std::string& name) {
    if (g_paths.empty())
        g_paths.push_back(name);
    else
        g_paths.push_back(g_paths.back() + "/" + name);
}

cost_scope::~cost_scope() {
    g_paths.pop_back();
}

cost_collector::cost_collector(cost_report& report) {
    if (g_report) throw contract_error("cost_collector: already collecting on this thread");
    g_report = &report;
}

cost_collector::~cost_collector() {
    g_report = nullptr;
}

void record_macs(std::uint64_t macs) {
    if (!g_report || macs == 0) return;
    g_report->total_macs += macs;
    g_report->macs_by_scope[g_paths.empty() ? std::string("<top>") : g_paths.back()] += macs;
}

bool cost_collection_active() {
    return g_report != nullptr;
}

}  // namespace pointcat
