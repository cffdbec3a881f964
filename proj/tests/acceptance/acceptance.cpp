// One PASS/FAIL line per acceptance criterion. A criterion passes when every
// non-descriptive case of its checks passes and it finishes inside its runtime budget.
#include <chrono>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "wlab/verify.hpp"

using namespace wlab;
using namespace wlab::verify;

namespace {
struct Criterion {
    int id;
    std::string title;
    double budget_s;
    std::function<std::vector<SuiteReport>()> run;
};

std::vector<Criterion> criteria() {
    const json none = json::object();
    return {
        {1, "parent-ratio bound", 10, [=] { return std::vector{parent_ratio_sweep(none)}; }},
        {2, "phi-ratio bound", 1, [=] { return std::vector{phi_ratio_sweep(none)}; }},
        {3, "averaging and stopping identities", 30, [=] { return std::vector{cz_identities(none)}; }},
        {4, "martingale convergence", 10, [=] { return std::vector{martingale_convergence(none)}; }},
        {5, "dyadic maximal and sharp function inequalities", 120, [=] { return std::vector{maximal_fs(none)}; }},
        {6, "sharp comparison and clipped expansion", 60, [=] { return std::vector{sharp_comparison(none)}; }},
        {7, "weighted Poincare", 60, [=] { return std::vector{poincare(none)}; }},
        {8, "solver convergence", 120,
         [=] { return std::vector{solver_convergence(none, true), solver_convergence(none, false)}; }},
        {9, "a priori estimate stability", 300,
         [=] { return std::vector{apriori_stability(none, true), apriori_stability(none, false)}; }},
        {10, "SDE kernel representation", 300, [=] { return std::vector{kernel_checks(none)}; }},
        {11, "oscillation decay", 180, [=] { return std::vector{oscillation_decay(none)}; }},
        {12, "sharp-function estimate", 180, [=] { return std::vector{sharp_estimate(none)}; }},
        {13, "Holder quotients", 120, [=] { return std::vector{holder_stability(none)}; }},
    };
}
}  // namespace

int main(int argc, char** argv) {
    // optional criterion ids on the command line select a subset
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::stoi(argv[i]));
    int failed = 0;
    for (const auto& c : criteria()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        int cases = 0, failures = 0, marginal = 0;
        std::string first_failure, error;
        try {
            for (const auto& R : c.run()) {
                cases += static_cast<int>(R.cases.size());
                failures += R.failures();
                marginal += R.marginal_count();
                for (const auto& k : R.cases)
                    if (!k.pass && first_failure.empty()) first_failure = k.name;
            }
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ok = error.empty() && failures == 0 && secs < c.budget_s;
        std::printf("C%-2d %s  %-48s cases=%d failures=%d marginal=%d time=%.2fs/%.0fs", c.id, ok ? "PASS" : "FAIL",
                    c.title.c_str(), cases, failures, marginal, secs, c.budget_s);
        if (!error.empty()) std::printf("  error: %s", error.c_str());
        if (!first_failure.empty()) std::printf("  first failure: %s", first_failure.c_str());
        std::printf("\n");
        std::fflush(stdout);
        failed += ok ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
