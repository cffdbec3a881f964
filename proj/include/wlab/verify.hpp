#pragma once
#include <stdexcept>
#include <string>
#include <vector>

#include "wlab/report.hpp"

namespace wlab::verify {

// Unknown suite or experiment name.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed configuration or a parameter outside the admissible regime.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dyadic geometry
SuiteReport parent_ratio_sweep(const json& cfg);
SuiteReport phi_ratio_sweep(const json& cfg);
SuiteReport cz_identities(const json& cfg);
SuiteReport martingale_convergence(const json& cfg);
SuiteReport maximal_fs(const json& cfg);
SuiteReport sharp_comparison(const json& cfg);

// Weighted spaces
SuiteReport poincare(const json& cfg);
SuiteReport sobolev_equivalence(const json& cfg);
SuiteReport holder_stability(const json& cfg);

// Solver
SuiteReport solver_convergence(const json& cfg, bool parabolic);
SuiteReport apriori_stability(const json& cfg, bool parabolic);

// Kernel representation
SuiteReport kernel_checks(const json& cfg);

// Experiments
SuiteReport oscillation_decay(const json& cfg);
SuiteReport sharp_estimate(const json& cfg);
SuiteReport theta_boundary(const json& cfg);

const std::vector<std::string>& suite_names();
const std::vector<std::string>& experiment_names();

// Throws UsageError for unknown names and ConfigError for malformed configs.
SuiteReport run_suite(const std::string& name, const json& cfg = json::object());
SuiteReport run_experiment(const std::string& name, const json& cfg = json::object());

// Parses a JSON config file; ConfigError on I/O or syntax errors.
json load_config(const std::string& path);

}  // namespace wlab::verify
