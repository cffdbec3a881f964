#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <sstream>

#include "verify_common.hpp"

namespace wlab::verify {

namespace {
using Part = std::function<SuiteReport(const json&)>;

const std::map<std::string, std::vector<Part>>& suites() {
    static const std::map<std::string, std::vector<Part>> table = {
        {"measure", {phi_ratio_sweep}},
        {"dyadic", {parent_ratio_sweep, martingale_convergence}},
        {"cz", {cz_identities}},
        {"maximal-fs", {maximal_fs, sharp_comparison}},
        {"poincare", {poincare}},
        {"sobolev", {sobolev_equivalence, holder_stability}},
        {"solver-parabolic",
         {[](const json& c) { return solver_convergence(c, true); }, [](const json& c) { return apriori_stability(c, true); }}},
        {"solver-elliptic",
         {[](const json& c) { return solver_convergence(c, false); }, [](const json& c) { return apriori_stability(c, false); }}},
        {"kernel", {kernel_checks}},
    };
    return table;
}

const std::map<std::string, Part>& experiments() {
    static const std::map<std::string, Part> table = {
        {"oscillation-decay", oscillation_decay},
        {"sharp-estimate", sharp_estimate},
        {"theta-boundary", theta_boundary},
    };
    return table;
}
}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"measure",  "dyadic", "cz", "maximal-fs", "poincare", "sobolev",
                                                   "solver-parabolic", "solver-elliptic", "kernel"};
    return names;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"oscillation-decay", "sharp-estimate", "theta-boundary"};
    return names;
}

SuiteReport run_suite(const std::string& name, const json& cfg) {
    const auto it = suites().find(name);
    if (it == suites().end()) throw UsageError("unknown suite '" + name + "'");
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    // parts run concurrently, merged in declaration order
    std::vector<std::future<SuiteReport>> parts;
    for (const auto& part : it->second) parts.push_back(std::async(std::launch::async, part, std::cref(cfg)));
    SuiteReport R(name);
    std::exception_ptr err;
    for (auto& f : parts) {
        try {
            R.merge(f.get());
        } catch (...) {
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return R;
}

SuiteReport run_experiment(const std::string& name, const json& cfg) {
    const auto it = experiments().find(name);
    if (it == experiments().end()) throw UsageError("unknown experiment '" + name + "'");
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    return it->second(cfg);
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw ConfigError("config '" + path + "' must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
}

}  // namespace wlab::verify
