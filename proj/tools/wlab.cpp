// wlab: verification suites, experiments and solver runs.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "wlab/io.hpp"
#include "wlab/verify.hpp"

namespace fs = std::filesystem;
using wlab::json;

namespace {
enum Exit { kPass = 0, kFail = 1, kUsage = 2 };

void print_summary(const wlab::SuiteReport& R, std::ostream& os) {
    for (const auto& c : R.cases) {
        const char* tag = c.source == wlab::BoundSource::Descriptive ? "INFO" : (c.pass ? (c.marginal ? "MARG" : "PASS") : "FAIL");
        os << tag << "  " << c.name << "  lhs=" << c.lhs << " rhs=" << c.rhs << '\n';
    }
    os << R.suite << ": " << R.cases.size() << " cases, " << R.failures() << " failures, " << R.marginal_count()
       << " marginal\n";
}

int emit(const wlab::SuiteReport& R, const std::string& out) {
    print_summary(R, std::cerr);
    if (out.empty()) {
        std::cout << R.dump() << '\n';
    } else {
        std::ofstream(out) << R.dump() << '\n';
        fs::path csv(out);
        csv.replace_extension(".csv");
        std::ofstream(csv) << R.to_csv();
    }
    return R.passed() ? kPass : kFail;
}

json config_from(const std::string& path, long long seed) {
    json cfg = path.empty() ? json::object() : wlab::verify::load_config(path);
    if (seed >= 0) cfg["seed"] = seed;
    return cfg;
}

int solve(bool parabolic, const std::string& config, const std::string& out) {
    const json cfg = wlab::verify::load_config(config);
    wlab::io::SolveConfig S;
    try {
        S = wlab::io::parse_solve_config(cfg, parabolic);
    } catch (const std::exception& e) {
        throw wlab::verify::ConfigError(e.what());
    }
    const wlab::NodeField f = wlab::io::sample_forcing(S.forcing, S.grid);
    fs::create_directories(out);
    json summary = {{"problem", parabolic ? "parabolic" : "elliptic"}, {"p", S.solver.norm.p}, {"theta", S.solver.norm.theta}};
    wlab::NodeField u;
    wlab::AprioriTerms T;
    if (parabolic) {
        auto sol = wlab::solve_parabolic(S.A, f, S.solver);
        summary["residual"] = sol.residual;
        summary["delta"] = sol.ellipticity.delta;
        u = std::move(sol.u);
        T = wlab::apriori_ratio_parabolic(u, f, S.solver.norm);
    } else {
        auto sol = wlab::solve_elliptic(S.A, f, S.solver);
        summary["residual"] = sol.residual;
        summary["delta"] = sol.ellipticity.delta;
        u = std::move(sol.u);
        T = wlab::apriori_ratio_elliptic(u, f, S.solver.norm);
    }
    summary["apriori"] = {{"inv_u", T.inv_u}, {"u_x", T.u_x}, {"u_xx", T.u_xx}, {"u_t", T.u_t}, {"f", T.f}, {"ratio", T.ratio}};
    std::ofstream uo(fs::path(out) / "u.csv");
    wlab::io::write_nodefield(uo, u);
    std::ofstream fo(fs::path(out) / "f.csv");
    wlab::io::write_nodefield(fo, f);
    std::ofstream(fs::path(out) / "summary.json") << summary.dump(2) << '\n';
    std::cout << summary.dump(2) << '\n';
    return kPass;
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted parabolic estimates lab"};
    app.require_subcommand(1);
    std::string name, config, out, kind;
    long long seed = -1;

    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", name, "suite name")->required();
    verify->add_option("--config", config, "JSON config file");
    verify->add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    verify->add_option("--out", out, "JSON report path; the CSV goes next to it");

    auto* experiment = app.add_subcommand("experiment", "run a numerical experiment");
    experiment->add_option("name", name, "experiment name")->required();
    experiment->add_option("--config", config, "JSON config file");
    experiment->add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
    experiment->add_option("--out", out, "JSON report path; the CSV goes next to it");

    auto* solve_cmd = app.add_subcommand("solve", "solve a parabolic or elliptic system");
    solve_cmd->add_option("kind", kind, "parabolic | elliptic")->required()->check(CLI::IsMember({"parabolic", "elliptic"}));
    solve_cmd->add_option("--config", config, "JSON solver config")->required();
    solve_cmd->add_option("--out", out, "output directory")->required();

    auto* list = app.add_subcommand("list", "list suites and experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }
    try {
        if (*list) {
            for (const auto& s : wlab::verify::suite_names()) std::cout << "suite " << s << '\n';
            for (const auto& s : wlab::verify::experiment_names()) std::cout << "experiment " << s << '\n';
            return kPass;
        }
        if (*verify) return emit(wlab::verify::run_suite(name, config_from(config, seed)), out);
        if (*experiment) return emit(wlab::verify::run_experiment(name, config_from(config, seed)), out);
        return solve(kind == "parabolic", config, out);
    } catch (const wlab::verify::UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const wlab::verify::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFail;
    }
}
