// Command-line front end. Talks to the library only through drorl.h.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "drorl/drorl.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInternal = 2;
constexpr const char* kSeedEnv = "ROBUST_RL_SEED";

struct MdpDeleter {
    void operator()(drorl_mdp* p) const { drorl_mdp_free(p); }
};
struct DatasetDeleter {
    void operator()(drorl_dataset* p) const { drorl_dataset_free(p); }
};
struct SolutionDeleter {
    void operator()(drorl_solution* p) const { drorl_solution_free(p); }
};
using MdpPtr = std::unique_ptr<drorl_mdp, MdpDeleter>;
using DatasetPtr = std::unique_ptr<drorl_dataset, DatasetDeleter>;
using SolutionPtr = std::unique_ptr<drorl_solution, SolutionDeleter>;

/// Thrown to unwind with a status from the C API.
struct CallFailed {
    drorl_status status;
};

void check(drorl_status status) {
    if (status != DRORL_OK) {
        throw CallFailed{status};
    }
}

int exit_code_for(drorl_status status) {
    switch (status) {
    case DRORL_OK:
        return kExitOk;
    case DRORL_ERR_INVALID_ARGUMENT:
    case DRORL_ERR_IO:
        return kExitValidation;
    default:
        return kExitInternal;
    }
}

struct GarnetArgs {
    std::size_t states = 0;
    std::size_t actions = 0;
    std::uint64_t seed = 0;
    double gamma = 0.95;
    std::string out;
};

struct SampleArgs {
    std::string mdp;
    std::string coverage = "uniform";
    std::size_t n = 0;
    std::uint64_t seed = 0;
    long long eta = -1;
    std::string out;
};

struct SolveArgs {
    std::string data;
    std::string method;
    double delta = 0.1;
    double gamma = 0.95;
    double tol = 1e-6;
    double bonus_scale = 1.0;
    std::optional<double> radius_override;
    std::string out;
};

struct EvaluateArgs {
    std::string mdp;
    std::string policy;
    double tol = 1e-6;
};

struct SweepArgs {
    std::string config;
    std::string out_dir;
    unsigned jobs = 1;
    std::optional<std::uint64_t> seed;
};

void run_garnet(const GarnetArgs& args) {
    drorl_mdp* raw = nullptr;
    check(drorl_mdp_garnet(args.states, args.actions, args.seed, args.gamma, &raw));
    MdpPtr mdp(raw);
    check(drorl_mdp_save(mdp.get(), args.out.c_str()));
}

void run_sample(const SampleArgs& args) {
    drorl_mdp* raw_mdp = nullptr;
    check(drorl_mdp_load(args.mdp.c_str(), &raw_mdp));
    MdpPtr mdp(raw_mdp);
    const drorl_coverage coverage =
        args.coverage == "partial" ? DRORL_COVERAGE_PARTIAL : DRORL_COVERAGE_UNIFORM;
    drorl_dataset* raw_data = nullptr;
    check(drorl_dataset_sample(mdp.get(), coverage, args.eta, args.n, args.seed, &raw_data));
    DatasetPtr data(raw_data);
    check(drorl_dataset_save(data.get(), args.out.c_str()));
}

void run_solve(const SolveArgs& args) {
    drorl_method method{};
    check(drorl_method_from_name(args.method.c_str(), &method));
    drorl_dataset* raw_data = nullptr;
    check(drorl_dataset_load(args.data.c_str(), &raw_data));
    DatasetPtr data(raw_data);

    drorl_solve_options options;
    drorl_solve_options_init(&options);
    options.delta = args.delta;
    options.gamma = args.gamma;
    options.tol = args.tol;
    options.lcb_bonus_scale = args.bonus_scale;
    if (args.radius_override) {
        options.has_radius_override = 1;
        options.radius_override = *args.radius_override;
    }
    drorl_solution* raw_solution = nullptr;
    check(drorl_solve(data.get(), method, &options, &raw_solution));
    SolutionPtr solution(raw_solution);
    check(drorl_solution_save(solution.get(), args.out.c_str()));
}

void run_evaluate(const EvaluateArgs& args) {
    drorl_mdp* raw_mdp = nullptr;
    check(drorl_mdp_load(args.mdp.c_str(), &raw_mdp));
    MdpPtr mdp(raw_mdp);
    drorl_solution* raw_solution = nullptr;
    check(drorl_solution_load(args.policy.c_str(), &raw_solution));
    SolutionPtr solution(raw_solution);
    double gap = 0.0;
    check(drorl_suboptimality_gap(mdp.get(), solution.get(), args.tol, &gap));
    std::printf("%.17g\n", gap);
}

void run_sweep(const SweepArgs& args) {
    const std::uint64_t seed = args.seed.value_or(0);
    check(drorl_sweep(args.config.c_str(), args.out_dir.empty() ? nullptr : args.out_dir.c_str(),
                      args.jobs, args.seed ? &seed : nullptr));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributionally robust offline RL on tabular MDPs"};
    app.require_subcommand(1);

    GarnetArgs garnet;
    auto* garnet_cmd = app.add_subcommand("garnet", "Generate a Garnet random MDP");
    garnet_cmd->add_option("--states", garnet.states, "Number of states (>= 2)")->required();
    garnet_cmd->add_option("--actions", garnet.actions, "Number of actions (>= 1)")->required();
    garnet_cmd->add_option("--seed", garnet.seed, "Generator seed")->envname(kSeedEnv);
    garnet_cmd->add_option("--gamma", garnet.gamma, "Discount factor")->capture_default_str();
    garnet_cmd->add_option("--out", garnet.out, "Output MDP file (JSON)")->required();

    SampleArgs sample;
    auto* sample_cmd = app.add_subcommand("sample", "Draw an offline dataset from an MDP");
    sample_cmd->add_option("--mdp", sample.mdp, "MDP file (JSON)")->required();
    sample_cmd->add_option("--coverage", sample.coverage, "Behavior distribution")
        ->check(CLI::IsMember({"uniform", "partial"}))
        ->capture_default_str();
    sample_cmd->add_option("--n", sample.n, "Number of transitions")->required();
    sample_cmd->add_option("--seed", sample.seed, "Sampling seed")->envname(kSeedEnv);
    sample_cmd->add_option("--eta", sample.eta,
                           "Shared extra action for partial coverage (default: drawn from seed)");
    sample_cmd->add_option("--out", sample.out, "Output dataset (CSV)")->required();

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Fit a policy to an offline dataset");
    solve_cmd->add_option("--mdp-data", solve.data, "Dataset (CSV)")->required();
    solve_cmd->add_option("--method", solve.method, "dro-hoeffding|dro-bernstein|lcb|nonrobust")
        ->required()
        ->check(CLI::IsMember({"dro-hoeffding", "dro-bernstein", "lcb", "nonrobust",
                               "dro_hoeffding", "dro_bernstein"}));
    solve_cmd->add_option("--delta", solve.delta, "Confidence level")->capture_default_str();
    solve_cmd->add_option("--gamma", solve.gamma, "Discount factor")->capture_default_str();
    solve_cmd->add_option("--tol", solve.tol, "Sup-norm tolerance")->capture_default_str();
    solve_cmd->add_option("--bonus-scale", solve.bonus_scale, "LCB bonus scale")
        ->capture_default_str();
    solve_cmd->add_option("--radius-override", solve.radius_override)->group("");
    solve_cmd->add_option("--out", solve.out, "Output solution (JSON)")->required();

    EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Print the sub-optimality gap of a policy");
    evaluate_cmd->add_option("--mdp", evaluate.mdp, "True MDP (JSON)")->required();
    evaluate_cmd->add_option("--policy", evaluate.policy, "Solution file (JSON)")->required();
    evaluate_cmd->add_option("--tol", evaluate.tol, "Tolerance of the optimal value")
        ->capture_default_str();

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a benchmark sweep and write CSV tables");
    sweep_cmd->add_option("--config", sweep.config, "Sweep config (JSON)")->required();
    sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory (default: config output)");
    sweep_cmd->add_option("--jobs", sweep.jobs, "Parallel (N, seed) cells")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed, "Base seed (default: config base_seed)")
        ->envname(kSeedEnv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        auto* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << failing->help();
        return kExitValidation;
    }

    try {
        if (garnet_cmd->parsed()) {
            run_garnet(garnet);
        } else if (sample_cmd->parsed()) {
            run_sample(sample);
        } else if (solve_cmd->parsed()) {
            run_solve(solve);
        } else if (evaluate_cmd->parsed()) {
            run_evaluate(evaluate);
        } else if (sweep_cmd->parsed()) {
            run_sweep(sweep);
        }
    } catch (const CallFailed& e) {
        std::cerr << "error: " << drorl_last_error() << '\n';
        return exit_code_for(e.status);
    }
    return kExitOk;
}
