#include "drorl/drorl.h"

#include <cstring>
#include <new>
#include <string>

#include "drorl/experiment.hpp"
#include "drorl/garnet.hpp"
#include "drorl/offline_data.hpp"
#include "drorl/robust.hpp"
#include "drorl/serialization.hpp"

struct drorl_mdp {
    drorl::TabularMdp mdp;
};

struct drorl_dataset {
    drorl::OfflineDataset data;
};

struct drorl_solution {
    drorl::SolutionRecord record;
};

namespace {

thread_local std::string tl_last_error;

drorl_status fail(drorl_status status, const std::string& message) {
    tl_last_error = message;
    return status;
}

// Runs `body` and converts exceptions into status codes.
template <class Body>
drorl_status guarded(Body&& body) {
    try {
        body();
        return DRORL_OK;
    } catch (const std::invalid_argument& e) {
        return fail(DRORL_ERR_INVALID_ARGUMENT, e.what());
    } catch (const drorl::IoError& e) {
        return fail(DRORL_ERR_IO, e.what());
    } catch (const drorl::SolverError& e) {
        return fail(DRORL_ERR_SOLVER, e.what());
    } catch (const std::bad_alloc&) {
        return fail(DRORL_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(DRORL_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(DRORL_ERR_INTERNAL, "unknown error");
    }
}

#define DRORL_REQUIRE(ptr)                                                    \
    do {                                                                      \
        if ((ptr) == nullptr) {                                               \
            return fail(DRORL_ERR_INVALID_ARGUMENT, "null pointer: " #ptr);   \
        }                                                                     \
    } while (0)

drorl::Method to_method(drorl_method method) {
    switch (method) {
    case DRORL_METHOD_DRO_HOEFFDING:
        return drorl::Method::DroHoeffding;
    case DRORL_METHOD_DRO_BERNSTEIN:
        return drorl::Method::DroBernstein;
    case DRORL_METHOD_LCB:
        return drorl::Method::Lcb;
    case DRORL_METHOD_NONROBUST:
        return drorl::Method::Nonrobust;
    }
    throw std::invalid_argument("unknown method id " + std::to_string(static_cast<int>(method)));
}

}  // namespace

extern "C" {

const char* drorl_last_error(void) { return tl_last_error.c_str(); }

const char* drorl_status_string(drorl_status status) {
    switch (status) {
    case DRORL_OK:
        return "ok";
    case DRORL_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case DRORL_ERR_IO:
        return "i/o error";
    case DRORL_ERR_SOLVER:
        return "solver error";
    case DRORL_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

// ---------------------------------------------------------------------------
// MDPs

drorl_status drorl_mdp_garnet(size_t num_states, size_t num_actions, uint64_t seed, double gamma,
                              drorl_mdp** out) {
    DRORL_REQUIRE(out);
    return guarded([&] {
        *out = new drorl_mdp{drorl::generate_garnet(num_states, num_actions, seed, gamma)};
    });
}

drorl_status drorl_mdp_load(const char* path, drorl_mdp** out) {
    DRORL_REQUIRE(path);
    DRORL_REQUIRE(out);
    return guarded([&] { *out = new drorl_mdp{drorl::load_mdp(path)}; });
}

drorl_status drorl_mdp_save(const drorl_mdp* mdp, const char* path) {
    DRORL_REQUIRE(mdp);
    DRORL_REQUIRE(path);
    return guarded([&] { drorl::save_mdp(mdp->mdp, path); });
}

drorl_status drorl_mdp_shape(const drorl_mdp* mdp, size_t* num_states, size_t* num_actions,
                             double* gamma) {
    DRORL_REQUIRE(mdp);
    if (num_states) *num_states = mdp->mdp.num_states();
    if (num_actions) *num_actions = mdp->mdp.num_actions();
    if (gamma) *gamma = mdp->mdp.gamma();
    return DRORL_OK;
}

void drorl_mdp_free(drorl_mdp* mdp) { delete mdp; }

// ---------------------------------------------------------------------------
// Datasets

drorl_status drorl_dataset_sample(const drorl_mdp* mdp, drorl_coverage coverage, int64_t eta,
                                  size_t n, uint64_t seed, drorl_dataset** out) {
    DRORL_REQUIRE(mdp);
    DRORL_REQUIRE(out);
    return guarded([&] {
        const auto& m = mdp->mdp;
        if (coverage == DRORL_COVERAGE_UNIFORM) {
            const auto mu = drorl::behavior_uniform(m.num_states(), m.num_actions());
            *out = new drorl_dataset{drorl::sample_dataset(m, mu, n, seed)};
            return;
        }
        if (coverage != DRORL_COVERAGE_PARTIAL) {
            throw std::invalid_argument("unknown coverage id");
        }
        const auto optimal = drorl::exact_value_iteration(m, 1e-8);
        const std::size_t action = eta < 0 ? drorl::draw_partial_action(m.num_actions(), seed)
                                           : static_cast<std::size_t>(eta);
        const auto mu = drorl::behavior_partial(optimal.policy, m.num_actions(), action);
        *out = new drorl_dataset{drorl::sample_dataset(m, mu, n, seed)};
    });
}

drorl_status drorl_dataset_load(const char* path, drorl_dataset** out) {
    DRORL_REQUIRE(path);
    DRORL_REQUIRE(out);
    return guarded([&] { *out = new drorl_dataset{drorl::load_dataset_csv(path)}; });
}

drorl_status drorl_dataset_save(const drorl_dataset* data, const char* path) {
    DRORL_REQUIRE(data);
    DRORL_REQUIRE(path);
    return guarded([&] { drorl::save_dataset_csv(data->data, path); });
}

drorl_status drorl_dataset_shape(const drorl_dataset* data, size_t* size, size_t* num_states,
                                 size_t* num_actions) {
    DRORL_REQUIRE(data);
    if (size) *size = data->data.size();
    if (num_states) *num_states = data->data.num_states();
    if (num_actions) *num_actions = data->data.num_actions();
    return DRORL_OK;
}

drorl_status drorl_dataset_count(const drorl_dataset* data, size_t s, size_t a, uint64_t* out) {
    DRORL_REQUIRE(data);
    DRORL_REQUIRE(out);
    if (s >= data->data.num_states() || a >= data->data.num_actions()) {
        return fail(DRORL_ERR_INVALID_ARGUMENT, "state or action out of range");
    }
    *out = data->data.count(s, a);
    return DRORL_OK;
}

void drorl_dataset_free(drorl_dataset* data) { delete data; }

// ---------------------------------------------------------------------------
// Solving

void drorl_solve_options_init(drorl_solve_options* options) {
    if (options == nullptr) {
        return;
    }
    const drorl::MethodParams defaults;
    options->delta = defaults.delta;
    options->gamma = defaults.gamma;
    options->tol = defaults.tol;
    options->lcb_bonus_scale = defaults.lcb_bonus_scale;
    options->has_radius_override = 0;
    options->radius_override = 0.0;
}

drorl_status drorl_method_from_name(const char* name, drorl_method* out) {
    DRORL_REQUIRE(name);
    DRORL_REQUIRE(out);
    return guarded([&] {
        switch (drorl::parse_method(name)) {
        case drorl::Method::DroHoeffding:
            *out = DRORL_METHOD_DRO_HOEFFDING;
            break;
        case drorl::Method::DroBernstein:
            *out = DRORL_METHOD_DRO_BERNSTEIN;
            break;
        case drorl::Method::Lcb:
            *out = DRORL_METHOD_LCB;
            break;
        case drorl::Method::Nonrobust:
            *out = DRORL_METHOD_NONROBUST;
            break;
        }
    });
}

drorl_status drorl_solve(const drorl_dataset* data, drorl_method method,
                         const drorl_solve_options* options, drorl_solution** out) {
    DRORL_REQUIRE(data);
    DRORL_REQUIRE(out);
    return guarded([&] {
        drorl::MethodParams params;
        if (options) {
            params.delta = options->delta;
            params.gamma = options->gamma;
            params.tol = options->tol;
            params.lcb_bonus_scale = options->lcb_bonus_scale;
            if (options->has_radius_override) {
                params.radius_override = options->radius_override;
            }
        }
        *out = new drorl_solution{drorl::solve_dataset(data->data, to_method(method), params)};
    });
}

drorl_status drorl_solution_load(const char* path, drorl_solution** out) {
    DRORL_REQUIRE(path);
    DRORL_REQUIRE(out);
    return guarded([&] { *out = new drorl_solution{drorl::load_solution(path)}; });
}

drorl_status drorl_solution_save(const drorl_solution* solution, const char* path) {
    DRORL_REQUIRE(solution);
    DRORL_REQUIRE(path);
    return guarded([&] { drorl::save_solution(solution->record, path); });
}

drorl_status drorl_solution_info(const drorl_solution* solution, size_t* num_states,
                                 size_t* iterations, double* residual) {
    DRORL_REQUIRE(solution);
    const auto& s = solution->record.solution;
    if (num_states) *num_states = s.policy.size();
    if (iterations) *iterations = s.iterations;
    if (residual) *residual = s.residual;
    return DRORL_OK;
}

drorl_status drorl_solution_policy(const drorl_solution* solution, size_t* out, size_t len) {
    DRORL_REQUIRE(solution);
    DRORL_REQUIRE(out);
    const auto& pi = solution->record.solution.policy;
    std::copy_n(pi.begin(), std::min(len, pi.size()), out);
    return DRORL_OK;
}

drorl_status drorl_solution_value(const drorl_solution* solution, double* out, size_t len) {
    DRORL_REQUIRE(solution);
    DRORL_REQUIRE(out);
    const auto& v = solution->record.solution.value;
    std::copy_n(v.begin(), std::min(len, v.size()), out);
    return DRORL_OK;
}

void drorl_solution_free(drorl_solution* solution) { delete solution; }

// ---------------------------------------------------------------------------
// Evaluation

drorl_status drorl_suboptimality_gap(const drorl_mdp* mdp, const drorl_solution* solution,
                                     double tol, double* out) {
    DRORL_REQUIRE(mdp);
    DRORL_REQUIRE(solution);
    DRORL_REQUIRE(out);
    return guarded([&] {
        *out = drorl::suboptimality_gap(mdp->mdp, solution->record.solution.policy, tol);
    });
}

drorl_status drorl_support_function(const double* p_hat, const double* v, size_t n, double radius,
                                    double* out) {
    DRORL_REQUIRE(p_hat);
    DRORL_REQUIRE(v);
    DRORL_REQUIRE(out);
    return guarded([&] {
        *out = drorl::support_function({p_hat, n}, radius, {v, n});
    });
}

// ---------------------------------------------------------------------------
// Sweeps

drorl_status drorl_sweep(const char* config_path, const char* out_dir, unsigned jobs,
                         const uint64_t* base_seed) {
    DRORL_REQUIRE(config_path);
    return guarded([&] {
        drorl::ExperimentConfig cfg = drorl::load_config(config_path);
        if (base_seed) {
            cfg.base_seed = *base_seed;
        }
        const auto result = drorl::run_sweep(cfg, jobs);
        drorl::emit_tables(result, out_dir ? std::filesystem::path(out_dir) : cfg.output);
    });
}

}  // extern "C"
