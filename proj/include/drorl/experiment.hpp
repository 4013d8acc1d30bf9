#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "drorl/mdp.hpp"
#include "drorl/offline_data.hpp"
#include "drorl/serialization.hpp"

namespace drorl {

enum class Method { DroHoeffding, DroBernstein, Lcb, Nonrobust };

/// Canonical name used in configs and CSVs, e.g. "dro_hoeffding".
std::string method_name(Method method);
/// Accepts the canonical name or its dashed form ("dro-hoeffding").
Method parse_method(std::string_view name);

enum class Coverage { Uniform, Partial };

std::string coverage_name(Coverage coverage);
Coverage parse_coverage(std::string_view name);

struct MethodParams {
    double delta = 0.1;
    double gamma = kDefaultGamma;
    double tol = 1e-6;
    double lcb_bonus_scale = 1.0;
    /// Replaces every uncertainty radius (DRO methods only).
    std::optional<double> radius_override;

    static constexpr double kDefaultGamma = 0.95;
};

/// Fits the empirical model to `data` and runs one method on it.
SolutionRecord solve_dataset(const OfflineDataset& data, Method method, const MethodParams& params);

/// V*(rho) - V^pi(rho), with V* from exact value iteration at tol / 10.
double suboptimality_gap(const TabularMdp& mdp, const DeterministicPolicy& pi, double tol);

struct GarnetSource {
    std::size_t states = 0;
    std::size_t actions = 0;
    std::uint64_t seed = 0;
};

struct ExperimentConfig {
    std::variant<GarnetSource, std::filesystem::path> mdp_source;
    Coverage coverage = Coverage::Uniform;
    std::vector<Method> methods;
    std::vector<std::size_t> sizes;
    std::vector<std::uint64_t> seeds;
    std::uint64_t base_seed = 0;
    double delta = 0.1;
    /// Overrides the discount of a file-sourced MDP when set; Garnet uses 0.95 otherwise.
    std::optional<double> gamma;
    double tol = 1e-6;
    double lcb_bonus_scale = 1.0;
    /// Action shared by all states in partial coverage; drawn from base_seed when unset.
    std::optional<std::size_t> eta;
    /// Wall-clock timings make the raw table nondeterministic, so they are
    /// written as 0 unless requested.
    bool record_runtime = false;
    std::filesystem::path output = "results";

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Relative MDP file paths are resolved against `base_dir`.
ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// The MDP a config refers to, with the config's discount applied.
TabularMdp resolve_mdp(const ExperimentConfig& cfg);

struct ResultRow {
    std::string method;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double gap = 0.0;
    double runtime_ms = 0.0;
    std::size_t iterations = 0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct AggregateRow {
    std::string method;
    std::size_t n = 0;
    double mean = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;

    friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<AggregateRow> aggregates;
    std::optional<std::size_t> eta;
};

/// Percentile by linear interpolation between order statistics of `values`
/// (position p * (n - 1) in the sorted sample). p in [0, 1].
double percentile(std::vector<double> values, double p);

/// Mean, 5th and 95th percentile per (method, n), in row order of first appearance.
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);

/**
 * Runs every method on every (N, seed) cell. Each cell samples one dataset
 * with seed hash(base_seed, N, seed) that all methods share. Cells run on
 * up to `jobs` threads; the result does not depend on `jobs`.
 */
ExperimentResult run_sweep(const ExperimentConfig& cfg, unsigned jobs = 1);

/// Writes raw.csv and agg.csv into `dir`, creating it if needed.
void emit_tables(const ExperimentResult& result, const std::filesystem::path& dir);

/// Reads back the two tables written by emit_tables.
ExperimentResult load_tables(const std::filesystem::path& dir);

}  // namespace drorl
