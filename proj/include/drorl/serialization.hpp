#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "drorl/mdp.hpp"

namespace drorl {

using json = nlohmann::json;

/// {S, A, gamma, rho: [S], r: [S][A], P: [S][A][S]}
json mdp_to_json(const TabularMdp& mdp);
/// Validates with the usual TabularMdp invariants.
TabularMdp mdp_from_json(const json& doc);

void save_mdp(const TabularMdp& mdp, const std::filesystem::path& path);
TabularMdp load_mdp(const std::filesystem::path& path);

/// A solved policy and where it came from.
struct SolutionRecord {
    Solution solution;
    std::string method;  ///< e.g. "dro_hoeffding"
    std::string style;   ///< "hoeffding", "bernstein" or "none"
    std::optional<double> delta;
};

/// {method, value: [S], policy: [S], iterations, residual, style, delta}
json solution_to_json(const SolutionRecord& record);
SolutionRecord solution_from_json(const json& doc);

void save_solution(const SolutionRecord& record, const std::filesystem::path& path);
SolutionRecord load_solution(const std::filesystem::path& path);

/// Parses a JSON file, reporting the path on failure.
json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& doc, const std::filesystem::path& path);

}  // namespace drorl
