#include "drorl/serialization.hpp"

#include <fstream>

namespace drorl {

namespace {

template <class T>
T require(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw std::invalid_argument(std::string("missing field '") + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("field '") + key + "': " + e.what());
    }
}

}  // namespace

json mdp_to_json(const TabularMdp& mdp) {
    const std::size_t S = mdp.num_states();
    const std::size_t A = mdp.num_actions();
    json r = json::array();
    json p = json::array();
    for (std::size_t s = 0; s < S; ++s) {
        json r_row = json::array();
        json p_block = json::array();
        for (std::size_t a = 0; a < A; ++a) {
            r_row.push_back(mdp.reward(s, a));
            const auto row = mdp.transition(s, a);
            p_block.push_back(std::vector<double>(row.begin(), row.end()));
        }
        r.push_back(std::move(r_row));
        p.push_back(std::move(p_block));
    }
    return json{{"S", S},      {"A", A}, {"gamma", mdp.gamma()}, {"rho", mdp.initial_distribution()},
                {"r", std::move(r)}, {"P", std::move(p)}};
}

TabularMdp mdp_from_json(const json& doc) {
    const auto S = require<std::size_t>(doc, "S");
    const auto A = require<std::size_t>(doc, "A");
    const auto gamma = require<double>(doc, "gamma");
    auto rho = require<Vector>(doc, "rho");
    const auto r = require<std::vector<Vector>>(doc, "r");
    const auto p = require<std::vector<std::vector<Vector>>>(doc, "P");
    if (r.size() != S || p.size() != S) {
        throw std::invalid_argument("'r' and 'P' must have S rows");
    }
    Vector reward;
    Vector kernel;
    reward.reserve(S * A);
    kernel.reserve(S * A * S);
    for (std::size_t s = 0; s < S; ++s) {
        if (r[s].size() != A || p[s].size() != A) {
            throw std::invalid_argument("'r' and 'P' rows must have A entries");
        }
        reward.insert(reward.end(), r[s].begin(), r[s].end());
        for (std::size_t a = 0; a < A; ++a) {
            if (p[s][a].size() != S) {
                throw std::invalid_argument("each 'P' row must have S entries");
            }
            kernel.insert(kernel.end(), p[s][a].begin(), p[s][a].end());
        }
    }
    return TabularMdp(S, A, std::move(kernel), std::move(reward), gamma, std::move(rho));
}

void save_mdp(const TabularMdp& mdp, const std::filesystem::path& path) {
    write_json_file(mdp_to_json(mdp), path);
}

TabularMdp load_mdp(const std::filesystem::path& path) {
    try {
        return mdp_from_json(read_json_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

json solution_to_json(const SolutionRecord& record) {
    json doc{{"method", record.method},
             {"value", record.solution.value},
             {"policy", record.solution.policy},
             {"iterations", record.solution.iterations},
             {"residual", record.solution.residual},
             {"style", record.style}};
    doc["delta"] = record.delta ? json(*record.delta) : json(nullptr);
    return doc;
}

SolutionRecord solution_from_json(const json& doc) {
    SolutionRecord record;
    record.solution.value = require<Vector>(doc, "value");
    record.solution.policy = require<DeterministicPolicy>(doc, "policy");
    if (record.solution.value.size() != record.solution.policy.size()) {
        throw std::invalid_argument("'value' and 'policy' lengths differ");
    }
    if (doc.contains("iterations")) {
        record.solution.iterations = require<std::size_t>(doc, "iterations");
    }
    if (doc.contains("residual")) {
        record.solution.residual = require<double>(doc, "residual");
    }
    record.method = doc.value("method", std::string{});
    record.style = doc.value("style", std::string{"none"});
    if (doc.contains("delta") && !doc.at("delta").is_null()) {
        record.delta = require<double>(doc, "delta");
    }
    return record;
}

void save_solution(const SolutionRecord& record, const std::filesystem::path& path) {
    write_json_file(solution_to_json(record), path);
}

SolutionRecord load_solution(const std::filesystem::path& path) {
    try {
        return solution_from_json(read_json_file(path));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace drorl
