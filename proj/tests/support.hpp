// Shared fixtures for the unit tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "drorl/mdp.hpp"
#include "drorl/offline_data.hpp"

namespace testing_support {

inline std::vector<double> random_distribution(std::size_t n, std::mt19937_64& rng,
                                               double sparsity = 0.0) {
    std::exponential_distribution<double> draw(1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<double> p(n, 0.0);
    double total = 0.0;
    while (total == 0.0) {
        for (auto& x : p) {
            x = coin(rng) < sparsity ? 0.0 : draw(rng);
            total += x;
        }
    }
    for (auto& x : p) x /= total;
    return p;
}

inline std::vector<double> random_vector(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline drorl::TabularMdp random_mdp(std::size_t ns, std::size_t na, double gamma,
                                    std::mt19937_64& rng) {
    std::vector<double> kernel;
    for (std::size_t k = 0; k < ns * na; ++k) {
        const auto row = random_distribution(ns, rng, 0.3);
        kernel.insert(kernel.end(), row.begin(), row.end());
    }
    return {ns, na, kernel, random_vector(ns * na, 0.0, 1.0, rng), gamma,
            random_distribution(ns, rng)};
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("drorl_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

}  // namespace testing_support
