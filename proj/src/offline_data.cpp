#include "drorl/offline_data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "drorl/rng.hpp"

namespace drorl {

namespace {

// Index of the first cumulative weight exceeding u, skipping zero-weight
// entries so rounding in the running sum can never select them.
std::size_t inverse_cdf(std::span<const double> weights, double u) {
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) {
            continue;
        }
        last_positive = i;
        cumulative += weights[i];
        if (u < cumulative) {
            return i;
        }
    }
    return last_positive;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

template <class T>
T parse_number(std::string_view text, const std::string& context) {
    T value{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        throw std::invalid_argument(context + ": cannot parse '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? line.size() - start : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

}  // namespace

BehaviorDistribution::BehaviorDistribution(std::size_t num_states, std::size_t num_actions,
                                           Vector weights)
    : num_states_(num_states), num_actions_(num_actions), weights_(std::move(weights)) {
    if (weights_.size() != num_states_ * num_actions_) {
        throw std::invalid_argument("behavior distribution must have S*A entries");
    }
    check_distribution(weights_, "behavior distribution", 1e-10);
}

BehaviorDistribution behavior_uniform(std::size_t num_states, std::size_t num_actions) {
    const std::size_t pairs = num_states * num_actions;
    return BehaviorDistribution(num_states, num_actions,
                                Vector(pairs, pairs ? 1.0 / static_cast<double>(pairs) : 0.0));
}

BehaviorDistribution behavior_partial(const DeterministicPolicy& pi_star, std::size_t num_actions,
                                      std::size_t eta) {
    const std::size_t num_states = pi_star.size();
    check_policy(pi_star, num_states, num_actions);
    if (eta >= num_actions) {
        throw std::invalid_argument("eta is not a valid action");
    }
    const double half = 0.5 / static_cast<double>(num_states);
    Vector w(num_states * num_actions, 0.0);
    for (std::size_t s = 0; s < num_states; ++s) {
        w[s * num_actions + pi_star[s]] += half;
        w[s * num_actions + eta] += half;
    }
    return BehaviorDistribution(num_states, num_actions, std::move(w));
}

std::size_t draw_partial_action(std::size_t num_actions, std::uint64_t seed) {
    if (num_actions == 0) {
        throw std::invalid_argument("no actions to draw from");
    }
    const double u = counter_uniform(seed, 0, 0x657461);  // "eta"
    return std::min(num_actions - 1, static_cast<std::size_t>(u * static_cast<double>(num_actions)));
}

OfflineDataset::OfflineDataset(std::size_t num_states, std::size_t num_actions,
                               std::vector<Transition> transitions, std::uint64_t seed,
                               std::optional<BehaviorDistribution> mu)
    : num_states_(num_states),
      num_actions_(num_actions),
      transitions_(std::move(transitions)),
      seed_(seed),
      mu_(std::move(mu)),
      pair_counts_(num_states * num_actions, 0),
      state_counts_(num_states, 0) {
    if (num_states_ == 0 || num_actions_ == 0) {
        throw std::invalid_argument("dataset needs at least one state and one action");
    }
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        const auto& t = transitions_[i];
        if (t.state >= num_states_ || t.next_state >= num_states_ || t.action >= num_actions_) {
            throw std::invalid_argument("tuple " + std::to_string(i) + " has an out-of-range index");
        }
        ++pair_counts_[t.state * num_actions_ + t.action];
        ++state_counts_[t.state];
    }
}

OfflineDataset sample_dataset(const TabularMdp& mdp, const BehaviorDistribution& mu,
                              std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("dataset size must be at least 1");
    }
    if (mu.num_states() != mdp.num_states() || mu.num_actions() != mdp.num_actions()) {
        throw std::invalid_argument("behavior distribution shape does not match the MDP");
    }
    const std::size_t num_actions = mdp.num_actions();
    std::vector<Transition> tuples(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pair = inverse_cdf(mu.weights(), counter_uniform(seed, i, 0));
        const std::size_t s = pair / num_actions;
        const std::size_t a = pair % num_actions;
        const std::size_t next = inverse_cdf(mdp.transition(s, a), counter_uniform(seed, i, 1));
        tuples[i] = Transition{s, a, next, mdp.reward(s, a)};
    }
    return OfflineDataset(mdp.num_states(), num_actions, std::move(tuples), seed, mu);
}

EmpiricalModel::EmpiricalModel(std::size_t num_states, std::size_t num_actions, Vector kernel,
                               Vector reward, std::vector<std::uint64_t> counts)
    : num_states_(num_states),
      num_actions_(num_actions),
      kernel_(std::move(kernel)),
      reward_(std::move(reward)),
      counts_(std::move(counts)) {
    if (kernel_.size() != num_states_ * num_actions_ * num_states_ ||
        reward_.size() != num_states_ * num_actions_ || counts_.size() != num_states_ * num_actions_) {
        throw std::invalid_argument("empirical model tables have inconsistent shapes");
    }
    for (std::size_t s = 0; s < num_states_; ++s) {
        for (std::size_t a = 0; a < num_actions_; ++a) {
            check_distribution(transition(s, a), "P_hat row");
        }
    }
}

std::uint64_t EmpiricalModel::total_count() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

TabularMdp EmpiricalModel::to_mdp(double gamma) const {
    return TabularMdp(num_states_, num_actions_, kernel_, reward_, gamma);
}

EmpiricalModel estimate_model(const OfflineDataset& data) {
    const std::size_t S = data.num_states();
    const std::size_t A = data.num_actions();
    std::vector<std::uint64_t> transitions(S * A * S, 0);
    Vector reward(S * A, 0.0);
    std::vector<bool> seen(S * A, false);
    for (const auto& t : data.transitions()) {
        const std::size_t pair = t.state * A + t.action;
        if (seen[pair] && reward[pair] != t.reward) {
            throw std::invalid_argument("inconsistent rewards at (" + std::to_string(t.state) + "," +
                                        std::to_string(t.action) + "): dataset is corrupted");
        }
        seen[pair] = true;
        reward[pair] = t.reward;
        ++transitions[pair * S + t.next_state];
    }

    Vector kernel(S * A * S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t pair = s * A + a;
            const std::uint64_t n = data.pair_counts()[pair];
            if (n == 0) {
                kernel[pair * S + s] = 1.0;
                continue;
            }
            for (std::size_t next = 0; next < S; ++next) {
                kernel[pair * S + next] =
                    static_cast<double>(transitions[pair * S + next]) / static_cast<double>(n);
            }
        }
    }
    // Row sums of count ratios can be off by a few ulps; the model check
    // uses the same 1e-12 tolerance as TabularMdp.
    return EmpiricalModel(S, A, std::move(kernel), std::move(reward), data.pair_counts());
}

void save_dataset_csv(const OfflineDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "#S=" << data.num_states() << ",A=" << data.num_actions() << ",seed=" << data.seed()
        << '\n';
    for (const auto& t : data.transitions()) {
        out << t.state << ',' << t.action << ',' << t.next_state << ',' << format_double(t.reward)
            << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

OfflineDataset load_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("#", 0) != 0) {
        throw std::invalid_argument(path.string() + ": missing '#S=..,A=..,seed=..' header");
    }
    std::size_t S = 0;
    std::size_t A = 0;
    std::uint64_t seed = 0;
    bool have_s = false;
    bool have_a = false;
    for (auto field : split(std::string_view(line).substr(1), ',')) {
        const auto eq = field.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument(path.string() + ": malformed header field '" +
                                        std::string(field) + "'");
        }
        const auto key = field.substr(0, eq);
        const auto value = field.substr(eq + 1);
        if (key == "S") {
            S = parse_number<std::size_t>(value, path.string());
            have_s = true;
        } else if (key == "A") {
            A = parse_number<std::size_t>(value, path.string());
            have_a = true;
        } else if (key == "seed") {
            seed = parse_number<std::uint64_t>(value, path.string());
        }
    }
    if (!have_s || !have_a) {
        throw std::invalid_argument(path.string() + ": header must define S and A");
    }

    std::vector<Transition> tuples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 4) {
            throw std::invalid_argument(where + ": expected s,a,s_next,r");
        }
        tuples.push_back(Transition{parse_number<std::size_t>(fields[0], where),
                                    parse_number<std::size_t>(fields[1], where),
                                    parse_number<std::size_t>(fields[2], where),
                                    parse_number<double>(fields[3], where)});
    }
    return OfflineDataset(S, A, std::move(tuples), seed);
}

}  // namespace drorl
