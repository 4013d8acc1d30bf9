#include "drorl/mdp.hpp"

#include <Eigen/Dense>

#include <numeric>

namespace drorl {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd policy_kernel(const TabularMdp& mdp, const DeterministicPolicy& pi) {
    const auto n = static_cast<Eigen::Index>(mdp.num_states());
    MatrixXd p(n, n);
    for (Eigen::Index s = 0; s < n; ++s) {
        const auto row = mdp.transition(static_cast<std::size_t>(s), pi[static_cast<std::size_t>(s)]);
        for (Eigen::Index t = 0; t < n; ++t) {
            p(s, t) = row[static_cast<std::size_t>(t)];
        }
    }
    return p;
}

}  // namespace

void check_distribution(std::span<const double> p, const std::string& what, double tol) {
    if (p.empty()) {
        throw std::invalid_argument(what + " is empty");
    }
    double total = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument(what + " has a negative or non-finite entry");
        }
        total += x;
    }
    if (std::abs(total - 1.0) > tol) {
        throw std::invalid_argument(what + " sums to " + std::to_string(total) + ", not 1");
    }
}

TabularMdp::TabularMdp(std::size_t num_states, std::size_t num_actions, Vector kernel,
                       Vector reward, double gamma, Vector initial_dist)
    : num_states_(num_states),
      num_actions_(num_actions),
      kernel_(std::move(kernel)),
      reward_(std::move(reward)),
      gamma_(gamma),
      rho_(std::move(initial_dist)) {
    if (num_states_ == 0 || num_actions_ == 0) {
        throw std::invalid_argument("MDP needs at least one state and one action");
    }
    if (kernel_.size() != num_states_ * num_actions_ * num_states_) {
        throw std::invalid_argument("kernel has " + std::to_string(kernel_.size()) +
                                    " entries, expected S*A*S");
    }
    if (reward_.size() != num_states_ * num_actions_) {
        throw std::invalid_argument("reward has " + std::to_string(reward_.size()) +
                                    " entries, expected S*A");
    }
    if (rho_.size() != num_states_) {
        throw std::invalid_argument("initial distribution must have S entries");
    }
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
        throw std::invalid_argument("discount must lie in [0, 1)");
    }
    for (std::size_t s = 0; s < num_states_; ++s) {
        for (std::size_t a = 0; a < num_actions_; ++a) {
            check_distribution(transition(s, a),
                               "P[" + std::to_string(s) + "," + std::to_string(a) + "]");
            const double r = this->reward(s, a);
            if (!(r >= 0.0 && r <= 1.0)) {
                throw std::invalid_argument("reward r[" + std::to_string(s) + "," +
                                            std::to_string(a) + "] outside [0, 1]");
            }
        }
    }
    check_distribution(rho_, "initial distribution");
}

TabularMdp::TabularMdp(std::size_t num_states, std::size_t num_actions, Vector kernel,
                       Vector reward, double gamma)
    : TabularMdp(num_states, num_actions, std::move(kernel), std::move(reward), gamma,
                 Vector(num_states, num_states ? 1.0 / static_cast<double>(num_states) : 0.0)) {}

TabularMdp TabularMdp::with_gamma(double gamma) const {
    return TabularMdp(num_states_, num_actions_, kernel_, reward_, gamma, rho_);
}

void check_policy(const DeterministicPolicy& pi, std::size_t num_states, std::size_t num_actions) {
    if (pi.size() != num_states) {
        throw std::invalid_argument("policy has " + std::to_string(pi.size()) +
                                    " entries, expected " + std::to_string(num_states));
    }
    for (std::size_t s = 0; s < pi.size(); ++s) {
        if (pi[s] >= num_actions) {
            throw std::invalid_argument("policy action " + std::to_string(pi[s]) + " at state " +
                                        std::to_string(s) + " is out of range");
        }
    }
}

double q_value(const TabularMdp& mdp, std::size_t s, std::size_t a, const ValueFunction& v) {
    const auto row = mdp.transition(s, a);
    return mdp.reward(s, a) + mdp.gamma() * std::inner_product(row.begin(), row.end(), v.begin(), 0.0);
}

Solution exact_value_iteration(const TabularMdp& mdp, double tol, const IterationOptions& options) {
    return iterate_to_fixed_point(
        mdp.num_states(), mdp.num_actions(), mdp.gamma(), tol,
        [&mdp](const ValueFunction& v) {
            return [&mdp, &v](std::size_t s, std::size_t a) { return q_value(mdp, s, a, v); };
        },
        options);
}

ValueFunction policy_evaluation(const TabularMdp& mdp, const DeterministicPolicy& pi) {
    check_policy(pi, mdp.num_states(), mdp.num_actions());
    const auto n = static_cast<Eigen::Index>(mdp.num_states());
    MatrixXd system = MatrixXd::Identity(n, n) - mdp.gamma() * policy_kernel(mdp, pi);
    VectorXd rhs(n);
    for (Eigen::Index s = 0; s < n; ++s) {
        rhs(s) = mdp.reward(static_cast<std::size_t>(s), pi[static_cast<std::size_t>(s)]);
    }
    const VectorXd v = system.partialPivLu().solve(rhs);
    return ValueFunction(v.data(), v.data() + n);
}

double scalar_value(std::span<const double> v, std::span<const double> rho) {
    if (v.size() != rho.size()) {
        throw std::invalid_argument("value and distribution sizes differ");
    }
    return std::inner_product(v.begin(), v.end(), rho.begin(), 0.0);
}

OccupancyMeasure occupancy_measure(const TabularMdp& mdp, const DeterministicPolicy& pi) {
    check_policy(pi, mdp.num_states(), mdp.num_actions());
    const auto n = static_cast<Eigen::Index>(mdp.num_states());
    // d^T (I - gamma P_pi) = (1 - gamma) rho^T
    MatrixXd system = (MatrixXd::Identity(n, n) - mdp.gamma() * policy_kernel(mdp, pi)).transpose();
    VectorXd rhs(n);
    for (Eigen::Index s = 0; s < n; ++s) {
        rhs(s) = (1.0 - mdp.gamma()) * mdp.initial_distribution()[static_cast<std::size_t>(s)];
    }
    const VectorXd d = system.partialPivLu().solve(rhs);

    OccupancyMeasure out;
    out.state.assign(d.data(), d.data() + n);
    out.state_action.assign(mdp.num_states() * mdp.num_actions(), 0.0);
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        // clear round-off negatives
        out.state[s] = std::max(out.state[s], 0.0);
        out.state_action[s * mdp.num_actions() + pi[s]] = out.state[s];
    }
    return out;
}

ConcentrabilityReport concentrability(const TabularMdp& mdp, const DeterministicPolicy& pi_star,
                                      std::span<const double> mu) {
    const std::size_t pairs = mdp.num_states() * mdp.num_actions();
    if (mu.size() != pairs) {
        throw std::invalid_argument("behavior distribution must have S*A entries");
    }
    check_distribution(mu, "behavior distribution", 1e-10);

    const auto d = occupancy_measure(mdp, pi_star);
    const double clip = 1.0 / static_cast<double>(mdp.num_states());
    ConcentrabilityReport report;
    report.mu_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pairs; ++i) {
        if (mu[i] > 0.0) {
            report.mu_min = std::min(report.mu_min, mu[i]);
        }
        const double occ = d.state_action[i];
        if (!(occ > 0.0)) {
            continue;
        }
        if (mu[i] == 0.0) {
            report.unbounded = true;
            continue;
        }
        report.clipped = std::max(report.clipped, std::min(occ, clip) / mu[i]);
        report.unclipped = std::max(report.unclipped, occ / mu[i]);
    }
    if (report.unbounded) {
        report.clipped = std::numeric_limits<double>::infinity();
        report.unclipped = std::numeric_limits<double>::infinity();
    }
    return report;
}

}  // namespace drorl
