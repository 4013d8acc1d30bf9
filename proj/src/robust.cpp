#include "drorl/robust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drorl {

namespace {

// State indices sorted by ascending value, ties by ascending index.
std::vector<std::size_t> ascending_order(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&v](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    return order;
}

// Greedy primal: shift t = min(R/2, mass outside the minimal-value set) onto
// the minimal state, taking it from the largest values first.
double support_sorted(std::span<const double> p_hat, double radius, std::span<const double> v,
                      std::span<const std::size_t> order) {
    const std::size_t n = v.size();
    const double v_min = v[order.front()];

    double min_set_mass = 0.0;
    std::size_t boundary = 0;  // first position in `order` above v_min
    while (boundary < n && v[order[boundary]] == v_min) {
        min_set_mass += p_hat[order[boundary]];
        ++boundary;
    }

    // Accumulate q^T v from the moved masses so a full transfer onto a zero
    // minimum gives exactly zero.
    const double half = std::min(radius, 2.0) / 2.0;
    if (half >= 1.0 - min_set_mass) {
        return v_min;  // every unit of mass can reach the minimum
    }
    double budget = half;
    double moved_total = 0.0;
    double value = 0.0;
    for (std::size_t pos = n; pos > boundary; --pos) {
        const std::size_t state = order[pos - 1];
        const double moved = std::min(budget, p_hat[state]);
        budget -= moved;
        moved_total += moved;
        value += (p_hat[state] - moved) * v[state];
    }
    value += (min_set_mass + moved_total) * v_min;
    return value;
}

void check_support_inputs(std::span<const double> p_hat, double radius, std::span<const double> v) {
    if (!(radius >= 0.0)) {
        throw std::invalid_argument("uncertainty radius must be nonnegative");
    }
    if (p_hat.size() != v.size()) {
        throw std::invalid_argument("distribution and value sizes differ");
    }
    check_distribution(p_hat, "nominal distribution");
}

}  // namespace

std::string to_string(RadiusKind kind) {
    switch (kind) {
    case RadiusKind::Hoeffding:
        return "hoeffding";
    case RadiusKind::Bernstein:
        return "bernstein";
    }
    return "unknown";
}

RadiusStyle::RadiusStyle(RadiusKind kind, double delta) : kind_(kind), delta_(delta) {
    if (!(delta >= 1e-6 && delta <= 0.5)) {
        throw std::invalid_argument("delta must lie in [1e-6, 0.5], got " + std::to_string(delta));
    }
}

Vector radius_table(std::span<const std::uint64_t> counts, const RadiusStyle& style,
                    std::size_t num_states, std::size_t num_actions, std::uint64_t total_count) {
    if (counts.size() != num_states * num_actions) {
        throw std::invalid_argument("count table must have S*A entries");
    }
    if (style.kind() == RadiusKind::Bernstein && total_count < 1) {
        throw std::invalid_argument("Bernstein radius needs at least one sample");
    }
    const double pairs = static_cast<double>(num_states * num_actions);
    Vector radii(counts.size(), 2.0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) {
            continue;
        }
        const double n = static_cast<double>(counts[i]);
        double r = 2.0;
        if (style.kind() == RadiusKind::Hoeffding) {
            r = std::sqrt(std::log(pairs / style.delta()) / (2.0 * n));
        } else {
            r = std::log(static_cast<double>(total_count) / style.delta()) / n;
        }
        radii[i] = std::min(2.0, r);
    }
    return radii;
}

double support_function(std::span<const double> p_hat, double radius, std::span<const double> v) {
    check_support_inputs(p_hat, radius, v);
    const auto order = ascending_order(v);
    return support_sorted(p_hat, radius, v, order);
}

double support_function_dual(std::span<const double> p_hat, double radius,
                             std::span<const double> v, DualScaling scaling) {
    check_support_inputs(p_hat, radius, v);
    const double weight = scaling == DualScaling::AsPrinted ? radius : radius / 2.0;
    const auto order = ascending_order(v);
    const std::size_t n = v.size();
    const double v_min = v[order.front()];

    // For theta = v[order[k]]: sum_i p_i min(v_i, theta)
    //   = (sum over the first k+1 sorted of p_i v_i) + theta * (mass above).
    double best = -std::numeric_limits<double>::infinity();
    double below = 0.0;
    double mass_below = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t state = order[k];
        below += p_hat[state] * v[state];
        mass_below += p_hat[state];
        const double theta = v[state];
        const double value =
            below + theta * std::max(0.0, 1.0 - mass_below) - weight * (theta - v_min);
        best = std::max(best, value);
    }
    return best;
}

EmpiricalRobustModel::EmpiricalRobustModel(EmpiricalModel base, RadiusStyle style, double gamma)
    : EmpiricalRobustModel(base,
                           radius_table(base.counts(), style, base.num_states(),
                                        base.num_actions(), base.total_count()),
                           style, gamma) {}

EmpiricalRobustModel::EmpiricalRobustModel(EmpiricalModel base, Vector radii, RadiusStyle style,
                                           double gamma)
    : base_(std::move(base)), radii_(std::move(radii)), style_(style), gamma_(gamma) {
    if (radii_.size() != base_.num_states() * base_.num_actions()) {
        throw std::invalid_argument("radius table must have S*A entries");
    }
    for (double r : radii_) {
        if (!(r >= 0.0 && r <= 2.0)) {
            throw std::invalid_argument("radii must lie in [0, 2]");
        }
    }
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
        throw std::invalid_argument("discount must lie in [0, 1)");
    }
}

EmpiricalRobustModel EmpiricalRobustModel::scaled(double factor) const {
    Vector radii = radii_;
    for (double& r : radii) {
        r = std::min(2.0, factor * r);
    }
    return EmpiricalRobustModel(base_, std::move(radii), style_, gamma_);
}

namespace {

// Binds v once per sweep: one sort, then O(S) per pair.
auto robust_binder(const EmpiricalRobustModel& model) {
    return [&model](const ValueFunction& v) {
        return [&model, &v, order = ascending_order(v)](std::size_t s, std::size_t a) {
            return model.base().reward(s, a) +
                   model.gamma() *
                       support_sorted(model.base().transition(s, a), model.radius(s, a), v, order);
        };
    };
}

void check_value_size(const EmpiricalRobustModel& model, const ValueFunction& v) {
    if (v.size() != model.num_states()) {
        throw std::invalid_argument("value function has the wrong number of states");
    }
}

}  // namespace

Vector robust_q_table(const EmpiricalRobustModel& model, const ValueFunction& v) {
    check_value_size(model, v);
    const auto q = robust_binder(model)(v);
    Vector out(model.num_states() * model.num_actions());
    for (std::size_t s = 0; s < model.num_states(); ++s) {
        for (std::size_t a = 0; a < model.num_actions(); ++a) {
            out[s * model.num_actions() + a] = q(s, a);
        }
    }
    return out;
}

std::pair<ValueFunction, DeterministicPolicy> robust_bellman_apply(const EmpiricalRobustModel& model,
                                                                   const ValueFunction& v) {
    check_value_size(model, v);
    return greedy_backup(model.num_states(), model.num_actions(), robust_binder(model)(v));
}

Solution robust_value_iteration(const EmpiricalRobustModel& model, double tol,
                                const IterationOptions& options) {
    return iterate_to_fixed_point(model.num_states(), model.num_actions(), model.gamma(), tol,
                                  robust_binder(model), options);
}

DeterministicPolicy sampled_greedy_policy(std::span<const double> q, std::size_t num_states,
                                          std::size_t num_actions,
                                          std::span<const std::uint64_t> pair_counts,
                                          std::span<const std::uint64_t> state_counts) {
    if (q.size() != num_states * num_actions || pair_counts.size() != q.size() ||
        state_counts.size() != num_states) {
        throw std::invalid_argument("Q table and count shapes differ");
    }
    DeterministicPolicy pi(num_states, 0);
    for (std::size_t s = 0; s < num_states; ++s) {
        const auto row = q.subspan(s * num_actions, num_actions);
        const auto top = std::max_element(row.begin(), row.end());  // first maximizer
        pi[s] = static_cast<std::size_t>(top - row.begin());
        if (state_counts[s] == 0) {
            continue;
        }
        // Best sampled action. It is an exact maximizer when the intersection
        // is nonempty, otherwise the closest one to the max.
        std::size_t best = num_actions;
        for (std::size_t a = 0; a < num_actions; ++a) {
            if (pair_counts[s * num_actions + a] > 0 && (best == num_actions || row[a] > row[best])) {
                best = a;
            }
        }
        if (best == num_actions || *top - row[best] > kSampledActionSlack) {
            throw SolverError("state " + std::to_string(s) +
                              " has samples but no sampled action attains the robust backup max");
        }
        pi[s] = best;
    }
    return pi;
}

Solution robust_value_iteration_bernstein(const EmpiricalRobustModel& model,
                                          const OfflineDataset& data, double tol,
                                          const IterationOptions& options) {
    if (data.num_states() != model.num_states() || data.num_actions() != model.num_actions()) {
        throw std::invalid_argument("dataset shape does not match the model");
    }
    Solution out = robust_value_iteration(model, tol, options);
    const Vector q = robust_q_table(model, out.value);
    out.policy = sampled_greedy_policy(q, model.num_states(), model.num_actions(), data.pair_counts(),
                                       data.state_counts());
    return out;
}

}  // namespace drorl
