#include "drorl/baselines.hpp"

#include <cmath>
#include <numeric>

namespace drorl {

LcbConfig::LcbConfig(double delta, double bonus_scale) : delta_(delta), bonus_scale_(bonus_scale) {
    if (!(delta >= 1e-6 && delta <= 0.5)) {
        throw std::invalid_argument("LCB delta must lie in [1e-6, 0.5]");
    }
    if (!(bonus_scale > 0.0) || !std::isfinite(bonus_scale)) {
        throw std::invalid_argument("LCB bonus scale must be positive");
    }
}

Vector lcb_bonus(const EmpiricalModel& model, const LcbConfig& cfg, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("discount must lie in [0, 1)");
    }
    const double horizon = 1.0 / (1.0 - gamma);
    const double total = static_cast<double>(std::max<std::uint64_t>(model.total_count(), 1));
    const double log_term = std::log(static_cast<double>(model.num_states() * model.num_actions()) *
                                     total / cfg.delta());
    Vector bonus(model.counts().size(), horizon);
    for (std::size_t i = 0; i < bonus.size(); ++i) {
        const std::uint64_t n = model.counts()[i];
        if (n == 0) {
            continue;
        }
        const double b = cfg.bonus_scale() * std::sqrt(log_term / static_cast<double>(n)) * horizon;
        bonus[i] = std::min(horizon, b);
    }
    return bonus;
}

Solution lcb_value_iteration(const EmpiricalModel& model, const LcbConfig& cfg, double gamma,
                             double tol) {
    const Vector bonus = lcb_bonus(model, cfg, gamma);
    const std::size_t A = model.num_actions();
    Vector penalized(bonus.size());
    for (std::size_t i = 0; i < bonus.size(); ++i) {
        penalized[i] = std::max(0.0, model.rewards()[i] - bonus[i]);
    }
    return iterate_to_fixed_point(
        model.num_states(), A, gamma, tol,
        [&](const ValueFunction& v) {
            return [&, A](std::size_t s, std::size_t a) {
                const auto row = model.transition(s, a);
                return penalized[s * A + a] +
                       gamma * std::inner_product(row.begin(), row.end(), v.begin(), 0.0);
            };
        });
}

Solution nonrobust_empirical_vi(const EmpiricalModel& model, double gamma, double tol) {
    return exact_value_iteration(model.to_mdp(gamma), tol);
}

}  // namespace drorl
