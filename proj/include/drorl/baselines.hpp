#pragma once

#include "drorl/mdp.hpp"
#include "drorl/offline_data.hpp"

namespace drorl {

/// Penalty parameters of the lower-confidence-bound baseline.
class LcbConfig {
public:
    explicit LcbConfig(double delta, double bonus_scale = 1.0);

    double delta() const { return delta_; }
    double bonus_scale() const { return bonus_scale_; }

private:
    double delta_;
    double bonus_scale_;
};

/// b(s,a) = min{1/(1-g), c_b sqrt(log(S A N / delta) / max(N(s,a), 1)) / (1-g)},
/// and 1/(1-g) for unvisited pairs. Flat s * A + a.
Vector lcb_bonus(const EmpiricalModel& model, const LcbConfig& cfg, double gamma);

/// Value iteration on max(0, r_hat - b) + gamma P_hat^T V.
Solution lcb_value_iteration(const EmpiricalModel& model, const LcbConfig& cfg, double gamma,
                             double tol);

/// Plain value iteration on the empirical MDP (P_hat, r_hat).
Solution nonrobust_empirical_vi(const EmpiricalModel& model, double gamma, double tol);

}  // namespace drorl
