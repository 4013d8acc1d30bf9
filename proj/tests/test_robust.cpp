#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "drorl/baselines.hpp"
#include "drorl/errors.hpp"
#include "drorl/garnet.hpp"
#include "drorl/robust.hpp"
#include "oracle/oracles.hpp"
#include "support.hpp"

using namespace drorl;
using testing_support::random_distribution;
using testing_support::random_mdp;
using testing_support::random_vector;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double sup_diff(const ValueFunction& a, const ValueFunction& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

EmpiricalModel model_from_mdp(const TabularMdp& mdp, std::uint64_t count) {
    return {mdp.num_states(), mdp.num_actions(), mdp.kernel(), mdp.rewards(),
            std::vector<std::uint64_t>(mdp.num_states() * mdp.num_actions(), count)};
}

EmpiricalModel random_sampled_model(std::size_t ns, std::size_t na, std::size_t n,
                                    std::mt19937_64& rng) {
    const auto mdp = random_mdp(ns, na, 0.9, rng);
    return estimate_model(sample_dataset(mdp, behavior_uniform(ns, na), n, rng()));
}

}  // namespace

TEST_CASE("radius_table") {
    const RadiusStyle hoeffding(RadiusKind::Hoeffding, 0.1);
    const RadiusStyle bernstein(RadiusKind::Bernstein, 0.1);
    const std::vector<std::uint64_t> counts{0, 50, 100, 1000000};

    const auto h = radius_table(counts, hoeffding, 2, 2, 1000);
    CHECK(h[0] == 2.0);
    CHECK(h[1] == doctest::Approx(0.19206455826398416).epsilon(1e-12));
    CHECK(h[3] < h[2]);

    const auto b = radius_table(counts, bernstein, 2, 2, 1000);
    CHECK(b[0] == 2.0);
    CHECK(b[2] == doctest::Approx(0.09210340371976183).epsilon(1e-12));

    const std::vector<std::uint64_t> one{1, 0, 0, 0};
    CHECK(radius_table(one, hoeffding, 2, 2, 1)[0] == doctest::Approx(std::sqrt(std::log(40.0) / 2)));
    CHECK(radius_table(one, bernstein, 2, 2, 1)[0] == 2.0);  // log(10) > 2 clamps

    CHECK_THROWS_AS(radius_table(std::vector<std::uint64_t>(4, 0), bernstein, 2, 2, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(radius_table(counts, hoeffding, 3, 2, 10), std::invalid_argument);
    CHECK_THROWS_AS(RadiusStyle(RadiusKind::Hoeffding, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(RadiusStyle(RadiusKind::Hoeffding, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(RadiusStyle(RadiusKind::Bernstein, 1e-7), std::invalid_argument);
    CHECK_NOTHROW(RadiusStyle(RadiusKind::Bernstein, 1e-6));
    CHECK_NOTHROW(RadiusStyle(RadiusKind::Bernstein, 0.5));
}

TEST_CASE("support_function on hand instances") {
    const Vector p{0.5, 0.5};
    const Vector v{0.0, 1.0};
    CHECK(support_function(p, 0.0, v) == doctest::Approx(0.5));
    CHECK(support_function(p, 2.0, v) == 0.0);
    CHECK(support_function(p, 0.4, v) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(support_function(p, 5.0, v) == 0.0);
    CHECK(support_function(Vector{0.2, 0.3, 0.5}, 1.3, Vector{4.0, 4.0, 4.0}) == doctest::Approx(4.0));

    // Oracles agree with the frozen value.
    CHECK(oracle::support_lp(p, 0.4, v) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(oracle::support_vertices(p, 0.4, v) == doctest::Approx(0.3).epsilon(1e-12));

    CHECK_THROWS_AS(support_function(p, -0.1, v), std::invalid_argument);
    CHECK_THROWS_AS(support_function(Vector{0.5, 0.6}, 0.1, v), std::invalid_argument);
    CHECK_THROWS_AS(support_function(p, 0.1, Vector{1.0}), std::invalid_argument);
}

TEST_CASE("support_function properties") {
    std::mt19937_64 rng(100);
    std::uniform_int_distribution<std::size_t> size(1, 10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = size(rng);
        const auto p = random_distribution(n, rng, 0.3);
        const auto v = random_vector(n, 0.0, 20.0, rng);
        const double r = 2.0 * unit(rng);
        const double sigma = support_function(p, r, v);
        CHECK(sigma >= *std::min_element(v.begin(), v.end()) - 1e-12);
        CHECK(sigma <= dot(p, v) + 1e-12);

        const double c = 10.0 * unit(rng) - 5.0;
        Vector shifted = v;
        for (auto& x : shifted) x += c;
        CHECK(std::abs(support_function(p, r, shifted) - (sigma + c)) <= 1e-10);

        const double alpha = 3.0 * unit(rng);
        Vector scaled = v;
        for (auto& x : scaled) x *= alpha;
        CHECK(std::abs(support_function(p, r, scaled) - alpha * sigma) <= 1e-10);

        const double r2 = r + (2.0 - r) * unit(rng);
        CHECK(support_function(p, r2, v) <= sigma + 1e-12);
    }
}

TEST_CASE("support_function matches the LP oracle") {
    std::mt19937_64 rng(200);
    std::uniform_int_distribution<std::size_t> size(1, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = size(rng);
        const auto p = random_distribution(n, rng, 0.25);
        auto v = random_vector(n, 0.0, 20.0, rng);
        if (n > 2 && trial % 5 == 0) v[1] = v[0];  // value ties
        const double r = 2.0 * unit(rng);
        CHECK(std::abs(support_function(p, r, v) - oracle::support_lp(p, r, v)) <= 1e-9);
    }
}

TEST_CASE("the two exact oracles agree on small instances") {
    std::mt19937_64 rng(300);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 2);
        const auto p = random_distribution(n, rng, 0.2);
        const auto v = random_vector(n, 0.0, 5.0, rng);
        const double r = 2.0 * unit(rng);
        CHECK(std::abs(oracle::support_lp(p, r, v) - oracle::support_vertices(p, r, v)) <= 1e-9);
    }
    CHECK_THROWS(oracle::support_vertices(Vector(4, 0.25), 0.1, Vector(4, 0.0)));
    CHECK_THROWS(oracle::support_lp(Vector(13, 1.0 / 13), 0.1, Vector(13, 0.0)));
}

TEST_CASE("dual form") {
    const Vector p{0.5, 0.5};
    const Vector v{0.0, 1.0};
    SUBCASE("degenerate cases") {
        CHECK(support_function_dual(p, 0.0, v) == doctest::Approx(0.5));
        CHECK(support_function_dual(Vector{0.3, 0.7}, 1.1, Vector{2.5, 2.5}) == doctest::Approx(2.5));
    }
    SUBCASE("as printed differs from the primal by a factor of two in the radius") {
        const double printed = support_function_dual(p, 0.4, v);
        CHECK(printed == doctest::Approx(oracle::dual_grid(p, 0.4, v)).epsilon(1e-12));
        CHECK(printed == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(support_function(p, 0.4, v) == doctest::Approx(0.3));
        CHECK(support_function_dual(p, 0.4, v, DualScaling::HalfRadius) == doctest::Approx(0.3));
    }
    SUBCASE("random instances") {
        std::mt19937_64 rng(400);
        std::uniform_int_distribution<std::size_t> size(1, 6);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t n = size(rng);
            const auto p = random_distribution(n, rng, 0.2);
            const auto w = random_vector(n, 0.0, 3.0, rng);
            const double r = unit(rng);
            const double exact = support_function_dual(p, r, w);
            const double grid = oracle::dual_grid(p, r, w);
            CHECK(exact >= grid - 1e-12);
            CHECK(exact - grid <= 1e-4 * (1.0 + r));
            CHECK(std::abs(support_function_dual(p, r, w, DualScaling::HalfRadius) -
                           support_function(p, r, w)) <= 1e-10);
            CHECK(std::abs(support_function_dual(p, r, w) - support_function(p, std::min(2.0, 2 * r), w)) <=
                  1e-10);
        }
    }
}

TEST_CASE("robust_bellman_apply") {
    std::mt19937_64 rng(500);
    const auto mdp = random_mdp(5, 3, 0.9, rng);
    const RadiusStyle style(RadiusKind::Hoeffding, 0.1);

    SUBCASE("zero radii give the nominal backup") {
        const EmpiricalRobustModel model(model_from_mdp(mdp, 10), Vector(15, 0.0), style, 0.9);
        const auto v = random_vector(5, 0.0, 10.0, rng);
        const auto [next, pi] = robust_bellman_apply(model, v);
        for (std::size_t s = 0; s < 5; ++s) {
            double best = -1.0;
            for (std::size_t a = 0; a < 3; ++a) best = std::max(best, q_value(mdp, s, a, v));
            CHECK(next[s] == doctest::Approx(best).epsilon(1e-13));
            CHECK(q_value(mdp, s, pi[s], v) == doctest::Approx(best).epsilon(1e-13));
        }
    }
    SUBCASE("zero value returns the best reward") {
        const EmpiricalRobustModel model(model_from_mdp(mdp, 10), style, 0.9);
        const auto next = robust_bellman_apply(model, ValueFunction(5, 0.0)).first;
        for (std::size_t s = 0; s < 5; ++s) {
            CHECK(next[s] == std::max({mdp.reward(s, 0), mdp.reward(s, 1), mdp.reward(s, 2)}));
        }
    }
    SUBCASE("hand model checked through the LP oracle") {
        const EmpiricalModel base(2, 2, {0.7, 0.3, 0.2, 0.8, 0.5, 0.5, 0.0, 1.0}, {0.4, 0.1, 0.9, 0.0},
                                  {3, 5, 2, 1});
        const Vector radii{0.3, 1.2, 0.05, 2.0};
        const EmpiricalRobustModel model(base, radii, style, 0.8);
        const ValueFunction v{1.5, 4.0};
        const auto [next, pi] = robust_bellman_apply(model, v);
        for (std::size_t s = 0; s < 2; ++s) {
            double best = -1.0;
            std::size_t arg = 9;
            for (std::size_t a = 0; a < 2; ++a) {
                const double q = base.reward(s, a) + 0.8 * oracle::support_lp(base.transition(s, a), radii[s * 2 + a], v);
                if (q > best + 1e-12) {
                    best = q;
                    arg = a;
                }
            }
            CHECK(next[s] == doctest::Approx(best).epsilon(1e-12));
            CHECK(pi[s] == arg);
        }
    }
    CHECK_THROWS_AS(EmpiricalRobustModel(model_from_mdp(mdp, 1), Vector(15, 2.5), style, 0.9),
                    std::invalid_argument);
    CHECK_THROWS_AS(EmpiricalRobustModel(model_from_mdp(mdp, 1), Vector(14, 0.0), style, 0.9),
                    std::invalid_argument);
}

TEST_CASE("robust backup is a contraction") {
    std::mt19937_64 rng(600);
    const RadiusStyle style(RadiusKind::Hoeffding, 0.1);
    for (int trial = 0; trial < 100; ++trial) {
        const double gamma = 0.5 + 0.49 * std::uniform_real_distribution<double>(0, 1)(rng);
        const EmpiricalRobustModel model(random_sampled_model(6, 3, 60, rng), style, gamma);
        const auto v = random_vector(6, 0.0, 1.0 / (1 - gamma), rng);
        const auto w = random_vector(6, 0.0, 1.0 / (1 - gamma), rng);
        const auto tv = robust_bellman_apply(model, v).first;
        const auto tw = robust_bellman_apply(model, w).first;
        CHECK(sup_diff(tv, tw) <= gamma * sup_diff(v, w) + 1e-12);
    }
}

TEST_CASE("robust_value_iteration") {
    std::mt19937_64 rng(700);
    const RadiusStyle style(RadiusKind::Hoeffding, 0.1);
    const double tol = 1e-7;

    SUBCASE("zero radii match exact value iteration") {
        const auto mdp = random_mdp(6, 3, 0.9, rng);
        const EmpiricalRobustModel model(model_from_mdp(mdp, 10), Vector(18, 0.0), style, 0.9);
        const auto robust = robust_value_iteration(model, tol);
        const auto exact = exact_value_iteration(mdp, tol);
        CHECK(sup_diff(robust.value, exact.value) <= 2 * tol);
        CHECK(robust.policy == exact.policy);
    }
    SUBCASE("a state with zero reward and full radius has value zero") {
        const auto mdp = random_mdp(4, 2, 0.9, rng);
        Vector reward = mdp.rewards();
        reward[2 * 2 + 0] = reward[2 * 2 + 1] = 0.0;
        const EmpiricalModel base(4, 2, mdp.kernel(), reward, std::vector<std::uint64_t>(8, 1));
        const EmpiricalRobustModel model(base, Vector(8, 2.0), style, 0.9);
        const auto sol = robust_value_iteration(model, tol);
        CHECK(sol.value[2] == 0.0);
    }
    SUBCASE("states never sampled have value zero") {
        const auto mdp = random_mdp(5, 3, 0.9, rng);
        Vector weights(15, 0.0);
        for (std::size_t s = 0; s < 3; ++s)
            for (std::size_t a = 0; a < 3; ++a) weights[s * 3 + a] = 1.0 / 9.0;
        const auto data = sample_dataset(mdp, BehaviorDistribution(5, 3, weights), 500, 4);
        const EmpiricalRobustModel model(estimate_model(data), style, 0.9);
        const auto sol = robust_value_iteration(model, tol);
        CHECK(sol.value[3] == 0.0);
        CHECK(sol.value[4] == 0.0);
    }
    SUBCASE("robust values sit below the nominal ones on a Garnet") {
        const auto mdp = generate_garnet(5, 3, 1);
        const auto base = estimate_model(sample_dataset(mdp, behavior_uniform(5, 3), 10000, 2));
        const auto robust = robust_value_iteration(EmpiricalRobustModel(base, style, 0.95), tol);
        const auto nominal = nonrobust_empirical_vi(base, 0.95, tol);
        for (std::size_t s = 0; s < 5; ++s) CHECK(robust.value[s] <= nominal.value[s] + 2 * tol);
    }
    SUBCASE("fixed point does not depend on the starting value") {
        for (int trial = 0; trial < 10; ++trial) {
            const EmpiricalRobustModel model(random_sampled_model(6, 3, 100, rng), style, 0.9);
            IterationOptions high;
            high.initial_value = 1.0 / (1.0 - 0.9);
            const auto low_sol = robust_value_iteration(model, tol);
            const auto high_sol = robust_value_iteration(model, tol, high);
            CHECK(sup_diff(low_sol.value, high_sol.value) <= 2 * tol);
        }
    }
    SUBCASE("inflating radii lowers values") {
        for (int trial = 0; trial < 10; ++trial) {
            const EmpiricalRobustModel model(random_sampled_model(6, 3, 200, rng), style, 0.9);
            const auto base_sol = robust_value_iteration(model, 1e-10);
            const auto wide_sol = robust_value_iteration(model.scaled(1.1), 1e-10);
            for (std::size_t s = 0; s < 6; ++s) CHECK(wide_sol.value[s] <= base_sol.value[s] + 2e-10);
        }
    }
    SUBCASE("solution invariants") {
        for (double gamma : {0.0, 0.2, 0.9, 0.99}) {
            const EmpiricalRobustModel model(random_sampled_model(5, 2, 80, rng), style, gamma);
            const auto sol = robust_value_iteration(model, 1e-6);
            CHECK(sol.residual <= 1e-6);
            for (double v : sol.value) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0 / (1.0 - gamma) + 1e-9);
            }
        }
    }
}

TEST_CASE("sampled-action policy extraction") {
    const RadiusStyle bernstein(RadiusKind::Bernstein, 0.1);

    SUBCASE("exact tie resolved toward the sampled action") {
        // State 0: only action 1 sampled, and it loops with zero reward, exactly
        // like the unsampled default for action 0. State 1: both actions sampled.
        std::vector<Transition> tuples;
        for (int k = 0; k < 5; ++k) tuples.push_back({0, 1, 0, 0.0});
        for (int k = 0; k < 5; ++k) tuples.push_back({1, 0, 1, 0.7});
        for (int k = 0; k < 5; ++k) tuples.push_back({1, 1, 0, 0.2});
        const OfflineDataset data(2, 2, tuples);
        const EmpiricalRobustModel model(estimate_model(data), bernstein, 0.9);

        const auto plain = robust_value_iteration(model, 1e-8);
        const auto q = robust_q_table(model, plain.value);
        REQUIRE(q[0] == q[1]);
        CHECK(plain.policy[0] == 0);

        const auto sol = robust_value_iteration_bernstein(model, data, 1e-8);
        CHECK(sol.policy[0] == 1);
        CHECK(data.count(0, sol.policy[0]) > 0);
        CHECK(sol.value == plain.value);
    }
    SUBCASE("unvisited states keep the plain argmax") {
        const OfflineDataset data(3, 2, {{0, 1, 1, 0.5}, {1, 0, 0, 0.3}});
        const EmpiricalRobustModel model(estimate_model(data), bernstein, 0.9);
        const auto sol = robust_value_iteration_bernstein(model, data, 1e-8);
        CHECK(sol.policy[2] == 0);
        CHECK(sol.policy[0] == 1);
        CHECK(sol.policy[1] == 0);
    }
    SUBCASE("fully sampled data agrees with the plain extraction") {
        std::mt19937_64 rng(800);
        const auto mdp = random_mdp(5, 3, 0.9, rng);
        const auto data = sample_dataset(mdp, behavior_uniform(5, 3), 3000, 1);
        const EmpiricalRobustModel model(estimate_model(data), bernstein, 0.9);
        CHECK(robust_value_iteration_bernstein(model, data, 1e-8).policy ==
              robust_value_iteration(model, 1e-8).policy);
    }
    SUBCASE("random sparse datasets") {
        std::mt19937_64 rng(900);
        for (int trial = 0; trial < 100; ++trial) {
            const auto mdp = random_mdp(6, 4, 0.9, rng);
            const auto data = sample_dataset(mdp, behavior_uniform(6, 4), 12, rng());
            const EmpiricalRobustModel model(estimate_model(data), bernstein, 0.9);
            const auto sol = robust_value_iteration_bernstein(model, data, 1e-8);
            const auto q = robust_q_table(model, sol.value);
            for (std::size_t s = 0; s < 6; ++s) {
                if (data.state_counts()[s] == 0) continue;
                const double best = *std::max_element(q.begin() + static_cast<long>(s * 4),
                                                      q.begin() + static_cast<long>(s * 4 + 4));
                CHECK(data.count(s, sol.policy[s]) > 0);
                CHECK(q[s * 4 + sol.policy[s]] >= best - kSampledActionSlack);
            }
        }
    }
    SUBCASE("no sampled maximizer is reported") {
        const Vector q{1.0, 0.0};
        const std::vector<std::uint64_t> pairs{0, 1};
        const std::vector<std::uint64_t> states{1};
        CHECK_THROWS_AS(sampled_greedy_policy(q, 1, 2, pairs, states), SolverError);
        const Vector close{1.0, 1.0 - 1e-8};
        CHECK(sampled_greedy_policy(close, 1, 2, pairs, states)[0] == 1);
    }
}
