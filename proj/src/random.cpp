#include "bisimet/random.hpp"

#include <string>

namespace bisimet {

Dist random_dist(Rng& rng, Eigen::Index n) {
    Vec p(n);
    Scalar total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar u = rng.uniform01();
        p(i) = u < 0.25 ? 0.0 : u;
        total += p(i);
    }
    if (total <= 0.0) return dirac(0, n);
    return Dist(p / total);
}

Mdp random_mdp(Rng& rng, Eigen::Index n_states, Eigen::Index n_actions) {
    std::vector<std::string> states;
    for (Eigen::Index x = 0; x < n_states; ++x) states.push_back("s" + std::to_string(x));
    std::vector<Mdp::Arm> arms;
    for (Eigen::Index a = 0; a < n_actions; ++a) {
        Mdp::Arm arm;
        arm.label = "a" + std::to_string(a);
        for (Eigen::Index x = 0; x < n_states; ++x) {
            arm.rows.push_back(random_dist(rng, n_states));
        }
        Vec rewards(n_states);
        for (Eigen::Index x = 0; x < n_states; ++x) rewards(x) = rng.uniform01();
        arm.rewards = std::move(rewards);
        arms.push_back(std::move(arm));
    }
    return Mdp(std::move(states), std::move(arms));
}

PMetric random_pmetric(Rng& rng, Eigen::Index n) {
    Mat d = Mat::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        for (Eigen::Index y = x + 1; y < n; ++y) {
            const Scalar v = rng.uniform01();
            d(x, y) = v;
            d(y, x) = v;
        }
    }
    // min-plus closure enforces the triangle inequality exactly
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const Scalar via = d(i, k) + d(k, j);
                if (via < d(i, j)) d(i, j) = via;
            }
        }
    }
    return validate_pmetric(d);
}

Predicate random_predicate(Rng& rng, Eigen::Index n) {
    Vec h(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i) = rng.uniform01();
    return h;
}

}  // namespace bisimet
