#ifndef COAXDISP_TEST_RANDOM_STACK_HPP
#define COAXDISP_TEST_RANDOM_STACK_HPP

#include <coaxdisp/model.hpp>

#include <random>

namespace coaxdisp::oracle {

// Conductor core plus n-1 layers alternating at random between dielectric, weakly
// conducting and metal; radii between 1 mm and a few cm.
inline layer_stack random_stack(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    layer_stack s;
    double r = 1e-3 * (1.0 + 4.0 * u(rng));
    s.layers.push_back({"core", r, 1.0, std::pow(10.0, 6.0 + 1.7 * u(rng)), 1.0, false});
    for (int i = 1; i < n; ++i) {
        r *= 1.05 + 0.6 * u(rng);
        const double pick = u(rng);
        const double sigma = pick < 0.5 ? 0.0 : pick < 0.75 ? std::pow(10.0, -3.0 + 3.0 * u(rng)) : std::pow(10.0, 6.0 + u(rng));
        s.layers.push_back({"l" + std::to_string(i), r, 1.0 + 5.0 * u(rng), sigma, u(rng) < 0.2 ? 1.0 + 50.0 * u(rng) : 1.0, false});
    }
    s.exterior = {"exterior", 0.0, 1.0 + 3.0 * u(rng), 0.0, 1.0, false};
    return s;
}

} // namespace coaxdisp::oracle

#endif
