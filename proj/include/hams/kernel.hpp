#pragma once

#include <cmath>
#include <string>

#include "hams/core.hpp"
#include "hams/targets.hpp"

namespace hams {

// Chain position, momentum, and the cached potential/gradient at x.
struct ChainState {
    Vec x;
    Vec u;
    double U = 0.0;
    Vec grad;
    bool cached = false;
};

struct StepInfo {
    bool accepted = false;
    double delta_g = 0.0;
    // min(1, exp(-delta_g))
    double alpha = 1.0;
};

inline double accept_probability(double delta_g)
{
    return delta_g <= 0.0 ? 1.0 : std::exp(-delta_g);
}

// Evaluates U and its gradient at state.x unless already cached. Kernels that
// only keep U (cached with an empty grad) trigger a fresh evaluation.
void refresh_cache(const TargetModel& target, ChainState& state);

// Markov kernel on (x, u) with generalized Metropolis-Hastings acceptance.
class Kernel {
public:
    virtual ~Kernel() = default;
    virtual StepInfo step(const TargetModel& target, ChainState& state, Rng& rng) = 0;
    virtual std::string name() const = 0;
};

}  // namespace hams
