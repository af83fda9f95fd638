#pragma once

#include <string>

#include "hams/core.hpp"
#include "hams/kernel.hpp"
#include "hams/targets.hpp"

namespace hams {

enum class MaKind { BAOAB, ABOBA, BP };

std::string to_string(MaKind kind);
MaKind parse_ma_kind(const std::string& s);

// Standard normal inputs of one proposal; z2 is used by BP only.
struct MaNoise {
    Vec z1;
    Vec z2;
};

struct MaProposal {
    PhaseState proposed;
    double delta_g = 0.0;
};

// Proposal and closed-form Delta G for carryover c in [0, 1].
MaProposal ma_propose_with_noise(MaKind kind, const TargetModel& target, const PhaseState& state,
                                 double epsilon, double c, const MaNoise& noise);

// One accept/reject step with c = exp(-eta eps). Draws the uniform first, then
// the normals (BP: z1 then z2). On rejection the momentum is negated.
StepInfo ma_step(MaKind kind, const TargetModel& target, PhaseState& state, double epsilon,
                 double eta, Rng& rng);

struct DeltaGCheck {
    double closed_form = 0.0;
    // H(x*, u*) - H(x0, u0) + |Z*|^2 / 2 - |Z0|^2 / 2 with the backward noise
    // Z* reconstructed from the proposal.
    double direct = 0.0;
};

// Needs c < 1 so that the backward noise is defined.
DeltaGCheck ma_delta_g_crosscheck(MaKind kind, const TargetModel& target, const PhaseState& state,
                                  double epsilon, double eta, const MaNoise& noise);

// Cached-gradient Metropolis-adjusted kernel.
class MaKernel : public Kernel {
public:
    MaKernel(MaKind kind, double epsilon, double c, std::string label = "");

    static MaKernel with_friction(MaKind kind, double epsilon, double eta, std::string label = "");

    StepInfo step(const TargetModel& target, ChainState& state, Rng& rng) override;
    std::string name() const override { return label_; }

    MaKind kind() const { return kind_; }
    double epsilon() const { return eps_; }
    double carryover() const { return c_; }

private:
    MaKind kind_;
    double eps_;
    double c_;
    std::string label_;
    Vec z1_, z2_, up_, xs_, gs_, us_, xt_, gt_;
};

}  // namespace hams
