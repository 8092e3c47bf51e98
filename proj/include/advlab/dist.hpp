#pragma once

#include <vector>

#include "advlab/losses.hpp"
#include "advlab/nn.hpp"
#include "advlab/rational.hpp"

namespace advlab {

/// Finite-support distribution on the regular grid of pitch h in [0,1]^d.
struct DiscreteAtom {
    std::vector<double> x;  // grid point
    double y = 1.0;
    Rational mass{1};
};

struct DiscreteDistribution {
    std::vector<DiscreteAtom> atoms;
    Rational pitch{1, 50};  // grid pitch h
    int d = 1;

    void validate() const;  // masses sum to 1 exactly, atoms distinct
};

struct GammaInstance {
    DiscreteDistribution base;
    double eps = 0.0;
};

/// Exact pointwise-sup adversarial risk restricted to the grid:
/// sum of mass * max over grid points within the l-inf eps-ball of the loss.
double adversarial_risk_discrete(const NetworkParams& f, const LossSpec& loss,
                                 const DiscreteDistribution& P, double eps);

/// Sup over grid-supported distributional adversaries (W_inf(Q_y, P_y) <= eps
/// per label): brute force over per-atom relocations, enumerating the full
/// cube grid and filtering by the ball constraint.
double dp_sup_risk(const NetworkParams& f, const LossSpec& loss, const GammaInstance& inst);

/// Best value over mass-splitting allocations of one atom across its ball
/// grid points in units of mass/denominator. Linearity makes this tie with
/// pointwise relocation; exposed so tests can confirm the extreme-point
/// argument instance-wise.
double split_sup_risk(const NetworkParams& f, const LossSpec& loss, const GammaInstance& inst,
                      int denominator = 16);

/// Bottleneck matching distance for equal-count, equal-mass atom lists under
/// d_Z = ||x1-x2||_inf + |y1-y2|.
double w_inf_discrete(const DiscreteDistribution& P, const DiscreteDistribution& Q);

/// Exact min-cost transport under d_Z with rational masses (scaled to integer
/// units, successive shortest paths).
double w1_discrete(const DiscreteDistribution& P, const DiscreteDistribution& Q);

struct EquivalenceReport {
    bool equal = false;
    double lhs = 0.0;  // pointwise adversarial risk
    double rhs = 0.0;  // distribution-perturbing sup risk
};

EquivalenceReport verify_equivalence(const GammaInstance& inst, const NetworkParams& f,
                                     const LossSpec& loss);

}  // namespace advlab
