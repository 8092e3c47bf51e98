#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advlab/losses.hpp"
#include "advlab/nn.hpp"

namespace advlab {

/// Finite tau-net of the l-inf ball B_eps(0), product of per-dimension centers.
struct Cover {
    double eps = 0.0;
    double tau = 0.0;
    int d = 1;
    std::vector<std::vector<double>> offsets;  // each in B_eps(0)
    std::size_t cardinality() const { return offsets.size(); }
};

enum class AttackMethod { None, Cover, Pgd, Brute };

struct AttackConfig {
    double eps = 0.0;
    AttackMethod method = AttackMethod::Pgd;
    // cover
    double tau = 0.0;           // 0 means the default tau = eps / max(n, 10)
    // pgd
    int steps = 20;
    double step_size = 0.0;     // 0 means the default eps / 4
    int restarts = 3;
    // brute
    double resolution = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
    std::string method_name() const;
};

struct AttackResult {
    std::vector<double> x_adv;
    double value = 0.0;  // loss at x_adv, recomputed exactly
    std::string method;
};

/// Centers -eps + tau(2k+1), k = 0..ceil(eps/tau)-1, last center clamped to
/// eps - tau so the right edge stays covered; product over dimensions.
Cover build_cover(double eps, double tau, int d, std::size_t budget = 1000000);

/// Argmax of the loss over the cover offsets (ties to the lowest index); the
/// clean point replaces the winner only when strictly better. Undershoots the
/// exact sup by at most lip1(loss) * kappa(f) * tau.
AttackResult attack_cover(const NetworkParams& f, const LossSpec& loss,
                          const std::vector<double>& x, double y, const Cover& cover);

/// Sign-gradient ascent with random restarts; a lower bound of the sup.
AttackResult attack_pgd(const NetworkParams& f, const LossSpec& loss,
                        const std::vector<double>& x, double y, const AttackConfig& cfg,
                        std::uint64_t stream = 0);

/// Exhaustive grid max, d <= 2 only; the desk-scale oracle for the exact sup.
AttackResult attack_brute(const NetworkParams& f, const LossSpec& loss,
                          const std::vector<double>& x, double y, double eps, double resolution);

/// Certified undershoot of the tau-cover attack: lip1(loss) * kappa(f) * tau.
double certified_gap(const LossSpec& loss, const NetworkParams& f, double tau);

/// Dispatch on cfg.method; n is the sample count used for the default tau.
AttackResult run_attack(const NetworkParams& f, const LossSpec& loss,
                        const std::vector<double>& x, double y, const AttackConfig& cfg,
                        std::size_t n = 10, std::uint64_t stream = 0);

/// Bracketed extremes of f itself over B_eps(x) using the configured method
/// (cover/brute evaluate the grid; pgd ascends +f and -f). Returns {min, max}.
std::pair<double, double> bracket_f(const NetworkParams& f, const std::vector<double>& x,
                                    const AttackConfig& cfg, std::size_t n = 10,
                                    std::uint64_t stream = 0);

}  // namespace advlab
