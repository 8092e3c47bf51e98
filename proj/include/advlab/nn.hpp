#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace advlab {

/// Shape of a dense ReLU network: d -> hidden_widths... -> 1.
struct Architecture {
    int input_dim = 1;
    std::vector<int> hidden_widths;  // length L, max entry is the width W

    int depth() const { return static_cast<int>(hidden_widths.size()); }
    int width() const;
    void validate() const;  // throws std::invalid_argument on bad dims
};

/// One affine layer. For the final layer `b` is empty (output is A*x only).
struct Layer {
    std::vector<std::vector<double>> A;  // rows x cols
    std::vector<double> b;
};

/// Immutable once built; all evaluation functions are pure.
struct NetworkParams {
    Architecture arch;
    std::vector<Layer> layers;  // size L+1, last layer has no bias

    void validate() const;
};

struct NormBudget {
    double K;
    explicit NormBudget(double k) : K(k) {
        if (!(K >= 1.0)) throw std::invalid_argument("NormBudget: K must be >= 1");
    }
};

/// Gradients of the scalar output with respect to input and every parameter.
struct Gradients {
    std::vector<double> input;                     // d-vector
    std::vector<std::vector<std::vector<double>>> dA;  // per layer, same shape as A
    std::vector<std::vector<double>> db;               // per layer (empty for final)
};

double forward(const NetworkParams& params, const std::vector<double>& x);

/// Reverse-mode gradients of g_theta at x. ReLU subgradient at 0 is 0.
Gradients backward(const NetworkParams& params, const std::vector<double>& x);

/// Max-row-sum operator norm ||A|| = sup_{||x||_inf<=1} ||Ax||_inf.
double row_sum_norm(const std::vector<std::vector<double>>& A, const std::vector<double>* bias = nullptr);

/// Weight-norm product ||A_L|| * prod_i max{||(A_i, b_i)||, 1}; a Lipschitz
/// certificate: Lip(g_theta) <= kappa(theta).
double kappa(const NetworkParams& params);

/// Projects onto kappa <= K by rescaling the final layer only (kappa is
/// linear in ||A_L||, so this is exact and leaves hidden layers untouched).
NetworkParams project_kappa(const NetworkParams& params, const NormBudget& budget);

/// Sampled lower bound on Lip(g_theta): max over pairs of the difference
/// quotient in the sup norm. Coincident pairs are skipped.
double empirical_lipschitz(const NetworkParams& params,
                           const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs);

/// Random params, entries uniform in [-1/fan_in, 1/fan_in], then one
/// projection to the budget.
NetworkParams random_params(const Architecture& arch, std::uint64_t seed, const NormBudget& budget);
NetworkParams random_params(const Architecture& arch, std::uint64_t seed);

std::string to_json(const NetworkParams& params);
NetworkParams params_from_json(const std::string& text);

}  // namespace advlab
