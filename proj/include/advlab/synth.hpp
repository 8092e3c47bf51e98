#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace advlab {

/// Random cosine series f0(x) = s * sum_k c_k cos(pi <m_k, x> + phi_k) with
/// coefficient decay |c_k| ~ ||m_k||^(-alpha-1). The scale s is set so that
/// the certified bounds ||f0||_inf <= 0.8 and Lip(f0) <= 1 hold.
struct HolderTarget {
    int d = 1;
    double alpha = 1.0;
    int J = 1;
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::vector<std::vector<int>> modes;   // m_k, integer frequency vectors
    std::vector<double> coeffs;            // c_k
    std::vector<double> phases;            // phi_k

    double eval(const std::vector<double>& x) const;
    std::vector<double> grad(const std::vector<double>& x) const;
    /// Global bound sum_k s|c_k| pi ||m_k||_1, dominates Lip wrt ||.||_inf.
    double lipschitz_bound() const;
    /// Global bound sum_k s|c_k| on the sup norm.
    double sup_bound() const;
};

struct Dataset {
    std::vector<std::vector<double>> X;  // points in [eps, 1-eps]^d
    std::vector<double> Y;               // in [-1, 1]
    int d = 1;
    double eps = 0.0;
    std::uint64_t seed = 0;
    std::string generator;

    std::size_t size() const { return X.size(); }
    void validate() const;
};

/// Posterior eta(x) = P(Y=1 | X=x). Either a constant or a squash of a smooth
/// base function pushed strictly outside [1/2 - c, 1/2 + c].
struct PosteriorSpec {
    bool constant = false;
    double constant_value = 0.5;
    HolderTarget base;
    double margin_c = 0.1;

    static PosteriorSpec constant_eta(double p);
    static PosteriorSpec squashed(HolderTarget base, double c);
    double eta(const std::vector<double>& x) const;
};

HolderTarget make_holder_target(int d, double alpha, int J, std::uint64_t seed);

/// Regression sample Y = f0(X) + noise, noise uniform on [-sigma, sigma],
/// X i.i.d. uniform on the eps-shrunk cube.
Dataset sample_regression(const HolderTarget& target, double sigma, std::size_t n, double eps,
                          std::uint64_t seed);

Dataset sample_classification(const PosteriorSpec& post, std::size_t n, double eps, std::uint64_t seed);

struct McEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
};

/// Monte Carlo estimate of E[min(eta(X), 1-eta(X))] over uniform X.
McEstimate bayes_risk(const PosteriorSpec& post, std::size_t mc_n, std::uint64_t seed);

/// CSV (columns x_1..x_d,y) plus a JSON metadata sidecar at path + ".json".
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace advlab
