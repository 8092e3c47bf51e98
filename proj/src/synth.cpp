#include "advlab/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "advlab/rng.hpp"
#include "json.hpp"

namespace advlab {

double HolderTarget::eval(const std::vector<double>& x) const {
    double s = 0.0;
    for (int k = 0; k < J; ++k) {
        double dot = 0.0;
        for (int i = 0; i < d; ++i) dot += modes[k][i] * x[i];
        s += coeffs[k] * std::cos(std::numbers::pi * dot + phases[k]);
    }
    return scale * s;
}

std::vector<double> HolderTarget::grad(const std::vector<double>& x) const {
    std::vector<double> g(d, 0.0);
    for (int k = 0; k < J; ++k) {
        double dot = 0.0;
        for (int i = 0; i < d; ++i) dot += modes[k][i] * x[i];
        const double sn = -scale * coeffs[k] * std::numbers::pi * std::sin(std::numbers::pi * dot + phases[k]);
        for (int i = 0; i < d; ++i) g[i] += sn * modes[k][i];
    }
    return g;
}

double HolderTarget::lipschitz_bound() const {
    double s = 0.0;
    for (int k = 0; k < J; ++k) {
        double l1 = 0.0;
        for (int i = 0; i < d; ++i) l1 += std::abs(modes[k][i]);
        s += std::abs(coeffs[k]) * std::numbers::pi * l1;
    }
    return scale * s;
}

double HolderTarget::sup_bound() const {
    double s = 0.0;
    for (int k = 0; k < J; ++k) s += std::abs(coeffs[k]);
    return scale * s;
}

void Dataset::validate() const {
    if (X.size() != Y.size()) throw std::invalid_argument("Dataset: X/Y size mismatch");
    for (const auto& x : X) {
        if (static_cast<int>(x.size()) != d) throw std::invalid_argument("Dataset: dimension mismatch");
        for (double v : x)
            if (v < eps - 1e-12 || v > 1.0 - eps + 1e-12)
                throw std::invalid_argument("Dataset: point outside the eps-shrunk cube");
    }
    for (double y : Y)
        if (std::abs(y) > 1.0 + 1e-12) throw std::invalid_argument("Dataset: |y| > 1");
}

HolderTarget make_holder_target(int d, double alpha, int J, std::uint64_t seed) {
    if (d < 1 || J < 1 || alpha < 1.0)
        throw std::invalid_argument("make_holder_target: need d >= 1, J >= 1, alpha >= 1");
    auto rng = make_rng(seed);
    HolderTarget t;
    t.d = d;
    t.alpha = alpha;
    t.J = J;
    t.seed = seed;
    std::uniform_int_distribution<int> mode_dist(0, 3);
    std::uniform_real_distribution<double> mag(0.5, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::bernoulli_distribution flip(0.5);
    for (int k = 0; k < J; ++k) {
        std::vector<int> m(d);
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (int i = 0; i < d; ++i) {
                m[i] = mode_dist(rng);
                norm2 += m[i] * m[i];
            }
        } while (norm2 == 0.0);
        t.modes.push_back(m);
        const double c = (flip(rng) ? 1.0 : -1.0) * mag(rng) * std::pow(std::sqrt(norm2), -alpha - 1.0);
        t.coeffs.push_back(c);
        t.phases.push_back(phase(rng));
    }
    // Scale so the coefficient bounds certify ||f0||_inf <= 0.8 and Lip <= 1.
    t.scale = 1.0;
    const double s_sup = 0.8 / t.sup_bound();
    const double s_lip = 1.0 / t.lipschitz_bound();
    t.scale = std::min(s_sup, s_lip);
    return t;
}

Dataset sample_regression(const HolderTarget& target, double sigma, std::size_t n, double eps,
                          std::uint64_t seed) {
    if (!(eps < 0.5)) throw std::invalid_argument("sample_regression: eps must be < 0.5");
    if (sigma < 0.0 || sigma > 0.2) throw std::invalid_argument("sample_regression: sigma must be in [0, 0.2]");
    if (target.sup_bound() + sigma > 1.0 + 1e-12)
        throw std::invalid_argument("sample_regression: ||f0||_inf + sigma exceeds 1");
    Dataset data;
    data.d = target.d;
    data.eps = eps;
    data.seed = seed;
    data.generator = "regression";
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> ux(eps, 1.0 - eps);
    std::uniform_real_distribution<double> unoise(-sigma, sigma);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(target.d);
        for (double& v : x) v = ux(rng);
        const double y = target.eval(x) + (sigma > 0.0 ? unoise(rng) : 0.0);
        data.X.push_back(std::move(x));
        data.Y.push_back(y);
    }
    return data;
}

PosteriorSpec PosteriorSpec::constant_eta(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("constant_eta: p must be in [0,1]");
    PosteriorSpec s;
    s.constant = true;
    s.constant_value = p;
    return s;
}

PosteriorSpec PosteriorSpec::squashed(HolderTarget base, double c) {
    if (!(c > 0.0 && c < 0.5)) throw std::invalid_argument("PosteriorSpec: c must be in (0, 0.5)");
    PosteriorSpec s;
    s.base = std::move(base);
    s.margin_c = c;
    return s;
}

double PosteriorSpec::eta(const std::vector<double>& x) const {
    if (constant) return constant_value;
    const double g = base.eval(x);
    const double sign = g >= 0.0 ? 1.0 : -1.0;
    const double head = 0.5 - margin_c - 0.01;  // remaining room above the margin band
    const double mag = margin_c + 0.01 + head * std::abs(g) / (1.0 + std::abs(g));
    return 0.5 + sign * mag;
}

Dataset sample_classification(const PosteriorSpec& post, std::size_t n, double eps, std::uint64_t seed) {
    if (!(eps < 0.5)) throw std::invalid_argument("sample_classification: eps must be < 0.5");
    Dataset data;
    data.d = post.constant ? 1 : post.base.d;
    data.eps = eps;
    data.seed = seed;
    data.generator = "classification";
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> ux(eps, 1.0 - eps);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(data.d);
        for (double& v : x) v = ux(rng);
        const double p = post.eta(x);
        data.Y.push_back(u01(rng) < p ? 1.0 : -1.0);
        data.X.push_back(std::move(x));
    }
    return data;
}

McEstimate bayes_risk(const PosteriorSpec& post, std::size_t mc_n, std::uint64_t seed) {
    if (mc_n < 1) throw std::invalid_argument("bayes_risk: mc_n must be >= 1");
    const int d = post.constant ? 1 : post.base.d;
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    double sum = 0.0, sumsq = 0.0;
    std::vector<double> x(d);
    for (std::size_t i = 0; i < mc_n; ++i) {
        for (double& v : x) v = ux(rng);
        const double e = post.eta(x);
        const double v = std::min(e, 1.0 - e);
        sum += v;
        sumsq += v * v;
    }
    McEstimate est;
    est.value = sum / mc_n;
    const double var = std::max(0.0, sumsq / mc_n - est.value * est.value);
    est.stderr_ = std::sqrt(var / mc_n);
    return est;
}

void save_dataset(const Dataset& data, const std::string& path) {
    data.validate();
    std::ofstream csv(path);
    if (!csv) throw std::runtime_error("save_dataset: cannot open " + path);
    for (int i = 1; i <= data.d; ++i) csv << "x_" << i << ",";
    csv << "y\n";
    csv.precision(17);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double v : data.X[i]) csv << v << ",";
        csv << data.Y[i] << "\n";
    }
    nlohmann::json meta;
    meta["n"] = data.size();
    meta["d"] = data.d;
    meta["eps"] = data.eps;
    meta["seed"] = data.seed;
    meta["generator"] = data.generator;
    std::ofstream side(path + ".json");
    side << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path) {
    std::ifstream side(path + ".json");
    if (!side) throw std::runtime_error("load_dataset: missing sidecar for " + path);
    nlohmann::json meta;
    side >> meta;
    Dataset data;
    data.d = meta.at("d").get<int>();
    data.eps = meta.at("eps").get<double>();
    data.seed = meta.at("seed").get<std::uint64_t>();
    data.generator = meta.at("generator").get<std::string>();

    std::ifstream csv(path);
    if (!csv) throw std::runtime_error("load_dataset: cannot open " + path);
    std::string line;
    std::getline(csv, line);  // header
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<int>(row.size()) != data.d + 1)
            throw std::runtime_error("load_dataset: bad row width");
        data.Y.push_back(row.back());
        row.pop_back();
        data.X.push_back(std::move(row));
    }
    data.validate();
    return data;
}

}  // namespace advlab
