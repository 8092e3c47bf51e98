#include "advlab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advlab/rng.hpp"
#include "json.hpp"

namespace advlab {

int Architecture::width() const {
    int w = 1;
    for (int h : hidden_widths) w = std::max(w, h);
    return w;
}

void Architecture::validate() const {
    if (input_dim < 1) throw std::invalid_argument("Architecture: input_dim must be positive");
    for (int h : hidden_widths)
        if (h < 1) throw std::invalid_argument("Architecture: hidden widths must be positive");
}

void NetworkParams::validate() const {
    arch.validate();
    const std::size_t L = arch.hidden_widths.size();
    if (layers.size() != L + 1) throw std::invalid_argument("NetworkParams: layer count mismatch");
    int in = arch.input_dim;
    for (std::size_t i = 0; i <= L; ++i) {
        const int out = i < L ? arch.hidden_widths[i] : 1;
        const Layer& ly = layers[i];
        if (static_cast<int>(ly.A.size()) != out)
            throw std::invalid_argument("NetworkParams: row count mismatch at layer " + std::to_string(i));
        for (const auto& row : ly.A)
            if (static_cast<int>(row.size()) != in)
                throw std::invalid_argument("NetworkParams: column count mismatch at layer " + std::to_string(i));
        if (i < L) {
            if (static_cast<int>(ly.b.size()) != out)
                throw std::invalid_argument("NetworkParams: bias size mismatch at layer " + std::to_string(i));
        } else if (!ly.b.empty()) {
            throw std::invalid_argument("NetworkParams: final layer must be bias-free");
        }
        in = out;
    }
}

namespace {

std::vector<double> affine(const Layer& ly, const std::vector<double>& x) {
    std::vector<double> out(ly.A.size(), 0.0);
    for (std::size_t r = 0; r < ly.A.size(); ++r) {
        double s = ly.b.empty() ? 0.0 : ly.b[r];
        const auto& row = ly.A[r];
        for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
        out[r] = s;
    }
    return out;
}

}  // namespace

double forward(const NetworkParams& params, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != params.arch.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    std::vector<double> z = x;
    const std::size_t L = params.arch.hidden_widths.size();
    for (std::size_t i = 0; i < L; ++i) {
        z = affine(params.layers[i], z);
        for (double& v : z) v = std::max(v, 0.0);
    }
    return affine(params.layers[L], z)[0];
}

Gradients backward(const NetworkParams& params, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != params.arch.input_dim)
        throw std::invalid_argument("backward: input dimension mismatch");
    const std::size_t L = params.arch.hidden_widths.size();

    // Forward pass, keeping post-activation values and the ReLU masks.
    std::vector<std::vector<double>> acts;  // acts[i] = input to layer i
    acts.reserve(L + 1);
    acts.push_back(x);
    std::vector<std::vector<char>> active(L);
    for (std::size_t i = 0; i < L; ++i) {
        std::vector<double> pre = affine(params.layers[i], acts.back());
        active[i].resize(pre.size());
        for (std::size_t r = 0; r < pre.size(); ++r) {
            active[i][r] = pre[r] > 0.0;  // subgradient at 0 is 0
            if (pre[r] < 0.0) pre[r] = 0.0;
        }
        acts.push_back(std::move(pre));
    }

    Gradients g;
    g.dA.resize(L + 1);
    g.db.resize(L + 1);

    // Reverse accumulation, seeded with d(out)/d(out) = 1.
    std::vector<double> delta(1, 1.0);
    for (std::size_t i = L + 1; i-- > 0;) {
        const Layer& ly = params.layers[i];
        const std::vector<double>& in = acts[i];
        g.dA[i].assign(ly.A.size(), std::vector<double>(in.size(), 0.0));
        if (!ly.b.empty()) g.db[i].assign(ly.b.size(), 0.0);
        std::vector<double> prev(in.size(), 0.0);
        for (std::size_t r = 0; r < ly.A.size(); ++r) {
            const double dr = delta[r];
            for (std::size_t c = 0; c < in.size(); ++c) {
                g.dA[i][r][c] = dr * in[c];
                prev[c] += dr * ly.A[r][c];
            }
            if (!ly.b.empty()) g.db[i][r] = dr;
        }
        if (i > 0) {
            for (std::size_t c = 0; c < prev.size(); ++c)
                if (!active[i - 1][c]) prev[c] = 0.0;
        }
        delta = std::move(prev);
    }
    g.input = std::move(delta);
    return g;
}

double row_sum_norm(const std::vector<std::vector<double>>& A, const std::vector<double>* bias) {
    double best = 0.0;
    for (std::size_t r = 0; r < A.size(); ++r) {
        double s = 0.0;
        for (double v : A[r]) s += std::abs(v);
        if (bias) s += std::abs((*bias)[r]);
        best = std::max(best, s);
    }
    return best;
}

double kappa(const NetworkParams& params) {
    const std::size_t L = params.arch.hidden_widths.size();
    double prod = row_sum_norm(params.layers[L].A);
    for (std::size_t i = 0; i < L; ++i)
        prod *= std::max(row_sum_norm(params.layers[i].A, &params.layers[i].b), 1.0);
    return prod;
}

NetworkParams project_kappa(const NetworkParams& params, const NormBudget& budget) {
    const double k = kappa(params);
    // small relative slack keeps the projection idempotent: rescaling by K/k
    // can leave the recomputed product a few ulps above K
    if (k <= budget.K * (1.0 + 1e-12)) return params;
    NetworkParams out = params;
    const double scale = budget.K / k;
    for (auto& row : out.layers.back().A)
        for (double& v : row) v *= scale;
    return out;
}

double empirical_lipschitz(const NetworkParams& params,
                           const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs) {
    double best = -1.0;
    for (const auto& [a, b] : pairs) {
        double dist = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dist = std::max(dist, std::abs(a[i] - b[i]));
        if (dist == 0.0) continue;
        best = std::max(best, std::abs(forward(params, a) - forward(params, b)) / dist);
    }
    if (best < 0.0) throw std::invalid_argument("empirical_lipschitz: no usable pairs");
    return best;
}

NetworkParams random_params(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    auto rng = make_rng(seed);
    NetworkParams p;
    p.arch = arch;
    const std::size_t L = arch.hidden_widths.size();
    int in = arch.input_dim;
    for (std::size_t i = 0; i <= L; ++i) {
        const int out = i < L ? arch.hidden_widths[i] : 1;
        std::uniform_real_distribution<double> u(-1.0 / in, 1.0 / in);
        Layer ly;
        ly.A.assign(out, std::vector<double>(in));
        for (auto& row : ly.A)
            for (double& v : row) v = u(rng);
        if (i < L) {
            ly.b.assign(out, 0.0);
            for (double& v : ly.b) v = u(rng);
        }
        p.layers.push_back(std::move(ly));
        in = out;
    }
    return p;
}

NetworkParams random_params(const Architecture& arch, std::uint64_t seed, const NormBudget& budget) {
    return project_kappa(random_params(arch, seed), budget);
}

std::string to_json(const NetworkParams& params) {
    nlohmann::json j;
    j["arch"]["input_dim"] = params.arch.input_dim;
    j["arch"]["hidden_widths"] = params.arch.hidden_widths;
    j["layers"] = nlohmann::json::array();
    for (const Layer& ly : params.layers) {
        nlohmann::json lj;
        lj["A"] = ly.A;
        lj["b"] = ly.b;
        j["layers"].push_back(std::move(lj));
    }
    return j.dump();
}

NetworkParams params_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    NetworkParams p;
    p.arch.input_dim = j.at("arch").at("input_dim").get<int>();
    p.arch.hidden_widths = j.at("arch").at("hidden_widths").get<std::vector<int>>();
    for (const auto& lj : j.at("layers")) {
        Layer ly;
        ly.A = lj.at("A").get<std::vector<std::vector<double>>>();
        ly.b = lj.at("b").get<std::vector<double>>();
        p.layers.push_back(std::move(ly));
    }
    p.validate();
    return p;
}

}  // namespace advlab
