#include "advlab/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace advlab {

LossSpec LossSpec::rho_margin(double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho_margin: rho must be positive");
    LossSpec s{LossKind::RhoMargin};
    s.rho = rho;
    return s;
}

LossSpec LossSpec::quadratic(double M_u) {
    if (!(M_u > 0.0)) throw std::invalid_argument("quadratic: M_u must be positive");
    LossSpec s{LossKind::Quadratic};
    s.M_u = M_u;
    return s;
}

std::string LossSpec::name() const {
    switch (kind) {
        case LossKind::Hinge: return "hinge";
        case LossKind::RhoMargin: return "rho_margin";
        case LossKind::Quadratic: return "quadratic";
        case LossKind::ZeroOne: return "zero_one";
    }
    return "?";
}

double loss_eval(const LossSpec& spec, double u, double y) {
    switch (spec.kind) {
        case LossKind::Hinge:
            return std::max(0.0, 1.0 - u * y);
        case LossKind::RhoMargin:
            return std::min(1.0, std::max(0.0, 1.0 - u * y / spec.rho));
        case LossKind::Quadratic:
            return (u - y) * (u - y);
        case LossKind::ZeroOne: {
            const double sign_u = u >= 0.0 ? 1.0 : -1.0;  // sign(0) = +1
            return sign_u * y <= 0.0 ? 1.0 : 0.0;
        }
    }
    return 0.0;
}

double loss_deriv_u(const LossSpec& spec, double u, double y) {
    switch (spec.kind) {
        case LossKind::Hinge:
            return u * y < 1.0 ? -y : 0.0;
        case LossKind::RhoMargin: {
            const double t = u * y;  // active slope on 0 < u*y < rho, kinks get 0
            return (t > 0.0 && t < spec.rho) ? -y / spec.rho : 0.0;
        }
        case LossKind::Quadratic:
            return 2.0 * (u - y);
        case LossKind::ZeroOne:
            throw std::invalid_argument("loss_deriv_u: zero-one loss has no gradient");
    }
    return 0.0;
}

double lip1(const LossSpec& spec) {
    switch (spec.kind) {
        case LossKind::Hinge: return 1.0;
        case LossKind::RhoMargin: return 1.0 / spec.rho;
        case LossKind::Quadratic: return 2.0 * (spec.M_u + 1.0);
        case LossKind::ZeroOne:
            throw std::invalid_argument("lip1: zero-one loss is not Lipschitz in u");
    }
    return 0.0;
}

double lip_joint(const LossSpec& spec) {
    switch (spec.kind) {
        case LossKind::Hinge: return 1.0;
        case LossKind::RhoMargin: return 1.0 / spec.rho;
        case LossKind::Quadratic: return 2.0 * (spec.M_u + 1.0);
        case LossKind::ZeroOne:
            throw std::invalid_argument("lip_joint: zero-one loss is not Lipschitz");
    }
    return 0.0;
}

double margin_phi(const LossSpec& spec, double t) {
    if (!spec.is_margin()) throw std::invalid_argument("margin_phi: not a margin loss");
    return loss_eval(spec, t, 1.0);
}

CalibrationGrid CalibrationGrid::regular(double eta_step, double f_step, double f_max) {
    CalibrationGrid g;
    const int ne = static_cast<int>(std::lround(1.0 / eta_step));
    for (int i = 0; i <= ne; ++i) g.etas.push_back(static_cast<double>(i) / ne);
    const int nf = static_cast<int>(std::lround(2.0 * f_max / f_step));
    for (int i = 0; i <= nf; ++i) g.fs.push_back(-f_max + 2.0 * f_max * i / nf);
    g.alphas = g.fs;
    for (double must : {-1.0, 0.0, 1.0})
        if (std::none_of(g.alphas.begin(), g.alphas.end(), [&](double a) { return std::abs(a - must) < 1e-12; }))
            g.alphas.push_back(must);
    std::sort(g.alphas.begin(), g.alphas.end());
    g.validate();
    return g;
}

void CalibrationGrid::validate() const {
    if (etas.empty() || fs.empty() || alphas.empty())
        throw std::invalid_argument("CalibrationGrid: empty grid");
    for (double e : etas)
        if (e < 0.0 || e > 1.0) throw std::invalid_argument("CalibrationGrid: eta out of [0,1]");
    if (!std::is_sorted(etas.begin(), etas.end()) || !std::is_sorted(fs.begin(), fs.end()) ||
        !std::is_sorted(alphas.begin(), alphas.end()))
        throw std::invalid_argument("CalibrationGrid: grids must be sorted");
}

double c_phi(const LossSpec& spec, double eta, double f) {
    return margin_phi(spec, f) * eta + margin_phi(spec, -f) * (1.0 - eta);
}

double cphi_star(const LossSpec& spec, double eta, const std::vector<double>& alpha_grid) {
    if (!spec.is_margin()) throw std::invalid_argument("cphi_star: not a margin loss");
    double best = std::numeric_limits<double>::infinity();
    for (double a : alpha_grid) best = std::min(best, c_phi(spec, eta, a));
    return best;
}

double c_class(double eta, double f) {
    return f < 0.0 ? eta : 1.0 - eta;
}

AssumptionReport check_assumption_41(const LossSpec& spec, const CalibrationGrid& grid) {
    if (!spec.is_margin()) throw std::invalid_argument("check_assumption_41: not a margin loss");
    grid.validate();
    AssumptionReport rep;
    rep.holds = true;
    for (double eta : grid.etas) {
        const double cps = cphi_star(spec, eta, grid.alphas);
        const double ccs = c_class_star(eta);
        for (double f : grid.fs) {
            const double num = c_phi(spec, eta, f) - cps;
            const double den = c_class(eta, f) - ccs;
            if (num < -1e-9) rep.holds = false;
            if (den > 1e-12) rep.best_constant = std::min(rep.best_constant, num / den);
        }
    }
    if (std::isfinite(rep.best_constant) && !(rep.best_constant > 0.0)) rep.holds = false;
    return rep;
}

AssumptionReport check_assumption_42(const LossSpec& spec, double c, const CalibrationGrid& grid) {
    if (!spec.is_margin()) throw std::invalid_argument("check_assumption_42: not a margin loss");
    if (!(c > 0.0 && c < 0.5)) throw std::invalid_argument("check_assumption_42: c must be in (0, 0.5)");
    grid.validate();
    AssumptionReport rep;
    rep.holds = true;
    const double phi0 = margin_phi(spec, 0.0);
    for (double eta : grid.etas) {
        // boundary included up to the module comparison tolerance
        if (!(std::abs(eta - 0.5) > c - 1e-9)) continue;
        const double num = phi0 - cphi_star(spec, eta, grid.alphas);
        const double den = 1.0 - c_class_star(eta);
        if (den > 1e-12) rep.best_constant = std::min(rep.best_constant, num / den);
    }
    if (std::isfinite(rep.best_constant) && !(rep.best_constant > 0.0)) rep.holds = false;
    return rep;
}

std::string calibration_report_json(const LossSpec& spec, double c, const CalibrationGrid& grid) {
    const AssumptionReport a41 = check_assumption_41(spec, grid);
    const AssumptionReport a42 = check_assumption_42(spec, c, grid);
    nlohmann::json j;
    j["loss"] = spec.name();
    j["grid_spec"] = {{"etas", grid.etas.size()}, {"fs", grid.fs.size()}, {"alphas", grid.alphas.size()}};
    j["holds_41"] = a41.holds;
    j["best_a"] = std::isfinite(a41.best_constant) ? nlohmann::json(a41.best_constant) : nlohmann::json("inf");
    j["holds_42"] = a42.holds;
    j["c"] = c;
    j["best_b"] = std::isfinite(a42.best_constant) ? nlohmann::json(a42.best_constant) : nlohmann::json("inf");
    return j.dump();
}

}  // namespace advlab
