#pragma once

#include <limits>
#include <string>
#include <vector>

namespace advlab {

enum class LossKind { Hinge, RhoMargin, Quadratic, ZeroOne };

struct LossSpec {
    LossKind kind = LossKind::Hinge;
    double rho = 1.0;   // rho-margin parameter
    double M_u = 1.0;   // prediction bound used for the quadratic Lip constant

    static LossSpec hinge() { return {LossKind::Hinge}; }
    static LossSpec rho_margin(double rho);
    static LossSpec quadratic(double M_u);
    static LossSpec zero_one() { return {LossKind::ZeroOne}; }

    bool is_margin() const { return kind == LossKind::Hinge || kind == LossKind::RhoMargin; }
    std::string name() const;
};

double loss_eval(const LossSpec& spec, double u, double y);

/// Subderivative in u; hinge derivative at the kink is 0. Throws for zero-one.
double loss_deriv_u(const LossSpec& spec, double u, double y);

/// Lipschitz constant of l(.,y) uniform over y. Throws for zero-one.
double lip1(const LossSpec& spec);

/// Joint Lipschitz constant in (u, y) under |.|+|.|; used by the W1 bound.
double lip_joint(const LossSpec& spec);

/// Margin function phi with l(u,y) = phi(u*y). Margin losses only.
double margin_phi(const LossSpec& spec, double t);

struct CalibrationGrid {
    std::vector<double> etas;    // in [0,1]
    std::vector<double> fs;      // in [-M_u, M_u]
    std::vector<double> alphas;  // inner minimization grid; must contain {-1, 0, 1}

    /// eta step `eta_step`, f/alpha step `f_step`, f range [-f_max, f_max].
    static CalibrationGrid regular(double eta_step = 0.01, double f_step = 0.1, double f_max = 2.0);
    void validate() const;
};

/// Inner conditional risks of the margin surrogate and the 0-1 loss.
double c_phi(const LossSpec& spec, double eta, double f);
double cphi_star(const LossSpec& spec, double eta, const std::vector<double>& alpha_grid);
double c_class(double eta, double f);
inline double c_class_star(double eta) { return eta < 1.0 - eta ? eta : 1.0 - eta; }

struct AssumptionReport {
    bool holds = false;
    double best_constant = std::numeric_limits<double>::infinity();  // +inf when vacuous
};

/// Grid certification of the surrogate-vs-0-1 excess inequality with constant a.
AssumptionReport check_assumption_41(const LossSpec& spec, const CalibrationGrid& grid);

/// Grid certification of phi(0) - C*_phi >= b (1 - C*_class) on |eta-1/2| > c.
AssumptionReport check_assumption_42(const LossSpec& spec, double c, const CalibrationGrid& grid);

/// JSON calibration report for both assumptions.
std::string calibration_report_json(const LossSpec& spec, double c, const CalibrationGrid& grid);

}  // namespace advlab
