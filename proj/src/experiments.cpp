#include "advlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "advlab/dist.hpp"
#include "advlab/risk.hpp"
#include "advlab/rng.hpp"
#include "advlab/synth.hpp"

namespace advlab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] void bad_key(const std::string& section, const std::string& key, const std::string& why) {
    throw std::invalid_argument("config [" + section + "] " + key + ": " + why);
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        bad_key(section, key, "not a number: '" + v + "'");
    }
}

std::int64_t to_int(const std::string& section, const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        bad_key(section, key, "not an integer: '" + v + "'");
    }
}

// "p/q", plain integer, or a decimal with up to 9 fraction digits (exact).
Rational to_rational(const std::string& section, const std::string& key, const std::string& v) {
    const auto slash = v.find('/');
    if (slash != std::string::npos) {
        return Rational{to_int(section, key, trim(v.substr(0, slash))),
                        to_int(section, key, trim(v.substr(slash + 1)))};
    }
    const auto dot = v.find('.');
    if (dot == std::string::npos) return Rational{to_int(section, key, v)};
    const std::string frac = v.substr(dot + 1);
    if (frac.size() > 9) bad_key(section, key, "too many decimal digits for an exact value");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t whole = to_int(section, key, v.substr(0, dot).empty() ? "0" : v.substr(0, dot));
    const std::int64_t part = frac.empty() ? 0 : to_int(section, key, frac);
    const bool neg = !v.empty() && v[0] == '-';
    const std::int64_t mag = (whole < 0 ? -whole : whole) * den + part;
    return Rational{neg ? -mag : mag, den};
}

AttackMethod to_method(const std::string& v) {
    if (v == "none") return AttackMethod::None;
    if (v == "cover") return AttackMethod::Cover;
    if (v == "pgd") return AttackMethod::Pgd;
    if (v == "brute") return AttackMethod::Brute;
    throw std::invalid_argument("config [attack] method: unknown method '" + v + "'");
}

void check_keys(const std::string& section, const std::map<std::string, std::string>& kv,
                const std::set<std::string>& allowed) {
    for (const auto& [k, v] : kv)
        if (!allowed.count(k)) bad_key(section, k, "unknown key");
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::string rat_str(Rational r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// INI
// ---------------------------------------------------------------------------

IniFile IniFile::parse(const std::string& text) {
    IniFile ini;
    std::string section;
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            ini.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": key before any [section]");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (ini.sections[section].count(key))
            throw std::invalid_argument("config: duplicate key '" + key + "' in [" + section + "]");
        ini.sections[section][key] = value;
    }
    return ini;
}

IniFile IniFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

// ---------------------------------------------------------------------------
// ExperimentConfig
// ---------------------------------------------------------------------------

void SweepConfig::validate() const {
    if (n_list.empty()) throw std::invalid_argument("sweep: n list must be nonempty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("sweep: n list must be strictly increasing");
    if (n_list.front() < 2) throw std::invalid_argument("sweep: n must be >= 2");
    if (seeds.empty()) throw std::invalid_argument("sweep: seeds must be nonempty");
    if (d < 1) throw std::invalid_argument("sweep: d must be >= 1");
    if (alpha < Rational{1}) throw std::invalid_argument("sweep: alpha must be >= 1");
    if (eval_n < 1) throw std::invalid_argument("sweep: eval_n must be >= 1");
    if (eps_rule == EpsRule::Fixed && !(eps_fixed >= 0.0))
        throw std::invalid_argument("sweep: fixed eps must be >= 0");
    if (!(eps_multiplier > 0.0)) throw std::invalid_argument("sweep: eps multiplier must be > 0");
    if (n_list.size() * seeds.size() > 4096)
        throw std::invalid_argument("sweep: run budget exceeded (n_list x seeds > 4096)");
}

double SweepConfig::eps_for(std::int64_t n) const {
    if (eps_rule == EpsRule::Fixed) return eps_fixed;
    const std::int64_t p = alpha.num, q = alpha.den;
    // quadratic: eps ~ n^{-(d+2a+1)/(2d+5a)}; margin tasks: eps ~ n^{-(d+2a-1)/(2d+3a)}
    const Rational expo = task == SweepTask::RegressionQuadratic
                              ? Rational{(d + 1) * q + 2 * p, 2 * d * q + 5 * p}
                              : Rational{(d - 1) * q + 2 * p, 2 * d * q + 3 * p};
    return eps_multiplier * std::pow(static_cast<double>(n), -expo.to_double());
}

std::string SweepConfig::task_name() const {
    switch (task) {
        case SweepTask::RegressionQuadratic: return "regression_quadratic";
        case SweepTask::RegressionHinge: return "regression_hinge";
        case SweepTask::ClassificationHinge: return "classification_hinge";
    }
    return "?";
}

LossSpec ExperimentConfig::loss_spec() const {
    if (loss == "hinge") return LossSpec::hinge();
    if (loss == "quadratic") return LossSpec::quadratic(loss_m);
    if (loss == "rho") return LossSpec::rho_margin(rho);
    if (loss == "zero_one") return LossSpec::zero_one();
    throw std::invalid_argument("config [train] loss: unknown loss '" + loss + "'");
}

ExperimentConfig config_from_ini(const IniFile& ini) {
    for (const auto& [name, kv] : ini.sections)
        if (name != "data" && name != "model" && name != "attack" && name != "train" && name != "sweep")
            throw std::invalid_argument("config: unknown section [" + name + "]");

    ExperimentConfig cfg;

    if (auto it = ini.sections.find("data"); it != ini.sections.end()) {
        const auto& kv = it->second;
        check_keys("data", kv, {"d", "alpha", "n", "sigma", "modes", "seed", "margin"});
        if (kv.count("d")) cfg.d = static_cast<int>(to_int("data", "d", kv.at("d")));
        if (kv.count("alpha")) cfg.alpha = to_rational("data", "alpha", kv.at("alpha"));
        if (kv.count("n")) cfg.n = static_cast<std::size_t>(to_int("data", "n", kv.at("n")));
        if (kv.count("sigma")) cfg.sigma = to_double("data", "sigma", kv.at("sigma"));
        if (kv.count("modes")) cfg.modes = static_cast<int>(to_int("data", "modes", kv.at("modes")));
        if (kv.count("seed")) cfg.seed = static_cast<std::uint64_t>(to_int("data", "seed", kv.at("seed")));
        if (kv.count("margin")) cfg.margin = to_double("data", "margin", kv.at("margin"));
        if (cfg.d < 1) bad_key("data", "d", "must be >= 1");
        if (cfg.alpha < Rational{1}) bad_key("data", "alpha", "must be >= 1");
        if (cfg.n < 1) bad_key("data", "n", "must be >= 1");
    }

    if (auto it = ini.sections.find("model"); it != ini.sections.end()) {
        const auto& kv = it->second;
        check_keys("model", kv, {"hidden", "K", "clamp", "checkpoint"});
        if (kv.count("hidden")) {
            cfg.hidden.clear();
            for (const std::string& part : split(kv.at("hidden"), ','))
                cfg.hidden.push_back(static_cast<int>(to_int("model", "hidden", trim(part))));
        }
        if (kv.count("K")) cfg.K = to_double("model", "K", kv.at("K"));
        if (kv.count("clamp")) cfg.clamp_M = to_double("model", "clamp", kv.at("clamp"));
        if (kv.count("checkpoint")) cfg.checkpoint = kv.at("checkpoint");
    }

    if (auto it = ini.sections.find("attack"); it != ini.sections.end()) {
        const auto& kv = it->second;
        check_keys("attack", kv,
                   {"method", "eps", "tau", "steps", "step_size", "restarts", "resolution", "seed"});
        if (kv.count("method")) cfg.attack.method = to_method(kv.at("method"));
        if (kv.count("eps")) cfg.attack.eps = to_double("attack", "eps", kv.at("eps"));
        if (kv.count("tau")) cfg.attack.tau = to_double("attack", "tau", kv.at("tau"));
        if (kv.count("steps")) cfg.attack.steps = static_cast<int>(to_int("attack", "steps", kv.at("steps")));
        if (kv.count("step_size")) cfg.attack.step_size = to_double("attack", "step_size", kv.at("step_size"));
        if (kv.count("restarts"))
            cfg.attack.restarts = static_cast<int>(to_int("attack", "restarts", kv.at("restarts")));
        if (kv.count("resolution")) cfg.attack.resolution = to_double("attack", "resolution", kv.at("resolution"));
        if (kv.count("seed")) cfg.attack.seed = static_cast<std::uint64_t>(to_int("attack", "seed", kv.at("seed")));
        cfg.attack.validate();
    }

    if (auto it = ini.sections.find("train"); it != ini.sections.end()) {
        const auto& kv = it->second;
        check_keys("train", kv, {"epochs", "batch", "lr", "schedule", "loss", "rho", "loss_m", "seed"});
        if (kv.count("epochs")) cfg.epochs = static_cast<int>(to_int("train", "epochs", kv.at("epochs")));
        if (kv.count("batch")) cfg.batch_size = static_cast<int>(to_int("train", "batch", kv.at("batch")));
        if (kv.count("lr")) cfg.lr = to_double("train", "lr", kv.at("lr"));
        if (kv.count("schedule")) {
            const std::string& s = kv.at("schedule");
            if (s == "constant") cfg.lr_schedule = LrSchedule::Constant;
            else if (s == "invsqrt") cfg.lr_schedule = LrSchedule::InvSqrt;
            else bad_key("train", "schedule", "expected constant|invsqrt");
        }
        if (kv.count("loss")) cfg.loss = kv.at("loss");
        if (kv.count("rho")) cfg.rho = to_double("train", "rho", kv.at("rho"));
        if (kv.count("loss_m")) cfg.loss_m = to_double("train", "loss_m", kv.at("loss_m"));
        if (kv.count("seed")) cfg.train_seed = static_cast<std::uint64_t>(to_int("train", "seed", kv.at("seed")));
        cfg.loss_spec();  // validates the loss name
    }

    if (auto it = ini.sections.find("sweep"); it != ini.sections.end()) {
        const auto& kv = it->second;
        check_keys("sweep", kv,
                   {"task", "n_list", "seeds", "eps_rule", "eps", "eps_multiplier", "eval_n",
                    "out_dir", "epochs", "lr", "batch", "sigma", "modes", "target_seed"});
        SweepConfig sw;
        sw.d = cfg.d;
        sw.alpha = cfg.alpha;
        sw.sigma = cfg.sigma;
        sw.attack = cfg.attack;
        if (kv.count("task")) {
            const std::string& t = kv.at("task");
            if (t == "regression_quadratic") sw.task = SweepTask::RegressionQuadratic;
            else if (t == "regression_hinge") sw.task = SweepTask::RegressionHinge;
            else if (t == "classification_hinge") sw.task = SweepTask::ClassificationHinge;
            else bad_key("sweep", "task", "unknown task '" + t + "'");
        }
        if (kv.count("n_list")) {
            sw.n_list.clear();
            for (const std::string& part : split(kv.at("n_list"), ','))
                sw.n_list.push_back(to_int("sweep", "n_list", trim(part)));
        }
        if (kv.count("seeds")) {
            sw.seeds.clear();
            for (const std::string& part : split(kv.at("seeds"), ','))
                sw.seeds.push_back(static_cast<std::uint64_t>(to_int("sweep", "seeds", trim(part))));
        }
        if (kv.count("eps_rule")) {
            const std::string& r = kv.at("eps_rule");
            if (r == "fixed") sw.eps_rule = EpsRule::Fixed;
            else if (r == "schedule") sw.eps_rule = EpsRule::ScheduleEn;
            else bad_key("sweep", "eps_rule", "expected fixed|schedule");
        }
        if (kv.count("eps")) sw.eps_fixed = to_double("sweep", "eps", kv.at("eps"));
        if (kv.count("eps_multiplier")) sw.eps_multiplier = to_double("sweep", "eps_multiplier", kv.at("eps_multiplier"));
        if (kv.count("eval_n")) sw.eval_n = static_cast<std::size_t>(to_int("sweep", "eval_n", kv.at("eval_n")));
        if (kv.count("out_dir")) sw.out_dir = kv.at("out_dir");
        if (kv.count("epochs")) sw.epochs = static_cast<int>(to_int("sweep", "epochs", kv.at("epochs")));
        if (kv.count("lr")) sw.lr = to_double("sweep", "lr", kv.at("lr"));
        if (kv.count("batch")) sw.batch_size = static_cast<int>(to_int("sweep", "batch", kv.at("batch")));
        if (kv.count("sigma")) sw.sigma = to_double("sweep", "sigma", kv.at("sigma"));
        if (kv.count("modes")) sw.target_modes = static_cast<int>(to_int("sweep", "modes", kv.at("modes")));
        if (kv.count("target_seed"))
            sw.target_seed = static_cast<std::uint64_t>(to_int("sweep", "target_seed", kv.at("target_seed")));
        sw.validate();
        cfg.sweep = sw;
    }

    return cfg;
}

ExperimentConfig load_config(const std::string& path) { return config_from_ini(IniFile::load(path)); }

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

namespace {

SuiteResult suite_kappa(std::uint64_t seed, bool inject) {
    SuiteResult res{"kappa", true, ""};
    double worst = 0.0;
    const NormBudget budget{2.0};
    for (int t = 0; t < 50; ++t) {
        auto rng = make_rng(seed, 100 + t);
        std::uniform_int_distribution<int> dim(1, 3), wid(2, 8), dep(1, 3);
        Architecture arch;
        arch.input_dim = dim(rng);
        arch.hidden_widths.assign(dep(rng), wid(rng));
        NetworkParams params = random_params(arch, seed + t, budget);
        if (inject)
            for (auto& row : params.layers.back().A)
                for (double& v : row) v *= 3.0;
        const double k = kappa(params);
        if (k > budget.K * (1.0 + 1e-9)) {
            res.pass = false;
            res.detail = "kappa feasibility violated: kappa=" + fmt(k) + " budget=" + fmt(budget.K);
            return res;
        }
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int p = 0; p < 100; ++p) {
            std::vector<double> x1(arch.input_dim), x2(arch.input_dim);
            double dist = 0.0;
            for (int i = 0; i < arch.input_dim; ++i) {
                x1[i] = unit(rng);
                x2[i] = unit(rng);
                dist = std::max(dist, std::abs(x1[i] - x2[i]));
            }
            const double gap = std::abs(forward(params, x1) - forward(params, x2)) - k * dist;
            worst = std::max(worst, gap);
        }
    }
    res.pass = worst <= 1e-9;
    res.detail = "max |f(x1)-f(x2)| - kappa*dist = " + fmt(worst);
    return res;
}

SuiteResult suite_sandwich(std::uint64_t seed) {
    SuiteResult res{"sandwich", true, ""};
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int d = 1 + t % 2;
        const HolderTarget target = make_holder_target(d, 1.0, 6, seed + t);
        const Dataset data = sample_regression(target, 0.1, 20, 0.1, seed + 1000 + t);
        Architecture arch{d, {6, 6}};
        const NetworkParams params = random_params(arch, seed + 2000 + t, NormBudget{2.0});
        const LossSpec loss = (t % 2 == 0) ? LossSpec::hinge() : LossSpec::quadratic(3.0);
        AttackConfig atk;
        atk.method = AttackMethod::Pgd;
        atk.eps = 0.05;
        atk.steps = 10;
        atk.seed = seed + t;
        try {
            const RiskReport rep = sandwich(params, loss, data, atk);
            worst = std::max(worst, rep.natural - rep.adv_lower);
            worst = std::max(worst, rep.adv_lower - rep.adv_upper);
        } catch (const std::exception& e) {
            res.pass = false;
            res.detail = e.what();
            return res;
        }
    }
    res.pass = worst <= 1e-9;
    res.detail = "max ordering violation = " + fmt(worst);
    return res;
}

SuiteResult suite_cover_gap(std::uint64_t seed) {
    SuiteResult res{"cover_gap", true, ""};
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 20; ++t) {
        const int d = 1 + t % 2;
        Architecture arch{d, {5}};
        const NetworkParams params = random_params(arch, seed + 3000 + t, NormBudget{3.0});
        const LossSpec loss = LossSpec::hinge();
        const double eps = 0.1, tau = eps / 5.0;
        auto rng = make_rng(seed, 300 + t);
        std::uniform_real_distribution<double> unit(0.15, 0.85);
        std::vector<double> x(d);
        for (double& v : x) v = unit(rng);
        const double y = (t % 2 == 0) ? 1.0 : -1.0;
        const Cover cover = build_cover(eps, tau, d);
        const AttackResult cov = attack_cover(params, loss, x, y, cover);
        const AttackResult bru = attack_brute(params, loss, x, y, eps, tau / 20.0);
        const double budget = lip1(loss) * kappa(params) * (tau + tau / 20.0) + 1e-9;
        worst = std::max(worst, bru.value - cov.value - budget);
    }
    res.pass = worst <= 0.0;
    res.detail = "max (brute - cover - certified gap) = " + fmt(worst);
    return res;
}

SuiteResult suite_gradient(std::uint64_t seed) {
    SuiteResult res{"gradient", true, ""};
    const double h = 1e-5;
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        Architecture arch{2, {5, 4}};
        NetworkParams params = random_params(arch, seed + 4000 + t, NormBudget{2.0});
        auto rng = make_rng(seed, 400 + t);
        std::uniform_real_distribution<double> unit(0.1, 0.9);
        std::vector<double> x{unit(rng), unit(rng)};
        const Gradients g = backward(params, x);
        auto rel_err = [&](double analytic, double numeric) {
            return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        };
        for (int i = 0; i < 2; ++i) {
            std::vector<double> xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double num = (forward(params, xp) - forward(params, xm)) / (2.0 * h);
            worst = std::max(worst, rel_err(g.input[i], num));
        }
        for (std::size_t li = 0; li < params.layers.size(); ++li) {
            NetworkParams pp = params, pm = params;
            pp.layers[li].A[0][0] += h;
            pm.layers[li].A[0][0] -= h;
            const double num = (forward(pp, x) - forward(pm, x)) / (2.0 * h);
            worst = std::max(worst, rel_err(g.dA[li][0][0], num));
            if (!params.layers[li].b.empty()) {
                pp = params;
                pm = params;
                pp.layers[li].b[0] += h;
                pm.layers[li].b[0] -= h;
                const double numb = (forward(pp, x) - forward(pm, x)) / (2.0 * h);
                worst = std::max(worst, rel_err(g.db[li][0], numb));
            }
        }
    }
    res.pass = worst <= 1e-4;
    res.detail = "max relative gradient error = " + fmt(worst);
    return res;
}

SuiteResult suite_calibration() {
    SuiteResult res{"calibration", true, ""};
    const CalibrationGrid grid = CalibrationGrid::regular();
    const AssumptionReport a41 = check_assumption_41(LossSpec::hinge(), grid);
    const AssumptionReport a42 = check_assumption_42(LossSpec::hinge(), 0.1, grid);
    const bool ok41 = a41.holds && a41.best_constant >= 1.0 - 1e-9;
    const bool ok42 = a42.holds && std::abs(a42.best_constant - 1.0 / 3.0) <= 0.02;
    res.pass = ok41 && ok42;
    res.detail = "hinge a=" + fmt(a41.best_constant) + " b=" + fmt(a42.best_constant);
    return res;
}

SuiteResult suite_equivalence(std::uint64_t seed) {
    SuiteResult res{"equivalence", true, ""};
    const EquivSuiteReport rep = run_equiv_suite(20, seed);
    res.pass = rep.failures == 0;
    res.detail = "instances=" + std::to_string(rep.total) + " failures=" + std::to_string(rep.failures) +
                 " max_gap=" + fmt(rep.max_gap);
    return res;
}

SuiteResult suite_bounds() {
    SuiteResult res{"bounds", true, ""};
    const RateExponents e = rate_exponents(1, Rational{1});
    bool ok = e.r1 == Rational{1, 5} && e.r2 == Rational{2, 7} && e.r3 == Rational{3, 5} &&
              e.r4 == Rational{2, 5} && e.r5 == Rational{2, 7};
    for (int d = 1; d <= 4 && ok; ++d)
        for (int a = 1; a <= 3 && ok; ++a) {
            const RateExponents x = rate_exponents(d, Rational{a});
            ok = (x.r3 + x.r4) == Rational{1};
        }
    const auto [K, WL] = schedule(1024, 1, Rational{1}, ScheduleTask::Lipschitz);
    ok = ok && K == 16.0 && WL == 8.0;
    const BallCoverCount bc = ball_cover_count(0.1, 0.02, 2);
    ok = ok && bc.M == static_cast<std::int64_t>(build_cover(0.1, 0.02, 2).cardinality());
    res.pass = ok;
    res.detail = ok ? "exponent identities and cover counts agree" : "identity mismatch";
    return res;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
    return {"kappa", "sandwich", "cover_gap", "gradient", "calibration", "equivalence", "bounds"};
}

VerifyReport run_verify(const ExperimentConfig& cfg, const VerifyOptions& opts) {
    const std::uint64_t seed = cfg.seed;
    VerifyReport report;
    auto want = [&](const std::string& name) {
        return opts.only_suite.empty() || opts.only_suite == name;
    };
    if (!opts.only_suite.empty()) {
        const auto names = verify_suite_names();
        if (std::find(names.begin(), names.end(), opts.only_suite) == names.end())
            throw std::invalid_argument("unknown verify suite: " + opts.only_suite);
    }
    if (want("kappa")) report.suites.push_back(suite_kappa(seed, opts.inject_skip_projection));
    if (want("sandwich")) report.suites.push_back(suite_sandwich(seed));
    if (want("cover_gap")) report.suites.push_back(suite_cover_gap(seed));
    if (want("gradient")) report.suites.push_back(suite_gradient(seed));
    if (want("calibration")) report.suites.push_back(suite_calibration());
    if (want("equivalence")) report.suites.push_back(suite_equivalence(seed));
    if (want("bounds")) report.suites.push_back(suite_bounds());
    report.pass = true;
    for (const SuiteResult& s : report.suites) report.pass = report.pass && s.pass;
    return report;
}

std::string VerifyReport::to_json() const {
    nlohmann::json j;
    j["pass"] = pass;
    j["suites"] = nlohmann::json::array();
    for (const SuiteResult& s : suites)
        j["suites"].push_back({{"name", s.name}, {"pass", s.pass}, {"detail", s.detail}});
    return j.dump(2);
}

std::string VerifyReport::to_text() const {
    std::ostringstream os;
    for (const SuiteResult& s : suites)
        os << (s.pass ? "PASS" : "FAIL") << "  " << s.name << "  " << s.detail << '\n';
    os << (pass ? "all suites passed" : "some suites FAILED") << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

std::string RunRecord::csv_header() {
    return "task,seed,n,d,alpha,eps,K,W,L,loss,attack,nat_risk,adv_lower,adv_upper,"
           "excess_adv,l2_sq,kappa,seconds,status,schema_version";
}

std::string RunRecord::to_csv_row() const {
    std::ostringstream os;
    os.precision(17);
    os << task << ',' << seed << ',' << n << ',' << d << ',' << alpha << ',' << eps << ',' << K
       << ',' << W << ',' << L << ',' << loss << ',' << attack << ',' << nat_risk << ','
       << adv_lower << ',' << adv_upper << ',' << excess_adv << ',' << l2_sq << ',' << kappa_
       << ',' << seconds << ',' << sanitize(status) << ",v1";
    return os.str();
}

void RunRecord::check_invariants() const {
    if (status != "ok") return;
    if (nat_risk > adv_lower + 1e-9) throw std::runtime_error("RunRecord: natural > adv_lower");
    if (adv_lower > adv_upper + 1e-9) throw std::runtime_error("RunRecord: adv_lower > adv_upper");
    if (kappa_ > K * (1.0 + 1e-9)) throw std::runtime_error("RunRecord: kappa exceeds budget");
}

namespace {

RunRecord sweep_run_one(const SweepConfig& sweep, const HolderTarget& target, std::int64_t n,
                        std::uint64_t seed) {
    RunRecord rec;
    rec.task = sweep.task_name();
    rec.seed = seed;
    rec.n = n;
    rec.d = sweep.d;
    rec.alpha = sweep.alpha.to_double();
    rec.eps = sweep.eps_for(n);

    const ScheduleTask task =
        sweep.task == SweepTask::RegressionQuadratic ? ScheduleTask::Quadratic : ScheduleTask::Lipschitz;
    const auto [K, WL] = schedule(n, sweep.d, sweep.alpha, task);
    const int gamma = schedule_exponents(sweep.d, sweep.alpha, task).gamma;
    const int L = std::max(2, 4 * gamma + 2);
    const int W = std::max(2, static_cast<int>(std::ceil(WL / L)));
    rec.K = std::max(K, 1.0);
    rec.W = W;
    rec.L = L;

    const LossSpec loss = sweep.task == SweepTask::RegressionQuadratic
                              ? LossSpec::quadratic(std::max(2.0, rec.K))
                              : LossSpec::hinge();
    rec.loss = loss.name();

    AttackConfig atk = sweep.attack;
    atk.eps = rec.eps;
    atk.seed = seed;
    rec.attack = atk.method_name();

    const double margin = std::max(rec.eps, 1e-3);
    Dataset train_data, eval_data;
    if (sweep.task == SweepTask::ClassificationHinge) {
        const PosteriorSpec post = PosteriorSpec::squashed(target, 0.1);
        train_data = sample_classification(post, static_cast<std::size_t>(n), margin, seed);
        eval_data = sample_classification(post, sweep.eval_n, margin, seed + 777777);
    } else {
        train_data = sample_regression(target, sweep.sigma, static_cast<std::size_t>(n), margin, seed);
        eval_data = sample_regression(target, sweep.sigma, sweep.eval_n, margin, seed + 777777);
    }

    Architecture arch;
    arch.input_dim = sweep.d;
    arch.hidden_widths.assign(L, W);

    TrainConfig tc;
    tc.epochs = sweep.epochs;
    tc.batch_size = sweep.batch_size;
    tc.lr = sweep.lr;
    tc.lr_schedule = LrSchedule::InvSqrt;
    tc.attack = atk;
    tc.K = rec.K;
    tc.seed = seed;

    const auto [params, history] = adv_train(train_data, arch, tc, loss);
    for (const EpochRecord& e : history.epochs) rec.seconds += e.seconds;

    const RiskReport rep = sandwich(params, loss, eval_data, atk);
    rec.nat_risk = rep.natural;
    rec.adv_lower = rep.adv_lower;
    rec.adv_upper = rep.adv_upper;

    // reference: the target function used as a predictor on the same eval set
    double ref = 0.0;
    for (std::size_t i = 0; i < eval_data.size(); ++i)
        ref += loss_eval(loss, target.eval(eval_data.X[i]), eval_data.Y[i]);
    ref /= static_cast<double>(eval_data.size());
    rec.excess_adv = rec.adv_lower - ref;

    rec.l2_sq = l2_sq_distance(params, target, 4096, margin, seed + 31).value;
    rec.kappa_ = kappa(params);
    rec.check_invariants();
    return rec;
}

}  // namespace

std::vector<RunRecord> run_sweep(const SweepConfig& sweep, int threads) {
    sweep.validate();
    if (threads < 1) threads = 1;
    std::filesystem::create_directories(sweep.out_dir);
    const std::string csv_path = (std::filesystem::path(sweep.out_dir) / "sweep.csv").string();
    {
        std::ofstream out(csv_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + csv_path);
        out << RunRecord::csv_header() << '\n';
    }

    const HolderTarget target =
        make_holder_target(sweep.d, sweep.alpha.to_double(), sweep.target_modes, sweep.target_seed);

    struct Job {
        std::int64_t n;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::int64_t n : sweep.n_list)
        for (std::uint64_t s : sweep.seeds) jobs.push_back({n, s});

    std::vector<std::optional<RunRecord>> done(jobs.size());
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            RunRecord rec;
            try {
                rec = sweep_run_one(sweep, target, jobs[i].n, jobs[i].seed);
            } catch (const std::exception& e) {
                rec = RunRecord{};
                rec.task = sweep.task_name();
                rec.seed = jobs[i].seed;
                rec.n = jobs[i].n;
                rec.d = sweep.d;
                rec.alpha = sweep.alpha.to_double();
                rec.status = std::string("error: ") + e.what();
            }
            std::lock_guard<std::mutex> lock(mu);
            done[i] = std::move(rec);
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    const int nthreads = std::min<std::size_t>(threads, jobs.size());
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);

    // single writer, appending rows in job order as they complete (crash-safe)
    std::vector<RunRecord> records;
    {
        std::ofstream out(csv_path, std::ios::app);
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            std::unique_lock<std::mutex> lock(mu);
            cv.wait(lock, [&] { return done[i].has_value(); });
            records.push_back(*done[i]);
            out << records.back().to_csv_row() << '\n';
            out.flush();
        }
    }
    for (std::thread& t : pool) t.join();
    return records;
}

// ---------------------------------------------------------------------------
// slope fitting
// ---------------------------------------------------------------------------

SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("fit_slope: x/y length mismatch");
    SlopeFit fit;
    std::map<double, std::pair<double, int>> groups;  // x -> (sum y, count)
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            ++fit.dropped;
            continue;
        }
        auto& g = groups[xs[i]];
        g.first += ys[i];
        g.second += 1;
    }
    if (groups.size() < 3)
        throw std::invalid_argument("fit_slope: need >= 3 distinct positive x values, have " +
                                    std::to_string(groups.size()));

    std::vector<double> lx, ly;
    for (const auto& [x, g] : groups) {
        lx.push_back(std::log(x));
        ly.push_back(std::log(g.first / g.second));
    }
    const std::size_t m = lx.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: degenerate x values");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        sse += r * r;
    }
    fit.stderr_ = m > 2 ? std::sqrt(std::max(0.0, sse / (m - 2)) / sxx) : 0.0;
    fit.points = static_cast<int>(m);
    return fit;
}

CsvTable CsvTable::parse(const std::string& text) {
    CsvTable table;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (first) {
            table.header = cells;
            first = false;
        } else {
            if (cells.size() != table.header.size())
                throw std::invalid_argument("CsvTable: ragged row");
            table.rows.push_back(cells);
        }
    }
    if (table.header.empty()) throw std::invalid_argument("CsvTable: empty input");
    return table;
}

CsvTable CsvTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::size_t CsvTable::col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::invalid_argument("CsvTable: no column named '" + name + "'");
}

SlopeFit fit_slope_csv(const CsvTable& table, const std::string& x_col, const std::string& y_col,
                       const std::string& group_col, const std::string& group_value) {
    const std::size_t xi = table.col(x_col), yi = table.col(y_col);
    const std::size_t gi = group_col.empty() ? 0 : table.col(group_col);
    std::vector<double> xs, ys;
    for (const auto& row : table.rows) {
        if (!group_col.empty() && row[gi] != group_value) continue;
        try {
            xs.push_back(std::stod(row[xi]));
            ys.push_back(std::stod(row[yi]));
        } catch (const std::exception&) {
            throw std::invalid_argument("fit_slope_csv: non-numeric cell in " + x_col + "/" + y_col);
        }
    }
    return fit_slope(xs, ys);
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_svg(const std::vector<Series>& series, const std::string& x_label,
                       const std::string& y_label) {
    if (series.empty()) throw std::invalid_argument("render_svg: empty series list");
    double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
    double lo_y = lo_x, hi_y = -lo_x;
    for (const Series& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw std::invalid_argument("render_svg: series must be nonempty with matching x/y");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0))
                throw std::invalid_argument("render_svg: log-log plot needs positive values");
            lo_x = std::min(lo_x, std::log(s.x[i]));
            hi_x = std::max(hi_x, std::log(s.x[i]));
            lo_y = std::min(lo_y, std::log(s.y[i]));
            hi_y = std::max(hi_y, std::log(s.y[i]));
        }
    }
    if (hi_x - lo_x < 1e-12) { lo_x -= 1.0; hi_x += 1.0; }
    if (hi_y - lo_y < 1e-12) { lo_y -= 1.0; hi_y += 1.0; }

    const double width = 640, height = 480, margin = 60;
    auto px = [&](double lx) { return margin + (lx - lo_x) / (hi_x - lo_x) * (width - 2 * margin); };
    auto py = [&](double ly) { return height - margin - (ly - lo_y) / (hi_y - lo_y) * (height - 2 * margin); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
          "viewBox=\"0 0 640 480\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n";
    os << "<line x1=\"" << fixed2(margin) << "\" y1=\"" << fixed2(height - margin) << "\" x2=\""
       << fixed2(width - margin) << "\" y2=\"" << fixed2(height - margin)
       << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    os << "<line x1=\"" << fixed2(margin) << "\" y1=\"" << fixed2(margin) << "\" x2=\""
       << fixed2(margin) << "\" y2=\"" << fixed2(height - margin)
       << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    os << "<text x=\"" << fixed2(width / 2) << "\" y=\"" << fixed2(height - 15)
       << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">" << x_label
       << "</text>\n";
    os << "<text x=\"15\" y=\"" << fixed2(height / 2)
       << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
       << fixed2(height / 2) << ")\">" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % 6];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < series[si].x.size(); ++i)
            pts.emplace_back(std::log(series[si].x[i]), std::log(series[si].y[i]));
        std::sort(pts.begin(), pts.end());
        if (pts.size() > 1) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (i) os << ' ';
                os << fixed2(px(pts[i].first)) << ',' << fixed2(py(pts[i].second));
            }
            os << "\"/>\n";
        }
        for (const auto& [lx, ly] : pts)
            os << "<circle cx=\"" << fixed2(px(lx)) << "\" cy=\"" << fixed2(py(ly))
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }

    if (series.size() > 1) {
        for (std::size_t si = 0; si < series.size(); ++si) {
            const double ly = margin + 10 + 18.0 * si;
            os << "<rect x=\"" << fixed2(width - margin - 150) << "\" y=\"" << fixed2(ly - 9)
               << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[si % 6] << "\"/>\n";
            os << "<text x=\"" << fixed2(width - margin - 132) << "\" y=\"" << fixed2(ly + 1)
               << "\" font-family=\"monospace\" font-size=\"12\">" << series[si].label << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

void emit_svg(const std::vector<Series>& series, const std::string& path, const std::string& x_label,
              const std::string& y_label) {
    const std::string svg = render_svg(series, x_label, y_label);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write SVG: " + path);
    out << svg;
}

// ---------------------------------------------------------------------------
// rates table / equivalence suite
// ---------------------------------------------------------------------------

std::string rates_table(const std::vector<std::pair<int, Rational>>& configs, const std::string& format) {
    if (configs.empty()) throw std::invalid_argument("rates_table: empty config list");
    if (format == "csv") {
        std::ostringstream os;
        os << "d,alpha,r1,r2,r3,r4,r5,gamma,c_alpha_d,xi,lambda,k_exp_lip,wl_exp_lip,k_exp_quad,"
              "wl_exp_quad\n";
        for (const auto& [d, alpha] : configs) {
            const RateExponents e = rate_exponents(d, alpha);
            const Schedule lip = schedule_exponents(d, alpha, ScheduleTask::Lipschitz);
            const Schedule quad = schedule_exponents(d, alpha, ScheduleTask::Quadratic);
            os << d << ',' << rat_str(alpha) << ',' << rat_str(e.r1) << ',' << rat_str(e.r2) << ','
               << rat_str(e.r3) << ',' << rat_str(e.r4) << ',' << rat_str(e.r5) << ',' << e.gamma
               << ',' << e.c_alpha_d << ',' << rat_str(e.xi) << ',' << rat_str(e.lambda) << ','
               << rat_str(lip.k_exponent) << ',' << rat_str(lip.wl_exponent) << ','
               << rat_str(quad.k_exponent) << ',' << rat_str(quad.wl_exponent) << '\n';
        }
        return os.str();
    }
    if (format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [d, alpha] : configs) {
            const RateExponents e = rate_exponents(d, alpha);
            const Schedule lip = schedule_exponents(d, alpha, ScheduleTask::Lipschitz);
            const Schedule quad = schedule_exponents(d, alpha, ScheduleTask::Quadratic);
            arr.push_back({{"d", d},
                           {"alpha", rat_str(alpha)},
                           {"r1", rat_str(e.r1)},
                           {"r2", rat_str(e.r2)},
                           {"r3", rat_str(e.r3)},
                           {"r4", rat_str(e.r4)},
                           {"r5", rat_str(e.r5)},
                           {"gamma", e.gamma},
                           {"c_alpha_d", e.c_alpha_d},
                           {"xi", rat_str(e.xi)},
                           {"lambda", rat_str(e.lambda)},
                           {"k_exp_lip", rat_str(lip.k_exponent)},
                           {"wl_exp_lip", rat_str(lip.wl_exponent)},
                           {"k_exp_quad", rat_str(quad.k_exponent)},
                           {"wl_exp_quad", rat_str(quad.wl_exponent)}});
        }
        return arr.dump(2);
    }
    throw std::invalid_argument("rates_table: format must be csv or json");
}

std::string EquivSuiteReport::to_json() const {
    nlohmann::json j{{"total", total}, {"failures", failures}, {"max_gap", max_gap}};
    return j.dump(2);
}

EquivSuiteReport run_equiv_suite(int instances, std::uint64_t seed) {
    if (instances < 1) throw std::invalid_argument("run_equiv_suite: instances must be >= 1");
    EquivSuiteReport rep;
    rep.total = instances;
    for (int t = 0; t < instances; ++t) {
        auto rng = make_rng(seed, 9000 + t);
        std::uniform_int_distribution<int> natoms(2, 5), gridpos(0, 50), eps_steps(0, 5), sign(0, 1);

        DiscreteDistribution P;
        P.d = 1;
        P.pitch = Rational{1, 50};
        const int m = natoms(rng);
        std::set<std::pair<int, int>> used;
        std::vector<std::int64_t> units;
        std::int64_t total_units = 0;
        std::uniform_int_distribution<std::int64_t> unit_dist(1, 4);
        while (static_cast<int>(P.atoms.size()) < m) {
            const int k = gridpos(rng);
            const int y = sign(rng) == 0 ? -1 : 1;
            if (!used.insert({k, y}).second) continue;
            DiscreteAtom a;
            a.x = {static_cast<double>(k) / 50.0};
            a.y = y;
            P.atoms.push_back(a);
            units.push_back(unit_dist(rng));
            total_units += units.back();
        }
        for (int i = 0; i < m; ++i) P.atoms[i].mass = Rational{units[i], total_units};

        Architecture arch{1, {4}};
        const NetworkParams f = random_params(arch, seed + 100 + t, NormBudget{2.0});
        const LossSpec loss = (t % 2 == 0) ? LossSpec::hinge() : LossSpec::quadratic(3.0);
        GammaInstance inst;
        inst.base = P;
        inst.eps = eps_steps(rng) / 50.0;

        const EquivalenceReport r = verify_equivalence(inst, f, loss);
        rep.max_gap = std::max(rep.max_gap, std::abs(r.lhs - r.rhs));
        if (!r.equal) ++rep.failures;
    }
    return rep;
}

}  // namespace advlab
