#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "advlab/experiments.hpp"
#include "advlab/risk.hpp"

namespace {

using namespace advlab;

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string risk_report_csv(const RiskReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "natural,adv_lower,adv_upper,n_eval,attack,loss\n"
       << r.natural << ',' << r.adv_lower << ',' << r.adv_upper << ',' << r.n_eval << ','
       << r.attack << ',' << r.loss << '\n';
    return os.str();
}

Dataset make_dataset(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed) {
    const HolderTarget target = make_holder_target(cfg.d, cfg.alpha.to_double(), cfg.modes, cfg.seed);
    const double margin = std::max(cfg.data_margin(), 1e-3);
    return sample_regression(target, cfg.sigma, n, margin, seed);
}

int cmd_verify(const std::string& config_path, const std::string& suite, const std::string& out_dir,
               std::uint64_t seed_override, bool has_seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (has_seed) cfg.seed = seed_override;
    VerifyOptions opts;
    opts.only_suite = suite;
    const VerifyReport report = run_verify(cfg, opts);
    std::cout << report.to_text();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_file((std::filesystem::path(out_dir) / "verify_report.json").string(), report.to_json());
    }
    return report.pass ? 0 : 1;
}

int cmd_train(const std::string& config_path, const std::string& out_dir, std::uint64_t seed_override,
              bool has_seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (has_seed) {
        cfg.seed = seed_override;
        cfg.train_seed = seed_override;
    }
    const Dataset data = make_dataset(cfg, cfg.n, cfg.seed);
    Architecture arch;
    arch.input_dim = cfg.d;
    arch.hidden_widths = cfg.hidden;
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.lr = cfg.lr;
    tc.lr_schedule = cfg.lr_schedule;
    tc.attack = cfg.attack;
    tc.K = cfg.K;
    tc.clamp_M = cfg.clamp_M;
    tc.seed = cfg.train_seed;
    const auto [params, history] = adv_train(data, arch, tc, cfg.loss_spec());

    const std::string dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / "history.csv").string(), history.to_csv());
    write_file((std::filesystem::path(dir) / "model.json").string(), to_json(params));

    const EpochRecord& last = history.epochs.back();
    std::cout << "trained " << cfg.epochs << " epochs: nat_risk=" << last.nat_risk
              << " adv_risk_est=" << last.adv_risk_est << " kappa=" << last.kappa << '\n';
    std::cout << "wrote " << dir << "/history.csv and " << dir << "/model.json\n";
    return 0;
}

int cmd_risk(const std::string& config_path, const std::string& format, std::uint64_t seed_override,
             bool has_seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (has_seed) cfg.seed = seed_override;
    NetworkParams params;
    if (!cfg.checkpoint.empty()) {
        std::ifstream in(cfg.checkpoint);
        if (!in) throw std::runtime_error("cannot open checkpoint: " + cfg.checkpoint);
        std::ostringstream buf;
        buf << in.rdbuf();
        params = params_from_json(buf.str());
    } else {
        Architecture arch;
        arch.input_dim = cfg.d;
        arch.hidden_widths = cfg.hidden;
        params = random_params(arch, cfg.seed, NormBudget{cfg.K});
    }
    const Dataset data = make_dataset(cfg, cfg.n, cfg.seed + 1);
    const RiskReport report = sandwich(params, cfg.loss_spec(), data, cfg.attack);
    std::cout << (format == "csv" ? risk_report_csv(report) : report.to_json() + "\n");
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int threads) {
    const ExperimentConfig cfg = load_config(config_path);
    if (!cfg.sweep) throw std::runtime_error("config has no [sweep] section");
    SweepConfig sw = *cfg.sweep;
    if (!out_dir.empty()) sw.out_dir = out_dir;
    const auto records = run_sweep(sw, threads);

    int failures = 0;
    Series series{"l2_sq", {}, {}};
    for (const RunRecord& r : records) {
        if (r.status != "ok") {
            ++failures;
            continue;
        }
        series.x.push_back(static_cast<double>(r.n));
        series.y.push_back(r.l2_sq);
    }
    std::cout << records.size() << " runs (" << failures << " failed), results in " << sw.out_dir
              << "/sweep.csv\n";
    try {
        const SlopeFit fit = fit_slope(series.x, series.y);
        emit_svg({series}, (std::filesystem::path(sw.out_dir) / "sweep.svg").string(), "ln n",
                 "ln l2_sq");
        std::cout << "l2_sq vs n log-log slope: " << fit.slope << " (stderr " << fit.stderr_
                  << ", " << fit.points << " points)\n";
        std::cout << "plot written to " << sw.out_dir << "/sweep.svg\n";
    } catch (const std::exception& e) {
        std::cout << "slope fit skipped: " << e.what() << '\n';
    }
    return failures == 0 ? 0 : 1;
}

int cmd_rates(const std::string& config_path, const std::string& format) {
    const ExperimentConfig cfg = load_config(config_path);
    std::cout << rates_table({{cfg.d, cfg.alpha}}, format.empty() ? "csv" : format);
    return 0;
}

int cmd_equiv(const std::string& config_path, std::uint64_t seed_override, bool has_seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (has_seed) cfg.seed = seed_override;
    const EquivSuiteReport rep = run_equiv_suite(100, cfg.seed);
    std::cout << rep.to_json() << '\n';
    return rep.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial-training laboratory for norm-constrained ReLU networks"};
    app.require_subcommand(1);

    std::string config_path, out_dir, format = "json", suite;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int threads = 1;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        auto* c = sub->add_option("--config", config_path, "INI config file");
        if (needs_config) c->required();
        sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) { has_seed = true; });
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads");
        sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* verify = app.add_subcommand("verify", "run the invariant suites");
    add_common(verify);
    verify->add_option("--suite", suite, "run a single suite");

    CLI::App* train = app.add_subcommand("train", "train one model");
    add_common(train);
    CLI::App* risk = app.add_subcommand("risk", "evaluate the risk sandwich");
    add_common(risk);
    CLI::App* sweep = app.add_subcommand("sweep", "rate experiment over a list of n");
    add_common(sweep);
    CLI::App* rates = app.add_subcommand("rates", "print the exponent table");
    add_common(rates);
    CLI::App* equiv = app.add_subcommand("equiv", "pointwise vs distributional adversary oracle");
    add_common(equiv);

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cmd_verify(config_path, suite, out_dir, seed, has_seed);
        if (train->parsed()) return cmd_train(config_path, out_dir, seed, has_seed);
        if (risk->parsed()) return cmd_risk(config_path, format, seed, has_seed);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir, threads);
        if (rates->parsed()) return cmd_rates(config_path, format);
        if (equiv->parsed()) return cmd_equiv(config_path, seed, has_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
