#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "advlab/attacks.hpp"
#include "advlab/bounds.hpp"
#include "advlab/rational.hpp"
#include "advlab/train.hpp"

namespace advlab {

/// Minimal INI reader: [section] headers, key = value lines, '#'/';' comments.
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniFile parse(const std::string& text);
    static IniFile load(const std::string& path);
};

enum class SweepTask { RegressionQuadratic, RegressionHinge, ClassificationHinge };
enum class EpsRule { Fixed, ScheduleEn };

struct SweepConfig {
    SweepTask task = SweepTask::RegressionQuadratic;
    std::vector<std::int64_t> n_list;  // strictly increasing
    int d = 1;
    Rational alpha{1};
    EpsRule eps_rule = EpsRule::Fixed;
    double eps_fixed = 0.05;
    double eps_multiplier = 1.0;  // constant in front of the schedule
    std::vector<std::uint64_t> seeds;
    AttackConfig attack;          // eps is overridden per run by the rule
    std::size_t eval_n = 512;
    std::string out_dir = ".";
    int epochs = 30;
    int batch_size = 32;
    double lr = 0.1;
    double sigma = 0.1;
    int target_modes = 8;
    std::uint64_t target_seed = 7;

    void validate() const;
    double eps_for(std::int64_t n) const;
    std::string task_name() const;
};

/// Everything an `advlab` invocation needs, parsed from one INI file.
/// Unknown sections or keys are hard errors.
struct ExperimentConfig {
    // [data]
    int d = 1;
    Rational alpha{1};
    std::size_t n = 256;
    double sigma = 0.1;
    int modes = 8;
    std::uint64_t seed = 1;
    double margin = -1.0;  // <0 means "use the attack eps"
    // [model]
    std::vector<int> hidden{16, 16};
    double K = 2.0;
    double clamp_M = 0.0;
    std::string checkpoint;  // optional params JSON for `risk`
    // [attack]
    AttackConfig attack;
    // [train]
    int epochs = 20;
    int batch_size = 32;
    double lr = 0.05;
    LrSchedule lr_schedule = LrSchedule::Constant;
    std::string loss = "hinge";
    double rho = 1.0;
    double loss_m = 2.0;
    std::uint64_t train_seed = 1;
    // [sweep]
    std::optional<SweepConfig> sweep;

    LossSpec loss_spec() const;
    double data_margin() const { return margin < 0.0 ? attack.eps : margin; }
};

ExperimentConfig config_from_ini(const IniFile& ini);
ExperimentConfig load_config(const std::string& path);

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    bool pass = false;
    std::vector<SuiteResult> suites;

    std::string to_json() const;
    std::string to_text() const;
};

struct VerifyOptions {
    std::string only_suite;              // empty = run all suites
    bool inject_skip_projection = false; // fault injection for self-test
};

/// Suites: kappa, sandwich, cover_gap, gradient, calibration, equivalence, bounds.
VerifyReport run_verify(const ExperimentConfig& cfg, const VerifyOptions& opts = {});
std::vector<std::string> verify_suite_names();

/// One sweep run: all inputs plus all measured outputs, CSV schema v1.
struct RunRecord {
    std::string task;
    std::uint64_t seed = 0;
    std::int64_t n = 0;
    int d = 1;
    double alpha = 1.0;
    double eps = 0.0;
    double K = 1.0;
    int W = 1;
    int L = 1;
    std::string loss;
    std::string attack;
    double nat_risk = 0.0;
    double adv_lower = 0.0;
    double adv_upper = 0.0;
    double excess_adv = 0.0;
    double l2_sq = 0.0;
    double kappa_ = 0.0;
    double seconds = 0.0;
    std::string status = "ok";

    static std::string csv_header();  // ends with schema_version column (v1)
    std::string to_csv_row() const;
    void check_invariants() const;  // sandwich ordering, kappa <= K
};

/// Trains one model per (n, seed), evaluates on a fresh set, appends rows to
/// out_dir/sweep.csv after every run. Per-run failures become status rows.
std::vector<RunRecord> run_sweep(const SweepConfig& sweep, int threads = 1);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_ = 0.0;
    int points = 0;   // distinct x values used
    int dropped = 0;  // rows dropped for nonpositive y
};

/// OLS of ln(mean y per x) on ln x. Nonpositive y rows are dropped with a
/// warning (counted in `dropped`); fewer than 3 surviving x values throws.
SlopeFit fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    static CsvTable parse(const std::string& text);
    static CsvTable load(const std::string& path);
    std::size_t col(const std::string& name) const;  // throws if absent
};

/// fit_slope over numeric CSV columns, keeping only rows whose `group` column
/// (when nonempty) equals `group_value`.
SlopeFit fit_slope_csv(const CsvTable& table, const std::string& x_col, const std::string& y_col,
                       const std::string& group_col = "", const std::string& group_value = "");

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Deterministic log-log scatter with per-series polylines, axis labels, and a
/// legend when there is more than one series. Byte-stable for fixed input.
std::string render_svg(const std::vector<Series>& series, const std::string& x_label = "ln n",
                       const std::string& y_label = "ln value");
void emit_svg(const std::vector<Series>& series, const std::string& path,
              const std::string& x_label = "ln n", const std::string& y_label = "ln value");

/// Exponent table rows for a list of (d, alpha) pairs; format "csv" or "json".
std::string rates_table(const std::vector<std::pair<int, Rational>>& configs,
                        const std::string& format = "csv");

struct EquivSuiteReport {
    int total = 0;
    int failures = 0;
    double max_gap = 0.0;
    std::string to_json() const;
};

/// Random one-dimensional discrete instances checked through both adversaries.
EquivSuiteReport run_equiv_suite(int instances, std::uint64_t seed);

}  // namespace advlab
