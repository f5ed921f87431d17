#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ougf/dislocation.hpp"
#include "ougf/gf_sim.hpp"
#include "ougf/quadrature.hpp"
#include "ougf/stats.hpp"

namespace ougf::harness {

enum class ExperimentKind {
    Moment,
    Martingale,
    ManyToOne,
    Lln,
    GeneratorResidual,
    Truncation,
    Rrt,
    CellVsAtom,
    OuLaplace,
    FWeight,
};

struct TestFunctionSpec {
    enum class Kind { One, Power } kind = Kind::Power;
    double power = 2.0;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Moment;
    std::string kind_name = "moment";

    bool has_gf = false;
    GFCharacteristics gf;
    bool has_levy = false;
    LevyCharacteristics levy;
    double theta = 0.0;

    double level = kInf;
    std::vector<double> times;
    std::vector<double> qs;
    std::size_t reps = 1000;
    std::uint64_t seed = 1;
    QuadratureSettings quadrature;
    SimCaps caps;
    int threads = 0;  // 0 = all hardware threads
    double z_threshold = 3.0;
    double margin = 0.05;  // relative tolerance for asymptotic targets (lln, rrt)
    double gamma = 2.0;    // branching moment condition parameter

    std::vector<double> cut_levels;     // truncation experiment
    std::vector<std::size_t> rrt_n;     // rrt experiment
    double gen_h = 0.1;                 // generator_residual base step
    double eta = 0.5;                   // f_weight
    double fw_s = 0.0;                  // f_weight start time
    double fw_x = 1.0;                  // f_weight start size
    double z0 = 0.0;                    // ou_laplace start position
    TestFunctionSpec f;                 // many_to_one / lln test function
    std::string dump_prefix;            // optional snapshot CSV dumps

    std::string canonical_json;  // normalized config text, hashed into reports
};

struct ReportRow {
    std::string statistic;
    double t = 0.0;
    double q = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    double zscore = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t aborted = 0;
    bool pass = false;
};

struct ExperimentReport {
    std::string experiment;
    std::vector<ReportRow> rows;
    std::uint64_t seed = 0;
    std::string config_hash;
    double wall_seconds = 0.0;
    bool all_pass() const;
};

struct CompareResult {
    double zscore = 0.0;
    bool pass = false;
};

// zscore = (estimate - target) / std_error when std_error > 0; a zero standard
// error switches to exact comparison within 1e-12.
CompareResult compare_stats(double estimate, double std_error, double target,
                            double threshold = 3.0);

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_json(const std::string& json_text);

// Dislocation measures serialize to the config-format families ("atom_list",
// "binary_density", "rrt"), with the truncation level carried alongside.
std::string dislocation_to_json(const DislocationMeasure& nu);
DislocationMeasure dislocation_from_json(const std::string& json_text);

// Validates every precondition up front (naming the violated condition),
// then dispatches; deterministic given (config, seed) regardless of threads.
ExperimentReport run_experiment(const ExperimentConfig& config);

// format is "csv" or "json"; CSV columns are exactly
// experiment,statistic,t,q,estimate,stderr,target,zscore,reps,aborted.
void emit_report(const ExperimentReport& report, const std::string& format,
                 std::ostream& out);
void emit_report_file(const ExperimentReport& report, const std::string& format,
                      const std::string& path);
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& json_text);

struct ConditionLine {
    std::string name;
    double value = 0.0;
    bool ok = false;
};

struct ConditionReport {
    std::vector<ConditionLine> lines;
    bool all_ok() const;
    std::string text() const;
};

// The launch-gate condition report for a config: branching-moment conditions,
// domain membership and moment-range checks for every requested (t, q).
ConditionReport check_conditions(const ExperimentConfig& config);

}  // namespace ougf::harness
