#pragma once

#include "randsig/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace randsig::experiments {

/// One measured number. `item` is a test-trajectory index, a k value or 0 for
/// scalar quantities, depending on the label.
struct MetricRow {
    std::string label;
    std::uint64_t seed = 0;
    std::int64_t item = 0;
    double value = 0.0;
};

struct SummaryRow {
    std::string label;
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Output of an experiment. Metrics and extra files depend only on (config, seeds);
/// wall-clock timings are kept apart so they never leak into the metric CSVs.
struct ExperimentReport {
    std::string preset;
    std::vector<MetricRow> metrics;
    std::vector<std::pair<std::string, double>> timings;
    std::string config_echo;
    /// Additional plot-ready CSVs: (file name, contents).
    std::vector<std::pair<std::string, std::string>> files;

    void add(std::string label, std::uint64_t seed, std::int64_t item, double value);
    /// Aggregates per label, in order of first appearance.
    std::vector<SummaryRow> summary() const;
    std::optional<SummaryRow> summary(const std::string& label) const;
    /// Rows with the given label, in insertion order.
    std::vector<double> values(const std::string& label) const;
};

std::string metrics_csv(const ExperimentReport& report);
std::string summary_csv(const ExperimentReport& report);
std::string timings_csv(const ExperimentReport& report);
/// Fixed-width table of the summary.
std::string summary_table(const ExperimentReport& report);

/// Writes metrics.csv, summary.csv, timings.csv, report.txt, config.ini and the
/// extra files into `dir`, creating it if needed.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Relative Frobenius error of the best (ridge, lambda) linear map from Z onto S,
/// given only the Gram matrix G = S S^T of the targets.
double projection_error(const Matrix& z, const Eigen::MatrixXd& target_gram, double lambda);

/// Fraction of consecutive pairs where `errors` increases by more than `tolerance`.
double isotonic_violations(const std::vector<double>& errors, double tolerance = 1e-10);

ExperimentReport run_robustness(const config::ExperimentConfig& cfg);
ExperimentReport run_compression(const config::ExperimentConfig& cfg);
ExperimentReport run_rsig_vs_tsig(const config::ExperimentConfig& cfg);
ExperimentReport run_baseline_compare(const config::ExperimentConfig& cfg);
ExperimentReport run_enzyme_ood(const config::ExperimentConfig& cfg);
ExperimentReport run_irregular_grid(const config::ExperimentConfig& cfg);
/// Plain train/evaluate of cfg.pipeline for every seed.
ExperimentReport run_custom(const config::ExperimentConfig& cfg);

/// Dispatches on cfg.preset.
ExperimentReport run_experiment(const config::ExperimentConfig& cfg);

}  // namespace randsig::experiments
