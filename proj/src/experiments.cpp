#include "randsig/experiments.hpp"

#include "randsig/csv.hpp"
#include "randsig/errors.hpp"
#include "randsig/tsig.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace randsig::experiments {

namespace {

using config::ExperimentConfig;
using pipeline::PipelineConfig;
using pipeline::PipelineResult;

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ExperimentReport start_report(const ExperimentConfig& cfg)
{
    cfg.validate();
    ExperimentReport report;
    report.preset = config::to_string(cfg.preset);
    std::ostringstream echo;
    config::write_config(cfg, echo);
    report.config_echo = echo.str();
    return report;
}

std::string tag(const std::string& prefix, int value) { return prefix + std::to_string(value); }

void add_errors(ExperimentReport& report, const std::string& label, std::uint64_t seed,
                const std::vector<double>& errors)
{
    for (std::size_t i = 0; i < errors.size(); ++i) report.add(label, seed, static_cast<std::int64_t>(i), errors[i]);
}

/// `t,control...,truth...,pred...` for one trajectory.
std::string trajectory_csv(const paths::Path& control, const paths::Path& truth, const paths::Path& pred)
{
    std::ostringstream out;
    out << "t";
    for (int j = 1; j <= control.dim(); ++j) out << ",x" << j;
    for (int j = 1; j <= truth.dim(); ++j) out << ",y" << j;
    for (int j = 1; j <= pred.dim(); ++j) out << ",pred" << j;
    out << "\n";
    for (std::size_t n = 0; n < truth.size(); ++n) {
        out << csv::format(truth.grid()[n]);
        for (int j = 0; j < control.dim(); ++j) out << ',' << csv::format(control(n, j));
        for (int j = 0; j < truth.dim(); ++j) out << ',' << csv::format(truth(n, j));
        for (int j = 0; j < pred.dim(); ++j) out << ',' << csv::format(pred(n, j));
        out << "\n";
    }
    return out.str();
}

void add_timings(ExperimentReport& report, const std::string& prefix, const PipelineResult& r)
{
    report.timings.emplace_back(prefix + "features_and_fit", r.feature_seconds + r.fit_seconds);
}

}  // namespace

void ExperimentReport::add(std::string label, std::uint64_t seed, std::int64_t item, double value)
{
    require(label.find_first_of(",\n") == std::string::npos, "ExperimentReport: label must not contain ',' or newline");
    metrics.push_back({std::move(label), seed, item, value});
}

std::vector<SummaryRow> ExperimentReport::summary() const
{
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> groups;
    for (const auto& row : metrics) {
        auto [it, inserted] = groups.try_emplace(row.label);
        if (inserted) order.push_back(row.label);
        it->second.push_back(row.value);
    }
    std::vector<SummaryRow> out;
    for (const auto& label : order) {
        const auto& v = groups.at(label);
        const auto ms = readout::mean_std(v);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        out.push_back({label, v.size(), ms.mean, ms.std, *lo, *hi});
    }
    return out;
}

std::optional<SummaryRow> ExperimentReport::summary(const std::string& label) const
{
    const auto v = values(label);
    if (v.empty()) return std::nullopt;
    const auto ms = readout::mean_std(v);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return SummaryRow{label, v.size(), ms.mean, ms.std, *lo, *hi};
}

std::vector<double> ExperimentReport::values(const std::string& label) const
{
    std::vector<double> out;
    for (const auto& row : metrics)
        if (row.label == label) out.push_back(row.value);
    return out;
}

std::string metrics_csv(const ExperimentReport& report)
{
    std::ostringstream out;
    out << "label,seed,item,value\n";
    for (const auto& row : report.metrics)
        out << row.label << ',' << row.seed << ',' << row.item << ',' << csv::format(row.value) << "\n";
    return out.str();
}

std::string summary_csv(const ExperimentReport& report)
{
    std::ostringstream out;
    out << "label,count,mean,std,min,max\n";
    for (const auto& s : report.summary())
        out << s.label << ',' << s.count << ',' << csv::format(s.mean) << ',' << csv::format(s.std) << ','
            << csv::format(s.min) << ',' << csv::format(s.max) << "\n";
    return out.str();
}

std::string timings_csv(const ExperimentReport& report)
{
    std::ostringstream out;
    out << "stage,seconds\n";
    for (const auto& [stage, seconds] : report.timings) out << stage << ',' << csv::format(seconds) << "\n";
    return out.str();
}

std::string summary_table(const ExperimentReport& report)
{
    const auto rows = report.summary();
    std::size_t width = 5;
    for (const auto& r : rows) width = std::max(width, r.label.size());
    std::ostringstream out;
    out << "preset: " << report.preset << "\n";
    out << std::left << std::setw(static_cast<int>(width)) << "label" << std::right << std::setw(8) << "count"
        << std::setw(14) << "mean" << std::setw(14) << "std" << std::setw(14) << "min" << std::setw(14) << "max"
        << "\n";
    out << std::setprecision(6);
    for (const auto& r : rows)
        out << std::left << std::setw(static_cast<int>(width)) << r.label << std::right << std::setw(8) << r.count
            << std::setw(14) << r.mean << std::setw(14) << r.std << std::setw(14) << r.min << std::setw(14) << r.max
            << "\n";
    return out.str();
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw InvalidArgument("cannot write " + (dir / name).string());
        out << text;
    };
    put("metrics.csv", metrics_csv(report));
    put("summary.csv", summary_csv(report));
    put("timings.csv", timings_csv(report));
    put("report.txt", summary_table(report));
    put("config.ini", report.config_echo);
    for (const auto& [name, text] : report.files) put(name, text);
}

double projection_error(const Matrix& z, const Eigen::MatrixXd& target_gram, double lambda)
{
    const auto rows = z.rows();
    require(target_gram.rows() == rows && target_gram.cols() == rows, "projection_error: Gram size mismatch");
    const double total = target_gram.trace();
    if (!(total > 0.0)) throw UndefinedMetric("projection_error: targets are identically zero");
    // Hat matrix U diag(s^2 / (s^2 + lambda)) U^T; at lambda = 0 the projection onto
    // the numerical column space of Z.
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(z), Eigen::ComputeThinU);
    const Eigen::VectorXd s = svd.singularValues();
    const double cutoff = s.size() ? s(0) * std::numeric_limits<double>::epsilon() * std::max(z.rows(), z.cols()) : 0.0;
    Eigen::VectorXd shrink(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        shrink(i) = lambda > 0.0 ? s(i) * s(i) / (s(i) * s(i) + lambda) : (s(i) > cutoff ? 1.0 : 0.0);
    const Eigen::MatrixXd& u = svd.matrixU();
    const Eigen::MatrixXd residual =
        Eigen::MatrixXd::Identity(rows, rows) - u * shrink.asDiagonal() * u.transpose();
    const double err = (residual * target_gram * residual.transpose()).trace();
    return std::sqrt(std::max(0.0, err) / total);
}

double isotonic_violations(const std::vector<double>& errors, double tolerance)
{
    if (errors.size() < 2) return 0.0;
    std::size_t bad = 0;
    for (std::size_t i = 1; i < errors.size(); ++i)
        if (errors[i] > errors[i - 1] + tolerance) ++bad;
    return static_cast<double>(bad) / static_cast<double>(errors.size() - 1);
}

ExperimentReport run_robustness(const ExperimentConfig& cfg)
{
    auto report = start_report(cfg);
    Stopwatch data_clock;
    const auto data = pipeline::make_dataset(cfg.pipeline);
    report.timings.emplace_back("data", data_clock.seconds());

    const std::size_t n_test = data.test.size();
    // predictions[i][s] is the prediction for test trajectory i under seed s.
    std::vector<std::vector<Matrix>> predictions(n_test);
    for (auto seed : cfg.seeds) {
        PipelineConfig pc = cfg.pipeline;
        pc.feature_seed = seed;
        auto result = pipeline::train_on(pc, data);
        add_timings(report, "seed" + std::to_string(seed) + "/", result);
        add_errors(report, "test_error", seed, result.test_errors);
        for (std::size_t i = 0; i < n_test; ++i)
            predictions[i].push_back(readout::predict(result.model, result.features(data.test[i].control)).values());
    }

    const double seeds = static_cast<double>(cfg.seeds.size());
    for (std::size_t i = 0; i < n_test; ++i) {
        const auto& truth = data.test[i].target;
        Matrix mean = Matrix::Zero(truth.values().rows(), truth.values().cols());
        for (const auto& p : predictions[i]) mean += p;
        mean /= seeds;
        Matrix var = Matrix::Zero(mean.rows(), mean.cols());
        if (cfg.seeds.size() > 1) {
            for (const auto& p : predictions[i]) var.array() += (p - mean).array().square();
            var /= seeds - 1.0;
        }
        const Matrix sd = var.array().sqrt().matrix();
        const double rms = truth.values().norm() / std::sqrt(static_cast<double>(truth.values().size()));
        report.add("band_std_ratio", cfg.pipeline.data_seed, static_cast<std::int64_t>(i), sd.mean() / rms);
        report.add("band_max_std", cfg.pipeline.data_seed, static_cast<std::int64_t>(i), sd.maxCoeff());

        if (static_cast<int>(i) < cfg.sample_trajectories) {
            std::ostringstream out;
            out << "t";
            for (int j = 1; j <= truth.dim(); ++j)
                out << ",truth" << j << ",mean" << j << ",std" << j << ",lower" << j << ",upper" << j;
            out << "\n";
            for (Eigen::Index n = 0; n < mean.rows(); ++n) {
                out << csv::format(truth.grid()[static_cast<std::size_t>(n)]);
                for (Eigen::Index j = 0; j < mean.cols(); ++j)
                    out << ',' << csv::format(truth.values()(n, j)) << ',' << csv::format(mean(n, j)) << ','
                        << csv::format(sd(n, j)) << ',' << csv::format(mean(n, j) - 3.0 * sd(n, j)) << ','
                        << csv::format(mean(n, j) + 3.0 * sd(n, j));
                out << "\n";
            }
            report.files.emplace_back("band_" + std::to_string(i) + ".csv", out.str());
        }
    }
    return report;
}

ExperimentReport run_compression(const ExperimentConfig& cfg)
{
    auto report = start_report(cfg);
    const auto& cc = cfg.compression;
    const int d = cc.dim;
    const auto flat = tsig::flattened_size(d, cc.order);
    const auto rows = static_cast<std::size_t>(cc.steps) + 1;
    const double bytes = static_cast<double>(rows) * static_cast<double>(flat) * sizeof(double);
    if (bytes > static_cast<double>(cc.memory_budget))
        throw MemoryBudgetExceeded("compression: signature rows need " + std::to_string(bytes / (1 << 20)) +
                                   " MiB, above the budget of " + std::to_string(cc.memory_budget >> 20) + " MiB");

    // Control [t, W] with W a (d - 1)-dimensional Brownian motion on a regular grid.
    CounterRng rng = CounterRng(cfg.pipeline.data_seed).split(0);
    const auto grid = paths::regular_grid(1.0, cc.steps);
    const auto control = paths::time_augment(paths::sample_brownian(grid, d - 1, rng));

    Stopwatch sig_clock;
    Eigen::MatrixXd gram;
    {
        Matrix sig(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(flat));
        tsig::for_each_signature(control, cc.order, [&](std::size_t n, const tsig::TruncatedSig& s) {
            sig.row(static_cast<Eigen::Index>(n)) = tsig::flatten(s).transpose();
        });
        gram = sig * sig.transpose();
    }
    report.timings.emplace_back("signature", sig_clock.seconds());
    report.add("flattened_dim", 0, 0, static_cast<double>(flat));

    std::vector<double> mean_errors(cc.ks.size(), 0.0);
    for (auto seed : cfg.seeds) {
        std::vector<double> errors;
        int first_below_target = -1;
        int first_below_1e3 = -1;
        Stopwatch clock;
        for (int k : cc.ks) {
            const auto reservoir = rsig::init_reservoir(k, d, rsig::default_activation(k, d), seed);
            const auto z = rsig::evolve(reservoir, control);
            const double err = projection_error(z.values(), gram, cfg.pipeline.lambda);
            errors.push_back(err);
            report.add("error", seed, k, err);
            report.add("rsig_ops", seed, k, static_cast<double>(k) * k * d);
            if (first_below_target < 0 && err <= cc.target_error) first_below_target = k;
            if (first_below_1e3 < 0 && err <= 1e-3) first_below_1e3 = k;
        }
        report.timings.emplace_back("seed" + std::to_string(seed) + "/sweep", clock.seconds());
        for (std::size_t j = 0; j < errors.size(); ++j) mean_errors[j] += errors[j] / static_cast<double>(cfg.seeds.size());
        report.add("isotonic_violation_fraction", seed, 0, isotonic_violations(errors));
        report.add("min_k_below_target", seed, 0, first_below_target);
        report.add("min_k_below_1e-3", seed, 0, first_below_1e3);

        // Full-rank interpolation check at k = flattened dimension, only where affordable.
        if (flat <= 4096) {
            const auto k = static_cast<int>(flat);
            const auto reservoir = rsig::init_reservoir(k, d, rsig::default_activation(k, d), seed);
            const auto z = rsig::evolve(reservoir, control);
            report.add("error_at_flat_dim_lambda0", seed, k, projection_error(z.values(), gram, 0.0));
        }
    }

    // The seed-averaged curve estimates the expected error at each k.
    int mean_below_target = -1;
    for (std::size_t j = 0; j < cc.ks.size(); ++j) {
        report.add("mean_error", 0, cc.ks[j], mean_errors[j]);
        if (mean_below_target < 0 && mean_errors[j] <= cc.target_error) mean_below_target = cc.ks[j];
    }
    report.add("mean_curve_isotonic_violation_fraction", 0, 0, isotonic_violations(mean_errors));
    report.add("mean_curve_min_k_below_target", 0, 0, mean_below_target);
    return report;
}

ExperimentReport run_rsig_vs_tsig(const ExperimentConfig& cfg)
{
    auto report = start_report(cfg);
    for (int m : cfg.rsig_vs_tsig.m_values) {
        for (int n_train : cfg.rsig_vs_tsig.n_train_values) {
            PipelineConfig pc = cfg.pipeline;
            pc.system.kind = pipeline::SystemKind::fou;
            pc.system.fou = cfg.fou_preset == config::FouPreset::ratio ? dynamics::FouParams::ratio_preset(m)
                                                                         : cfg.pipeline.system.fou;
            pc.n_train = n_train;
            const int d = pc.system.fou.dim() + 1;
            const std::string where = tag("m", m) + tag("_n", n_train) + "/";
            Stopwatch data_clock;
            const auto data = pipeline::make_dataset(pc);
            report.timings.emplace_back(where + "data", data_clock.seconds());

            pc.features.kind = pipeline::FeatureKind::rsig;
            pc.features.k = d;
            for (auto seed : cfg.seeds) {
                pc.feature_seed = seed;
                const auto r = pipeline::train_on(pc, data);
                add_errors(report, where + "rsig_error", seed, r.test_errors);
                report.add(where + "rsig_params", seed, 0, static_cast<double>(r.model.beta.size()));
                add_timings(report, where + "rsig/seed" + std::to_string(seed) + "/", r);
            }

            pc.features.kind = pipeline::FeatureKind::tsig;
            pc.features.tsig_order = cfg.rsig_vs_tsig.tsig_order;
            const auto features = pipeline::FeatureMap::build(pc.features, d, 0);
            const auto design_rows = static_cast<double>(n_train) * pc.grid.points;
            report.add(where + "tsig_underdetermined", cfg.seeds.front(), 0,
                       design_rows < static_cast<double>(features.dim()) ? 1.0 : 0.0);
            const auto r = pipeline::train_on(pc, data);
            add_errors(report, where + "tsig_error", cfg.seeds.front(), r.test_errors);
            report.add(where + "tsig_params", cfg.seeds.front(), 0, static_cast<double>(r.model.beta.size()));
            add_timings(report, where + "tsig/", r);
        }
    }
    return report;
}

ExperimentReport run_baseline_compare(const ExperimentConfig& cfg)
{
    auto report = start_report(cfg);
    Stopwatch data_clock;
    const auto data = pipeline::make_dataset(cfg.pipeline);
    report.timings.emplace_back("data", data_clock.seconds());
    for (auto seed : cfg.seeds) {
        PipelineConfig pc = cfg.pipeline;
        pc.feature_seed = seed;
        pc.features.kind = pipeline::FeatureKind::rsig;
        const auto rs = pipeline::train_on(pc, data);
        pc.features.kind = pipeline::FeatureKind::esn;
        const auto esn = pipeline::train_on(pc, data);

        add_errors(report, "rsig_error", seed, rs.test_errors);
        add_errors(report, "esn_error", seed, esn.test_errors);
        report.add("rsig_params", seed, 0, static_cast<double>(rs.model.beta.size()));
        report.add("esn_params", seed, 0, static_cast<double>(esn.model.beta.size()));
        report.add("esn_over_rsig", seed, 0, esn.error.mean / rs.error.mean);
        add_timings(report, "seed" + std::to_string(seed) + "/rsig/", rs);
        add_timings(report, "seed" + std::to_string(seed) + "/esn/", esn);

        for (int i = 0; i < std::min<int>(cfg.sample_trajectories, static_cast<int>(data.test.size())); ++i) {
            const auto& s = data.test[static_cast<std::size_t>(i)];
            const auto p_rs = readout::predict(rs.model, rs.features(s.control));
            const auto p_esn = readout::predict(esn.model, esn.features(s.control));
            const std::string suffix = "_seed" + std::to_string(seed) + "_" + std::to_string(i) + ".csv";
            report.files.emplace_back("sample_rsig" + suffix, trajectory_csv(s.control, s.target, p_rs));
            report.files.emplace_back("sample_esn" + suffix, trajectory_csv(s.control, s.target, p_esn));
        }
    }
    return report;
}

ExperimentReport run_enzyme_ood(const ExperimentConfig& cfg)
{
    auto report = start_report(cfg);
    PipelineConfig base = cfg.pipeline;
    base.system.kind = pipeline::SystemKind::enzyme;
    base.system.enzyme_control = pipeline::ControlLaw::squared_brownian;
    Stopwatch data_clock;
    const auto data = pipeline::make_dataset(base);

    // Out-of-distribution controls on the same grid, from their own stream.
    const pipeline::SampleGenerator generate(base.system, base.grid);
    const CounterRng ood_root = CounterRng(base.data_seed).split(3);
    // A threshold control that never fires yields Y = 0, where the relative error is
    // undefined; such draws are counted and left out of the OOD error.
    std::vector<pipeline::Sample> ood;
    int zero_reference = 0;
    for (int i = 0; i < base.n_test; ++i) {
        auto rng = ood_root.split(static_cast<std::uint64_t>(i));
        auto s = generate(rng, pipeline::ControlLaw::threshold_step);
        if (s.target.values().norm() > 0.0) ood.push_back(std::move(s));
        else ++zero_reference;
    }
    report.add("ood_zero_reference_excluded", cfg.seeds.front(), 0, zero_reference);
    report.timings.emplace_back("data", data_clock.seconds());

    // X = 0: the product never forms, so any prediction is pure drift of the readout.
    const auto grid = paths::regular_grid(base.grid.horizon, base.grid.points - 1);
    const paths::Path zero_control = paths::time_augment(paths::Path(grid, Matrix::Zero(base.grid.points, 1)));

    for (auto seed : cfg.seeds) {
        PipelineConfig pc = base;
        pc.feature_seed = seed;
        auto result = pipeline::train_on(pc, data);
        add_timings(report, "seed" + std::to_string(seed) + "/", result);
        add_errors(report, "in_distribution_error", seed, result.test_errors);
        const auto id_mean = result.error.mean;
        report.add("in_distribution_pooled_error", seed, 0, result.pooled_error);

        pipeline::evaluate(result, ood);
        add_errors(report, "ood_error", seed, result.test_errors);
        report.add("ood_pooled_error", seed, 0, result.pooled_error);
        report.add("ood_over_in_distribution", seed, 0, result.error.mean / id_mean);

        const auto zero_pred = readout::predict(result.model, result.features(zero_control));
        report.add("zero_control_max_abs_prediction", seed, 0, zero_pred.values().cwiseAbs().maxCoeff());

        for (int i = 0; i < std::min({cfg.sample_trajectories, base.n_test, static_cast<int>(ood.size())}); ++i) {
            const auto& s_id = data.test[static_cast<std::size_t>(i)];
            const auto& s_ood = ood[static_cast<std::size_t>(i)];
            const std::string suffix = "_seed" + std::to_string(seed) + "_" + std::to_string(i) + ".csv";
            report.files.emplace_back(
                "sample_in_distribution" + suffix,
                trajectory_csv(s_id.control, s_id.target, readout::predict(result.model, result.features(s_id.control))));
            report.files.emplace_back(
                "sample_ood" + suffix,
                trajectory_csv(s_ood.control, s_ood.target, readout::predict(result.model, result.features(s_ood.control))));
        }
    }
    return report;
}

ExperimentReport run_irregular_grid(const ExperimentConfig& cfg)
{
    auto report = start_report(cfg);
    for (auto [points, k] : cfg.grid_pairs) {
        for (bool irregular : {false, true}) {
            PipelineConfig pc = cfg.pipeline;
            pc.system.kind = pipeline::SystemKind::langevin;
            pc.grid.points = points;
            pc.grid.irregular = irregular;
            pc.features.k = k;
            const std::string where =
                std::string(irregular ? "irregular" : "regular") + tag("_N", points) + tag("_k", k) + "/";
            Stopwatch data_clock;
            const auto data = pipeline::make_dataset(pc);
            report.timings.emplace_back(where + "data", data_clock.seconds());
            for (auto seed : cfg.seeds) {
                pc.feature_seed = seed;
                const auto r = pipeline::train_on(pc, data);
                add_errors(report, where + "error", seed, r.test_errors);
                report.add(where + "pooled_error", seed, 0, r.pooled_error);
                add_timings(report, where + "seed" + std::to_string(seed) + "/", r);
            }
        }
    }
    return report;
}

ExperimentReport run_custom(const ExperimentConfig& cfg)
{
    auto report = start_report(cfg);
    const auto data = pipeline::make_dataset(cfg.pipeline);
    for (auto seed : cfg.seeds) {
        PipelineConfig pc = cfg.pipeline;
        pc.feature_seed = seed;
        const auto r = pipeline::train_on(pc, data);
        add_errors(report, "test_error", seed, r.test_errors);
        report.add("pooled_error", seed, 0, r.pooled_error);
        add_timings(report, "seed" + std::to_string(seed) + "/", r);
    }
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg)
{
    switch (cfg.preset) {
    case config::Preset::robustness: return run_robustness(cfg);
    case config::Preset::compression: return run_compression(cfg);
    case config::Preset::rsig_vs_tsig: return run_rsig_vs_tsig(cfg);
    case config::Preset::baseline_compare: return run_baseline_compare(cfg);
    case config::Preset::enzyme_ood: return run_enzyme_ood(cfg);
    case config::Preset::irregular_grid: return run_irregular_grid(cfg);
    case config::Preset::custom: return run_custom(cfg);
    }
    throw InvalidArgument("run_experiment: unknown preset");
}

}  // namespace randsig::experiments
