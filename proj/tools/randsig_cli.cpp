// Command-line front end: simulate systems, extract features, train and apply
// readouts, and run the experiment presets.

#include "randsig/config.hpp"
#include "randsig/errors.hpp"
#include "randsig/experiments.hpp"
#include "randsig/pipeline.hpp"
#include "randsig/readout.hpp"
#include "randsig/rsig.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace randsig;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::string out;
};

/// Preset defaults (from the file's preset key, or `fallback`) overlaid with the file.
config::ExperimentConfig load(const std::string& file, config::Preset fallback, bool full_scale)
{
    if (file.empty()) return config::preset_defaults(fallback, full_scale);
    std::ifstream probe(file);
    if (!probe) throw InvalidArgument("cannot open config file '" + file + "'");
    const auto name = config::preset_name(probe);
    const auto preset = name.empty() ? fallback : config::preset_from_string(name);
    return config::load_config(file, config::preset_defaults(preset, full_scale));
}

std::ofstream open_out(const fs::path& file)
{
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + file.string());
    return out;
}

paths::Path read_path(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw InvalidArgument("cannot open " + file);
    return paths::read_csv(in);
}

void write_features(const paths::Path& f, std::ostream& out) { paths::write_csv(f, out, "f"); }

int cmd_simulate(const Common& c, int count)
{
    auto cfg = load(c.config_file, config::Preset::custom, false);
    if (c.seed) cfg.pipeline.data_seed = *c.seed;
    const pipeline::SampleGenerator generate(cfg.pipeline.system, cfg.pipeline.grid);
    const CounterRng root(cfg.pipeline.data_seed);
    const fs::path dir = c.out.empty() ? fs::path("simulate") : fs::path(c.out);
    for (int i = 0; i < count; ++i) {
        auto rng = root.split(static_cast<std::uint64_t>(i));
        const auto s = generate(rng);
        auto control = open_out(dir / ("control_" + std::to_string(i) + ".csv"));
        paths::write_csv(s.control, control, "x");
        auto target = open_out(dir / ("target_" + std::to_string(i) + ".csv"));
        paths::write_csv(s.target, target, "y");
    }
    std::cout << "wrote " << count << " trajectories to " << dir.string() << "\n";
    return 0;
}

int cmd_features(const Common& c, const std::string& input)
{
    auto cfg = load(c.config_file, config::Preset::custom, false);
    const auto control = read_path(input);
    const std::uint64_t seed = c.seed.value_or(cfg.seeds.front());
    const auto map = pipeline::FeatureMap::build(cfg.pipeline.features, control.dim(), seed);
    const auto features = map(control);
    if (c.out.empty()) {
        write_features(features, std::cout);
    } else {
        auto out = open_out(c.out);
        write_features(features, out);
    }
    return 0;
}

int cmd_train(const Common& c)
{
    auto cfg = load(c.config_file, config::Preset::custom, false);
    if (c.seed) cfg.pipeline.data_seed = *c.seed;
    cfg.validate();
    auto pc = cfg.pipeline;
    pc.feature_seed = cfg.seeds.front();
    const auto result = pipeline::train_pipeline(pc);

    const fs::path dir = c.out.empty() ? fs::path("model") : fs::path(c.out);
    fs::create_directories(dir);
    {
        auto out = open_out(dir / "model.txt");
        readout::save_model(result.model, result.features.describe(), out);
    }
    {
        auto out = open_out(dir / "config.ini");
        config::write_config(cfg, out);
    }
    if (const auto* r = result.features.reservoir()) {
        auto out = open_out(dir / "reservoir.txt");
        rsig::save_reservoir(*r, out);
    }
    experiments::ExperimentReport report;
    report.preset = "train";
    for (std::size_t i = 0; i < result.test_errors.size(); ++i)
        report.add("test_error", pc.feature_seed, static_cast<std::int64_t>(i), result.test_errors[i]);
    report.add("pooled_error", pc.feature_seed, 0, result.pooled_error);
    {
        auto out = open_out(dir / "metrics.csv");
        out << experiments::metrics_csv(report);
    }
    std::cout << result.features.describe() << "\n"
              << "test relative l2 error: mean " << result.error.mean << " std " << result.error.std << " over "
              << result.test_errors.size() << " trajectories\n";
    return 0;
}

int cmd_predict(const Common& c, const std::string& model_dir, const std::string& input)
{
    const fs::path dir(model_dir);
    const auto cfg = config::load_config((dir / "config.ini").string(), config::preset_defaults(config::Preset::custom));
    std::ifstream model_in(dir / "model.txt");
    if (!model_in) throw InvalidArgument("cannot open " + (dir / "model.txt").string());
    const auto [model, description] = readout::load_model(model_in);

    const auto control = read_path(input);
    const auto map = pipeline::FeatureMap::build(cfg.pipeline.features, control.dim(), cfg.seeds.front());
    if (map.describe() != description)
        throw InvalidArgument("predict: feature map '" + map.describe() + "' does not match the model's '" +
                              description + "'");
    const auto pred = readout::predict(model, map(control));
    if (c.out.empty()) {
        paths::write_csv(pred, std::cout, "y");
    } else {
        auto out = open_out(c.out);
        paths::write_csv(pred, out, "y");
    }
    return 0;
}

int cmd_experiment(const Common& c, const std::string& preset_name, bool full_scale)
{
    const auto preset = config::preset_from_string(preset_name);
    auto cfg = c.config_file.empty() ? config::preset_defaults(preset, full_scale)
                                     : config::load_config(c.config_file, config::preset_defaults(preset, full_scale));
    cfg.preset = preset;
    cfg.full_scale = full_scale;
    if (c.seed) cfg.pipeline.data_seed = *c.seed;
    if (!c.out.empty()) cfg.out_dir = c.out;
    const auto report = experiments::run_experiment(cfg);
    experiments::write_report(report, cfg.out_dir);
    std::cout << experiments::summary_table(report);
    std::cout << "wrote " << cfg.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Randomized signature reservoir computing"};
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_file, "INI config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", common.seed, "Seed (data seed, or feature seed for `features`)");
        sub->add_option("--out", common.out, "Output directory or file");
    };

    int count = 1;
    auto* simulate = app.add_subcommand("simulate", "Emit control/target trajectory CSVs");
    add_common(simulate);
    simulate->add_option("--count", count, "Number of trajectories")->check(CLI::PositiveNumber);

    std::string input;
    auto* features = app.add_subcommand("features", "Emit per-time features of a control CSV");
    add_common(features);
    features->add_option("--input", input, "Control path CSV")->required()->check(CLI::ExistingFile);

    auto* train = app.add_subcommand("train", "Train a readout and save it");
    add_common(train);

    std::string model_dir;
    auto* predict = app.add_subcommand("predict", "Apply a saved readout to a control CSV");
    add_common(predict);
    predict->add_option("--model", model_dir, "Directory written by `train`")->required()->check(CLI::ExistingDirectory);
    predict->add_option("--input", input, "Control path CSV")->required()->check(CLI::ExistingFile);

    std::string preset;
    bool full_scale = false;
    auto* experiment = app.add_subcommand("experiment", "Run an experiment preset");
    add_common(experiment);
    experiment->add_option("preset", preset, "robustness | compression | rsig_vs_tsig | baseline_compare | "
                                             "enzyme_ood | irregular_grid | custom")
        ->required();
    experiment->add_flag("--full-scale", full_scale, "Large variant of the preset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return cmd_simulate(common, count);
        if (*features) return cmd_features(common, input);
        if (*train) return cmd_train(common);
        if (*predict) return cmd_predict(common, model_dir, input);
        if (*experiment) return cmd_experiment(common, preset, full_scale);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
