#pragma once

#include "randsig/pipeline.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace randsig::config {

enum class Preset { robustness, compression, rsig_vs_tsig, baseline_compare, enzyme_ood, irregular_grid, custom };

std::string to_string(Preset preset);
Preset preset_from_string(const std::string& name);
const std::vector<Preset>& all_presets();

/// Which fOU parameter set the system section refers to.
enum class FouPreset { scalar, ratio };

struct CompressionConfig {
    /// Control dimension including the time channel.
    int dim = 5;
    int order = 4;
    /// Number of grid steps on [0, 1].
    int steps = 100;
    std::vector<int> ks;
    /// Error threshold used to report the smallest sufficient k.
    double target_error = 1e-4;
    std::uint64_t memory_budget = 4ULL << 30;
};

struct RsigVsTsigConfig {
    std::vector<int> m_values{5, 10, 20};
    std::vector<int> n_train_values{20, 50};
    int tsig_order = 3;
};

/// Everything an experiment run needs. Every preset is a set of defaults over
/// this one structure, and a config file may override any field.
struct ExperimentConfig {
    Preset preset = Preset::custom;
    pipeline::PipelineConfig pipeline;
    FouPreset fou_preset = FouPreset::scalar;
    int fou_dim = 1;
    /// Reservoir seeds; each is one realisation of (A, b, z0) or of the ESN weights.
    std::vector<std::uint64_t> seeds{1};
    bool full_scale = false;
    std::string out_dir = "out";

    CompressionConfig compression;
    RsigVsTsigConfig rsig_vs_tsig;
    /// (grid points, k) pairs for the irregular-grid study.
    std::vector<std::pair<int, int>> grid_pairs;
    /// Number of test trajectories exported as sample CSVs.
    int sample_trajectories = 3;

    void validate() const;
};

/// Defaults for a preset; `full_scale` selects the large variant where one exists.
ExperimentConfig preset_defaults(Preset preset, bool full_scale = false);

/// INI text with sections [experiment] [system] [grid] [reservoir] [readout] [output].
/// Keys absent from the text keep the values already in `base`.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base);
ExperimentConfig load_config(const std::string& file, ExperimentConfig base);

/// Preset named in the file's [experiment] section, if any.
std::string preset_name(std::istream& in);

/// Writes every field in the same schema; parse_config(write_config(c)) == c.
void write_config(const ExperimentConfig& config, std::ostream& out);

}  // namespace randsig::config
