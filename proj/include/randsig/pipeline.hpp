#pragma once

#include "randsig/dynamics.hpp"
#include "randsig/esn.hpp"
#include "randsig/paths.hpp"
#include "randsig/readout.hpp"
#include "randsig/rsig.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace randsig::pipeline {

enum class SystemKind { fou, langevin, enzyme };

/// Substrate injection law for the enzyme system, both built from a Brownian W.
enum class ControlLaw {
    squared_brownian,  ///< X = W^2
    threshold_step,    ///< X = scale * 1{W^2 > level}
};

std::string to_string(SystemKind kind);
SystemKind system_from_string(const std::string& name);
std::string to_string(ControlLaw law);
ControlLaw control_law_from_string(const std::string& name);

struct SystemConfig {
    SystemKind kind = SystemKind::fou;
    dynamics::FouParams fou = dynamics::FouParams::scalar_preset();
    /// Hurst index of the fBm driving the fOU system.
    double hurst = 0.2;
    dynamics::LangevinParams langevin;
    /// Sub-step bound for the Langevin simulator (0 = Euler on the observation grid).
    double langevin_max_step = 0.0;
    dynamics::EnzymeParams enzyme;
    dynamics::EnzymeOptions enzyme_options;
    ControlLaw enzyme_control = ControlLaw::squared_brownian;
    paths::ThresholdStep threshold;
};

struct GridConfig {
    bool irregular = false;
    double horizon = 1.0;
    /// Number of sample times including both endpoints.
    int points = 101;

    void validate() const;
};

/// One control/response pair. The control is time-augmented ([t, noise]) and the
/// target is the clean simulated trajectory.
struct Sample {
    paths::Path control;
    paths::Path target;
};

/// Draws samples of a system on regular or per-sample irregular grids.
/// The fBm factorization is computed once when the grid is fixed.
class SampleGenerator {
public:
    SampleGenerator(SystemConfig system, GridConfig grid);

    Sample operator()(CounterRng& rng) const;
    Sample operator()(CounterRng& rng, ControlLaw law) const;

    /// Dimension of the time-augmented control.
    int control_dim() const;
    int target_dim() const;

private:
    paths::TimeGrid draw_grid(CounterRng& rng) const;

    SystemConfig system_;
    GridConfig grid_;
    std::optional<paths::FbmSampler> fbm_;
};

enum class FeatureKind { rsig, esn, tsig };

std::string to_string(FeatureKind kind);
FeatureKind feature_from_string(const std::string& name);

struct FeatureConfig {
    FeatureKind kind = FeatureKind::rsig;
    /// Reservoir size for rsig.
    int k = 100;
    /// Defaults to rsig::default_activation(k, d) when unset.
    std::optional<rsig::Activation> activation;
    esn::EsnParams esn;
    /// Truncation order for tsig.
    int tsig_order = 3;
};

/// Fixed (untrained) map from a control path to per-time features.
///
/// tsig features are [1, flattened levels 1..M]: the constant is level 0 of the
/// signature, which a linear readout needs to reproduce a nonzero initial value.
class FeatureMap {
public:
    static FeatureMap build(const FeatureConfig& config, int control_dim, std::uint64_t seed);

    paths::Path operator()(const paths::Path& control) const;

    Eigen::Index dim() const;
    int washout() const;
    std::string describe() const;
    const rsig::Reservoir* reservoir() const { return std::get_if<rsig::Reservoir>(&impl_); }
    const esn::Esn* echo_state() const { return std::get_if<esn::Esn>(&impl_); }

private:
    struct Tsig {
        int dim;
        int order;
    };
    explicit FeatureMap(std::variant<rsig::Reservoir, esn::Esn, Tsig> impl) : impl_(std::move(impl)) {}

    std::variant<rsig::Reservoir, esn::Esn, Tsig> impl_;
};

struct PipelineConfig {
    SystemConfig system;
    GridConfig grid;
    FeatureConfig features;
    double lambda = 1e-3;
    int n_train = 100;
    int n_test = 100;
    /// Variance of white noise added to training targets only.
    double observation_noise = 0.0;
    std::uint64_t data_seed = 0;
    std::uint64_t feature_seed = 0;
};

struct Dataset {
    std::vector<Sample> train;
    std::vector<Sample> test;
};

/// Train sample i comes from CounterRng(data_seed).split(0).split(i), test sample i
/// from .split(1).split(i) and training-target noise from .split(2).split(i).
Dataset make_dataset(const PipelineConfig& config);

struct PipelineResult {
    FeatureMap features;
    readout::ReadoutModel model;
    std::vector<double> test_errors;
    readout::MeanStd error;
    /// sqrt(sum ||pred - truth||^2 / sum ||truth||^2) over all test trajectories.
    double pooled_error = 0.0;
    double feature_seconds = 0.0;
    double fit_seconds = 0.0;
};

/// Fits a readout on `train` with the given feature map.
readout::ReadoutModel fit_readout(const FeatureMap& features, std::span<const Sample> train, double lambda);

/// Relative l2 error of each test sample; the result's error fields are filled in.
void evaluate(PipelineResult& result, std::span<const Sample> test);

/// Feature extraction, stacking, ridge fit and held-out evaluation on an existing dataset.
PipelineResult train_on(const PipelineConfig& config, const Dataset& data);

/// make_dataset followed by train_on.
PipelineResult train_pipeline(const PipelineConfig& config);

struct KSearch {
    int best_k = 0;
    std::vector<std::pair<int, double>> validation_error;
};

/// Grid search over reservoir sizes on a held-out split of the training set.
KSearch select_k(const PipelineConfig& config, std::span<const int> candidates, double train_fraction = 0.8);

}  // namespace randsig::pipeline
