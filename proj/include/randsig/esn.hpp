#pragma once

#include "randsig/paths.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>

namespace randsig::esn {

struct EsnParams {
    int size = 50;
    double spectral_radius = 0.7;
    double leak_rate = 0.4;
    double input_scaling = 1.0;
    std::uint64_t seed = 0;
    /// Leading states excluded from readout training.
    int washout = 0;

    void validate() const;
};

/// Untrained leaky tanh recurrent reservoir.
struct Esn {
    EsnParams params;
    int input_dim = 0;
    Eigen::MatrixXd W;
    Eigen::MatrixXd W_in;
};

/// Largest eigenvalue modulus.
double spectral_radius(const Eigen::MatrixXd& m);

/// Dense N(0, 1) recurrent matrix rescaled to params.spectral_radius, and dense
/// N(0, input_scaling^2) input weights.
Esn init_esn(const EsnParams& params, int input_dim);

/// h_n = (1 - a) h_{n-1} + a tanh(W h_{n-1} + W_in x_{t_n}), row 0 holding h_0 (zero by default).
paths::Path evolve_esn(const Esn& esn, const paths::Path& input,
                       const std::optional<Eigen::VectorXd>& h0 = std::nullopt);

}  // namespace randsig::esn
