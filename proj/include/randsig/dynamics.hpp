#pragma once

#include "randsig/paths.hpp"

#include <Eigen/Core>

namespace randsig::dynamics {

/// dY = Theta (mu - Y) dt + Sigma dB^H, Y_0 = y0.
struct FouParams {
    Eigen::VectorXd mu;
    Eigen::MatrixXd theta;
    Eigen::MatrixXd sigma;
    Eigen::VectorXd y0;

    int dim() const { return static_cast<int>(mu.size()); }

    /// Shapes and finiteness; with `check_psd` also that theta and sigma have
    /// real spectra bounded below by zero.
    void validate(bool check_psd = false) const;

    /// Scalar process used by the robustness and baseline studies:
    /// y0 = 1, mu = 2, theta = 1, sigma = 2.
    static FouParams scalar_preset();
    /// m-dimensional process with [theta]_ij = i / j (1-indexed), sigma = I, mu = y0 = 1.
    static FouParams ratio_preset(int m);
};

/// dY = theta Y (mu - Y^2) dt + sigma dW.
struct LangevinParams {
    double mu = 2.0;
    double theta = 1.0;
    double sigma = 1.0;
    double y0 = 1.0;

    void validate() const;
};

/// Michaelis-Menten kinetics with substrate injection X_t dt:
///   dS = (k_-1 C - k1 S (1 - C)) dt + X dt
///   dC = -(k_-1 C - k1 S (1 - C)) dt - k2 C dt
///   dY = k2 C dt
struct EnzymeParams {
    double k1 = 30.0;
    double k_neg1 = 1.0;
    double k2 = 10.0;
    double s0 = 0.0;
    double c0 = 0.0;
    double y0 = 0.0;

    void validate() const;
};

struct EnzymeOptions {
    /// Explicit Euler sub-steps per grid interval; the control is linearly interpolated.
    int substeps = 10;
    /// Return (S, C, Y) instead of Y alone.
    bool full_state = false;
};

/// Euler-Maruyama on the noise path's own grid.
paths::Path simulate_fou(const FouParams& p, const paths::Path& noise);

/// With `max_step` > 0 every grid interval is split into ceil(dt / max_step) Euler
/// sub-steps along the linearly interpolated noise; 0 steps on the grid itself.
paths::Path simulate_langevin(const LangevinParams& p, const paths::Path& noise, double max_step = 0.0);

paths::Path simulate_enzyme(const EnzymeParams& p, const paths::Path& control,
                            const EnzymeOptions& options = {});

/// Exact integral of the piecewise-linear control over [0, T].
double injected_mass(const paths::Path& control);

/// Adds i.i.d. N(0, variance) noise to every entry.
paths::Path add_observation_noise(const paths::Path& y, double variance, CounterRng& rng);

}  // namespace randsig::dynamics
