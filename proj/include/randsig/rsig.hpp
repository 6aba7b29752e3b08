#pragma once

#include "randsig/paths.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace randsig::rsig {

enum class ActivationKind { scaled_identity, tanh, sigmoid };

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& name);

struct Activation {
    ActivationKind kind = ActivationKind::scaled_identity;
    /// Only read by scaled_identity.
    double slope = 1.0;

    void validate() const;
    double operator()(double x) const;
    /// Elementwise application.
    void apply(Eigen::Ref<Eigen::VectorXd> v) const;

    bool operator==(const Activation&) const = default;
};

/// scaled_identity with slope 1 / (d sqrt(k)), so state growth does not depend on k or d.
Activation default_activation(int k, int d);

/// Random linear vector fields driving dZ = sum_i sigma(A_i Z + b_i) dX^i, Z_0 = z0.
struct Reservoir {
    int k = 0;
    int d = 0;
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::VectorXd> b;
    Eigen::VectorXd z0;
    Activation activation;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const Reservoir&) const = default;
};

/// Draws every entry of A_1..A_d, b_1..b_d and z0 i.i.d. N(0, 1) from streams of
/// CounterRng(seed) keyed by position, so that the size-k reservoir of a seed is the
/// leading block of every larger one (common random numbers across k sweeps).
Reservoir init_reservoir(int k, int d, const Activation& activation, std::uint64_t seed);

/// Euler scheme on the control's grid:
///   Z_{t_n} = Z_{t_{n-1}} + sum_i sigma(A_i Z_{t_{n-1}} + b_i) (X^i_{t_n} - X^i_{t_{n-1}}).
/// Throws NumericFailure naming the step if the state stops being finite.
paths::Path evolve(const Reservoir& r, const paths::Path& x);

/// Text container (`randsig-reservoir 1`); doubles are written as hex floats so
/// load(save(r)) == r bit for bit.
void save_reservoir(const Reservoir& r, std::ostream& out);
Reservoir load_reservoir(std::istream& in);

}  // namespace randsig::rsig
