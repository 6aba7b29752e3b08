#include "randsig/esn.hpp"

#include "randsig/errors.hpp"
#include "randsig/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace randsig::esn {

void EsnParams::validate() const
{
    require(size >= 1, "EsnParams: size must be positive");
    require(spectral_radius > 0.0 && std::isfinite(spectral_radius), "EsnParams: spectral radius must be positive");
    require(leak_rate > 0.0 && leak_rate <= 1.0, "EsnParams: leak rate must lie in (0, 1]");
    require(std::isfinite(input_scaling), "EsnParams: input scaling must be finite");
    require(washout >= 0, "EsnParams: washout must be >= 0");
}

double spectral_radius(const Eigen::MatrixXd& m)
{
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() != Eigen::Success) throw NumericFailure("spectral_radius: eigenvalue solver failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Esn init_esn(const EsnParams& params, int input_dim)
{
    params.validate();
    require(input_dim >= 1, "init_esn: input dimension must be positive");
    CounterRng rng(params.seed);
    Esn esn;
    esn.params = params;
    esn.input_dim = input_dim;
    esn.W.resize(params.size, params.size);
    for (int i = 0; i < params.size; ++i)
        for (int j = 0; j < params.size; ++j) esn.W(i, j) = rng.normal();
    esn.W_in.resize(params.size, input_dim);
    for (int i = 0; i < params.size; ++i)
        for (int j = 0; j < input_dim; ++j) esn.W_in(i, j) = params.input_scaling * rng.normal();

    const double radius = spectral_radius(esn.W);
    if (!(radius > 0.0)) throw NumericFailure("init_esn: recurrent matrix has zero spectral radius");
    esn.W *= params.spectral_radius / radius;
    return esn;
}

paths::Path evolve_esn(const Esn& esn, const paths::Path& input, const std::optional<Eigen::VectorXd>& h0)
{
    require(input.dim() == esn.input_dim, "evolve_esn: input dimension " + std::to_string(input.dim()) +
                                              " != " + std::to_string(esn.input_dim));
    const int size = esn.params.size;
    const double leak = esn.params.leak_rate;
    Eigen::VectorXd h = h0 ? *h0 : Eigen::VectorXd::Zero(size);
    require(h.size() == size, "evolve_esn: initial state has wrong size");

    Matrix states(static_cast<Eigen::Index>(input.size()), size);
    states.row(0) = h.transpose();
    Eigen::VectorXd pre(size);
    for (std::size_t n = 1; n < input.size(); ++n) {
        pre.noalias() = esn.W * h;
        pre.noalias() += esn.W_in * input.row(n).transpose();
        h = (1.0 - leak) * h + leak * pre.array().tanh().matrix();
        states.row(static_cast<Eigen::Index>(n)) = h.transpose();
    }
    return paths::Path(input.grid(), std::move(states));
}

}  // namespace randsig::esn
