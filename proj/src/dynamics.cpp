#include "randsig/dynamics.hpp"

#include "randsig/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace randsig::dynamics {

namespace {

bool spectrum_nonnegative(const Eigen::MatrixXd& m)
{
    const Eigen::VectorXcd eig = m.eigenvalues();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
        if (std::abs(eig(i).imag()) > 1e-9 * scale) return false;
        if (eig(i).real() < -1e-9 * scale) return false;
    }
    return true;
}

}  // namespace

void FouParams::validate(bool check_psd) const
{
    const auto m = mu.size();
    require(m >= 1, "FouParams: dimension must be positive");
    require(y0.size() == m, "FouParams: y0 has wrong size");
    require(theta.rows() == m && theta.cols() == m, "FouParams: theta must be m x m");
    require(sigma.rows() == m && sigma.cols() == m, "FouParams: sigma must be m x m");
    require(mu.allFinite() && y0.allFinite() && theta.allFinite() && sigma.allFinite(),
            "FouParams: non-finite parameter");
    if (check_psd) {
        require(spectrum_nonnegative(theta), "FouParams: theta has a negative or complex eigenvalue");
        require(spectrum_nonnegative(sigma), "FouParams: sigma has a negative or complex eigenvalue");
    }
}

FouParams FouParams::scalar_preset()
{
    FouParams p;
    p.mu = Eigen::VectorXd::Constant(1, 2.0);
    p.theta = Eigen::MatrixXd::Constant(1, 1, 1.0);
    p.sigma = Eigen::MatrixXd::Constant(1, 1, 2.0);
    p.y0 = Eigen::VectorXd::Constant(1, 1.0);
    p.validate(true);
    return p;
}

FouParams FouParams::ratio_preset(int m)
{
    require(m >= 1, "FouParams::ratio_preset: m must be positive");
    FouParams p;
    p.mu = Eigen::VectorXd::Ones(m);
    p.y0 = Eigen::VectorXd::Ones(m);
    p.sigma = Eigen::MatrixXd::Identity(m, m);
    p.theta.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) p.theta(i, j) = static_cast<double>(i + 1) / (j + 1);
    p.validate(true);
    return p;
}

void LangevinParams::validate() const
{
    require(theta >= 0.0, "LangevinParams: theta must be >= 0");
    require(sigma >= 0.0, "LangevinParams: sigma must be >= 0");
    require(std::isfinite(mu) && std::isfinite(y0), "LangevinParams: non-finite parameter");
}

void EnzymeParams::validate() const
{
    require(k1 > 0.0 && k_neg1 > 0.0 && k2 > 0.0, "EnzymeParams: rate constants must be positive");
    for (double c : {s0, c0, y0})
        require(c >= 0.0 && c <= 1.0, "EnzymeParams: initial concentrations must lie in [0, 1]");
}

paths::Path simulate_fou(const FouParams& p, const paths::Path& noise)
{
    p.validate();
    require(noise.dim() == p.dim(), "simulate_fou: noise dimension " + std::to_string(noise.dim()) +
                                        " != process dimension " + std::to_string(p.dim()));
    const auto& grid = noise.grid();
    Matrix y(static_cast<Eigen::Index>(grid.size()), p.dim());
    Eigen::VectorXd state = p.y0;
    y.row(0) = state.transpose();
    for (std::size_t n = 0; n < grid.steps(); ++n) {
        const Eigen::VectorXd db = noise.increment(n).transpose();
        state += p.theta * (p.mu - state) * grid.step(n) + p.sigma * db;
        y.row(static_cast<Eigen::Index>(n + 1)) = state.transpose();
    }
    if (!y.allFinite()) throw NumericFailure("simulate_fou: trajectory diverged");
    return paths::Path(grid, std::move(y));
}

paths::Path simulate_langevin(const LangevinParams& p, const paths::Path& noise, double max_step)
{
    p.validate();
    require(max_step >= 0.0 && std::isfinite(max_step), "simulate_langevin: max_step must be >= 0");
    require(noise.dim() == 1, "simulate_langevin: noise must be one-dimensional");
    const auto& grid = noise.grid();
    Matrix y(static_cast<Eigen::Index>(grid.size()), 1);
    double state = p.y0;
    y(0, 0) = state;
    for (std::size_t n = 0; n < grid.steps(); ++n) {
        const double dt = grid.step(n);
        const int substeps = max_step > 0.0 ? std::max(1, static_cast<int>(std::ceil(dt / max_step))) : 1;
        const double h = dt / substeps;
        const double dw = (noise(n + 1, 0) - noise(n, 0)) / substeps;
        for (int j = 0; j < substeps; ++j) state += p.theta * state * (p.mu - state * state) * h + p.sigma * dw;
        y(static_cast<Eigen::Index>(n + 1), 0) = state;
    }
    if (!y.allFinite()) throw NumericFailure("simulate_langevin: trajectory diverged");
    return paths::Path(grid, std::move(y));
}

paths::Path simulate_enzyme(const EnzymeParams& p, const paths::Path& control,
                            const EnzymeOptions& options)
{
    p.validate();
    require(options.substeps >= 1, "simulate_enzyme: substeps must be positive");
    require(control.dim() == 1, "simulate_enzyme: control must be one-dimensional");
    require((control.values().array() >= 0.0).all(), "simulate_enzyme: control must be nonnegative");

    const auto& grid = control.grid();
    Matrix out(static_cast<Eigen::Index>(grid.size()), options.full_state ? 3 : 1);
    double s = p.s0, c = p.c0, y = p.y0;
    auto store = [&](std::size_t n) {
        const auto i = static_cast<Eigen::Index>(n);
        if (options.full_state) {
            out(i, 0) = s;
            out(i, 1) = c;
            out(i, 2) = y;
        } else {
            out(i, 0) = y;
        }
    };
    store(0);
    for (std::size_t n = 0; n < grid.steps(); ++n) {
        const double h = grid.step(n) / options.substeps;
        const double x0 = control(n, 0);
        const double x1 = control(n + 1, 0);
        for (int j = 0; j < options.substeps; ++j) {
            const double x = x0 + (x1 - x0) * (static_cast<double>(j) / options.substeps);
            const double binding = p.k_neg1 * c - p.k1 * s * (1.0 - c);
            const double ds = binding + x;
            const double dc = -binding - p.k2 * c;
            const double dy = p.k2 * c;
            s += ds * h;
            c += dc * h;
            y += dy * h;
        }
        store(n + 1);
    }
    if (!out.allFinite()) throw NumericFailure("simulate_enzyme: trajectory diverged");
    return paths::Path(grid, std::move(out));
}

double injected_mass(const paths::Path& control)
{
    double mass = 0.0;
    for (std::size_t n = 0; n < control.grid().steps(); ++n)
        mass += 0.5 * (control(n, 0) + control(n + 1, 0)) * control.grid().step(n);
    return mass;
}

paths::Path add_observation_noise(const paths::Path& y, double variance, CounterRng& rng)
{
    require(variance >= 0.0 && std::isfinite(variance), "add_observation_noise: variance must be >= 0");
    Matrix values = y.values();
    if (variance == 0.0) return paths::Path(y.grid(), std::move(values));
    const double sd = std::sqrt(variance);
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        for (Eigen::Index j = 0; j < values.cols(); ++j) values(i, j) += sd * rng.normal();
    return paths::Path(y.grid(), std::move(values));
}

}  // namespace randsig::dynamics
