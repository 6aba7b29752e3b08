#include "randsig/paths.hpp"

#include "randsig/csv.hpp"
#include "randsig/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace randsig::paths {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times))
{
    require(times_.size() >= 2, "TimeGrid: need at least two sample times");
    require(times_.front() == 0.0, "TimeGrid: first time must be 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        require(std::isfinite(times_[i]) && times_[i] > times_[i - 1],
                "TimeGrid: times must be finite and strictly increasing (index " +
                    std::to_string(i) + ")");
    }
}

Path::Path(TimeGrid grid, Matrix values) : grid_(std::move(grid)), values_(std::move(values))
{
    require(static_cast<std::size_t>(values_.rows()) == grid_.size(),
            "Path: row count " + std::to_string(values_.rows()) + " does not match grid length " +
                std::to_string(grid_.size()));
    require(values_.cols() >= 1, "Path: dimension must be at least 1");
    require(values_.allFinite(), "Path: non-finite entries");
}

void FbmSpec::validate() const
{
    require(hurst > 0.0 && hurst < 1.0, "FbmSpec: hurst must lie in (0, 1)");
    require(dim >= 1, "FbmSpec: dim must be positive");
}

TimeGrid regular_grid(double horizon, int steps)
{
    require(horizon > 0.0 && std::isfinite(horizon), "regular_grid: horizon must be positive");
    require(steps >= 1, "regular_grid: steps must be positive");
    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) times[static_cast<std::size_t>(i)] = i * horizon / steps;
    times.back() = horizon;
    return TimeGrid(std::move(times));
}

TimeGrid irregular_grid(int points, CounterRng& rng)
{
    require(points >= 3, "irregular_grid: need at least 3 points");
    const auto interior = static_cast<std::size_t>(points - 2);
    std::vector<double> s(interior);
    for (auto& v : s) v = rng.uniform();
    std::sort(s.begin(), s.end());

    const double norm = -std::expm1(-1.0);
    std::vector<double> times;
    times.reserve(interior + 2);
    times.push_back(0.0);
    for (double v : s) {
        const double t = -std::expm1(-v) / norm;
        // Ties have probability zero but sorted doubles can still collide.
        if (t > times.back() && t < 1.0) times.push_back(t);
    }
    if (times.size() != interior + 1) return irregular_grid(points, rng);
    times.push_back(1.0);
    return TimeGrid(std::move(times));
}

Path sample_brownian(const TimeGrid& grid, int dim, CounterRng& rng)
{
    require(dim >= 1, "sample_brownian: dim must be positive");
    Matrix values = Matrix::Zero(static_cast<Eigen::Index>(grid.size()), dim);
    for (std::size_t n = 0; n < grid.steps(); ++n) {
        const double scale = std::sqrt(grid.step(n));
        const auto i = static_cast<Eigen::Index>(n);
        for (Eigen::Index j = 0; j < dim; ++j) values(i + 1, j) = values(i, j) + scale * rng.normal();
    }
    return Path(grid, std::move(values));
}

double fbm_covariance(double s, double t, double hurst)
{
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

FbmSampler::FbmSampler(TimeGrid grid, double hurst) : grid_(std::move(grid)), hurst_(hurst)
{
    require(hurst > 0.0 && hurst < 1.0, "FbmSampler: hurst must lie in (0, 1)");
    const auto n = static_cast<Eigen::Index>(grid_.steps());
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            cov(i, j) = cov(j, i) = fbm_covariance(grid_[i + 1], grid_[j + 1], hurst_);

    for (double jitter = 1e-12; jitter <= 1e-8 * 1.0000001; jitter *= 10.0) {
        Eigen::MatrixXd shifted = cov;
        shifted.diagonal().array() += jitter * cov.diagonal().maxCoeff();
        Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().allFinite()) {
            lower_ = llt.matrixL();
            jitter_ = jitter;
            return;
        }
    }
    throw NumericFailure("FbmSampler: covariance not positive definite after jitter 1e-8 (H = " +
                         std::to_string(hurst_) + ")");
}

Eigen::VectorXd FbmSampler::sample_component(CounterRng& rng) const
{
    const auto n = lower_.rows();
    Eigen::VectorXd gauss(n);
    for (Eigen::Index i = 0; i < n; ++i) gauss(i) = rng.normal();
    Eigen::VectorXd out(n + 1);
    out(0) = 0.0;
    out.tail(n).noalias() = lower_.triangularView<Eigen::Lower>() * gauss;
    return out;
}

Path FbmSampler::sample(const FbmSpec& spec, CounterRng& rng) const
{
    spec.validate();
    require(spec.hurst == hurst_, "FbmSampler: spec hurst differs from the factorized one");
    Matrix values(static_cast<Eigen::Index>(grid_.size()), spec.dim);
    if (spec.independent) {
        for (int j = 0; j < spec.dim; ++j) values.col(j) = sample_component(rng);
    } else {
        const Eigen::VectorXd shared = sample_component(rng);
        for (int j = 0; j < spec.dim; ++j) values.col(j) = shared;
    }
    return Path(grid_, std::move(values));
}

Path sample_fbm(const TimeGrid& grid, const FbmSpec& spec, CounterRng& rng)
{
    spec.validate();
    return FbmSampler(grid, spec.hurst).sample(spec, rng);
}

Path time_augment(const Path& noise)
{
    const auto& grid = noise.grid();
    Matrix values(noise.values().rows(), noise.dim() + 1);
    for (std::size_t n = 0; n < grid.size(); ++n) values(static_cast<Eigen::Index>(n), 0) = grid[n];
    values.rightCols(noise.dim()) = noise.values();
    return Path(grid, std::move(values));
}

Path transform_path(const Path& p, const Transform& transform)
{
    Matrix values = std::visit(
        [&](const auto& t) -> Matrix {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, Square>) {
                return p.values().array().square().matrix();
            } else {
                return (p.values().array() > t.level).template cast<double>().matrix() * t.scale;
            }
        },
        transform);
    return Path(p.grid(), std::move(values));
}

void write_csv(const Path& p, std::ostream& out, const std::string& prefix)
{
    out << 't';
    for (Eigen::Index j = 0; j < p.dim(); ++j) out << ',' << prefix << (j + 1);
    out << '\n';
    for (std::size_t n = 0; n < p.size(); ++n) {
        out << csv::format(p.grid()[n]);
        for (Eigen::Index j = 0; j < p.dim(); ++j) out << ',' << csv::format(p(n, j));
        out << '\n';
    }
}

Path read_csv(std::istream& in)
{
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "read_csv: missing header");
    const auto header = csv::split(line);
    require(header.size() >= 2 && header[0] == "t", "read_csv: header must start with 't' and name >= 1 column");
    const auto dim = static_cast<Eigen::Index>(header.size() - 1);

    std::vector<double> times;
    std::vector<double> flat;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split(line);
        require(static_cast<Eigen::Index>(fields.size()) == dim + 1,
                "read_csv: row " + std::to_string(times.size() + 1) + " has wrong column count");
        times.push_back(csv::parse(fields[0]));
        for (std::size_t j = 1; j < fields.size(); ++j) flat.push_back(csv::parse(fields[j]));
    }
    const auto rows = static_cast<Eigen::Index>(times.size());
    Matrix values = Eigen::Map<Matrix>(flat.data(), rows, dim);
    return Path(TimeGrid(std::move(times)), std::move(values));
}

}  // namespace randsig::paths
