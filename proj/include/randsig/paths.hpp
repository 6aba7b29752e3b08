#pragma once

#include "randsig/rng.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace randsig {

/// Row-major dense matrix; one row per grid time for every path-like object.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace paths {

/// Strictly increasing sample times 0 = t_0 < ... < t_N = T.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> times);

    /// Number of sample points (N + 1).
    std::size_t size() const { return times_.size(); }
    /// Number of steps N.
    std::size_t steps() const { return times_.size() - 1; }
    double horizon() const { return times_.back(); }
    double operator[](std::size_t i) const { return times_[i]; }
    double step(std::size_t n) const { return times_[n + 1] - times_[n]; }
    std::span<const double> times() const { return times_; }

    bool operator==(const TimeGrid&) const = default;

private:
    std::vector<double> times_;
};

/// A d-dimensional path sampled on a TimeGrid, read as piecewise linear between samples.
class Path {
public:
    Path(TimeGrid grid, Matrix values);

    const TimeGrid& grid() const { return grid_; }
    const Matrix& values() const { return values_; }
    std::size_t size() const { return grid_.size(); }
    Eigen::Index dim() const { return values_.cols(); }
    double operator()(std::size_t n, Eigen::Index j) const
    {
        return values_(static_cast<Eigen::Index>(n), j);
    }
    auto row(std::size_t n) const { return values_.row(static_cast<Eigen::Index>(n)); }

    /// Increment x_{t_{n+1}} - x_{t_n}.
    Eigen::RowVectorXd increment(std::size_t n) const { return row(n + 1) - row(n); }

private:
    TimeGrid grid_;
    Matrix values_;
};

struct FbmSpec {
    double hurst = 0.5;
    int dim = 1;
    /// When false, a single fBm sample is shared by every component.
    bool independent = true;

    void validate() const;
};

/// times[i] = i * T / N.
TimeGrid regular_grid(double horizon, int steps);

/// `points` sample times on [0, 1]: both endpoints plus points - 2 interior times
/// obtained from sorted Uniform(0,1) draws through s -> (1 - e^{-s}) / (1 - e^{-1}).
TimeGrid irregular_grid(int points, CounterRng& rng);

/// Brownian motion started at 0 with independent components.
Path sample_brownian(const TimeGrid& grid, int dim, CounterRng& rng);

/// Exact fBm sampler on a fixed grid.
///
/// Factorizes Cov(B_s, B_t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2 over the
/// nonzero grid times once; every sample() is then a triangular matvec.
/// Diagonal jitter starts at 1e-12 and is escalated tenfold up to 1e-8
/// before giving up with NumericFailure.
class FbmSampler {
public:
    FbmSampler(TimeGrid grid, double hurst);

    Path sample(const FbmSpec& spec, CounterRng& rng) const;
    /// One scalar fBm realisation (length N + 1, starting at 0).
    Eigen::VectorXd sample_component(CounterRng& rng) const;

    const TimeGrid& grid() const { return grid_; }
    double hurst() const { return hurst_; }
    double jitter() const { return jitter_; }

private:
    TimeGrid grid_;
    double hurst_;
    double jitter_ = 0.0;
    Eigen::MatrixXd lower_;
};

double fbm_covariance(double s, double t, double hurst);

Path sample_fbm(const TimeGrid& grid, const FbmSpec& spec, CounterRng& rng);

/// Prepends the grid times as component 1: [t, x_t].
Path time_augment(const Path& noise);

struct Square {};
/// scale * 1{value > level}
struct ThresholdStep {
    double level = 0.5;
    double scale = 0.5;
};
using Transform = std::variant<Square, ThresholdStep>;

/// Componentwise transform of path values.
Path transform_path(const Path& p, const Transform& transform);

/// Writes `t,<prefix>1,...,<prefix>d` followed by one row per grid time.
void write_csv(const Path& p, std::ostream& out, const std::string& prefix = "x");
/// Reads the format produced by write_csv; the first column is taken as the grid.
Path read_csv(std::istream& in);

}  // namespace paths
}  // namespace randsig
