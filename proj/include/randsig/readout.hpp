#pragma once

#include "randsig/paths.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace randsig::readout {

/// Feature and target rows of every training trajectory, trajectory-major and time-minor:
/// row (j * steps_per_trajectory + n) holds trajectory j at grid index n.
struct StackedDesign {
    Matrix Z;
    Matrix Y;
    std::size_t trajectories = 0;
    std::size_t rows_per_trajectory = 0;
};

/// (feature path, target path) pairs sharing grid length.
StackedDesign stack(std::span<const std::pair<paths::Path, paths::Path>> trajectories);

struct ReadoutModel {
    /// k x m coefficient matrix.
    Eigen::MatrixXd beta;
    double lambda = 0.0;

    Eigen::Index feature_dim() const { return beta.rows(); }
    Eigen::Index output_dim() const { return beta.cols(); }
};

/// What to do when lambda = 0 and Z^T Z is singular.
enum class RankPolicy {
    /// Throw NumericFailure suggesting lambda > 0.
    fail,
    /// Return the minimum-norm least-squares solution.
    min_norm,
};

/// Accumulates Z^T Z and Z^T Y block by block, so the stacked design never has to exist.
class NormalEquations {
public:
    NormalEquations(Eigen::Index feature_dim, Eigen::Index output_dim);

    void add(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Matrix>& y);

    /// Solves (Z^T Z + lambda I) beta = Z^T Y.
    ReadoutModel solve(double lambda, RankPolicy policy = RankPolicy::fail) const;

    /// ||(Z^T Z + lambda I) beta - Z^T Y|| / ||Z^T Y||.
    double residual(const Eigen::MatrixXd& beta, double lambda) const;

    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::MatrixXd& cross() const { return cross_; }
    std::size_t rows() const { return rows_; }

private:
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd cross_;
    std::size_t rows_ = 0;
};

/// beta = argmin ||Y - Z beta||^2 + lambda ||beta||^2.
///
/// Uses the k x k normal equations when Z has at least as many rows as columns
/// and the equivalent rows x rows dual system otherwise.
ReadoutModel ridge_fit(const StackedDesign& design, double lambda, RankPolicy policy = RankPolicy::fail);
ReadoutModel ridge_fit(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Matrix>& y, double lambda,
                       RankPolicy policy = RankPolicy::fail);

/// Relative normal-equation residual computed from the design itself.
double normal_equation_residual(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Matrix>& y,
                                const Eigen::MatrixXd& beta, double lambda);

/// Per-time product features * beta on the feature path's grid.
paths::Path predict(const ReadoutModel& model, const paths::Path& features);

/// ||pred - truth||_2 / ||truth||_2 over every grid value.
double relative_l2(const paths::Path& pred, const paths::Path& truth);

/// Sample mean and (n - 1)-normalised standard deviation; std is 0 for a single value.
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

/// Text container (`randsig-readout 1`) holding lambda, dims, beta as hex floats and
/// a free-form feature description (e.g. the reservoir kind and seed) on one line.
void save_model(const ReadoutModel& model, const std::string& features, std::ostream& out);
std::pair<ReadoutModel, std::string> load_model(std::istream& in);

}  // namespace randsig::readout
