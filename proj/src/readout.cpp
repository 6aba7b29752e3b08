#include "randsig/readout.hpp"

#include "randsig/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace randsig::readout {

namespace {

constexpr double kResidualTolerance = 1e-8;

/// Symmetric positive (semi)definite solve of a x = rhs with one refinement pass.
/// Returns false if the factorization is unusable.
bool cholesky_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs, Eigen::MatrixXd& x)
{
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
    if (!diag.allFinite() || diag.minCoeff() <= 0.0) return false;
    // Pivots this small relative to the largest mean the system is singular to working precision.
    const double ratio = diag.minCoeff() / diag.maxCoeff();
    if (ratio * ratio < std::numeric_limits<double>::epsilon() * static_cast<double>(a.rows())) return false;
    x = llt.solve(rhs);
    const Eigen::MatrixXd r = rhs - a * x;
    x += llt.solve(r);
    return x.allFinite();
}

/// Minimum-norm solve through the spectral pseudo-inverse of a symmetric PSD matrix.
Eigen::MatrixXd spectral_pinv_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    if (eig.info() != Eigen::Success) throw NumericFailure("ridge: eigen-decomposition failed");
    const Eigen::VectorXd& values = eig.eigenvalues();
    const double cutoff = std::max(values.cwiseAbs().maxCoeff(), 0.0) * static_cast<double>(a.rows()) *
                          std::numeric_limits<double>::epsilon();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (values(i) > cutoff) inv(i) = 1.0 / values(i);
    const Eigen::MatrixXd& v = eig.eigenvectors();
    return v * inv.asDiagonal() * (v.transpose() * rhs);
}

Eigen::MatrixXd solve_regularized(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs, double lambda,
                                  RankPolicy policy)
{
    Eigen::MatrixXd x;
    if (!(lambda == 0.0 && policy == RankPolicy::min_norm) && cholesky_solve(a, rhs, x)) return x;
    if (lambda == 0.0 && policy == RankPolicy::fail)
        throw NumericFailure("ridge: normal equations are singular at lambda = 0; use lambda > 0");
    return spectral_pinv_solve(a, rhs);
}

void check_lambda(double lambda)
{
    require(lambda >= 0.0 && std::isfinite(lambda), "ridge: lambda must be finite and >= 0");
}

}  // namespace

StackedDesign stack(std::span<const std::pair<paths::Path, paths::Path>> trajectories)
{
    require(!trajectories.empty(), "stack: no trajectories");
    const auto& [f0, y0] = trajectories.front();
    const auto rows = f0.size();
    const auto k = f0.dim();
    const auto m = y0.dim();
    StackedDesign design;
    design.trajectories = trajectories.size();
    design.rows_per_trajectory = rows;
    design.Z.resize(static_cast<Eigen::Index>(rows * trajectories.size()), k);
    design.Y.resize(design.Z.rows(), m);
    for (std::size_t j = 0; j < trajectories.size(); ++j) {
        const auto& [features, target] = trajectories[j];
        require(features.size() == rows && target.size() == rows,
                "stack: trajectory " + std::to_string(j) + " has a different grid length");
        require(features.dim() == k && target.dim() == m,
                "stack: trajectory " + std::to_string(j) + " has different feature or target dimension");
        const auto offset = static_cast<Eigen::Index>(j * rows);
        design.Z.middleRows(offset, static_cast<Eigen::Index>(rows)) = features.values();
        design.Y.middleRows(offset, static_cast<Eigen::Index>(rows)) = target.values();
    }
    return design;
}

NormalEquations::NormalEquations(Eigen::Index feature_dim, Eigen::Index output_dim)
    : gram_(Eigen::MatrixXd::Zero(feature_dim, feature_dim)),
      cross_(Eigen::MatrixXd::Zero(feature_dim, output_dim))
{
    require(feature_dim >= 1 && output_dim >= 1, "NormalEquations: dimensions must be positive");
}

void NormalEquations::add(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Matrix>& y)
{
    require(z.rows() == y.rows(), "NormalEquations::add: row counts differ");
    require(z.cols() == gram_.rows() && y.cols() == cross_.cols(), "NormalEquations::add: dimension mismatch");
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
    cross_.noalias() += z.transpose() * y;
    rows_ += static_cast<std::size_t>(z.rows());
}

ReadoutModel NormalEquations::solve(double lambda, RankPolicy policy) const
{
    check_lambda(lambda);
    require(rows_ > 0, "NormalEquations::solve: no data");
    Eigen::MatrixXd a = gram_.selfadjointView<Eigen::Lower>();
    a.diagonal().array() += lambda;
    ReadoutModel model{solve_regularized(a, cross_, lambda, policy), lambda};
    if (!model.beta.allFinite()) throw NumericFailure("ridge: non-finite coefficients");
    if (residual(model.beta, lambda) > kResidualTolerance)
        throw NumericFailure("ridge: normal-equation residual above tolerance");
    return model;
}

double NormalEquations::residual(const Eigen::MatrixXd& beta, double lambda) const
{
    const Eigen::MatrixXd a = gram_.selfadjointView<Eigen::Lower>();
    const double scale = cross_.norm();
    const Eigen::MatrixXd r = a * beta + lambda * beta - cross_;
    return scale > 0.0 ? r.norm() / scale : r.norm();
}

ReadoutModel ridge_fit(const StackedDesign& design, double lambda, RankPolicy policy)
{
    return ridge_fit(design.Z, design.Y, lambda, policy);
}

ReadoutModel ridge_fit(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Matrix>& y, double lambda,
                       RankPolicy policy)
{
    check_lambda(lambda);
    require(z.rows() == y.rows() && z.rows() > 0, "ridge_fit: Z and Y must have the same nonzero row count");
    require(z.allFinite() && y.allFinite(), "ridge_fit: non-finite data");

    ReadoutModel model;
    model.lambda = lambda;
    if (lambda == 0.0) {
        // Orthogonal factorization of Z itself keeps cond(Z) rather than cond(Z)^2.
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(z);
        if (policy == RankPolicy::fail && cod.rank() < z.cols())
            throw NumericFailure("ridge_fit: Z^T Z is singular at lambda = 0 (rank " + std::to_string(cod.rank()) +
                                 " < " + std::to_string(z.cols()) + "); use lambda > 0");
        model.beta = cod.solve(Eigen::MatrixXd(y));
    } else if (z.rows() >= z.cols()) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(z.cols(), z.cols());
        a.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose());
        a = a.selfadjointView<Eigen::Lower>();
        a.diagonal().array() += lambda;
        const Eigen::MatrixXd rhs = z.transpose() * y;
        model.beta = solve_regularized(a, rhs, lambda, policy);
    } else {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(z.rows(), z.rows());
        a.selfadjointView<Eigen::Lower>().rankUpdate(z);
        a = a.selfadjointView<Eigen::Lower>();
        a.diagonal().array() += lambda;
        const Eigen::MatrixXd alpha = solve_regularized(a, y, lambda, policy);
        model.beta = z.transpose() * alpha;
    }
    if (!model.beta.allFinite()) throw NumericFailure("ridge_fit: non-finite coefficients");
    if (normal_equation_residual(z, y, model.beta, lambda) > kResidualTolerance)
        throw NumericFailure("ridge_fit: normal-equation residual above tolerance");
    return model;
}

double normal_equation_residual(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Matrix>& y,
                                const Eigen::MatrixXd& beta, double lambda)
{
    const Eigen::MatrixXd rhs = z.transpose() * y;
    const Eigen::MatrixXd fitted = z * beta;
    const Eigen::MatrixXd r = z.transpose() * fitted + lambda * beta - rhs;
    const double scale = rhs.norm();
    return scale > 0.0 ? r.norm() / scale : r.norm();
}

paths::Path predict(const ReadoutModel& model, const paths::Path& features)
{
    require(features.dim() == model.feature_dim(), "predict: feature dimension " + std::to_string(features.dim()) +
                                                       " != model dimension " + std::to_string(model.feature_dim()));
    Matrix out = features.values() * model.beta;
    return paths::Path(features.grid(), std::move(out));
}

double relative_l2(const paths::Path& pred, const paths::Path& truth)
{
    require(pred.size() == truth.size() && pred.dim() == truth.dim(), "relative_l2: shape mismatch");
    const double denom = truth.values().norm();
    if (denom == 0.0) throw UndefinedMetric("relative_l2: reference trajectory has zero norm");
    return (pred.values() - truth.values()).norm() / denom;
}

MeanStd mean_std(std::span<const double> values)
{
    MeanStd out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

namespace {

std::string hex(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double read_hex(std::istream& in)
{
    std::string token;
    require(static_cast<bool>(in >> token), "load_model: truncated input");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    require(end == token.c_str() + token.size(), "load_model: bad number '" + token + "'");
    return v;
}

}  // namespace

void save_model(const ReadoutModel& model, const std::string& features, std::ostream& out)
{
    require(features.find('\n') == std::string::npos, "save_model: feature description must be one line");
    out << "randsig-readout 1\n";
    out << "features " << features << '\n';
    out << "lambda " << hex(model.lambda) << '\n';
    out << "shape " << model.feature_dim() << ' ' << model.output_dim() << '\n';
    for (Eigen::Index i = 0; i < model.beta.rows(); ++i) {
        for (Eigen::Index j = 0; j < model.beta.cols(); ++j) out << (j ? " " : "") << hex(model.beta(i, j));
        out << '\n';
    }
    out << "end\n";
}

std::pair<ReadoutModel, std::string> load_model(std::istream& in)
{
    std::string line;
    require(std::getline(in, line) && line == "randsig-readout 1", "load_model: not a randsig-readout 1 file");
    require(std::getline(in, line) && line.rfind("features ", 0) == 0, "load_model: missing features line");
    std::string features = line.substr(9);
    std::string word;
    ReadoutModel model;
    require(in >> word && word == "lambda", "load_model: missing lambda");
    model.lambda = read_hex(in);
    Eigen::Index k = 0, m = 0;
    require(in >> word && word == "shape" && in >> k >> m && k >= 1 && m >= 1, "load_model: bad shape");
    model.beta.resize(k, m);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < m; ++j) model.beta(i, j) = read_hex(in);
    require(in >> word && word == "end", "load_model: missing end marker");
    return {std::move(model), std::move(features)};
}

}  // namespace randsig::readout
