#include "properties.hpp"

#include "randsig/dynamics.hpp"
#include "randsig/paths.hpp"
#include "randsig/readout.hpp"
#include "randsig/rsig.hpp"
#include "randsig/tsig.hpp"

#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace randsig::properties {

namespace {

/// Iterated integrals of a piecewise-linear path by nested 5-point Gauss-Legendre
/// quadrature: I_{w i}(t) = int_0^t I_w(s) dX^i_s, one segment at a time.
class NestedIntegrals {
public:
    explicit NestedIntegrals(const paths::Path& x) : x_(x) {}

    /// Value of the word integral at grid time t_n.
    double at(const std::vector<int>& word, std::size_t n)
    {
        if (word.empty()) return 1.0;
        if (n == 0) return 0.0;
        const auto key = std::make_pair(word, n);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const double v = inside(word, n - 1, x_.grid().step(n - 1));
        memo_.emplace(key, v);
        return v;
    }

private:
    /// Value at t_n + tau for 0 <= tau <= t_{n+1} - t_n.
    double inside(const std::vector<int>& word, std::size_t n, double tau)
    {
        if (word.empty()) return 1.0;
        static constexpr std::array<double, 5> nodes{0.0, -0.5384693101056831, 0.5384693101056831,
                                                     -0.9061798459386640, 0.9061798459386640};
        static constexpr std::array<double, 5> weights{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                       0.2369268850561891, 0.2369268850561891};
        const int letter = word.back();
        const std::vector<int> prefix(word.begin(), word.end() - 1);
        const double slope = (x_(n + 1, letter) - x_(n, letter)) / x_.grid().step(n);
        double integral = 0.0;
        for (std::size_t q = 0; q < nodes.size(); ++q)
            integral += weights[q] * 0.5 * tau * inside(prefix, n, 0.5 * tau * (1.0 + nodes[q]));
        return at(word, n) + slope * integral;
    }

    const paths::Path& x_;
    std::map<std::pair<std::vector<int>, std::size_t>, double> memo_;
};

void for_each_word(int d, int length, const std::function<void(const std::vector<int>&)>& visit)
{
    std::vector<int> word(static_cast<std::size_t>(length), 0);
    while (true) {
        visit(word);
        int pos = length - 1;
        while (pos >= 0 && ++word[static_cast<std::size_t>(pos)] == d) word[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) return;
    }
}

std::string fmt(double v)
{
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng)
{
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

}  // namespace

Result chen_identity()
{
    Result r{"Chen identity vs nested integration", true, ""};
    double worst = 0.0;
    int mismatches = 0;
    std::uint64_t stream = 0;
    for (int d = 1; d <= 3; ++d) {
        for (int order = 1; order <= 3; ++order) {
            for (int steps : {1, 7, 20}) {
                for (bool irregular : {false, true}) {
                    CounterRng rng(++stream);
                    const auto grid = irregular ? paths::irregular_grid(steps + 1 < 3 ? 3 : steps + 1, rng)
                                                : paths::regular_grid(1.0, steps);
                    const auto x = paths::sample_brownian(grid, d, rng);
                    const auto stream_sigs = tsig::signature_stream(x, order);

                    tsig::TruncatedSig fold(d, order);
                    std::vector<double> inc(static_cast<std::size_t>(d));
                    for (std::size_t n = 0; n < grid.steps(); ++n) {
                        for (int j = 0; j < d; ++j) inc[static_cast<std::size_t>(j)] = x(n + 1, j) - x(n, j);
                        fold = tsig::chen_product(fold, tsig::segment_signature(inc, order));
                        if (!(fold == stream_sigs[n + 1])) ++mismatches;
                    }

                    NestedIntegrals oracle(x);
                    for (std::size_t n = 0; n < grid.size(); ++n)
                        for (int l = 1; l <= order; ++l)
                            for_each_word(d, l, [&](const std::vector<int>& w) {
                                worst = std::max(worst, std::abs(stream_sigs[n].at(w) - oracle.at(w, n)));
                            });
                }
            }
        }
    }
    r.ok = mismatches == 0 && worst <= 1e-12;
    r.detail = "fold mismatches " + std::to_string(mismatches) + ", max |stream - nested| " + fmt(worst);
    return r;
}

Result one_dim_levels()
{
    Result r{"1-d level l = dx^l / l!", true, ""};
    int mismatches = 0;
    for (double dx : {0.5, 2.0, -0.25, 1.0, -4.0}) {
        const std::array<double, 1> inc{dx};
        const auto s = tsig::segment_signature(inc, tsig::kMaxOrder);
        for (int l = 0; l <= tsig::kMaxOrder; ++l)
            if (s.level(l)[0] != std::pow(dx, l) / factorial(l)) ++mismatches;
    }
    r.ok = mismatches == 0;
    r.detail = std::to_string(mismatches) + " inexact entries";
    return r;
}

Result fbm_covariance()
{
    Result r{"fBm covariance Monte Carlo", true, ""};
    constexpr int draws = 100000;
    double worst = 0.0;

    const auto grid = paths::regular_grid(1.0, 10);
    CounterRng pick(11);
    for (double hurst : {0.1, 0.3, 0.7}) {
        const paths::FbmSampler sampler(grid, hurst);
        std::array<std::pair<int, int>, 5> pairs{};
        for (auto& p : pairs) {
            p.first = 1 + static_cast<int>(pick() % 10);
            p.second = 1 + static_cast<int>(pick() % 10);
        }
        std::array<double, 5> sum{}, sum_sq{};
        CounterRng rng(static_cast<std::uint64_t>(hurst * 1000));
        for (int i = 0; i < draws; ++i) {
            const auto b = sampler.sample_component(rng);
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                const double v = b(pairs[p].first) * b(pairs[p].second);
                sum[p] += v;
                sum_sq[p] += v * v;
            }
        }
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const double mean = sum[p] / draws;
            const double se = std::sqrt((sum_sq[p] / draws - mean * mean) / draws);
            const double exact = paths::fbm_covariance(grid[static_cast<std::size_t>(pairs[p].first)],
                                                       grid[static_cast<std::size_t>(pairs[p].second)], hurst);
            worst = std::max(worst, std::abs(mean - exact) / se);
        }
    }

    // H = 1/2 against sample_brownian, entry by entry on a 10-point grid.
    const auto small = paths::regular_grid(1.0, 9);
    const paths::FbmSampler half(small, 0.5);
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(10, 10), q1 = s1, s2 = s1, q2 = s1;
    CounterRng rng1(21), rng2(22);
    for (int i = 0; i < draws; ++i) {
        const Eigen::VectorXd a = half.sample_component(rng1);
        const Eigen::VectorXd b = paths::sample_brownian(small, 1, rng2).values().col(0);
        const Eigen::MatrixXd pa = a * a.transpose();
        const Eigen::MatrixXd pb = b * b.transpose();
        s1 += pa;
        q1 += pa.cwiseProduct(pa);
        s2 += pb;
        q2 += pb.cwiseProduct(pb);
    }
    for (int i = 1; i < 10; ++i)
        for (int j = i; j < 10; ++j) {
            const double m1 = s1(i, j) / draws, m2 = s2(i, j) / draws;
            const double v1 = (q1(i, j) / draws - m1 * m1) / draws;
            const double v2 = (q2(i, j) / draws - m2 * m2) / draws;
            worst = std::max(worst, std::abs(m1 - m2) / std::sqrt(v1 + v2));
        }

    r.ok = worst <= 4.0;
    r.detail = "max z-score " + fmt(worst);
    return r;
}

Result ridge_residual()
{
    Result r{"ridge normal-equation residual", true, ""};
    CounterRng rng(31);
    double worst = 0.0;
    auto check = [&](const Matrix& z, const Matrix& y, double lambda, readout::RankPolicy policy) {
        const auto model = readout::ridge_fit(z, y, lambda, policy);
        worst = std::max(worst, readout::normal_equation_residual(z, y, model.beta, lambda));
    };
    check(random_matrix(200, 30, rng), random_matrix(200, 2, rng), 1e-3, readout::RankPolicy::fail);
    check(random_matrix(20, 100, rng), random_matrix(20, 1, rng), 1e-3, readout::RankPolicy::fail);
    check(random_matrix(100, 20, rng), random_matrix(100, 3, rng), 0.0, readout::RankPolicy::fail);
    {
        Matrix z = random_matrix(60, 10, rng);
        z.col(9) = z.col(0) + z.col(1);
        check(z, random_matrix(60, 1, rng), 0.0, readout::RankPolicy::min_norm);
    }
    {
        // Reservoir features of rough controls: the realistic, poorly conditioned case.
        const auto reservoir = rsig::init_reservoir(50, 2, rsig::default_activation(50, 2), 5);
        const auto grid = paths::regular_grid(1.0, 100);
        const paths::FbmSampler sampler(grid, 0.1);
        Matrix z(0, 50), y(0, 1);
        readout::NormalEquations streamed(50, 1);
        for (int i = 0; i < 20; ++i) {
            CounterRng path_rng = rng.split(static_cast<std::uint64_t>(i));
            const auto noise = sampler.sample({0.1, 1, true}, path_rng);
            const auto target = dynamics::simulate_fou(dynamics::FouParams::scalar_preset(), noise);
            const auto f = rsig::evolve(reservoir, paths::time_augment(noise));
            Matrix zz(z.rows() + f.values().rows(), 50), yy(y.rows() + target.values().rows(), 1);
            zz << z, f.values();
            yy << y, target.values();
            z = std::move(zz);
            y = std::move(yy);
            streamed.add(f.values(), target.values());
        }
        check(z, y, 1e-3, readout::RankPolicy::fail);
        const auto model = streamed.solve(1e-3);
        worst = std::max(worst, readout::normal_equation_residual(z, y, model.beta, 1e-3));
    }
    r.ok = worst <= 1e-8;
    r.detail = "max residual " + fmt(worst);
    return r;
}

Result rsig_row_rank()
{
    Result r{"rsig full row rank for k >= N + 1", true, ""};
    constexpr int steps = 20;
    double worst = std::numeric_limits<double>::infinity();
    const auto grid = paths::regular_grid(1.0, steps);
    for (int k : {steps + 1, 30, 50}) {
        for (std::uint64_t seed : {1, 2, 3}) {
            CounterRng rng(100 + seed);
            const auto x = paths::time_augment(paths::sample_brownian(grid, 1, rng));
            const auto z = rsig::evolve(rsig::init_reservoir(k, 2, rsig::default_activation(k, 2), seed), x);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(z.values()));
            const auto s = svd.singularValues();
            worst = std::min(worst, s(s.size() - 1) / s(0));
        }
    }
    r.ok = worst > 1e-10;
    r.detail = "min relative singular value " + fmt(worst);
    return r;
}

Result euler_order()
{
    Result r{"Euler order ratios", true, ""};
    std::vector<double> ratios;

    auto ratios_of = [&](const std::function<double(int)>& error, int base) {
        const double e1 = error(base), e2 = error(2 * base), e3 = error(4 * base);
        ratios.push_back(e1 / e2);
        ratios.push_back(e2 / e3);
    };

    // fOU with Sigma = 0: Y_1 = mu + (y0 - mu) e^{-theta}.
    auto fou = dynamics::FouParams::scalar_preset();
    fou.sigma.setZero();
    ratios_of(
        [&](int steps) {
            const auto grid = paths::regular_grid(1.0, steps);
            const auto y = dynamics::simulate_fou(fou, paths::Path(grid, Matrix::Zero(steps + 1, 1)));
            const double exact = fou.mu(0) + (fou.y0(0) - fou.mu(0)) * std::exp(-fou.theta(0, 0));
            return std::abs(y(static_cast<std::size_t>(steps), 0) - exact);
        },
        50);

    // Langevin with sigma = 0: Y^2 = mu y0^2 e^{2 mu theta t} / (mu + y0^2 (e^{2 mu theta t} - 1)).
    dynamics::LangevinParams lp;
    lp.sigma = 0.0;
    ratios_of(
        [&](int steps) {
            const auto grid = paths::regular_grid(1.0, steps);
            const auto y = dynamics::simulate_langevin(lp, paths::Path(grid, Matrix::Zero(steps + 1, 1)));
            const double g = std::exp(2.0 * lp.mu * lp.theta);
            const double exact = std::sqrt(lp.mu * lp.y0 * lp.y0 * g / (lp.mu + lp.y0 * lp.y0 * (g - 1.0)));
            return std::abs(y(static_cast<std::size_t>(steps), 0) - exact);
        },
        50);

    // Reservoir driven by the linear control (t, 0.7 t), against a fine-grid reference.
    const auto reservoir = rsig::init_reservoir(10, 2, rsig::default_activation(10, 2), 3);
    auto final_state = [&](int steps) {
        const auto grid = paths::regular_grid(1.0, steps);
        Matrix v(steps + 1, 2);
        for (int n = 0; n <= steps; ++n) v.row(n) << grid[static_cast<std::size_t>(n)], 0.7 * grid[static_cast<std::size_t>(n)];
        const auto z = rsig::evolve(reservoir, paths::Path(grid, v));
        return Eigen::VectorXd(z.values().row(steps).transpose());
    };
    const Eigen::VectorXd reference = final_state(10 << 12);
    ratios_of([&](int steps) { return (final_state(steps) - reference).norm(); }, 10);

    std::ostringstream detail;
    detail << "ratios";
    for (double v : ratios) {
        detail << ' ' << fmt(v);
        r.ok = r.ok && v >= 1.7 && v <= 2.3;
    }
    r.detail = detail.str();
    return r;
}

Result convergence_probe()
{
    Result r{"signature readout convergence 2^{M+1}", true, ""};
    auto uniform_error = [](int order, double horizon) {
        const auto grid = paths::regular_grid(horizon, 200);
        Matrix x(201, 1);
        Matrix y(201, 1);
        for (std::size_t n = 0; n < grid.size(); ++n) {
            x(static_cast<Eigen::Index>(n), 0) = grid[n];
            y(static_cast<Eigen::Index>(n), 0) = std::exp(grid[n]);
        }
        const Matrix sig = tsig::signature_features(paths::Path(grid, x), order);
        Matrix features(sig.rows(), sig.cols() + 1);
        features.col(0).setOnes();
        features.rightCols(sig.cols()) = sig;
        const auto model = readout::ridge_fit(features, y, 0.0);
        return (features * model.beta - y).cwiseAbs().maxCoeff();
    };
    std::ostringstream detail;
    detail << "ratio / 2^{M+1}:";
    for (int order = 1; order <= 3; ++order) {
        const double ratio = uniform_error(order, 0.5) / uniform_error(order, 0.25);
        const double rel = ratio / std::ldexp(1.0, order + 1);
        detail << " M=" << order << ' ' << fmt(rel);
        r.ok = r.ok && rel >= 0.7 && rel <= 1.3;
    }
    r.detail = detail.str();
    return r;
}

std::vector<Result> all()
{
    return {chen_identity(), one_dim_levels(), fbm_covariance(), ridge_residual(),
            rsig_row_rank(), euler_order(),    convergence_probe()};
}

}  // namespace randsig::properties
