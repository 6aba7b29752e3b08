#include "randsig/rsig.hpp"

#include "randsig/errors.hpp"
#include "randsig/rng.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace randsig::rsig {

std::string to_string(ActivationKind kind)
{
    switch (kind) {
    case ActivationKind::scaled_identity: return "scaled_identity";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sigmoid: return "sigmoid";
    }
    return "unknown";
}

ActivationKind activation_from_string(const std::string& name)
{
    if (name == "scaled_identity" || name == "linear") return ActivationKind::scaled_identity;
    if (name == "tanh") return ActivationKind::tanh;
    if (name == "sigmoid") return ActivationKind::sigmoid;
    throw InvalidArgument("unknown activation '" + name + "'");
}

void Activation::validate() const
{
    if (kind == ActivationKind::scaled_identity)
        require(std::isfinite(slope) && slope > 0.0, "Activation: slope must be finite and positive");
}

double Activation::operator()(double x) const
{
    switch (kind) {
    case ActivationKind::scaled_identity: return slope * x;
    case ActivationKind::tanh: return std::tanh(x);
    case ActivationKind::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

void Activation::apply(Eigen::Ref<Eigen::VectorXd> v) const
{
    switch (kind) {
    case ActivationKind::scaled_identity: v *= slope; break;
    case ActivationKind::tanh: v = v.array().tanh(); break;
    case ActivationKind::sigmoid: v = (1.0 + (-v.array()).exp()).inverse(); break;
    }
}

Activation default_activation(int k, int d)
{
    require(k >= 1 && d >= 1, "default_activation: k and d must be positive");
    return {ActivationKind::scaled_identity, 1.0 / (d * std::sqrt(static_cast<double>(k)))};
}

void Reservoir::validate() const
{
    require(k >= 1 && d >= 1, "Reservoir: k and d must be positive");
    require(static_cast<int>(A.size()) == d && static_cast<int>(b.size()) == d,
            "Reservoir: need exactly d matrices and d biases");
    for (int i = 0; i < d; ++i) {
        const auto& a = A[static_cast<std::size_t>(i)];
        const auto& bi = b[static_cast<std::size_t>(i)];
        require(a.rows() == k && a.cols() == k && a.allFinite(), "Reservoir: bad matrix A_" + std::to_string(i + 1));
        require(bi.size() == k && bi.allFinite(), "Reservoir: bad bias b_" + std::to_string(i + 1));
    }
    require(z0.size() == k && z0.allFinite(), "Reservoir: bad initial state");
    activation.validate();
}

Reservoir init_reservoir(int k, int d, const Activation& activation, std::uint64_t seed)
{
    require(k >= 1 && d >= 1, "init_reservoir: k and d must be positive");
    activation.validate();
    const CounterRng root(seed);
    Reservoir r;
    r.k = k;
    r.d = d;
    r.activation = activation;
    r.seed = seed;
    // Row i of A_c comes from stream (0, c, i), b_c from (1, c) and z0 from (2), each
    // read sequentially, so a smaller reservoir is the leading block of a larger one.
    r.A.assign(static_cast<std::size_t>(d), Eigen::MatrixXd(k, k));
    for (int c = 0; c < d; ++c) {
        const CounterRng a_root = root.split(0).split(static_cast<std::uint64_t>(c));
        for (int i = 0; i < k; ++i) {
            CounterRng row = a_root.split(static_cast<std::uint64_t>(i));
            for (int j = 0; j < k; ++j) r.A[static_cast<std::size_t>(c)](i, j) = row.normal();
        }
    }
    r.b.assign(static_cast<std::size_t>(d), Eigen::VectorXd(k));
    for (int c = 0; c < d; ++c) {
        CounterRng stream = root.split(1).split(static_cast<std::uint64_t>(c));
        for (int i = 0; i < k; ++i) r.b[static_cast<std::size_t>(c)](i) = stream.normal();
    }
    CounterRng z_stream = root.split(2);
    r.z0.resize(k);
    for (int i = 0; i < k; ++i) r.z0(i) = z_stream.normal();
    return r;
}

paths::Path evolve(const Reservoir& r, const paths::Path& x)
{
    require(x.dim() == r.d, "evolve: control dimension " + std::to_string(x.dim()) +
                                " != reservoir dimension " + std::to_string(r.d));
    const auto& grid = x.grid();
    Matrix z(static_cast<Eigen::Index>(grid.size()), r.k);
    Eigen::VectorXd state = r.z0;
    Eigen::VectorXd field(r.k);
    Eigen::VectorXd next(r.k);
    z.row(0) = state.transpose();
    for (std::size_t n = 1; n < grid.size(); ++n) {
        next = state;
        for (int i = 0; i < r.d; ++i) {
            const double dx = x(n, i) - x(n - 1, i);
            if (dx == 0.0) continue;
            field.noalias() = r.A[static_cast<std::size_t>(i)] * state;
            field += r.b[static_cast<std::size_t>(i)];
            r.activation.apply(field);
            next += dx * field;
        }
        if (!next.allFinite())
            throw NumericFailure("evolve: reservoir state became non-finite at step " + std::to_string(n));
        state.swap(next);
        z.row(static_cast<Eigen::Index>(n)) = state.transpose();
    }
    return paths::Path(grid, std::move(z));
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
    require(static_cast<bool>(in >> token), "load_reservoir: truncated input");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    require(end == token.c_str() + token.size(), "load_reservoir: bad number '" + token + "'");
    return v;
}

void expect(std::istream& in, const std::string& word)
{
    std::string token;
    require(static_cast<bool>(in >> token) && token == word,
            "load_reservoir: expected '" + word + "', got '" + token + "'");
}

}  // namespace

void save_reservoir(const Reservoir& r, std::ostream& out)
{
    r.validate();
    out << "randsig-reservoir 1\n";
    out << "k " << r.k << "\nd " << r.d << "\nseed " << r.seed << '\n';
    out << "activation " << to_string(r.activation.kind) << ' ' << hex(r.activation.slope) << '\n';
    for (int i = 0; i < r.d; ++i) {
        out << "A " << (i + 1) << '\n';
        const auto& a = r.A[static_cast<std::size_t>(i)];
        for (int row = 0; row < r.k; ++row) {
            for (int col = 0; col < r.k; ++col) out << (col ? " " : "") << hex(a(row, col));
            out << '\n';
        }
    }
    for (int i = 0; i < r.d; ++i) {
        out << "b " << (i + 1) << '\n';
        for (int j = 0; j < r.k; ++j) out << (j ? " " : "") << hex(r.b[static_cast<std::size_t>(i)](j));
        out << '\n';
    }
    out << "z0\n";
    for (int j = 0; j < r.k; ++j) out << (j ? " " : "") << hex(r.z0(j));
    out << "\nend\n";
}

Reservoir load_reservoir(std::istream& in)
{
    expect(in, "randsig-reservoir");
    int version = 0;
    in >> version;
    require(version == 1, "load_reservoir: unsupported version " + std::to_string(version));
    Reservoir r;
    std::string kind;
    expect(in, "k");
    in >> r.k;
    expect(in, "d");
    in >> r.d;
    expect(in, "seed");
    in >> r.seed;
    expect(in, "activation");
    in >> kind;
    r.activation.kind = activation_from_string(kind);
    r.activation.slope = read_hex(in);
    require(static_cast<bool>(in) && r.k >= 1 && r.d >= 1, "load_reservoir: bad header");

    r.A.assign(static_cast<std::size_t>(r.d), Eigen::MatrixXd(r.k, r.k));
    for (int i = 0; i < r.d; ++i) {
        expect(in, "A");
        expect(in, std::to_string(i + 1));
        auto& a = r.A[static_cast<std::size_t>(i)];
        for (int row = 0; row < r.k; ++row)
            for (int col = 0; col < r.k; ++col) a(row, col) = read_hex(in);
    }
    r.b.assign(static_cast<std::size_t>(r.d), Eigen::VectorXd(r.k));
    for (int i = 0; i < r.d; ++i) {
        expect(in, "b");
        expect(in, std::to_string(i + 1));
        for (int j = 0; j < r.k; ++j) r.b[static_cast<std::size_t>(i)](j) = read_hex(in);
    }
    expect(in, "z0");
    r.z0.resize(r.k);
    for (int j = 0; j < r.k; ++j) r.z0(j) = read_hex(in);
    expect(in, "end");
    r.validate();
    return r;
}

}  // namespace randsig::rsig
