#include "randsig/tsig.hpp"

#include "randsig/errors.hpp"

#include <array>
#include <string>

namespace randsig::tsig {

namespace {

constexpr std::array<double, kMaxOrder + 1> reciprocal_factorials()
{
    std::array<double, kMaxOrder + 1> out{};
    double fact = 1.0;
    for (int i = 0; i <= kMaxOrder; ++i) {
        if (i > 0) fact *= i;
        out[static_cast<std::size_t>(i)] = 1.0 / fact;
    }
    return out;
}

constexpr auto kInvFactorial = reciprocal_factorials();

void check_shape(int dim, int order)
{
    require(dim >= 1, "tsig: dimension must be positive");
    require(order >= 0 && order <= kMaxOrder,
            "tsig: order must lie in [0, " + std::to_string(kMaxOrder) + "]");
}

}  // namespace

TruncatedSig::TruncatedSig(int dim, int order) : dim_(dim), order_(order)
{
    check_shape(dim, order);
    offsets_.resize(static_cast<std::size_t>(order) + 2);
    std::size_t width = 1;
    offsets_[0] = 0;
    for (int l = 0; l <= order; ++l) {
        offsets_[static_cast<std::size_t>(l) + 1] = offsets_[static_cast<std::size_t>(l)] + width;
        width *= static_cast<std::size_t>(dim);
    }
    data_.assign(offsets_.back(), 0.0);
    data_[0] = 1.0;
}

std::span<const double> TruncatedSig::level(int l) const
{
    const auto i = static_cast<std::size_t>(l);
    return std::span<const double>(data_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

std::span<double> TruncatedSig::level(int l)
{
    const auto i = static_cast<std::size_t>(l);
    return std::span<double>(data_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

double TruncatedSig::at(std::span<const int> word) const
{
    require(static_cast<int>(word.size()) <= order_, "TruncatedSig::at: word longer than order");
    std::size_t index = 0;
    for (int letter : word) {
        require(letter >= 0 && letter < dim_, "TruncatedSig::at: letter out of range");
        index = index * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(letter);
    }
    return level(static_cast<int>(word.size()))[index];
}

std::size_t flattened_size(int dim, int order)
{
    check_shape(dim, order);
    std::size_t total = 0;
    std::size_t width = 1;
    for (int l = 1; l <= order; ++l) {
        width *= static_cast<std::size_t>(dim);
        total += width;
    }
    return total;
}

TruncatedSig segment_signature(std::span<const double> increment, int order)
{
    TruncatedSig out(static_cast<int>(increment.size()), order);
    const auto d = increment.size();
    // Build increment^{(x) l} level by level, then scale by 1/l!.
    std::vector<double> power{1.0};
    for (int l = 1; l <= order; ++l) {
        std::vector<double> next(power.size() * d);
        for (std::size_t i = 0; i < power.size(); ++i)
            for (std::size_t j = 0; j < d; ++j) next[i * d + j] = power[i] * increment[j];
        power = std::move(next);
        auto lvl = out.level(l);
        const double scale = kInvFactorial[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < power.size(); ++i) lvl[i] = power[i] * scale;
    }
    return out;
}

TruncatedSig chen_product(const TruncatedSig& lhs, const TruncatedSig& rhs)
{
    require(lhs.dim() == rhs.dim() && lhs.order() == rhs.order(),
            "chen_product: operands must share dimension and order");
    TruncatedSig out(lhs.dim(), lhs.order());
    for (int l = 1; l <= lhs.order(); ++l) {
        auto dst = out.level(l);
        for (int a = 0; a <= l; ++a) {
            const auto left = lhs.level(a);
            const auto right = rhs.level(l - a);
            const std::size_t width = right.size();
            for (std::size_t i = 0; i < left.size(); ++i) {
                const double li = left[i];
                if (li == 0.0) continue;
                double* row = dst.data() + i * width;
                for (std::size_t j = 0; j < width; ++j) row[j] += li * right[j];
            }
        }
    }
    return out;
}

void for_each_signature(const paths::Path& x, int order,
                        const std::function<void(std::size_t, const TruncatedSig&)>& visit)
{
    const int d = static_cast<int>(x.dim());
    TruncatedSig running(d, order);
    visit(0, running);
    std::vector<double> increment(static_cast<std::size_t>(d));
    for (std::size_t n = 0; n < x.grid().steps(); ++n) {
        for (int j = 0; j < d; ++j) increment[static_cast<std::size_t>(j)] = x(n + 1, j) - x(n, j);
        running = chen_product(running, segment_signature(increment, order));
        visit(n + 1, running);
    }
}

std::vector<TruncatedSig> signature_stream(const paths::Path& x, int order)
{
    std::vector<TruncatedSig> out;
    out.reserve(x.size());
    for_each_signature(x, order, [&](std::size_t, const TruncatedSig& s) { out.push_back(s); });
    return out;
}

Eigen::VectorXd flatten(const TruncatedSig& s)
{
    const auto tail = s.data().subspan(1);
    return Eigen::Map<const Eigen::VectorXd>(tail.data(), static_cast<Eigen::Index>(tail.size()));
}

Matrix signature_features(const paths::Path& x, int order)
{
    const int d = static_cast<int>(x.dim());
    Matrix out(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(flattened_size(d, order)));
    for_each_signature(x, order, [&](std::size_t n, const TruncatedSig& s) {
        out.row(static_cast<Eigen::Index>(n)) = flatten(s).transpose();
    });
    return out;
}

}  // namespace randsig::tsig
