#pragma once

#include "randsig/paths.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace randsig::tsig {

/// Largest supported truncation order (reciprocal factorial table size).
inline constexpr int kMaxOrder = 20;

/// Element (1, S^1, ..., S^M) of the truncated tensor algebra over R^d.
///
/// Level l is stored densely with row-major word index: the entry for the word
/// (i_1, ..., i_l) sits at i_1 d^{l-1} + ... + i_l. Level 0 is always 1.
class TruncatedSig {
public:
    /// The unit element (1, 0, ..., 0).
    TruncatedSig(int dim, int order);

    int dim() const { return dim_; }
    int order() const { return order_; }

    std::span<const double> level(int l) const;
    std::span<double> level(int l);

    /// Entry for a word of letters in [0, d).
    double at(std::span<const int> word) const;

    /// All levels back to back, level 0 first.
    std::span<const double> data() const { return data_; }

    bool operator==(const TruncatedSig&) const = default;

private:
    int dim_;
    int order_;
    std::vector<std::size_t> offsets_;
    std::vector<double> data_;
};

/// Total number of entries in levels 1..M: (d^{M+1} - 1) / (d - 1) - 1, or M for d = 1.
std::size_t flattened_size(int dim, int order);

/// Signature of a single linear segment: level l = increment^{(x) l} / l!.
TruncatedSig segment_signature(std::span<const double> increment, int order);

/// Chen product: level l = sum_{a + b = l} lhs[a] (x) rhs[b].
TruncatedSig chen_product(const TruncatedSig& lhs, const TruncatedSig& rhs);

/// Signature of x on [t_0, t_n] for every grid index n; element 0 is the unit.
std::vector<TruncatedSig> signature_stream(const paths::Path& x, int order);

/// Same values as signature_stream without materialising the whole sequence.
void for_each_signature(const paths::Path& x, int order,
                        const std::function<void(std::size_t, const TruncatedSig&)>& visit);

/// Levels 1..M concatenated in storage order.
Eigen::VectorXd flatten(const TruncatedSig& s);

/// One flattened signature per grid time: a (N + 1) x flattened_size(d, M) matrix.
Matrix signature_features(const paths::Path& x, int order);

}  // namespace randsig::tsig
