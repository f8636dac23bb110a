#pragma once

// Dense tensor states over the lexicographic basis of (R^{p+1})^{(l+1)}.
// Flat layout convention: the first tensor slot varies slowest, i.e. the flat
// index of the multi-index (i_1, ..., i_{l+1}) (1-based components) is
// sum_s (i_s - 1) * (p+1)^{l+1-s}. The first slot carries the oldest input of
// a window, the last slot the newest.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sigsas {

struct TensorShape {
    int p = 1;               ///< polynomial degree, >= 1
    int l = 1;               ///< memory lag, >= 0 (order-1 tensors have l = 0)
    int order = 2;           ///< l + 1
    int base_dim = 2;        ///< p + 1
    std::size_t flat_dim = 4;  ///< (p+1)^(l+1)

    TensorShape() = default;
    /// Throws if p < 1, l < 0, or (p+1)^(l+1) overflows the index range.
    TensorShape(int p_, int l_);

    /// Dimension of the lowered space, (p+1)^l.
    std::size_t lowered_dim() const { return flat_dim / static_cast<std::size_t>(base_dim); }

    bool operator==(const TensorShape&) const = default;
};

struct TensorState {
    TensorShape shape;
    std::vector<double> coeffs;

    TensorState() = default;
    explicit TensorState(TensorShape s) : shape(s), coeffs(s.flat_dim, 0.0) {}
    TensorState(TensorShape s, std::vector<double> c);

    double euclidean_norm() const;
    double one_norm() const;
};

struct TensorNorms {
    double euclidean = 0.0;
    double one_norm = 0.0;
};
TensorNorms norms(const TensorState& v);

/// Flat index of a 1-based multi-index; throws on out-of-range components.
std::size_t lex_index(std::span<const int> multi_index, const TensorShape& shape);

/// Inverse of lex_index; returns 1-based components.
std::vector<int> multi_index_of(std::size_t flat, const TensorShape& shape);

/// The order lowering map: fixes the first slot to index 1 and re-indexes over
/// the remaining l slots. Linear with operator norm exactly 1. Throws on
/// order-1 input.
TensorState order_lower(const TensorState& v);

/// Vandermonde vector (1, z, ..., z^p).
std::vector<double> vandermonde(double z, int p);

/// v (x) w for an order-l state v and a base-space vector w of length p+1;
/// the new factor occupies the last slot.
TensorState tensor_lift(const TensorState& v, std::span<const double> w);

/// The window tensor: coefficient at (i_1, ..., i_{l+1}) equals
/// z_{t-l}^{i_1-1} ... z_t^{i_{l+1}-1}. The window is ordered oldest first and
/// must have length l+1.
TensorState zhat(std::span<const double> window, const TensorShape& shape);

/// The drive tensor: sign * sum_{i in I0} z^{i-1} at positions (1,...,1,i).
/// Requires 1 in I0, |I0| >= 2, I0 a subset of {1,...,p+1}.
TensorState zhat0(double z, std::span<const int> i0, int sign, const TensorShape& shape);

/// Validates an I0 index set against a shape; throws std::invalid_argument.
void validate_i0(std::span<const int> i0, const TensorShape& shape);

}  // namespace sigsas
