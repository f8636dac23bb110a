#include "sigsas/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sigsas/simd.hpp"

namespace sigsas {

TensorShape::TensorShape(int p_, int l_) : p(p_), l(l_) {
    if (p < 1) throw std::invalid_argument("TensorShape: p must be >= 1");
    if (l < 0) throw std::invalid_argument("TensorShape: l must be >= 0");
    order = l + 1;
    base_dim = p + 1;
    // flat_dim = base_dim^order with overflow check
    const std::size_t limit = std::numeric_limits<std::size_t>::max() / 2;
    std::size_t d = 1;
    for (int s = 0; s < order; ++s) {
        if (d > limit / static_cast<std::size_t>(base_dim))
            throw std::invalid_argument("TensorShape: (p+1)^(l+1) exceeds the index range");
        d *= static_cast<std::size_t>(base_dim);
    }
    flat_dim = d;
}

TensorState::TensorState(TensorShape s, std::vector<double> c) : shape(s), coeffs(std::move(c)) {
    if (coeffs.size() != shape.flat_dim)
        throw std::invalid_argument("TensorState: coefficient length does not match flat_dim");
}

double TensorState::euclidean_norm() const {
    return std::sqrt(simd::sum_sq(coeffs.data(), coeffs.size()));
}

double TensorState::one_norm() const { return simd::sum_abs(coeffs.data(), coeffs.size()); }

TensorNorms norms(const TensorState& v) {
    return TensorNorms{v.euclidean_norm(), v.one_norm()};
}

std::size_t lex_index(std::span<const int> multi_index, const TensorShape& shape) {
    if (multi_index.size() != static_cast<std::size_t>(shape.order))
        throw std::invalid_argument("lex_index: multi-index length must equal the tensor order");
    std::size_t flat = 0;
    for (int s = 0; s < shape.order; ++s) {
        const int c = multi_index[static_cast<std::size_t>(s)];
        if (c < 1 || c > shape.base_dim)
            throw std::invalid_argument("lex_index: component " + std::to_string(s + 1) +
                                        " out of range 1.." + std::to_string(shape.base_dim));
        flat = flat * static_cast<std::size_t>(shape.base_dim) + static_cast<std::size_t>(c - 1);
    }
    return flat;
}

std::vector<int> multi_index_of(std::size_t flat, const TensorShape& shape) {
    if (flat >= shape.flat_dim) throw std::invalid_argument("multi_index_of: flat index out of range");
    std::vector<int> multi(static_cast<std::size_t>(shape.order));
    for (int s = shape.order - 1; s >= 0; --s) {
        multi[static_cast<std::size_t>(s)] =
            static_cast<int>(flat % static_cast<std::size_t>(shape.base_dim)) + 1;
        flat /= static_cast<std::size_t>(shape.base_dim);
    }
    return multi;
}

TensorState order_lower(const TensorState& v) {
    if (v.shape.order < 2) throw std::invalid_argument("order_lower: input must have order >= 2");
    TensorShape lowered(v.shape.p, v.shape.l - 1);
    TensorState out(lowered);
    // first-slot index 1 means the leading block of the flat layout
    std::copy(v.coeffs.begin(), v.coeffs.begin() + static_cast<std::ptrdiff_t>(lowered.flat_dim),
              out.coeffs.begin());
    return out;
}

std::vector<double> vandermonde(double z, int p) {
    if (p < 0) throw std::invalid_argument("vandermonde: p must be >= 0");
    std::vector<double> v(static_cast<std::size_t>(p) + 1);
    v[0] = 1.0;
    for (int i = 1; i <= p; ++i) v[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i - 1)] * z;
    return v;
}

TensorState tensor_lift(const TensorState& v, std::span<const double> w) {
    const int b = static_cast<int>(w.size());
    if (b != v.shape.base_dim)
        throw std::invalid_argument("tensor_lift: base-space factor has wrong dimension");
    TensorShape lifted(v.shape.p, v.shape.l + 1);
    TensorState out(lifted);
    const std::size_t n0 = v.shape.flat_dim;
    for (std::size_t n = 0; n < n0; ++n) {
        const double c = v.coeffs[n];
        double* block = out.coeffs.data() + n * static_cast<std::size_t>(b);
        for (int i = 0; i < b; ++i) block[i] = c * w[static_cast<std::size_t>(i)];
    }
    return out;
}

TensorState zhat(std::span<const double> window, const TensorShape& shape) {
    if (window.size() != static_cast<std::size_t>(shape.order))
        throw std::invalid_argument("zhat: window length must equal l+1");
    TensorState out(TensorShape(shape.p, 0), vandermonde(window[0], shape.p));
    for (int s = 1; s < shape.order; ++s) {
        const auto v = vandermonde(window[static_cast<std::size_t>(s)], shape.p);
        out = tensor_lift(out, v);
    }
    return out;
}

void validate_i0(std::span<const int> i0, const TensorShape& shape) {
    if (i0.size() < 2) throw std::invalid_argument("I0 must contain at least two indices");
    bool has_one = false;
    for (std::size_t a = 0; a < i0.size(); ++a) {
        const int i = i0[a];
        if (i < 1 || i > shape.base_dim)
            throw std::invalid_argument("I0 index out of range 1..p+1");
        if (i == 1) has_one = true;
        for (std::size_t b = a + 1; b < i0.size(); ++b)
            if (i0[b] == i) throw std::invalid_argument("I0 contains a duplicate index");
    }
    if (!has_one) throw std::invalid_argument("I0 must contain the index 1");
}

TensorState zhat0(double z, std::span<const int> i0, int sign, const TensorShape& shape) {
    validate_i0(i0, shape);
    if (sign != 1 && sign != -1) throw std::invalid_argument("zhat0: sign must be +1 or -1");
    TensorState out(shape);
    const auto powers = vandermonde(z, shape.p);
    // positions (1,...,1,i) are the first p+1 flat entries
    for (int i : i0)
        out.coeffs[static_cast<std::size_t>(i - 1)] = sign * powers[static_cast<std::size_t>(i - 1)];
    return out;
}

}  // namespace sigsas
