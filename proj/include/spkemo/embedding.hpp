#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "spkemo/error.hpp"

namespace spkemo {

/// Fixed-dimension real vector for one frame or one utterance.
struct Embedding {
    std::vector<double> values;

    Embedding() = default;
    explicit Embedding(std::vector<double> v) : values(std::move(v)) {}
    Embedding(std::initializer_list<double> v) : values(v) {}

    std::size_t dim() const { return values.size(); }
    std::span<const double> view() const { return values; }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    bool operator==(const Embedding&) const = default;
};

inline void require_same_dim(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimMismatch,
                    "dimension " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

/// Scales to unit length; a zero vector is returned unchanged.
inline void normalize_in_place(std::vector<double>& v) {
    double n = l2_norm(v);
    if (n > 0.0)
        for (double& x : v) x /= n;
}

}  // namespace spkemo
