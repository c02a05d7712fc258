#pragma once

// Dense real polynomials stored in descending powers: {a_n, ..., a_1, a_0}.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

namespace wncs::poly {

using Poly = std::vector<double>;

inline std::size_t degree(const Poly& p) { return p.empty() ? 0 : p.size() - 1; }

/// Drops leading exact zeros, keeping at least one coefficient.
inline Poly trim(Poly p) {
    auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
    if (first == p.end()) {
        return Poly{0.0};
    }
    p.erase(p.begin(), first);
    return p;
}

/// Left-pads with zeros to `size` coefficients (same polynomial).
inline Poly pad_to(const Poly& p, std::size_t size) {
    if (p.size() >= size) {
        return p;
    }
    Poly out(size - p.size(), 0.0);
    out.insert(out.end(), p.begin(), p.end());
    return out;
}

inline Poly add(const Poly& a, const Poly& b) {
    const std::size_t n = std::max(a.size(), b.size());
    Poly pa = pad_to(a, n);
    const Poly pb = pad_to(b, n);
    for (std::size_t k = 0; k < n; ++k) {
        pa[k] += pb[k];
    }
    return pa;
}

inline Poly scale(Poly p, double s) {
    for (double& c : p) {
        c *= s;
    }
    return p;
}

inline Poly sub(const Poly& a, const Poly& b) { return add(a, scale(b, -1.0)); }

inline Poly mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) {
        return {};
    }
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

inline Poly pow(const Poly& p, std::size_t k) {
    Poly out{1.0};
    for (std::size_t i = 0; i < k; ++i) {
        out = mul(out, p);
    }
    return out;
}

template <typename T>
T eval(const Poly& p, T x) {
    T acc{0};
    for (double c : p) {
        acc = acc * x + T(c);
    }
    return acc;
}

/// Sum of |a_k| |x|^k; the scale against which a cancelled evaluation is judged.
inline double magnitude_bound(const Poly& p, double abs_x) {
    double acc = 0.0;
    for (double c : p) {
        acc = acc * abs_x + std::abs(c);
    }
    return acc;
}

}  // namespace wncs::poly
