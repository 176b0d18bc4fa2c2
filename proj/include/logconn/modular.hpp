#pragma once

// Reduction of cyclotomic matrices modulo a prime p = 1 mod N, sending zeta to
// an element of order N in F_p. The map is a ring homomorphism on the
// p-integral elements, so the rank mod p never exceeds the exact rank.

#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "logconn/field.hpp"
#include "logconn/matrix.hpp"

namespace logconn {

namespace detail {

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t p) { return static_cast<uint64_t>((unsigned __int128)a * b % p); }

inline uint64_t powmod(uint64_t a, uint64_t e, uint64_t p)
{
    uint64_t r = 1 % p;
    for (a %= p; e; e >>= 1, a = mulmod(a, a, p))
        if (e & 1)
            r = mulmod(r, a, p);
    return r;
}

struct PrimeImage {
    uint64_t p = 0;
    uint64_t zeta = 0;  ///< image of zeta_N
};

inline PrimeImage prime_image(unsigned order)
{
    uint64_t n = order;
    uint64_t p = ((uint64_t{1} << 31) / n + 1) * n + 1;
    while (!mpz_probab_prime_p(mpz_class(static_cast<unsigned long>(p)).get_mpz_t(), 30))
        p += n;
    std::vector<uint64_t> primes;
    for (uint64_t q = 2, m = n; m > 1; ++q)
        if (m % q == 0) {
            primes.push_back(q);
            while (m % q == 0)
                m /= q;
        }
    for (uint64_t a = 2;; ++a) {
        uint64_t w = powmod(a, (p - 1) / n, p);
        bool exact = true;
        for (uint64_t q : primes)
            if (powmod(w, n / q, p) == 1)
                exact = false;
        if (exact)
            return {p, w};
    }
}

/// Image of x, or nullopt when a denominator is divisible by p.
inline std::optional<uint64_t> reduce_mod(const FieldElement& x, const PrimeImage& im)
{
    std::vector<Rational> c = x.coords();
    uint64_t acc = 0, pw = 1;
    mpz_class pz(static_cast<unsigned long>(im.p));
    for (const auto& q : c) {
        if (!q.is_zero()) {
            mpz_class num = q.numerator() % pz, den = q.denominator() % pz;
            if (num < 0)
                num += pz;
            if (den == 0)
                return std::nullopt;
            uint64_t v = mulmod(num.get_ui(), powmod(den.get_ui(), im.p - 2, im.p), im.p);
            acc = (acc + mulmod(v, pw, im.p)) % im.p;
        }
        pw = mulmod(pw, im.zeta, im.p);
    }
    return acc;
}

}  // namespace detail

namespace detail {

using ModMatrix = std::vector<std::vector<uint64_t>>;

inline unsigned common_order(const std::vector<const Matrix<FieldElement>*>& ms)
{
    for (const auto* m : ms)
        for (size_t i = 0; i < m->rows(); ++i)
            for (size_t j = 0; j < m->cols(); ++j)
                if (unsigned o = (*m)(i, j).order(); o != 1)
                    return o;
    return 1;
}

inline std::optional<ModMatrix> reduce_matrix(const Matrix<FieldElement>& m, const PrimeImage& im)
{
    ModMatrix a(m.rows(), std::vector<uint64_t>(m.cols()));
    for (size_t i = 0; i < m.rows(); ++i)
        for (size_t j = 0; j < m.cols(); ++j) {
            auto v = reduce_mod(m(i, j), im);
            if (!v)
                return std::nullopt;
            a[i][j] = *v;
        }
    return a;
}

/// Reduces v against echelon rows (pivot, row) and appends it if independent.
inline bool absorb_mod(std::vector<std::pair<size_t, std::vector<uint64_t>>>& rows, std::vector<uint64_t> v, uint64_t p)
{
    for (const auto& [piv, row] : rows) {
        if (v[piv] == 0)
            continue;
        uint64_t f = v[piv];
        for (size_t k = 0; k < v.size(); ++k)
            if (row[k])
                v[k] = (v[k] + p - mulmod(f, row[k], p)) % p;
    }
    for (size_t k = 0; k < v.size(); ++k) {
        if (v[k] == 0)
            continue;
        uint64_t inv = powmod(v[k], p - 2, p);
        for (auto& x : v)
            x = mulmod(x, inv, p);
        rows.emplace_back(k, std::move(v));
        return true;
    }
    return false;
}

}  // namespace detail

/// Rank of the reduction mod p (a lower bound for the exact rank), or nullopt
/// if some entry is not p-integral.
inline std::optional<size_t> modular_rank(const Matrix<FieldElement>& m)
{
    detail::PrimeImage im = detail::prime_image(detail::common_order({&m}));
    auto red = detail::reduce_matrix(m, im);
    if (!red)
        return std::nullopt;
    std::vector<std::pair<size_t, std::vector<uint64_t>>> rows;
    size_t rank = 0;
    for (auto& row : *red)
        if (detail::absorb_mod(rows, std::move(row), im.p) && ++rank == m.cols())
            break;
    return rank;
}

/// True when the reductions mod p of the matrices generate the full matrix
/// algebra; then so do the matrices themselves. False is inconclusive.
inline bool modular_generates_full_algebra(const std::vector<Matrix<FieldElement>>& mats, size_t r)
{
    std::vector<const Matrix<FieldElement>*> ptrs;
    for (const auto& m : mats)
        ptrs.push_back(&m);
    detail::PrimeImage im = detail::prime_image(detail::common_order(ptrs));
    std::vector<detail::ModMatrix> gens;
    for (const auto& m : mats) {
        auto red = detail::reduce_matrix(m, im);
        if (!red)
            return false;
        gens.push_back(std::move(*red));
    }
    auto flat = [&](const detail::ModMatrix& a) {
        std::vector<uint64_t> v;
        for (const auto& row : a)
            v.insert(v.end(), row.begin(), row.end());
        return v;
    };
    auto mul = [&](const detail::ModMatrix& a, const detail::ModMatrix& b) {
        detail::ModMatrix c(r, std::vector<uint64_t>(r, 0));
        for (size_t i = 0; i < r; ++i)
            for (size_t k = 0; k < r; ++k)
                if (a[i][k])
                    for (size_t j = 0; j < r; ++j)
                        c[i][j] = (c[i][j] + detail::mulmod(a[i][k], b[k][j], im.p)) % im.p;
        return c;
    };
    detail::ModMatrix id(r, std::vector<uint64_t>(r, 0));
    for (size_t i = 0; i < r; ++i)
        id[i][i] = 1;
    std::vector<std::pair<size_t, std::vector<uint64_t>>> rows;
    detail::absorb_mod(rows, flat(id), im.p);
    std::vector<detail::ModMatrix> frontier{id};
    while (!frontier.empty() && rows.size() < r * r) {
        std::vector<detail::ModMatrix> next;
        for (const auto& a : frontier)
            for (const auto& x : gens) {
                auto c = mul(a, x);
                if (detail::absorb_mod(rows, flat(c), im.p))
                    next.push_back(std::move(c));
            }
        frontier = std::move(next);
    }
    return rows.size() == r * r;
}

}  // namespace logconn
