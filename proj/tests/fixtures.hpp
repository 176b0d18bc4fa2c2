#pragma once

// Hand-rolled random generators shared by the property tests.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "logconn/connection.hpp"
#include "logconn/cover.hpp"

namespace logconn::testing {

inline FieldElement small_rational(std::mt19937& rng, int span = 3, int maxden = 3)
{
    std::uniform_int_distribution<int> num(-span, span), den(1, maxden);
    return FieldElement(Rational(num(rng), den(rng)));
}

inline FieldElement small_element(std::mt19937& rng, const FieldPtr& ctx, int span = 2)
{
    FieldElement x = small_rational(rng, span, 2);
    if (ctx && ctx->order() > 2 && rng() % 2)
        x += small_rational(rng, span, 1) * FieldElement::zeta(ctx, static_cast<long>(rng() % ctx->order()));
    return x;
}

/// Every power-basis coordinate random, with numerators and denominators up to 10^6.
inline FieldElement wide_element(std::mt19937& rng, const FieldPtr& ctx)
{
    std::vector<Rational> c(ctx->degree());
    for (auto& q : c)
        if (rng() % 4)
            q = Rational(static_cast<long>(rng() % 2000001) - 1000000, 1 + static_cast<long>(rng() % 1000000));
    return FieldElement(ctx, c);
}

inline Poly random_poly(std::mt19937& rng, const FieldPtr& ctx, long maxdeg)
{
    std::vector<FieldElement> c(static_cast<size_t>(rng() % (maxdeg + 1) + 1));
    for (auto& x : c)
        if (rng() % 3)
            x = small_element(rng, ctx, 5);
    return Poly(c);
}

inline RatFun random_ratfun(std::mt19937& rng, const FieldPtr& ctx, long maxdeg = 4)
{
    Poly den = random_poly(rng, ctx, maxdeg);
    if (den.is_zero())
        den = Poly(FieldElement(1));
    return RatFun(random_poly(rng, ctx, maxdeg), den);
}

inline FMatrix random_matrix(std::mt19937& rng, size_t r, const FieldPtr& ctx, int density = 2)
{
    FMatrix m(r, r);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            if (static_cast<int>(rng() % 3) < density)
                m(i, j) = small_element(rng, ctx);
    return m;
}

inline FMatrix random_invertible(std::mt19937& rng, size_t r, const FieldPtr& ctx)
{
    for (;;) {
        FMatrix m = random_matrix(rng, r, ctx, 3);
        if (!determinant(m).is_zero())
            return m;
    }
}

/// Integer matrix of determinant +-1 (product of elementary moves and a
/// permutation), so its inverse stays small too.
inline FMatrix random_unimodular(std::mt19937& rng, size_t r)
{
    FMatrix m = FMatrix::identity(r);
    std::vector<size_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (size_t i = 0; i < r; ++i)
        m(i, i) = FieldElement(0), m(i, perm[i]) = FieldElement(rng() % 2 ? 1 : -1);
    for (size_t t = 0; t < 2 * r; ++t) {
        size_t i = rng() % r, j = rng() % r;
        if (i == j)
            continue;
        FieldElement c(static_cast<long>(rng() % 5) - 2);
        for (size_t k = 0; k < r; ++k)
            m(i, k) += c * m(j, k);
    }
    return m;
}

/// U D V with U, V unimodular and D a diagonal of small units: random but
/// with an inverse of the same size.
inline FMatrix random_tame_invertible(std::mt19937& rng, size_t r, const FieldPtr& ctx)
{
    FMatrix d(r, r);
    for (size_t i = 0; i < r; ++i) {
        FieldElement x(static_cast<long>(1 + rng() % 2) * (rng() % 2 ? 1 : -1));
        if (ctx && ctx->order() > 2 && rng() % 2)
            x *= FieldElement::zeta(ctx, static_cast<long>(rng() % ctx->order()));
        d(i, i) = x;
    }
    return random_unimodular(rng, r) * d * random_unimodular(rng, r);
}

/// Distinct finite points avoiding `avoid`.
inline std::vector<FieldElement> random_points(std::mt19937& rng, size_t k, std::vector<FieldElement> avoid)
{
    std::vector<FieldElement> pts;
    while (pts.size() < k) {
        FieldElement p = small_rational(rng, 4, 2);
        if (std::find(avoid.begin(), avoid.end(), p) != avoid.end())
            continue;
        avoid.push_back(p);
        pts.push_back(p);
    }
    return pts;
}

/// Automorphism of the split bundle with twists d (frame change e' = e g):
/// entries (i, j) only where d_i >= d_j, polynomial of degree <= d_i - d_j,
/// triangular in the order (twist descending, index) so det g is constant.
inline RMatrix random_automorphism(std::mt19937& rng, const std::vector<long>& d, const FieldPtr& ctx)
{
    size_t r = d.size();
    std::vector<size_t> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return d[a] > d[b]; });
    std::vector<size_t> pos(r);
    for (size_t k = 0; k < r; ++k)
        pos[order[k]] = k;
    RMatrix g(r, r);
    for (size_t i = 0; i < r; ++i) {
        FieldElement s = small_element(rng, ctx, 2);
        while (s.is_zero())
            s = small_element(rng, ctx, 2);
        g(i, i) = RatFun(s);
        for (size_t j = 0; j < r; ++j) {
            if (i == j || pos[i] >= pos[j] || d[i] < d[j] || rng() % 3 == 0)
                continue;
            std::vector<FieldElement> c(static_cast<size_t>(d[i] - d[j]) + 1);
            for (auto& x : c)
                x = small_element(rng, ctx, 2);
            g(i, j) = RatFun(Poly(c));
        }
    }
    return g;
}

/// Logarithmic connection on the split bundle with twists d, simple poles at
/// 0, infinity and random finite points. Entry (i, j) must vanish to order
/// d_j - d_i + 1 at infinity when d_j > d_i, and may carry a polynomial part of
/// degree < d_i - d_j when d_i > d_j.
inline LogConnection random_connection(std::mt19937& rng, const std::vector<long>& d, size_t npoles,
                                       const FieldPtr& ctx)
{
    size_t r = d.size();
    long gap = 0;
    for (long a : d)
        for (long b : d)
            gap = std::max(gap, b - a + 1);
    size_t count = std::max<size_t>(npoles, static_cast<size_t>(gap));
    auto pts = random_points(rng, count, {FieldElement(0)});
    pts.push_back(FieldElement(0));
    Poly all(FieldElement(1));
    for (const auto& p : pts)
        all = all * Poly::linear(p);
    RMatrix a(r, r);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j) {
            if (i != j && rng() % 4 == 0)
                continue;
            long need = d[j] - d[i] + 1;  // required vanishing order at infinity
            if (need >= 2) {
                std::vector<FieldElement> q(pts.size() - static_cast<size_t>(need) + 1);
                for (auto& x : q)
                    x = small_element(rng, ctx);
                a(i, j) = RatFun(Poly(q), all);
                continue;
            }
            for (const auto& p : pts)
                a(i, j) += RatFun::simple_pole(small_element(rng, ctx), p);
            if (need < 0 && rng() % 2) {
                std::vector<FieldElement> q(static_cast<size_t>(-need));
                for (auto& x : q)
                    x = small_element(rng, ctx);
                a(i, j) += RatFun(Poly(q));
            }
        }
    std::vector<P1Point> sing{P1Point::infinity()};
    for (const auto& p : pts)
        sing.push_back(P1Point::finite(p));
    LogConnection c{SplitBundle{d}, a, sing};
    return gauge_transform(c, random_automorphism(rng, d, ctx), SplitBundle{d});
}


/// Equivariant connection regular at 0 and infinity: in an eigenbasis P of
/// R = P diag(zeta^k) P^{-1}, entry (i, j) is a sum of c y^e / (y^n - x) with
/// e = (k_i - k_j - 1) mod n, and the c sum to zero when e = n - 1.
inline EquivariantConnection random_equivariant(std::mt19937& rng, size_t r, const CoverDesc& cover, size_t npts)
{
    long n = cover.n;
    npts = std::max<size_t>(npts, 2);
    std::vector<FieldElement> roots, xs;
    while (roots.size() < npts) {
        FieldElement a = small_rational(rng, 3, 2);
        if (a.is_zero())
            continue;
        FieldElement x = a.pow(cover.n);
        if (std::find(xs.begin(), xs.end(), x) != xs.end())
            continue;
        roots.push_back(a);
        xs.push_back(x);
    }
    std::vector<long> k(r);
    for (auto& v : k)
        v = static_cast<long>(rng() % cover.n);
    RMatrix bp(r, r);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j) {
            if (rng() % 4 == 0)
                continue;
            long e = ((k[i] - k[j] - 1) % n + n) % n;
            FieldElement sum(0);
            for (size_t l = 0; l < npts; ++l) {
                FieldElement c = small_element(rng, cover.ctx);
                if (e == n - 1 && l + 1 == npts)
                    c = -sum;
                sum += c;
                Poly den = Poly::monomial(FieldElement(1), cover.n) - Poly(xs[l]);
                bp(i, j) += RatFun(Poly::monomial(c, static_cast<size_t>(e)), den);
            }
        }
    FMatrix p = random_unimodular(rng, r), pinv = inverse_or_throw(p);
    FMatrix d(r, r);
    for (size_t j = 0; j < r; ++j)
        d(j, j) = cover.zeta(k[j]);
    std::vector<P1Point> sing;
    for (const auto& a : roots)
        for (unsigned s = 0; s < cover.n; ++s)
            sing.push_back(P1Point::finite(a * cover.zeta(s)));
    LogConnection c{SplitBundle{std::vector<long>(r, 0)}, constant_sandwich(p, bp, pinv), sing};
    return EquivariantConnection{cover, audited(c, "random_equivariant"), p * d * pinv};
}

/// invariant_part of a random equivariant connection, moved by a random
/// automorphism of its bundle (weights are unchanged).
inline ParabolicConnection random_parabolic(std::mt19937& rng, size_t r, const CoverDesc& cover, size_t npts)
{
    ParabolicConnection p = invariant_part(random_equivariant(rng, r, cover, npts));
    const auto& d = p.conn.bundle.twists;
    p.conn = gauge_transform(p.conn, random_automorphism(rng, d, cover.ctx), p.conn.bundle);
    return p;
}

}  // namespace logconn::testing
