#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "logconn/poly.hpp"

namespace logconn {

/// Rational function num/den in lowest terms with monic denominator.
class RatFun {
public:
    RatFun() : den_(FieldElement(1)) {}
    RatFun(long c) : RatFun(FieldElement(c)) {}
    RatFun(const FieldElement& c) : num_(c), den_(FieldElement(1)) {}
    RatFun(Poly p) : num_(std::move(p)), den_(FieldElement(1)) {}
    RatFun(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { reduce(); }

    static RatFun z() { return RatFun(Poly::x()); }
    /// c * z^k for any integer k.
    static RatFun monomial(const FieldElement& c, long k)
    {
        if (k >= 0 || c.is_zero())
            return RatFun(Poly::monomial(c, static_cast<size_t>(std::max(k, 0L))));
        RatFun r;
        r.num_ = Poly(c);
        r.den_ = Poly::monomial(FieldElement(1), static_cast<size_t>(-k));
        return r;
    }
    /// c / (z - a)
    static RatFun simple_pole(const FieldElement& c, const FieldElement& a)
    {
        RatFun r;
        r.num_ = Poly(c);
        r.den_ = c.is_zero() ? Poly(FieldElement(1)) : Poly::linear(a);
        return r;
    }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.degree() == 0; }
    bool is_constant() const { return is_polynomial() && num_.degree() <= 0; }
    FieldElement constant_value() const { return num_.coeff(0); }
    FieldPtr context() const
    {
        FieldPtr c = num_.context();
        return c ? c : den_.context();
    }

    RatFun operator-() const
    {
        RatFun r = *this;
        r.num_ = -r.num_;
        return r;
    }

    friend RatFun operator+(const RatFun& a, const RatFun& b) { return add(a, b, false); }
    friend RatFun operator-(const RatFun& a, const RatFun& b) { return add(a, b, true); }
    friend RatFun operator*(const RatFun& a, const RatFun& b)
    {
        if (a.is_zero() || b.is_zero())
            return {};
        if (a.is_polynomial() && b.is_polynomial())
            return RatFun(a.num_ * b.num_);
        // cross-cancel first so the products stay small
        Poly g1 = gcd(a.num_, b.den_);
        Poly g2 = gcd(b.num_, a.den_);
        RatFun r;
        r.num_ = divmod(a.num_, g1).first * divmod(b.num_, g2).first;
        r.den_ = divmod(a.den_, g2).first * divmod(b.den_, g1).first;
        r.normalize_lead();
        return r;
    }
    friend RatFun operator/(const RatFun& a, const RatFun& b) { return a * b.inverse(); }

    RatFun& operator+=(const RatFun& o) { return *this = *this + o; }
    RatFun& operator-=(const RatFun& o) { return *this = *this - o; }
    RatFun& operator*=(const RatFun& o) { return *this = *this * o; }
    RatFun& operator/=(const RatFun& o) { return *this = *this / o; }

    friend bool operator==(const RatFun& a, const RatFun& b) { return a.num_ == b.num_ && a.den_ == b.den_; }

    RatFun inverse() const
    {
        if (is_zero())
            throw MathError(ErrorCode::division_by_zero, "rational function is zero");
        RatFun r;
        r.num_ = den_;
        r.den_ = num_;
        r.normalize_lead();
        return r;
    }

    RatFun derivative() const
    {
        if (is_polynomial())
            return RatFun(num_.derivative());
        return RatFun(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
    }

    /// Value at a finite point, or nullopt at a pole.
    std::optional<FieldElement> eval(const FieldElement& x) const
    {
        FieldElement d = den_.eval(x);
        if (d.is_zero())
            return std::nullopt;
        return num_.eval(x) / d;
    }

    /// f(z^n)
    RatFun compose_power(unsigned n) const
    {
        RatFun r;
        r.num_ = num_.compose_power(n);
        r.den_ = den_.compose_power(n);
        return r;
    }

    /// f(s*z), s != 0
    RatFun scale(const FieldElement& s) const
    {
        RatFun r;
        r.num_ = num_.scale(s);
        r.den_ = den_.scale(s);
        r.normalize_lead();
        return r;
    }

    /// f(1/z)
    RatFun compose_inverse() const { return invert_variable(FieldElement(1), 0); }

    /// c * z^k * f(1/z). Reversal keeps numerator and denominator coprime and
    /// prime to z, so no gcd is needed.
    RatFun invert_variable(const FieldElement& c, long k) const
    {
        if (is_zero() || c.is_zero())
            return {};
        long dn = num_.degree(), dd = den_.degree();
        long e = dd - dn + k;
        RatFun r;
        r.num_ = c * num_.reverse(dn);
        r.den_ = den_.reverse(dd);
        if (e > 0)
            r.num_ = r.num_ * Poly::monomial(FieldElement(1), static_cast<size_t>(e));
        else if (e < 0)
            r.den_ = r.den_ * Poly::monomial(FieldElement(1), static_cast<size_t>(-e));
        r.normalize_lead();
        return r;
    }

    /// Order of vanishing at z = 0 (negative for a pole).
    long valuation_at_zero() const
    {
        if (is_zero())
            return 0;
        return num_.valuation() - den_.valuation();
    }

    /// Order of vanishing at infinity (deg den - deg num).
    long valuation_at_infinity() const
    {
        if (is_zero())
            return 0;
        return den_.degree() - num_.degree();
    }

    friend std::ostream& operator<<(std::ostream& os, const RatFun& f)
    {
        return os << f.num_ << "/" << f.den_;
    }

private:
    static RatFun add(const RatFun& a, const RatFun& b, bool negate_b)
    {
        if (b.is_zero())
            return a;
        if (a.is_zero())
            return negate_b ? -b : b;
        if (a.den_ == b.den_) {
            Poly n = negate_b ? a.num_ - b.num_ : a.num_ + b.num_;
            if (a.is_polynomial())
                return RatFun(std::move(n));
            return RatFun(std::move(n), a.den_);
        }
        Poly g = gcd(a.den_, b.den_);
        Poly ca = divmod(b.den_, g).first;  // a's cofactor
        Poly cb = divmod(a.den_, g).first;
        Poly n = negate_b ? a.num_ * ca - b.num_ * cb : a.num_ * ca + b.num_ * cb;
        if (n.is_zero())
            return {};
        Poly d = a.den_ * ca;
        // only factors of g can cancel
        Poly h = gcd(n, g);
        RatFun r;
        if (h.degree() > 0) {
            r.num_ = divmod(n, h).first;
            r.den_ = divmod(d, h).first;
        } else {
            r.num_ = std::move(n);
            r.den_ = std::move(d);
        }
        r.normalize_lead();
        return r;
    }

    void reduce()
    {
        if (den_.is_zero())
            throw MathError(ErrorCode::division_by_zero, "rational function with zero denominator");
        if (num_.is_zero()) {
            den_ = Poly(FieldElement(1));
            return;
        }
        Poly g = gcd(num_, den_);
        if (g.degree() > 0) {
            num_ = divmod(num_, g).first;
            den_ = divmod(den_, g).first;
        }
        normalize_lead();
    }

    void normalize_lead()
    {
        if (num_.is_zero()) {
            den_ = Poly(FieldElement(1));
            return;
        }
        FieldElement l = den_.lead();
        if (!l.is_one()) {
            FieldElement inv = l.inverse();
            num_ = inv * num_;
            den_ = inv * den_;
        }
    }

    Poly num_;
    Poly den_;
};

/// A point of the projective line: a field element or infinity.
struct P1Point {
    bool infinite = false;
    FieldElement value;

    static P1Point finite(const FieldElement& v) { return P1Point{false, v}; }
    static P1Point infinity() { return P1Point{true, FieldElement()}; }

    bool is_infinity() const { return infinite; }

    friend bool operator==(const P1Point& a, const P1Point& b)
    {
        if (a.infinite || b.infinite)
            return a.infinite == b.infinite;
        return a.value == b.value;
    }

    friend std::ostream& operator<<(std::ostream& os, const P1Point& p)
    {
        if (p.infinite)
            return os << "inf";
        return os << p.value;
    }
};

inline bool contains(const std::vector<P1Point>& pts, const P1Point& p)
{
    return std::find(pts.begin(), pts.end(), p) != pts.end();
}

/// Truncated Laurent expansion: coefficients for exponents lowest_order ..
/// truncation_order (inclusive) in the local coordinate z - p, or w = 1/z.
struct LaurentSeries {
    P1Point center;
    long lowest_order = 0;
    std::vector<FieldElement> coeffs;
    long truncation_order = 0;

    bool is_zero() const { return coeffs.empty(); }

    FieldElement coeff(long k) const
    {
        if (k > truncation_order)
            throw MathError(ErrorCode::invalid_argument, "coefficient beyond truncation order");
        if (k < lowest_order || coeffs.empty())
            return FieldElement();
        return coeffs[static_cast<size_t>(k - lowest_order)];
    }
};

namespace detail {

/// First `count` coefficients of the power series n(t)/d(t), d(0) != 0.
inline std::vector<FieldElement> series_divide(const Poly& n, const Poly& d, long count)
{
    std::vector<FieldElement> out;
    if (count <= 0)
        return out;
    out.resize(static_cast<size_t>(count));
    FieldElement inv0 = d.coeff(0).inverse();
    for (long k = 0; k < count; ++k) {
        FieldElement acc = n.coeff(k);
        for (long j = 1; j <= std::min(k, d.degree()); ++j)
            acc -= d.coeff(j) * out[static_cast<size_t>(k - j)];
        out[static_cast<size_t>(k)] = acc * inv0;
    }
    return out;
}

inline LaurentSeries make_series(const P1Point& p, const Poly& n, const Poly& d, long shift, long order)
{
    // value = t^shift * n(t)/d(t) with d(0) != 0 and n(0) != 0
    LaurentSeries s;
    s.center = p;
    s.truncation_order = order;
    if (n.is_zero() || shift > order) {
        s.lowest_order = order;
        return s;
    }
    s.lowest_order = shift;
    s.coeffs = series_divide(n, d, order - shift + 1);
    return s;
}

}  // namespace detail

/// Expansion of f around p up to and including exponent `order`.
inline LaurentSeries laurent_at(const RatFun& f, const P1Point& p, long order)
{
    if (f.is_zero()) {
        LaurentSeries s;
        s.center = p;
        s.lowest_order = order;
        s.truncation_order = order;
        return s;
    }
    if (p.is_infinity()) {
        long dn = f.num().degree(), dd = f.den().degree();
        return detail::make_series(p, f.num().reverse(dn), f.den().reverse(dd), dd - dn, order);
    }
    Poly n = f.num().shift(p.value), d = f.den().shift(p.value);
    long vn = n.valuation(), vd = d.valuation();
    return detail::make_series(p, n.shift_down(vn), d.shift_down(vd), vn - vd, order);
}

/// Residue of the one-form f dz at p (at infinity via dz = -dw/w^2).
inline FieldElement residue_form(const RatFun& f, const P1Point& p)
{
    if (f.is_zero())
        return FieldElement();
    if (p.is_infinity())
        return -laurent_at(f, p, 1).coeff(1);
    return laurent_at(f, p, -1).coeff(-1);
}

/// Principal parts at finite poles plus the polynomial remainder.
struct PartialFractions {
    /// For each pole p, coefficients c_1..c_k of sum c_j / (z - p)^j.
    std::vector<std::pair<P1Point, std::vector<FieldElement>>> parts;
    Poly remainder;

    RatFun reassemble() const
    {
        RatFun acc(remainder);
        for (const auto& [p, cs] : parts) {
            RatFun base = RatFun::simple_pole(FieldElement(1), p.value);
            RatFun pw = base;
            for (const auto& c : cs) {
                acc += RatFun(c) * pw;
                pw *= base;
            }
        }
        return acc;
    }
};

namespace detail {

inline std::vector<mpz_class> positive_divisors(mpz_class n)
{
    n = abs(n);
    std::vector<mpz_class> small, large;
    for (mpz_class d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            small.push_back(d);
            if (d * d != n)
                large.push_back(n / d);
        }
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

/// Rational roots of a polynomial whose coefficients are all rational.
inline std::vector<FieldElement> rational_roots(const Poly& p)
{
    std::vector<FieldElement> roots;
    if (p.degree() < 1)
        return roots;
    for (const auto& c : p.coeffs())
        if (!c.is_rational())
            return roots;
    Poly q = p.shift_down(p.valuation());
    if (p.valuation() > 0)
        roots.push_back(FieldElement(0));
    if (q.degree() < 1)
        return roots;
    mpz_class l = 1;
    for (const auto& c : q.coeffs())
        l = lcm(l, c.rational_part().denominator());
    mpz_class a0 = (q.coeff(0).rational_part() * Rational(mpq_class(l))).numerator();
    mpz_class an = (q.lead().rational_part() * Rational(mpq_class(l))).numerator();
    for (const auto& num : positive_divisors(a0))
        for (const auto& den : positive_divisors(an))
            for (int sgn : {1, -1}) {
                FieldElement cand(Rational(num * sgn, den));
                if (q.eval(cand).is_zero() &&
                    std::find(roots.begin(), roots.end(), cand) == roots.end())
                    roots.push_back(cand);
            }
    return roots;
}

}  // namespace detail

/// Splits f over the declared finite poles; any remaining denominator factor
/// must have roots that are rationals or roots of unity of the field.
inline PartialFractions partial_fractions(const RatFun& f, const std::vector<P1Point>& poles,
                                          const FieldPtr& ctx_hint = nullptr)
{
    PartialFractions out;
    auto [quot, rem] = divmod(f.num(), f.den());
    out.remainder = quot;
    if (f.is_polynomial())
        return out;

    Poly rest = f.den();
    std::vector<std::pair<FieldElement, long>> found;
    auto strip = [&](const FieldElement& a) {
        long k = 0;
        Poly lin = Poly::linear(a);
        while (rest.degree() > 0) {
            auto [q, r] = divmod(rest, lin);
            if (!r.is_zero())
                break;
            rest = q;
            ++k;
        }
        if (k > 0)
            found.emplace_back(a, k);
    };
    for (const auto& p : poles)
        if (!p.is_infinity())
            strip(p.value);
    if (rest.degree() > 0) {
        for (const auto& r : detail::rational_roots(rest))
            strip(r);
    }
    if (rest.degree() > 0) {
        FieldPtr ctx = f.context() ? f.context() : ctx_hint;
        for (const auto& u : field_units(ctx))
            if (rest.degree() > 0)
                strip(u);
    }
    if (rest.degree() > 0)
        throw MathError(ErrorCode::unsplit_denominator, "denominator has a factor without roots in the field");

    for (const auto& [a, k] : found) {
        P1Point p = P1Point::finite(a);
        LaurentSeries s = laurent_at(f, p, -1);
        std::vector<FieldElement> cs(static_cast<size_t>(k));
        for (long j = 1; j <= k; ++j)
            cs[static_cast<size_t>(j - 1)] = s.coeff(-j);
        out.parts.emplace_back(p, std::move(cs));
    }
    return out;
}

}  // namespace logconn
