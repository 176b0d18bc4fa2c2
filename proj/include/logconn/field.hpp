#pragma once

// Exact arithmetic in the cyclotomic field Q(zeta_N), power basis mod Phi_N.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "logconn/error.hpp"
#include "logconn/rational.hpp"

namespace logconn {

namespace detail {

// Dense polynomials over Q, ascending coefficients, no trailing zeros.
using QPoly = std::vector<Rational>;

inline void trim(QPoly& p)
{
    while (!p.empty() && p.back().is_zero())
        p.pop_back();
}

inline QPoly qpoly_sub(const QPoly& a, const QPoly& b)
{
    QPoly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    trim(r);
    return r;
}

inline QPoly qpoly_mul(const QPoly& a, const QPoly& b)
{
    if (a.empty() || b.empty())
        return {};
    QPoly r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero())
            continue;
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] += a[i] * b[j];
    }
    trim(r);
    return r;
}

inline std::pair<QPoly, QPoly> qpoly_divmod(QPoly a, const QPoly& b)
{
    if (b.empty())
        throw MathError(ErrorCode::division_by_zero, "polynomial division by zero");
    trim(a);
    if (a.size() < b.size())
        return {QPoly{}, a};
    QPoly q(a.size() - b.size() + 1);
    const Rational& lead = b.back();
    for (size_t k = q.size(); k-- > 0;) {
        Rational c = a[k + b.size() - 1] / lead;
        q[k] = c;
        if (c.is_zero())
            continue;
        for (size_t j = 0; j < b.size(); ++j)
            a[k + j] -= c * b[j];
    }
    trim(a);
    trim(q);
    return {q, a};
}

inline QPoly cyclotomic_polynomial(unsigned n, std::map<unsigned, QPoly>& memo)
{
    if (auto it = memo.find(n); it != memo.end())
        return it->second;
    QPoly p(n + 1);
    p[0] = Rational(-1);
    p[n] = Rational(1);
    for (unsigned d = 1; d < n; ++d) {
        if (n % d == 0)
            p = qpoly_divmod(p, cyclotomic_polynomial(d, memo)).first;
    }
    memo[n] = p;
    return p;
}

}  // namespace detail

/// The field Q(zeta_N): order N, modulus Phi_N (monic, ascending
/// coefficients), degree phi(N), and the reduced coordinates of zeta^k.
class CycloField {
public:
    unsigned order() const { return order_; }
    unsigned degree() const { return degree_; }
    const std::vector<Rational>& modulus() const { return modulus_; }

    /// Reduced power-basis coordinates of zeta^k (k taken mod N).
    const std::vector<Rational>& zeta_power(long k) const
    {
        long n = static_cast<long>(order_);
        return powers_[static_cast<size_t>(((k % n) + n) % n)];
    }

    static std::shared_ptr<const CycloField> make(unsigned order)
    {
        if (order == 0)
            throw MathError(ErrorCode::invalid_argument, "field order must be positive");
        static std::mutex mu;
        static std::map<unsigned, std::shared_ptr<const CycloField>> cache;
        static std::map<unsigned, detail::QPoly> memo;
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(order); it != cache.end())
            return it->second;
        auto f = std::shared_ptr<CycloField>(new CycloField());
        f->order_ = order;
        f->modulus_ = detail::cyclotomic_polynomial(order, memo);
        f->degree_ = static_cast<unsigned>(f->modulus_.size() - 1);
        f->build_powers();
        cache[order] = f;
        return f;
    }

private:
    CycloField() = default;

    void build_powers()
    {
        std::vector<Rational> cur(degree_);
        cur[0] = Rational(1);
        powers_.reserve(order_);
        for (unsigned k = 0; k < order_; ++k) {
            powers_.push_back(cur);
            // multiply by x, then reduce the degree-phi term with the monic modulus
            Rational top = cur.back();
            for (unsigned i = degree_ - 1; i > 0; --i)
                cur[i] = cur[i - 1];
            cur[0] = Rational(0);
            if (!top.is_zero()) {
                for (unsigned i = 0; i < degree_; ++i)
                    cur[i] -= top * modulus_[i];
            }
        }
    }

    unsigned order_ = 1;
    unsigned degree_ = 1;
    std::vector<Rational> modulus_;
    std::vector<std::vector<Rational>> powers_;
};

using FieldPtr = std::shared_ptr<const CycloField>;

inline FieldPtr field_make(unsigned order) { return CycloField::make(order); }

/// Element of Q(zeta_N). An element without a context is a plain rational
/// and adopts the context of whatever it is combined with.
class FieldElement {
public:
    FieldElement() = default;
    FieldElement(long value) : FieldElement(Rational(value)) {}
    FieldElement(const Rational& q)
    {
        if (!q.is_zero())
            c_.push_back(q);
    }
    FieldElement(FieldPtr ctx, const Rational& q) : ctx_(std::move(ctx)), c_(ctx_->degree())
    {
        c_[0] = q;
    }
    /// Arbitrary coordinate vector in powers of zeta; reduced mod Phi_N.
    FieldElement(FieldPtr ctx, const std::vector<Rational>& coords) : ctx_(std::move(ctx)), c_(ctx_->degree())
    {
        for (size_t k = 0; k < coords.size(); ++k)
            add_scaled_power(coords[k], static_cast<long>(k));
    }

    static FieldElement zeta(const FieldPtr& ctx, long k = 1)
    {
        FieldElement e;
        e.ctx_ = ctx;
        e.c_ = ctx->zeta_power(k);
        return e;
    }

    const FieldPtr& context() const { return ctx_; }
    unsigned order() const { return ctx_ ? ctx_->order() : 1; }

    /// Power-basis coordinates in the given context (length phi(N)).
    std::vector<Rational> coords_in(const FieldPtr& ctx) const
    {
        if (ctx_) {
            check_same(ctx_, ctx);
            return c_;
        }
        std::vector<Rational> out(ctx ? ctx->degree() : 1);
        if (!c_.empty())
            out[0] = c_[0];
        return out;
    }
    std::vector<Rational> coords() const { return coords_in(ctx_); }

    bool is_zero() const
    {
        return std::all_of(c_.begin(), c_.end(), [](const Rational& q) { return q.is_zero(); });
    }
    bool is_rational() const
    {
        return std::all_of(c_.begin() + (c_.empty() ? 0 : 1), c_.end(),
                           [](const Rational& q) { return q.is_zero(); });
    }
    bool is_one() const { return is_rational() && rational_part().is_one(); }
    /// Coefficient of zeta^0.
    Rational rational_part() const { return c_.empty() ? Rational(0) : c_[0]; }

    /// The same value, attached to ctx.
    FieldElement in(const FieldPtr& ctx) const
    {
        if (!ctx || ctx_)
            return (check_same(ctx_, ctx), *this);
        return FieldElement(ctx, rational_part());
    }

    FieldElement operator-() const
    {
        FieldElement r = *this;
        for (auto& q : r.c_) q = -q;
        return r;
    }

    FieldElement& operator+=(const FieldElement& o) { return *this = combine(*this, o, +1); }
    FieldElement& operator-=(const FieldElement& o) { return *this = combine(*this, o, -1); }
    FieldElement& operator*=(const FieldElement& o) { return *this = multiply(*this, o); }
    FieldElement& operator/=(const FieldElement& o) { return *this = multiply(*this, o.inverse()); }

    friend FieldElement operator+(const FieldElement& a, const FieldElement& b) { return combine(a, b, +1); }
    friend FieldElement operator-(const FieldElement& a, const FieldElement& b) { return combine(a, b, -1); }
    friend FieldElement operator*(const FieldElement& a, const FieldElement& b) { return multiply(a, b); }
    friend FieldElement operator/(const FieldElement& a, const FieldElement& b) { return multiply(a, b.inverse()); }

    friend bool operator==(const FieldElement& a, const FieldElement& b)
    {
        if (a.ctx_ && b.ctx_) {
            check_same(a.ctx_, b.ctx_);
            return a.c_ == b.c_;
        }
        if (!a.is_rational() || !b.is_rational())
            return false;
        return a.rational_part() == b.rational_part();
    }

    /// Multiplicative inverse via the extended Euclidean algorithm mod Phi_N.
    FieldElement inverse() const
    {
        if (is_zero())
            throw MathError(ErrorCode::division_by_zero, "field element is zero");
        if (is_rational()) {
            FieldElement r = *this;
            r.c_[0] = c_[0].inverse();
            return r;
        }
        // s*a + t*Phi = g with g a nonzero constant; then a^{-1} = s/g.
        detail::QPoly a = c_;
        detail::trim(a);
        detail::QPoly m = ctx_->modulus();
        detail::QPoly r0 = m, r1 = a, s0{}, s1{Rational(1)};
        while (r1.size() > 1) {
            auto [q, r] = detail::qpoly_divmod(r0, r1);
            detail::QPoly s2 = detail::qpoly_sub(s0, detail::qpoly_mul(q, s1));
            r0 = std::move(r1);
            r1 = std::move(r);
            s0 = std::move(s1);
            s1 = std::move(s2);
        }
        if (r1.empty())
            throw MathError(ErrorCode::division_by_zero, "element not invertible mod Phi_N");
        Rational g = r1[0];
        std::vector<Rational> coords(s1.size());
        for (size_t i = 0; i < s1.size(); ++i)
            coords[i] = s1[i] / g;
        return FieldElement(ctx_, coords);
    }

    FieldElement pow(long e) const
    {
        FieldElement base = e < 0 ? inverse() : *this;
        unsigned long k = e < 0 ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
        FieldElement result(1);
        if (ctx_)
            result = result.in(ctx_);
        while (k) {
            if (k & 1)
                result *= base;
            base *= base;
            k >>= 1;
        }
        return result;
    }

    /// Debug rendering, e.g. "1/2 + 3*zeta^2"; not the canonical printer.
    std::string str() const
    {
        std::ostringstream os;
        bool first = true;
        for (size_t k = 0; k < c_.size(); ++k) {
            if (c_[k].is_zero())
                continue;
            if (!first)
                os << " + ";
            first = false;
            os << c_[k];
            if (k > 0)
                os << "*zeta^" << k;
        }
        if (first)
            os << "0";
        return os.str();
    }

    friend std::ostream& operator<<(std::ostream& os, const FieldElement& e) { return os << e.str(); }

private:
    static void check_same(const FieldPtr& a, const FieldPtr& b)
    {
        if (a && b && a->order() != b->order())
            throw MathError(ErrorCode::context_mismatch,
                            "Q(zeta_" + std::to_string(a->order()) + ") vs Q(zeta_" +
                                std::to_string(b->order()) + ")");
    }

    static FieldPtr common(const FieldElement& a, const FieldElement& b)
    {
        check_same(a.ctx_, b.ctx_);
        return a.ctx_ ? a.ctx_ : b.ctx_;
    }

    void add_scaled_power(const Rational& s, long k)
    {
        if (s.is_zero())
            return;
        const auto& p = ctx_->zeta_power(k);
        for (size_t i = 0; i < c_.size(); ++i)
            if (!p[i].is_zero())
                c_[i] += s * p[i];
    }

    static FieldElement combine(const FieldElement& a, const FieldElement& b, int sign)
    {
        FieldPtr ctx = common(a, b);
        if (!ctx) {
            Rational v = sign > 0 ? a.rational_part() + b.rational_part() : a.rational_part() - b.rational_part();
            return FieldElement(v);
        }
        FieldElement r = a.in(ctx);
        std::vector<Rational> bc = b.coords_in(ctx);
        for (size_t i = 0; i < r.c_.size(); ++i) {
            if (sign > 0)
                r.c_[i] += bc[i];
            else
                r.c_[i] -= bc[i];
        }
        return r;
    }

    static FieldElement multiply(const FieldElement& a, const FieldElement& b)
    {
        FieldPtr ctx = common(a, b);
        if (a.is_rational() || b.is_rational()) {
            const FieldElement& scalar = a.is_rational() ? a : b;
            const FieldElement& other = a.is_rational() ? b : a;
            Rational s = scalar.rational_part();
            FieldElement r = ctx ? other.in(ctx) : other;
            if (s.is_zero()) {
                for (auto& q : r.c_) q = Rational(0);
                if (!ctx)
                    r.c_.clear();
                return r;
            }
            for (auto& q : r.c_) q *= s;
            return r;
        }
        const std::vector<Rational>& x = a.c_;
        const std::vector<Rational>& y = b.c_;
        std::vector<Rational> prod(x.size() + y.size() - 1);
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i].is_zero())
                continue;
            for (size_t j = 0; j < y.size(); ++j)
                if (!y[j].is_zero())
                    prod[i + j] += x[i] * y[j];
        }
        return FieldElement(ctx, prod);
    }

    FieldPtr ctx_;
    std::vector<Rational> c_;
};

/// zeta_n^m as an element of ctx; requires n | N.
inline FieldElement root_of_unity(const FieldPtr& ctx, unsigned n, long m)
{
    if (n == 0 || ctx->order() % n != 0)
        throw MathError(ErrorCode::order_not_dividing,
                        std::to_string(n) + " does not divide " + std::to_string(ctx->order()));
    return FieldElement::zeta(ctx, m * static_cast<long>(ctx->order() / n));
}

/// All roots of unity of Q(zeta_N): +-zeta^j, in a fixed order.
inline std::vector<FieldElement> field_units(const FieldPtr& ctx)
{
    std::vector<FieldElement> out;
    unsigned n = ctx ? ctx->order() : 1;
    for (int sign : {1, -1}) {
        for (unsigned j = 0; j < n; ++j) {
            FieldElement u = ctx ? FieldElement::zeta(ctx, j) : FieldElement(1);
            out.push_back(sign > 0 ? u : -u);
        }
    }
    return out;
}

/// Some r with r^n = c, searched among (root of unity) * (rational n-th root).
/// Roots outside that shape are reported as absent.
inline std::optional<FieldElement> nth_root_scalar(const FieldElement& c, unsigned n)
{
    if (c.is_zero())
        throw MathError(ErrorCode::invalid_argument, "nth_root_scalar of zero");
    if (n == 0)
        throw MathError(ErrorCode::invalid_argument, "root index must be positive");
    const FieldPtr& ctx = c.context();
    std::vector<FieldElement> units = field_units(ctx);
    for (const FieldElement& u : units) {
        FieldElement q = c / u;
        if (!q.is_rational() || q.rational_part().sign() <= 0)
            continue;
        std::optional<Rational> s = q.rational_part().nth_root(n);
        if (!s)
            return std::nullopt;
        for (const FieldElement& v : units) {
            if (v.pow(n) == u)
                return v * FieldElement(*s);
        }
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace logconn
