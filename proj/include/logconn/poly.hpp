#pragma once

#include <algorithm>
#include <ostream>
#include <utility>
#include <vector>

#include "logconn/field.hpp"

namespace logconn {

/// Univariate polynomial over Q(zeta_N); ascending coefficients, no trailing zeros.
class Poly {
public:
    Poly() = default;
    Poly(long c) : Poly(FieldElement(c)) {}
    Poly(const FieldElement& c)
    {
        if (!c.is_zero())
            c_.push_back(c);
    }
    explicit Poly(std::vector<FieldElement> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Poly monomial(const FieldElement& c, size_t k)
    {
        if (c.is_zero())
            return {};
        std::vector<FieldElement> v(k + 1);
        v[k] = c;
        return Poly(std::move(v));
    }
    static Poly x() { return monomial(FieldElement(1), 1); }
    /// x - a
    static Poly linear(const FieldElement& a) { return Poly(std::vector<FieldElement>{-a, FieldElement(1)}); }

    const std::vector<FieldElement>& coeffs() const { return c_; }
    long degree() const { return static_cast<long>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    bool is_constant() const { return c_.size() <= 1; }
    FieldElement coeff(long k) const
    {
        return (k < 0 || k >= static_cast<long>(c_.size())) ? FieldElement() : c_[static_cast<size_t>(k)];
    }
    FieldElement lead() const { return c_.empty() ? FieldElement() : c_.back(); }

    /// Index of the lowest nonzero coefficient (0 for the zero polynomial).
    long valuation() const
    {
        for (size_t k = 0; k < c_.size(); ++k)
            if (!c_[k].is_zero())
                return static_cast<long>(k);
        return 0;
    }

    /// First non-null field context among the coefficients.
    FieldPtr context() const
    {
        for (const auto& c : c_)
            if (c.context())
                return c.context();
        return nullptr;
    }

    Poly operator-() const
    {
        Poly r = *this;
        for (auto& c : r.c_) c = -c;
        return r;
    }
    Poly& operator+=(const Poly& o)
    {
        if (o.c_.size() > c_.size())
            c_.resize(o.c_.size());
        for (size_t k = 0; k < o.c_.size(); ++k)
            c_[k] += o.c_[k];
        trim();
        return *this;
    }
    Poly& operator-=(const Poly& o)
    {
        if (o.c_.size() > c_.size())
            c_.resize(o.c_.size());
        for (size_t k = 0; k < o.c_.size(); ++k)
            c_[k] -= o.c_[k];
        trim();
        return *this;
    }
    Poly& operator*=(const Poly& o) { return *this = *this * o; }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b)
    {
        if (a.is_zero() || b.is_zero())
            return {};
        std::vector<FieldElement> r(a.c_.size() + b.c_.size() - 1);
        for (size_t i = 0; i < a.c_.size(); ++i) {
            if (a.c_[i].is_zero())
                continue;
            for (size_t j = 0; j < b.c_.size(); ++j)
                if (!b.c_[j].is_zero())
                    r[i + j] += a.c_[i] * b.c_[j];
        }
        return Poly(std::move(r));
    }
    friend Poly operator*(const FieldElement& s, const Poly& p)
    {
        if (s.is_zero())
            return {};
        Poly r = p;
        for (auto& c : r.c_) c = s * c;
        return r;
    }

    friend bool operator==(const Poly& a, const Poly& b)
    {
        if (a.c_.size() != b.c_.size())
            return false;
        for (size_t k = 0; k < a.c_.size(); ++k)
            if (!(a.c_[k] == b.c_[k]))
                return false;
        return true;
    }

    /// Quotient and remainder; b must be nonzero.
    friend std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b)
    {
        if (b.is_zero())
            throw MathError(ErrorCode::division_by_zero, "polynomial division by zero");
        if (a.degree() < b.degree())
            return {Poly(), a};
        std::vector<FieldElement> r = a.c_;
        std::vector<FieldElement> q(a.c_.size() - b.c_.size() + 1);
        FieldElement inv_lead = b.lead().inverse();
        size_t bs = b.c_.size();
        for (size_t k = q.size(); k-- > 0;) {
            FieldElement c = r[k + bs - 1] * inv_lead;
            if (c.is_zero())
                continue;
            q[k] = c;
            for (size_t j = 0; j < bs; ++j)
                if (!b.c_[j].is_zero())
                    r[k + j] -= c * b.c_[j];
        }
        r.resize(bs - 1);
        return {Poly(std::move(q)), Poly(std::move(r))};
    }

    Poly monic() const
    {
        if (is_zero() || lead().is_one())
            return *this;
        return lead().inverse() * *this;
    }

    friend Poly gcd(Poly a, Poly b)
    {
        // monic remainders keep the coefficient sizes in check
        a = a.monic();
        b = b.monic();
        while (!b.is_zero()) {
            Poly r = divmod(a, b).second.monic();
            a = std::move(b);
            b = std::move(r);
        }
        return a;
    }

    Poly derivative() const
    {
        if (c_.size() <= 1)
            return {};
        std::vector<FieldElement> d(c_.size() - 1);
        for (size_t k = 1; k < c_.size(); ++k)
            d[k - 1] = FieldElement(static_cast<long>(k)) * c_[k];
        return Poly(std::move(d));
    }

    FieldElement eval(const FieldElement& x) const
    {
        FieldElement acc;
        for (size_t k = c_.size(); k-- > 0;)
            acc = acc * x + c_[k];
        return acc;
    }

    /// p(x^n)
    Poly compose_power(unsigned n) const
    {
        if (is_zero())
            return {};
        std::vector<FieldElement> r(static_cast<size_t>(degree()) * n + 1);
        for (size_t k = 0; k < c_.size(); ++k)
            r[k * n] = c_[k];
        return Poly(std::move(r));
    }

    /// p(s*x)
    Poly scale(const FieldElement& s) const
    {
        Poly r = *this;
        FieldElement pw(1);
        for (auto& c : r.c_) {
            c = c * pw;
            pw = pw * s;
        }
        r.trim();
        return r;
    }

    /// p(x + a), by repeated synthetic division.
    Poly shift(const FieldElement& a) const
    {
        if (a.is_zero() || c_.size() <= 1)
            return *this;
        std::vector<FieldElement> r = c_;
        size_t n = r.size();
        for (size_t i = 0; i < n; ++i)
            for (size_t j = n - 1; j > i; --j)
                r[j - 1] += a * r[j];
        return Poly(std::move(r));
    }

    /// x^d p(1/x); requires d >= degree.
    Poly reverse(long d) const
    {
        if (is_zero())
            return {};
        std::vector<FieldElement> r(static_cast<size_t>(d) + 1);
        for (size_t k = 0; k < c_.size(); ++k)
            r[static_cast<size_t>(d) - k] = c_[k];
        return Poly(std::move(r));
    }

    /// p / x^k, requires x^k | p.
    Poly shift_down(long k) const
    {
        if (k <= 0 || is_zero())
            return *this;
        return Poly(std::vector<FieldElement>(c_.begin() + k, c_.end()));
    }

    friend std::ostream& operator<<(std::ostream& os, const Poly& p)
    {
        os << "(";
        for (size_t k = 0; k < p.c_.size(); ++k)
            os << (k ? ", " : "") << p.c_[k];
        return os << ")";
    }

private:
    void trim()
    {
        while (!c_.empty() && c_.back().is_zero())
            c_.pop_back();
    }

    std::vector<FieldElement> c_;
};

}  // namespace logconn
