#pragma once

// Text form of scalars, rational functions and matrices.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | RATIONAL | 'zeta' ('^' INT)? | 'z' ('^' INT)? | '(' expr ')'
//
// RATIONAL is a run of digits; "3/4" parses as a quotient. Exponents may be
// negative. The printers emit only this grammar, in a canonical form.

#include <cctype>
#include <string>
#include <string_view>

#include <json.hpp>

#include "logconn/connection.hpp"

namespace logconn {

class ParseError : public MathError {
public:
    ParseError(ErrorCode code, size_t position, const std::string& what)
        : MathError(code, "at position " + std::to_string(position) + ": " + what), position_(position), detail_(what)
    {
    }

    size_t position() const noexcept { return position_; }
    /// The message without the code and position prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    size_t position_;
    std::string detail_;
};

namespace detail {

class ExprParser {
public:
    ExprParser(std::string_view text, FieldPtr ctx) : s_(text), ctx_(std::move(ctx)) {}

    RatFun parse()
    {
        RatFun v = expr();
        skip();
        if (pos_ != s_.size())
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    std::string_view s_;
    FieldPtr ctx_;
    size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(ErrorCode::syntax_error, pos_, msg); }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool keyword(std::string_view w)
    {
        skip();
        if (s_.substr(pos_, w.size()) != w)
            return false;
        size_t end = pos_ + w.size();
        if (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
            return false;
        pos_ = end;
        return true;
    }

    mpz_class digits()
    {
        skip();
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (start == pos_)
            fail("expected a number");
        return mpz_class(std::string(s_.substr(start, pos_ - start)));
    }

    long exponent()
    {
        if (!eat('^'))
            return 1;
        bool neg = eat('-');
        size_t at = pos_;
        mpz_class v = digits();
        if (!v.fits_slong_p()) {
            pos_ = at;
            fail("exponent out of range");
        }
        return neg ? -v.get_si() : v.get_si();
    }

    RatFun expr()
    {
        RatFun v = term();
        for (;;) {
            if (eat('+'))
                v += term();
            else if (eat('-'))
                v -= term();
            else
                return v;
        }
    }

    RatFun term()
    {
        RatFun v = factor();
        for (;;) {
            if (eat('*')) {
                v *= factor();
            } else if (eat('/')) {
                skip();
                size_t at = pos_;
                RatFun d = factor();
                if (d.is_zero())
                    throw ParseError(ErrorCode::division_by_zero, at, "zero denominator");
                v /= d;
            } else {
                return v;
            }
        }
    }

    RatFun factor()
    {
        if (eat('-'))
            return -factor();
        if (eat('(')) {
            RatFun v = expr();
            if (!eat(')'))
                fail("expected ')'");
            return v;
        }
        if (keyword("zeta")) {
            if (!ctx_)
                fail("zeta needs a field order");
            return RatFun(FieldElement::zeta(ctx_, exponent()));
        }
        if (keyword("z"))
            return RatFun::monomial(FieldElement(1), exponent());
        skip();
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            return RatFun(FieldElement(Rational(mpq_class(digits()))));
        if (pos_ == s_.size())
            fail("unexpected end of input");
        fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    }
};

/// Appends "c*x" with the sign folded into the joiner; c == 1 is omitted.
inline void append_term(std::string& out, const Rational& c, const std::string& x)
{
    bool neg = c.sign() < 0;
    Rational a = neg ? -c : c;
    if (out.empty())
        out += neg ? "-" : "";
    else
        out += neg ? " - " : " + ";
    if (x.empty())
        out += a.str();
    else if (a == Rational(1))
        out += x;
    else
        out += a.str() + "*" + x;
}

inline std::string power_str(const char* var, long k)
{
    if (k == 0)
        return "";
    if (k == 1)
        return var;
    return std::string(var) + "^" + std::to_string(k);
}

}  // namespace detail

inline RatFun parse_ratfun(std::string_view text, const FieldPtr& ctx)
{
    return detail::ExprParser(text, ctx).parse();
}

inline FieldElement parse_scalar(std::string_view text, const FieldPtr& ctx)
{
    RatFun v = parse_ratfun(text, ctx);
    if (!v.is_constant())
        throw ParseError(ErrorCode::syntax_error, 0, "expected a scalar, got a function of z");
    return v.constant_value();
}

inline std::string print_scalar(const FieldElement& x)
{
    std::string out;
    std::vector<Rational> c = x.coords();
    for (size_t k = 0; k < c.size(); ++k)
        if (!c[k].is_zero())
            detail::append_term(out, c[k], detail::power_str("zeta", static_cast<long>(k)));
    return out.empty() ? "0" : out;
}

inline std::string print_poly(const Poly& p)
{
    std::string out;
    for (long k = 0; k <= p.degree(); ++k) {
        FieldElement c = p.coeff(k);
        if (c.is_zero())
            continue;
        std::string x = detail::power_str("z", k);
        if (c.is_rational()) {
            detail::append_term(out, c.rational_part(), x);
        } else {
            std::string cs = "(" + print_scalar(c) + ")";
            out += out.empty() ? "" : " + ";
            out += x.empty() ? cs : cs + "*" + x;
        }
    }
    return out.empty() ? "0" : out;
}

inline std::string print_ratfun(const RatFun& f)
{
    if (f.is_polynomial()) {
        // a constant denominator is 1 after normalization, but stay exact either way
        if (f.den().coeff(0) == FieldElement(1))
            return print_poly(f.num());
    }
    return "(" + print_poly(f.num()) + ")/(" + print_poly(f.den()) + ")";
}

inline std::string print_point(const P1Point& p) { return p.is_infinity() ? "inf" : print_scalar(p.value); }

inline P1Point parse_point(std::string_view text, const FieldPtr& ctx)
{
    std::string_view t = text;
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front())))
        t.remove_prefix(1);
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back())))
        t.remove_suffix(1);
    if (t == "inf")
        return P1Point::infinity();
    return P1Point::finite(parse_scalar(text, ctx));
}

// ---------------------------------------------------------------------------
// matrices as JSON arrays of arrays of strings

inline nlohmann::ordered_json matrix_json(const FMatrix& m)
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (size_t i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (size_t j = 0; j < m.cols(); ++j)
            row.push_back(print_scalar(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::ordered_json matrix_json(const RMatrix& m)
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (size_t i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (size_t j = 0; j < m.cols(); ++j)
            row.push_back(print_ratfun(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace detail {

template <class T, class J, class F>
Matrix<T> matrix_from_json(const J& j, const char* what, F parse_entry)
{
    if (!j.is_array() || j.empty())
        throw MathError(ErrorCode::invalid_argument, std::string(what) + " must be a nonempty array of rows");
    size_t rows = j.size(), cols = 0;
    for (size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].empty() || (i > 0 && j[i].size() != cols))
            throw MathError(ErrorCode::invalid_argument, std::string(what) + ": row " + std::to_string(i) + " is ragged");
        cols = j[i].size();
    }
    Matrix<T> m(rows, cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t k = 0; k < cols; ++k) {
            const auto& e = j[i][k];
            std::string text = e.is_string() ? e.template get<std::string>() : e.is_number_integer() ? std::to_string(e.template get<long>()) : "";
            if (!e.is_string() && !e.is_number_integer())
                throw MathError(ErrorCode::invalid_argument, std::string(what) + ": entry (" + std::to_string(i) + "," +
                                                                 std::to_string(k) + ") must be a string");
            try {
                m(i, k) = parse_entry(text);
            } catch (const ParseError& err) {
                throw ParseError(err.code(), err.position(),
                                 std::string(what) + " entry (" + std::to_string(i) + "," + std::to_string(k) +
                                     "): " + err.detail());
            }
        }
    return m;
}

}  // namespace detail

template <class J>
FMatrix fmatrix_from_json(const J& j, const FieldPtr& ctx, const char* what = "matrix")
{
    return detail::matrix_from_json<FieldElement>(j, what, [&](const std::string& t) { return parse_scalar(t, ctx); });
}

template <class J>
RMatrix rmatrix_from_json(const J& j, const FieldPtr& ctx, const char* what = "matrix")
{
    return detail::matrix_from_json<RatFun>(j, what, [&](const std::string& t) { return parse_ratfun(t, ctx); });
}

}  // namespace logconn
