#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logconn/matrix.hpp"
#include "logconn/ratfun.hpp"

namespace logconn {

using FMatrix = Matrix<FieldElement>;
using RMatrix = Matrix<RatFun>;

/// The split bundle O(d_1) + ... + O(d_r). The frame on the w = 1/z chart is
/// e_w = e_z * diag(z^{d_i}), so a section with z-coordinates u has
/// w-coordinates z^{-d_i} u_i.
struct SplitBundle {
    std::vector<long> twists;

    size_t rank() const { return twists.size(); }
    long degree() const { return std::accumulate(twists.begin(), twists.end(), 0L); }

    /// Isomorphism class: sorted twist multiset.
    std::vector<long> sorted_twists() const
    {
        std::vector<long> t = twists;
        std::sort(t.begin(), t.end());
        return t;
    }

    friend bool operator==(const SplitBundle&, const SplitBundle&) = default;
};

/// d + A(z) dz on the z-chart, with its declared singular points.
struct LogConnection {
    SplitBundle bundle;
    RMatrix matrix;
    std::vector<P1Point> singular_set;

    size_t rank() const { return bundle.rank(); }
};

struct ResidueData {
    P1Point point;
    FMatrix matrix;
};

struct ValidationReport {
    bool ok = true;
    std::string message;

    explicit operator bool() const { return ok; }
};

// ---------------------------------------------------------------------------
// small matrix helpers

inline RMatrix to_ratfun(const FMatrix& m)
{
    return m.map([](const FieldElement& x) { return RatFun(x); });
}

inline Poly common_denominator(const RMatrix& m)
{
    Poly l(FieldElement(1));
    for (size_t i = 0; i < m.rows(); ++i)
        for (size_t j = 0; j < m.cols(); ++j) {
            const Poly& d = m(i, j).den();
            if (d.degree() <= 0 || divmod(l, d).second.is_zero())
                continue;
            l = divmod(l * d, gcd(l, d)).first;
        }
    return l;
}

/// Numerators of left * m * right over the common denominator of m.
inline std::pair<Matrix<Poly>, Poly> constant_sandwich_numerators(const FMatrix& left, const RMatrix& m,
                                                                  const FMatrix& right)
{
    Poly l = common_denominator(m);
    Matrix<Poly> num(m.rows(), m.cols(), Poly());
    for (size_t i = 0; i < m.rows(); ++i)
        for (size_t j = 0; j < m.cols(); ++j)
            if (!m(i, j).is_zero())
                num(i, j) = divmod(l, m(i, j).den()).first * m(i, j).num();
    Matrix<Poly> mid(m.rows(), right.cols(), Poly());
    for (size_t i = 0; i < m.rows(); ++i)
        for (size_t k = 0; k < m.cols(); ++k) {
            if (num(i, k).is_zero())
                continue;
            for (size_t j = 0; j < right.cols(); ++j)
                if (!right(k, j).is_zero())
                    mid(i, j) = mid(i, j) + right(k, j) * num(i, k);
        }
    Matrix<Poly> out(left.rows(), right.cols(), Poly());
    for (size_t i = 0; i < left.rows(); ++i)
        for (size_t j = 0; j < right.cols(); ++j)
            for (size_t k = 0; k < m.rows(); ++k)
                if (!left(i, k).is_zero() && !mid(k, j).is_zero())
                    out(i, j) = out(i, j) + left(i, k) * mid(k, j);
    return {out, l};
}

/// left * m * right with constant outer factors, summed over one common
/// denominator so each entry is reduced once.
inline RMatrix constant_sandwich(const FMatrix& left, const RMatrix& m, const FMatrix& right)
{
    auto [num, l] = constant_sandwich_numerators(left, m, right);
    RMatrix out(num.rows(), num.cols());
    for (size_t i = 0; i < num.rows(); ++i)
        for (size_t j = 0; j < num.cols(); ++j)
            if (!num(i, j).is_zero())
                out(i, j) = RatFun(num(i, j), l);
    return out;
}

/// Characteristic polynomial det(x I - M) by Faddeev-LeVerrier.
inline Poly charpoly(const FMatrix& m)
{
    size_t n = m.rows();
    std::vector<FieldElement> c(n + 1);
    c[n] = FieldElement(1);
    FMatrix mk(n, n);
    FMatrix id = FMatrix::identity(n);
    for (size_t k = 1; k <= n; ++k) {
        mk = m * mk + c[n - k + 1] * id;
        FieldElement t = (m * mk).trace();
        c[n - k] = -t / FieldElement(static_cast<long>(k));
    }
    return Poly(std::move(c));
}

/// Dimension of the eigenspace of M for eigenvalue e.
inline size_t eigenspace_dim(const FMatrix& m, const FieldElement& e)
{
    return m.rows() - rank(m - e * FMatrix::identity(m.rows()));
}

/// True when M is diagonalizable with exactly the given eigenvalue multiset.
inline bool diagonalizable_with_spectrum(const FMatrix& m, const std::vector<FieldElement>& spectrum)
{
    if (spectrum.size() != m.rows())
        return false;
    Poly expected(FieldElement(1));
    for (const auto& e : spectrum)
        expected = expected * Poly::linear(e);
    if (!(charpoly(m) == expected))
        return false;
    std::vector<FieldElement> distinct;
    for (const auto& e : spectrum)
        if (std::find(distinct.begin(), distinct.end(), e) == distinct.end())
            distinct.push_back(e);
    size_t total = 0;
    for (const auto& e : distinct)
        total += eigenspace_dim(m, e);
    return total == m.rows();
}

// ---------------------------------------------------------------------------
// charts and validity

/// Connection matrix on the w-chart, as rational functions of w:
/// (A_w)_ij = w^{d_i - d_j} A_ij(1/w) (-1/w^2) - delta_ij d_i / w.
inline RMatrix w_chart_matrix(const SplitBundle& b, const RMatrix& a)
{
    size_t r = b.rank();
    RMatrix out(r, r);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j) {
            RatFun e;
            if (!a(i, j).is_zero())
                e = a(i, j).invert_variable(FieldElement(-1), b.twists[i] - b.twists[j] - 2);
            if (i == j && b.twists[i] != 0)
                e -= RatFun::monomial(FieldElement(b.twists[i]), -1);
            out(i, j) = e;
        }
    return out;
}

inline RMatrix w_chart_matrix(const LogConnection& c) { return w_chart_matrix(c.bundle, c.matrix); }

namespace detail {

/// Divides out (z - p) for every listed finite p as often as possible;
/// `orders` receives the multiplicities.
inline Poly strip_points(Poly p, const std::vector<P1Point>& pts, std::vector<long>* orders = nullptr)
{
    if (orders)
        orders->assign(pts.size(), 0);
    for (size_t k = 0; k < pts.size(); ++k) {
        if (pts[k].is_infinity())
            continue;
        Poly lin = Poly::linear(pts[k].value);
        while (p.degree() > 0) {
            auto [q, r] = divmod(p, lin);
            if (!r.is_zero())
                break;
            p = std::move(q);
            if (orders)
                ++(*orders)[k];
        }
    }
    return p;
}

inline std::string point_str(const P1Point& p)
{
    std::ostringstream os;
    os << p;
    return os.str();
}

}  // namespace detail

/// Checks simple poles only at declared points, in both charts.
inline ValidationReport conn_validate(const LogConnection& c)
{
    size_t r = c.bundle.rank();
    if (r == 0)
        return {false, "bundle has rank 0"};
    if (c.matrix.rows() != r || c.matrix.cols() != r)
        return {false, "matrix shape does not match bundle rank"};
    for (size_t i = 0; i < c.singular_set.size(); ++i)
        for (size_t j = i + 1; j < c.singular_set.size(); ++j)
            if (c.singular_set[i] == c.singular_set[j])
                return {false, "singular set lists " + detail::point_str(c.singular_set[i]) + " twice"};
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j) {
            const RatFun& f = c.matrix(i, j);
            if (f.is_polynomial())
                continue;
            std::vector<long> orders;
            Poly rest = detail::strip_points(f.den(), c.singular_set, &orders);
            std::string at = "entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
            for (size_t k = 0; k < orders.size(); ++k)
                if (orders[k] > 1)
                    return {false, at + ": pole of order " + std::to_string(orders[k]) + " at " +
                                       detail::point_str(c.singular_set[k])};
            if (rest.degree() > 0)
                return {false, at + ": pole outside the singular set"};
        }
    bool inf_singular = contains(c.singular_set, P1Point::infinity());
    RMatrix aw = w_chart_matrix(c);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j) {
            long v = aw(i, j).valuation_at_zero();
            if (aw(i, j).is_zero() || v >= 0)
                continue;
            std::string at = "entry (" + std::to_string(i) + "," + std::to_string(j) + ")";
            if (v < -1)
                return {false, at + ": pole of order " + std::to_string(-v) + " at inf"};
            if (!inf_singular)
                return {false, at + ": pole at inf, which is not in the singular set"};
        }
    return {};
}

inline void require_valid(const LogConnection& c, const char* where)
{
    ValidationReport v = conn_validate(c);
    if (!v)
        throw MathError(ErrorCode::invalid_connection, std::string(where) + ": " + v.message);
}

/// Residue matrix at p in the chart-correct frame; zero when p is not declared singular.
inline ResidueData residue_at(const LogConnection& c, const P1Point& p)
{
    size_t r = c.rank();
    ResidueData out{p, FMatrix(r, r)};
    if (!contains(c.singular_set, p))
        return out;
    if (p.is_infinity()) {
        RMatrix aw = w_chart_matrix(c);
        P1Point w0 = P1Point::finite(FieldElement(0));
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < r; ++j)
                out.matrix(i, j) = residue_form(aw(i, j), w0);
        return out;
    }
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            out.matrix(i, j) = residue_form(c.matrix(i, j), p);
    return out;
}

/// deg E + sum of traces of residues over the singular set and infinity.
/// The infinity term is always read off the w-chart, whether or not it is declared.
inline FieldElement fuchs_check(const LogConnection& c)
{
    FieldElement defect(c.bundle.degree());
    RatFun tr;
    for (size_t i = 0; i < c.rank(); ++i)
        tr += c.matrix(i, i);
    for (const auto& p : c.singular_set)
        if (!p.is_infinity())
            defect += residue_form(tr, p);
    RMatrix aw = w_chart_matrix(c);
    RatFun trw;
    for (size_t i = 0; i < c.rank(); ++i)
        trw += aw(i, i);
    defect += residue_form(trw, P1Point::finite(FieldElement(0)));
    return defect;
}

// ---------------------------------------------------------------------------
// audit hook: every operation that returns a connection reports it here

using AuditHook = std::function<void(const LogConnection&, std::string_view op)>;

namespace detail {
struct AuditState {
    std::mutex mu;
    std::shared_ptr<const AuditHook> hook;
};
inline AuditState& audit_state()
{
    static AuditState s;
    return s;
}
}  // namespace detail

inline void set_audit_hook(AuditHook hook)
{
    auto& s = detail::audit_state();
    std::lock_guard<std::mutex> lock(s.mu);
    s.hook = hook ? std::make_shared<const AuditHook>(std::move(hook)) : nullptr;
}

/// Validates, asserts the degree relation, then notifies the hook.
inline LogConnection audited(LogConnection c, std::string_view op)
{
    require_valid(c, std::string(op).c_str());
    FieldElement defect = fuchs_check(c);
    if (!defect.is_zero())
        throw MathError(ErrorCode::invalid_connection,
                        std::string(op) + ": nonzero degree defect " + defect.str());
    std::shared_ptr<const AuditHook> hook;
    {
        auto& s = detail::audit_state();
        std::lock_guard<std::mutex> lock(s.mu);
        hook = s.hook;
    }
    if (hook)
        (*hook)(c, op);
    return c;
}

// ---------------------------------------------------------------------------
// constructions

inline LogConnection make_connection(SplitBundle b, RMatrix a, std::vector<P1Point> sing)
{
    return audited(LogConnection{std::move(b), std::move(a), std::move(sing)}, "make_connection");
}

/// Rank-1 connection on the determinant line.
inline LogConnection det_connection(const LogConnection& c)
{
    RatFun tr;
    for (size_t i = 0; i < c.rank(); ++i)
        tr += c.matrix(i, i);
    RMatrix m(1, 1);
    m(0, 0) = tr;
    return audited(LogConnection{SplitBundle{{c.bundle.degree()}}, m, c.singular_set}, "det_connection");
}

inline std::vector<P1Point> union_points(std::vector<P1Point> a, const std::vector<P1Point>& b)
{
    for (const auto& p : b)
        if (!contains(a, p))
            a.push_back(p);
    return a;
}

inline LogConnection direct_sum(const LogConnection& a, const LogConnection& b)
{
    size_t ra = a.rank(), rb = b.rank();
    RMatrix m(ra + rb, ra + rb);
    m.set_block(0, 0, a.matrix);
    m.set_block(ra, ra, b.matrix);
    SplitBundle bundle = a.bundle;
    bundle.twists.insert(bundle.twists.end(), b.bundle.twists.begin(), b.bundle.twists.end());
    return audited(LogConnection{bundle, m, union_points(a.singular_set, b.singular_set)}, "direct_sum");
}

inline LogConnection tensor_line(const LogConnection& c, const LogConnection& line)
{
    if (line.rank() != 1)
        throw MathError(ErrorCode::invalid_argument, "tensor_line needs a rank-1 connection");
    RMatrix m = c.matrix;
    for (size_t i = 0; i < c.rank(); ++i)
        m(i, i) += line.matrix(0, 0);
    SplitBundle bundle = c.bundle;
    for (auto& d : bundle.twists)
        d += line.bundle.twists[0];
    return audited(LogConnection{bundle, m, union_points(c.singular_set, line.singular_set)}, "tensor_line");
}

/// Frame change e' = e g: the new matrix is g^{-1} A g + g^{-1} dg/dz.
/// Without modification points, g must be an isomorphism of the named split
/// bundles (holomorphic and invertible in both charts). Listed modification
/// points may be finite points or infinity; there g may degenerate, and those
/// points join the singular set.
inline LogConnection gauge_transform(const LogConnection& c, const RMatrix& g, const SplitBundle& target,
                                     const std::vector<P1Point>& modification = {})
{
    size_t r = c.rank();
    if (g.rows() != r || g.cols() != r || target.rank() != r)
        throw MathError(ErrorCode::not_an_isomorphism, "gauge shape does not match rank");
    auto fail = [](const std::string& why) { throw MathError(ErrorCode::not_an_isomorphism, why); };

    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            if (detail::strip_points(g(i, j).den(), modification).degree() > 0)
                fail("gauge entry has a pole on the z-chart");
    RatFun det = determinant(g);
    if (det.is_zero())
        fail("gauge is not invertible");
    if (detail::strip_points(det.num(), modification).degree() > 0)
        fail("gauge determinant vanishes on the z-chart");
    if (detail::strip_points(det.den(), modification).degree() > 0)
        fail("gauge determinant has a pole on the z-chart");

    if (!contains(modification, P1Point::infinity())) {
        // w-chart matrix: diag(z^{-d}) g diag(z^{d'}) as a function of w
        RMatrix gw(r, r);
        FMatrix gw0(r, r);
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < r; ++j) {
                if (g(i, j).is_zero())
                    continue;
                gw(i, j) = g(i, j).compose_inverse() *
                           RatFun::monomial(FieldElement(1), c.bundle.twists[i] - target.twists[j]);
                if (gw(i, j).valuation_at_zero() < 0)
                    fail("gauge has a pole at infinity for these twists");
                gw0(i, j) = *gw(i, j).eval(FieldElement(0));
            }
        if (determinant(gw0).is_zero())
            fail("gauge is not invertible at infinity");
    }

    RMatrix ginv = inverse_or_throw(g);
    RMatrix dg = g.map([](const RatFun& f) { return f.derivative(); });
    RMatrix a2 = ginv * c.matrix * g + ginv * dg;
    return audited(LogConnection{target, a2, union_points(c.singular_set, modification)}, "gauge_transform");
}

}  // namespace logconn
