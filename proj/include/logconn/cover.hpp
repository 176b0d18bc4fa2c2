#pragma once

// The cyclic cover y -> z = y^n of the projective line, ramified over 0 and
// infinity, with the generator of Z/n acting by y -> zeta_n y.
//
// Equivariant data upstairs is a connection d + B(y) dy on the trivial bundle
// with a constant matrix R, Z/n acting on sections by (g.s)(y) = R^{-1} s(zeta y).
// Invariant sections satisfy s(zeta y) = R s(y); the law making the action
// preserve the connection is zeta B(zeta y) = R B(y) R^{-1}.

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "logconn/connection.hpp"

namespace logconn {

struct CoverDesc {
    unsigned n = 2;
    FieldPtr ctx;

    static CoverDesc make(unsigned n, const FieldPtr& ctx)
    {
        if (n < 2)
            throw MathError(ErrorCode::invalid_argument, "cover degree must be at least 2");
        if (!ctx || ctx->order() % n != 0)
            throw MathError(ErrorCode::order_not_dividing,
                            "cover degree " + std::to_string(n) + " does not divide the field order");
        return CoverDesc{n, ctx};
    }

    /// zeta_n^k
    FieldElement zeta(long k) const { return root_of_unity(ctx, n, k); }
};

struct EquivariantConnection {
    CoverDesc cover;
    LogConnection conn;  ///< on the y-line; all twists 0; singular points avoid 0 and infinity
    FMatrix action;      ///< R
};

/// Weights at one parabolic point, strictly increasing in [0, 1), with the
/// dimension of each graded piece.
struct ParabolicFlag {
    P1Point point;
    std::vector<Rational> weights;
    std::vector<size_t> multiplicities;

    /// Dimensions of the decreasing filtration F_1 > F_2 > ... (F_i carries weights_i and above).
    std::vector<size_t> dimensions() const
    {
        std::vector<size_t> dims(multiplicities.size());
        size_t acc = 0;
        for (size_t k = multiplicities.size(); k-- > 0;) {
            acc += multiplicities[k];
            dims[k] = acc;
        }
        return dims;
    }

    friend bool operator==(const ParabolicFlag& a, const ParabolicFlag& b)
    {
        return a.point == b.point && a.weights == b.weights && a.multiplicities == b.multiplicities;
    }
};

struct ParabolicConnection {
    LogConnection conn;
    std::vector<ParabolicFlag> flags;

    const ParabolicFlag* flag_at(const P1Point& p) const
    {
        for (const auto& f : flags)
            if (f.point == p)
                return &f;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// helpers

namespace detail {

inline std::vector<FieldElement> weight_spectrum(const ParabolicFlag& f)
{
    std::vector<FieldElement> s;
    for (size_t k = 0; k < f.weights.size(); ++k)
        for (size_t j = 0; j < f.multiplicities[k]; ++j)
            s.emplace_back(f.weights[k]);
    return s;
}

inline long mod(long a, long n) { return ((a % n) + n) % n; }

}  // namespace detail

/// Writes f(y) = sum_{m<n} y^m F_m(y^n) and returns F_0..F_{n-1} as functions of z.
inline std::vector<RatFun> split_by_class(const RatFun& f, const CoverDesc& cover)
{
    long n = cover.n;
    std::vector<RatFun> out(static_cast<size_t>(n));
    if (f.is_zero())
        return out;
    Poly num = f.num(), den = f.den();
    auto single_class = [&](const Poly& p) -> long {
        long cls = -1;
        for (long k = 0; k <= p.degree(); ++k) {
            if (p.coeff(k).is_zero())
                continue;
            if (cls < 0)
                cls = k % n;
            else if (k % n != cls)
                return -1;
        }
        return cls;
    };
    long cls = single_class(den);
    if (cls < 0) {
        // multiply through by the conjugates so the denominator becomes a norm
        Poly extra(FieldElement(1));
        for (long s = 1; s < n; ++s)
            extra = extra * den.scale(cover.zeta(s));
        num = num * extra;
        den = den * extra;
        cls = single_class(den);
        if (cls < 0)
            throw MathError(ErrorCode::invalid_argument, "norm is not a polynomial in y^n");
    }
    std::vector<FieldElement> dz;
    for (long k = cls; k <= den.degree(); k += n)
        dz.push_back(den.coeff(k));
    Poly dpoly(dz);
    // numerator exponents e contribute z^{floor((e - cls)/n)} to class (e - cls) mod n
    std::vector<std::vector<FieldElement>> parts(static_cast<size_t>(n));
    bool negative = cls > 0;  // exponents below cls need one factor 1/z
    for (long e = 0; e <= num.degree(); ++e) {
        if (num.coeff(e).is_zero())
            continue;
        long m = e - cls;
        long r = detail::mod(m, n);
        long q = (m - r) / n + (negative ? 1 : 0);
        auto& v = parts[static_cast<size_t>(r)];
        if (static_cast<long>(v.size()) <= q)
            v.resize(static_cast<size_t>(q) + 1);
        v[static_cast<size_t>(q)] += num.coeff(e);
    }
    for (long r = 0; r < n; ++r) {
        Poly p(parts[static_cast<size_t>(r)]);
        if (p.is_zero())
            continue;
        RatFun part(p, dpoly);
        if (negative)
            part = part * RatFun::monomial(FieldElement(1), -1);
        out[static_cast<size_t>(r)] = part;
    }
    return out;
}

/// The function G with f(y) = G(y^n); f must be invariant under y -> zeta y.
inline RatFun descend(const RatFun& f, const CoverDesc& cover)
{
    auto parts = split_by_class(f, cover);
    for (size_t r = 1; r < parts.size(); ++r)
        if (!parts[r].is_zero())
            throw MathError(ErrorCode::not_equivariant, "function is not invariant under the deck group");
    return parts[0];
}

/// Preimages of a point of the z-line.
inline std::vector<P1Point> cover_preimages(const P1Point& p, const CoverDesc& cover)
{
    if (p.is_infinity() || p.value.is_zero())
        return {p};
    auto root = nth_root_scalar(p.value.in(cover.ctx), cover.n);
    if (!root)
        throw MathError(ErrorCode::preimage_not_in_field,
                        "no " + std::to_string(cover.n) + "-th root of " + p.value.str() + " in the field");
    std::vector<P1Point> out;
    for (unsigned s = 0; s < cover.n; ++s)
        out.push_back(P1Point::finite(*root * cover.zeta(s)));
    return out;
}

inline P1Point cover_image(const P1Point& p, const CoverDesc& cover)
{
    if (p.is_infinity())
        return p;
    return P1Point::finite(p.value.pow(cover.n));
}

/// Eigenbasis of a finite-order action: columns of `basis` span the
/// eigenspaces for zeta_n^k, k ascending; labels[j] is k for column j.
struct Isotypic {
    FMatrix basis;
    std::vector<long> labels;

    size_t dim(long k) const { return static_cast<size_t>(std::count(labels.begin(), labels.end(), k)); }
};

inline Isotypic isotypic_decomposition(const FMatrix& action, const CoverDesc& cover)
{
    size_t r = action.rows();
    if (!(action.pow(cover.n) == FMatrix::identity(r)))
        throw MathError(ErrorCode::action_not_semisimple, "R^n is not the identity");
    std::vector<FMatrix> cols;
    Isotypic out;
    for (long k = 0; k < static_cast<long>(cover.n); ++k) {
        for (auto& v : nullspace(action - cover.zeta(k) * FMatrix::identity(r))) {
            cols.push_back(v);
            out.labels.push_back(k);
        }
    }
    if (cols.size() != r)
        throw MathError(ErrorCode::action_not_semisimple, "eigenspaces do not span the fiber");
    out.basis = hstack(cols, r);
    return out;
}

inline ValidationReport equivariant_validate(const EquivariantConnection& e)
{
    const LogConnection& c = e.conn;
    size_t r = c.rank();
    for (long d : c.bundle.twists)
        if (d != 0)
            return {false, "upstairs bundle must be trivial"};
    if (e.action.rows() != r || e.action.cols() != r)
        return {false, "action has the wrong shape"};
    if (!(e.action.pow(e.cover.n) == FMatrix::identity(r)))
        return {false, "R^n is not the identity"};
    for (const auto& p : c.singular_set)
        if (p.is_infinity() || p.value.is_zero())
            return {false, "singular points must avoid 0 and infinity"};
    for (const auto& p : c.singular_set)
        if (!contains(c.singular_set, P1Point::finite(p.value * e.cover.zeta(1))))
            return {false, "singular set is not stable under the deck group"};
    if (auto v = conn_validate(c); !v)
        return v;
    // zeta B(zeta y) R == R B(y), compared by cross-multiplication
    FieldElement zeta = e.cover.zeta(1);
    FMatrix id = FMatrix::identity(r);
    RMatrix rotated = c.matrix.map([&](const RatFun& f) { return f.scale(zeta); });
    auto [lhs, ll] = constant_sandwich_numerators(zeta * id, rotated, e.action);
    auto [rhs, lr] = constant_sandwich_numerators(e.action, c.matrix, id);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            if (!(lhs(i, j) * lr == rhs(i, j) * ll))
                return {false, "equivariance law fails: zeta B(zeta y) != R B(y) R^-1"};
    return {};
}

inline void require_equivariant(const EquivariantConnection& e)
{
    auto v = equivariant_validate(e);
    if (v)
        return;
    if (!(e.action.pow(e.cover.n) == FMatrix::identity(e.action.rows())))
        throw MathError(ErrorCode::action_not_semisimple, v.message);
    throw MathError(ErrorCode::not_equivariant, v.message);
}

/// Checks the parabolic invariants: at each flagged point the residue is
/// diagonalizable with exactly the weights as eigenvalues, with the graded dimensions.
inline ValidationReport parabolic_validate(const ParabolicConnection& p)
{
    if (auto v = conn_validate(p.conn); !v)
        return v;
    for (const auto& f : p.flags) {
        std::string at = "at " + detail::point_str(f.point) + ": ";
        if (!f.point.is_infinity() && !f.point.value.is_zero())
            return {false, at + "parabolic points must be 0 or infinity"};
        if (f.weights.size() != f.multiplicities.size() || f.weights.empty())
            return {false, at + "weights and multiplicities disagree"};
        size_t total = 0;
        for (size_t k = 0; k < f.weights.size(); ++k) {
            if (f.weights[k] < Rational(0) || !(f.weights[k] < Rational(1)))
                return {false, at + "weight outside [0, 1)"};
            if (k > 0 && !(f.weights[k - 1] < f.weights[k]))
                return {false, at + "weights not strictly increasing"};
            if (f.multiplicities[k] == 0)
                return {false, at + "empty graded piece"};
            total += f.multiplicities[k];
        }
        if (total != p.conn.rank())
            return {false, at + "graded dimensions do not add up to the rank"};
        FMatrix res = residue_at(p.conn, f.point).matrix;
        if (!diagonalizable_with_spectrum(res, detail::weight_spectrum(f)))
            return {false, at + "residue does not split the flag with the given weights"};
    }
    return {};
}

// ---------------------------------------------------------------------------
// operations

/// A(z) dz pulled back along z = y^n: n y^{n-1} A(y^n) dy on twists n d.
inline LogConnection pullback(const LogConnection& c, const CoverDesc& cover)
{
    require_valid(c, "pullback");
    RatFun factor = RatFun::monomial(FieldElement(static_cast<long>(cover.n)), cover.n - 1);
    RMatrix m = c.matrix.map([&](const RatFun& f) { return f.is_zero() ? f : f.compose_power(cover.n) * factor; });
    SplitBundle b = c.bundle;
    for (auto& d : b.twists)
        d *= cover.n;
    std::vector<P1Point> sing;
    for (const auto& p : c.singular_set)
        for (const auto& q : cover_preimages(p, cover))
            sing.push_back(q);
    return audited(LogConnection{b, m, sing}, "pullback");
}

inline std::vector<P1Point> downstairs_singular_set(const EquivariantConnection& e)
{
    std::vector<P1Point> sing{P1Point::finite(FieldElement(0)), P1Point::infinity()};
    for (const auto& p : e.conn.singular_set) {
        P1Point q = cover_image(p, e.cover);
        if (!contains(sing, q))
            sing.push_back(q);
    }
    return sing;
}

/// Direct image on the basis y^k e_j (k = 0..n-1, block k of size r).
inline LogConnection pushforward_full(const EquivariantConnection& e)
{
    require_equivariant(e);
    const CoverDesc& cv = e.cover;
    size_t r = e.conn.rank(), n = cv.n;
    RMatrix a(n * r, n * r);
    for (size_t k = 0; k < n; ++k) {
        for (size_t j = 0; j < r; ++j) {
            size_t col = k * r + j;
            a(col, col) += RatFun::monomial(FieldElement(Rational(static_cast<long>(k), static_cast<long>(n))), -1);
            for (size_t i = 0; i < r; ++i) {
                const RatFun& b = e.conn.matrix(i, j);
                if (b.is_zero())
                    continue;
                // y^{k+1} B_ij(y) / (n z), re-expanded in the module basis
                RatFun f = b * RatFun::monomial(FieldElement(Rational(1, static_cast<long>(n))), static_cast<long>(k) + 1);
                auto parts = split_by_class(f, cv);
                for (size_t m = 0; m < n; ++m)
                    if (!parts[m].is_zero())
                        a(m * r + i, col) += parts[m] * RatFun::monomial(FieldElement(1), -1);
            }
        }
    }
    SplitBundle bundle{std::vector<long>(n * r, -1)};
    for (size_t j = 0; j < r; ++j)
        bundle.twists[j] = 0;
    return audited(LogConnection{bundle, a, downstairs_singular_set(e)}, "pushforward_full");
}

/// Constant matrix of the deck generator on the pushforward basis:
/// y^k e_j -> zeta^k y^k R^{-1} e_j.
inline FMatrix pushforward_action(const EquivariantConnection& e)
{
    size_t r = e.conn.rank(), n = e.cover.n;
    FMatrix rinv = inverse_or_throw(e.action);
    FMatrix t(n * r, n * r);
    for (size_t k = 0; k < n; ++k)
        t.set_block(k * r, k * r, e.cover.zeta(static_cast<long>(k)) * rinv);
    return t;
}

/// The connection induced on invariant sections, spanned by y^k (basis of the
/// zeta^k-eigenspace of R), with weights k/n at 0 and ((n-k) mod n)/n at infinity.
inline ParabolicConnection invariant_part(const EquivariantConnection& e)
{
    require_equivariant(e);
    const CoverDesc& cv = e.cover;
    long n = cv.n;
    size_t r = e.conn.rank();
    Isotypic iso = isotypic_decomposition(e.action, cv);
    FMatrix pinv = inverse_or_throw(iso.basis);
    RMatrix bp = constant_sandwich(pinv, e.conn.matrix, iso.basis);
    RMatrix a(r, r);
    FieldElement inv_n(Rational(1, n));
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j) {
            long ki = iso.labels[i], kj = iso.labels[j];
            if (i == j && kj != 0)
                a(i, j) += RatFun::monomial(FieldElement(Rational(kj, n)), -1);
            if (bp(i, j).is_zero())
                continue;
            RatFun f = bp(i, j) * RatFun::monomial(inv_n, kj - ki + 1);
            a(i, j) += descend(f, cv) * RatFun::monomial(FieldElement(1), -1);
        }
    SplitBundle bundle;
    for (long k : iso.labels)
        bundle.twists.push_back(k == 0 ? 0 : -1);

    ParabolicConnection out;
    out.conn = audited(LogConnection{bundle, a, downstairs_singular_set(e)}, "invariant_part");
    for (bool at_inf : {false, true}) {
        ParabolicFlag f;
        f.point = at_inf ? P1Point::infinity() : P1Point::finite(FieldElement(0));
        std::vector<long> ws;
        for (long k : iso.labels)
            ws.push_back(at_inf ? detail::mod(n - k, n) : k);
        std::sort(ws.begin(), ws.end());
        for (size_t s = 0; s < ws.size(); ++s) {
            if (s > 0 && ws[s] == ws[s - 1]) {
                ++f.multiplicities.back();
                continue;
            }
            f.weights.push_back(Rational(ws[s], n));
            f.multiplicities.push_back(1);
        }
        out.flags.push_back(f);
    }
    if (auto v = parabolic_validate(out); !v)
        throw MathError(ErrorCode::invalid_connection, "invariant_part: " + v.message);
    return out;
}

namespace detail {

/// Residue eigenbasis at a parabolic point, with integer labels n * weight.
struct LocalSplitting {
    FMatrix basis;
    std::vector<long> labels;
};

inline LocalSplitting local_splitting(const ParabolicConnection& p, const P1Point& pt, unsigned n)
{
    size_t r = p.conn.rank();
    FMatrix res = residue_at(p.conn, pt).matrix;
    const ParabolicFlag* f = p.flag_at(pt);
    LocalSplitting out;
    if (!f) {
        if (!res.is_zero())
            throw MathError(ErrorCode::weights_not_split,
                            "nonzero residue at " + point_str(pt) + " without parabolic weights");
        out.basis = FMatrix::identity(r);
        out.labels.assign(r, 0);
        return out;
    }
    std::vector<FMatrix> cols;
    for (size_t k = 0; k < f->weights.size(); ++k) {
        Rational m = f->weights[k] * Rational(static_cast<long>(n));
        auto space = nullspace(res - FieldElement(f->weights[k]) * FMatrix::identity(r));
        if (space.size() != f->multiplicities[k])
            throw MathError(ErrorCode::weights_not_split,
                            "eigenspace for weight " + f->weights[k].str() + " at " + point_str(pt) +
                                " has the wrong dimension");
        for (auto& v : space) {
            cols.push_back(v);
            out.labels.push_back(m.numerator().get_si());
        }
    }
    if (cols.size() != r)
        throw MathError(ErrorCode::weights_not_split, "weights do not account for the whole fiber at " + point_str(pt));
    out.basis = hstack(cols, r);
    return out;
}

}  // namespace detail

/// Pull back, then modify at y = 0 and y = infinity so that the weight-m/n
/// eigenlines acquire poles of order m. The result is regular over {0, inf}
/// on a trivial bundle whose global frame diagonalizes the deck action.
inline EquivariantConnection equivariantize(const ParabolicConnection& p, const CoverDesc& cover)
{
    long n = cover.n;
    size_t r = p.conn.rank();
    for (const auto& f : p.flags)
        for (const auto& w : f.weights)
            if (!(w * Rational(n)).is_integer())
                throw MathError(ErrorCode::denominator_mismatch,
                                "weight " + w.str() + " is not a multiple of 1/" + std::to_string(n));
    if (auto v = parabolic_validate(p); !v) {
        if (v.message.find("residue does not split") != std::string::npos)
            throw MathError(ErrorCode::weights_not_split, v.message);
        throw MathError(ErrorCode::invalid_connection, v.message);
    }
    const P1Point zero = P1Point::finite(FieldElement(0)), inf = P1Point::infinity();
    auto s0 = detail::local_splitting(p, zero, cover.n);
    auto si = detail::local_splitting(p, inf, cover.n);
    FMatrix p0inv = inverse_or_throw(s0.basis), piinv = inverse_or_throw(si.basis);
    long max0 = *std::max_element(s0.labels.begin(), s0.labels.end());
    long maxi = *std::max_element(si.labels.begin(), si.labels.end());
    const std::vector<long>& d = p.conn.bundle.twists;

    LogConnection up = pullback(p.conn, cover);

    // Global sections u(y) = sum_e u_{i,e} y^e of the modified bundle, one
    // exponent class mod n at a time; each class is an eigenspace of the deck action.
    std::vector<RMatrix> sections;
    std::vector<long> classes;
    for (long c = 0; c < n; ++c) {
        std::vector<std::pair<size_t, long>> vars;  // (component, exponent)
        for (size_t i = 0; i < r; ++i)
            for (long e = -max0; e <= n * d[i] + maxi; ++e)
                if (detail::mod(e, n) == c)
                    vars.emplace_back(i, e);
        if (vars.empty())
            continue;
        auto var_index = [&](size_t i, long e) -> long {
            auto it = std::find(vars.begin(), vars.end(), std::make_pair(i, e));
            return it == vars.end() ? -1 : static_cast<long>(it - vars.begin());
        };
        std::vector<std::vector<FieldElement>> rows;
        auto add_row = [&](const FMatrix& pinv, size_t l, long e, bool at_inf) {
            std::vector<FieldElement> row(vars.size());
            bool any = false;
            for (size_t i = 0; i < r; ++i) {
                long k = var_index(i, at_inf ? e + n * d[i] : e);
                if (k >= 0 && !pinv(l, i).is_zero()) {
                    row[static_cast<size_t>(k)] = pinv(l, i);
                    any = true;
                }
            }
            if (any)
                rows.push_back(std::move(row));
        };
        for (size_t l = 0; l < r; ++l) {
            // at 0: (P0^{-1} u)_l has no terms below y^{-m_l}
            for (long e = -max0; e < -s0.labels[l]; ++e)
                if (detail::mod(e, n) == c)
                    add_row(p0inv, l, e, false);
            // at infinity: (P_inf^{-1} y^{-n d} u)_l has no terms above y^{m'_l}
            for (long e = si.labels[l] + 1; e <= maxi; ++e)
                if (detail::mod(e, n) == c)
                    add_row(piinv, l, e, true);
        }
        FMatrix sys(rows.size(), vars.size());
        for (size_t a = 0; a < rows.size(); ++a)
            for (size_t b = 0; b < vars.size(); ++b)
                sys(a, b) = rows[a][b];
        for (const auto& v : nullspace(sys)) {
            RMatrix u(r, 1);
            for (size_t k = 0; k < vars.size(); ++k)
                if (!v(k, 0).is_zero())
                    u(vars[k].first, 0) += RatFun::monomial(v(k, 0), vars[k].second);
            sections.push_back(u);
            classes.push_back(c);
        }
    }
    long total_m = 0, total_mi = 0;
    for (long m : s0.labels)
        total_m += m;
    for (long m : si.labels)
        total_mi += m;
    long degree = n * p.conn.bundle.degree() + total_m + total_mi;
    if (sections.size() != r || degree != 0)
        throw MathError(ErrorCode::bundle_not_trivial,
                        "modified pullback has degree " + std::to_string(degree) + " and " +
                            std::to_string(sections.size()) + " independent sections for rank " + std::to_string(r));
    RMatrix q(r, r);
    for (size_t j = 0; j < r; ++j)
        for (size_t i = 0; i < r; ++i)
            q(i, j) = sections[j](i, 0);
    RatFun det = determinant(q);
    if (det.is_zero() || !det.num().is_constant() || !(det.den() == Poly::monomial(FieldElement(1), total_m)))
        throw MathError(ErrorCode::bundle_not_trivial, "global sections do not frame the modified pullback");

    LogConnection framed = gauge_transform(up, q, SplitBundle{std::vector<long>(r, 0)}, {zero, inf});
    std::vector<P1Point> sing;
    for (const auto& pt : framed.singular_set)
        if (!(pt == zero) && !(pt == inf))
            sing.push_back(pt);
    FMatrix action(r, r);
    for (size_t j = 0; j < r; ++j)
        action(j, j) = cover.zeta(-classes[j]);
    EquivariantConnection out{cover, audited(LogConnection{framed.bundle, framed.matrix, sing}, "equivariantize"),
                              action};
    if (auto v = equivariant_validate(out); !v)
        throw MathError(ErrorCode::not_equivariant, "equivariantize: " + v.message);
    return out;
}

/// A frame change g with gauge_transform(from, g, to.bundle) == to, found by
/// solving g' = g A_to - A_from g over polynomial entries of bounded degree and
/// sweeping the solution space for an invertible member.
inline std::optional<RMatrix> find_gauge(const LogConnection& from, const LogConnection& to, unsigned seed = 0x5eed,
                                         int budget = 200)
{
    size_t r = from.rank();
    if (to.rank() != r || from.bundle.sorted_twists() != to.bundle.sorted_twists())
        return std::nullopt;
    const auto& df = from.bundle.twists;
    const auto& dt = to.bundle.twists;
    Poly lcm(FieldElement(1));
    for (const RMatrix* m : {&from.matrix, &to.matrix})
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < r; ++j) {
                const Poly& den = (*m)(i, j).den();
                Poly g = gcd(lcm, den);
                lcm = divmod(lcm * den, g).first;
            }
    auto scaled = [&](const RMatrix& m) {
        Matrix<Poly> out(r, r, Poly());
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < r; ++j)
                if (!m(i, j).is_zero())
                    out(i, j) = divmod(lcm, m(i, j).den()).first * m(i, j).num();
        return out;
    };
    Matrix<Poly> mf = scaled(from.matrix), mt = scaled(to.matrix);

    struct Var {
        size_t i, j;
        long t;
    };
    std::vector<Var> vars;
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            for (long t = 0; t <= df[i] - dt[j]; ++t)
                vars.push_back({i, j, t});
    if (vars.empty())
        return std::nullopt;
    long maxdeg = lcm.degree();
    for (const auto* m : {&mf, &mt})
        for (size_t i = 0; i < r; ++i)
            for (size_t j = 0; j < r; ++j)
                maxdeg = std::max(maxdeg, (*m)(i, j).degree());
    long maxt = 0;
    for (const auto& v : vars)
        maxt = std::max(maxt, v.t);
    long width = maxdeg + maxt + 1;
    FMatrix sys(r * r * static_cast<size_t>(width), vars.size());
    auto row = [&](size_t a, size_t b, long k) { return (a * r + b) * static_cast<size_t>(width) + static_cast<size_t>(k); };
    for (size_t v = 0; v < vars.size(); ++v) {
        auto [i, j, t] = vars[v];
        // L g'_{ij}
        if (t > 0)
            for (long k = 0; k <= lcm.degree(); ++k)
                sys(row(i, j, k + t - 1), v) += FieldElement(t) * lcm.coeff(k);
        // - g_{ij} M_to(j, b) lands in entry (i, b)
        for (size_t b = 0; b < r; ++b)
            for (long k = 0; k <= mt(j, b).degree(); ++k)
                sys(row(i, b, k + t), v) -= mt(j, b).coeff(k);
        // + M_from(a, i) g_{ij} lands in entry (a, j)
        for (size_t a = 0; a < r; ++a)
            for (long k = 0; k <= mf(a, i).degree(); ++k)
                sys(row(a, j, k + t), v) += mf(a, i).coeff(k);
    }
    auto basis = nullspace(sys);
    if (basis.empty())
        return std::nullopt;
    auto assemble = [&](const FMatrix& coef) {
        RMatrix g(r, r);
        for (size_t v = 0; v < vars.size(); ++v)
            if (!coef(v, 0).is_zero())
                g(vars[v].i, vars[v].j) += RatFun::monomial(coef(v, 0), vars[v].t);
        return g;
    };
    auto attempt = [&](const FMatrix& coef) -> std::optional<RMatrix> {
        RMatrix g = assemble(coef);
        RatFun det = determinant(g);
        if (det.is_zero() || !det.is_constant())
            return std::nullopt;
        try {
            LogConnection got = gauge_transform(from, g, to.bundle);
            if (got.matrix == to.matrix)
                return g;
        } catch (const MathError&) {
        }
        return std::nullopt;
    };
    for (const auto& b : basis)
        if (auto g = attempt(b))
            return g;
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> coef(-2, 2);
    for (int k = 0; k < budget; ++k) {
        FMatrix c(vars.size(), 1);
        for (const auto& b : basis)
            c = c + FieldElement(coef(rng)) * b;
        if (auto g = attempt(c))
            return g;
    }
    return std::nullopt;
}

struct RoundtripReport {
    bool ok = false;
    std::string message;
    std::optional<EquivariantConnection> upstairs;
    std::optional<ParabolicConnection> recovered;
    std::optional<RMatrix> gauge;  ///< frame change from the recovered connection to the input
};

namespace detail {

inline ParabolicFlag flag_or_trivial(const ParabolicConnection& p, const P1Point& pt)
{
    if (const ParabolicFlag* f = p.flag_at(pt))
        return *f;
    return ParabolicFlag{pt, {Rational(0)}, {p.conn.rank()}};
}

}  // namespace detail

/// invariant_part(equivariantize(p)) compared with p: twists, weights, residue
/// spectra, then an explicit isomorphism of connections.
inline RoundtripReport roundtrip_check(const ParabolicConnection& p, const CoverDesc& cover)
{
    RoundtripReport rep;
    try {
        rep.upstairs = equivariantize(p, cover);
        rep.recovered = invariant_part(*rep.upstairs);
    } catch (const MathError& e) {
        rep.message = e.what();
        return rep;
    }
    const ParabolicConnection& q = *rep.recovered;
    if (q.conn.bundle.sorted_twists() != p.conn.bundle.sorted_twists()) {
        rep.message = "splitting types differ";
        return rep;
    }
    for (const auto& pt : {P1Point::finite(FieldElement(0)), P1Point::infinity()}) {
        auto a = detail::flag_or_trivial(p, pt), b = detail::flag_or_trivial(q, pt);
        if (!(a == b)) {
            rep.message = "weights differ at " + detail::point_str(pt);
            return rep;
        }
    }
    for (const auto& pt : union_points(p.conn.singular_set, q.conn.singular_set))
        if (!(charpoly(residue_at(p.conn, pt).matrix) == charpoly(residue_at(q.conn, pt).matrix))) {
            rep.message = "residue spectra differ at " + detail::point_str(pt);
            return rep;
        }
    LogConnection qc = q.conn;
    qc.singular_set = union_points(q.conn.singular_set, p.conn.singular_set);
    LogConnection pc = p.conn;
    pc.singular_set = qc.singular_set;
    rep.gauge = find_gauge(qc, pc);
    if (!rep.gauge) {
        rep.message = "no isomorphism found between recovered and original connection";
        return rep;
    }
    rep.ok = true;
    rep.message = "ok";
    return rep;
}

}  // namespace logconn
