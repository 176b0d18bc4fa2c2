#pragma once

// Monodromy-level model for twisting by a flat line bundle of order n: the
// base group is free on g generators, the line bundle is a character
// chi(g_i) = zeta_n^{c_i}, and a representation fixed by the twist is
// induced from ker(chi).

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "logconn/connection.hpp"
#include "logconn/freegroup.hpp"
#include "logconn/modular.hpp"

namespace logconn {

struct Character {
    FieldPtr field;
    unsigned order = 1;
    std::vector<long> exponents;                 ///< c_i mod n
    std::map<std::string, Rational> residue_tags; ///< optional scalar residue shifts

    size_t generator_count() const { return exponents.size(); }

    static Character make(const FieldPtr& field, unsigned order, std::vector<long> exponents)
    {
        if (order < 2)
            throw MathError(ErrorCode::invalid_argument, "character order must be at least 2");
        if (!field || field->order() % order != 0)
            throw MathError(ErrorCode::order_not_dividing,
                            "character order " + std::to_string(order) + " does not divide the field order");
        long g = 0;
        for (auto& c : exponents) {
            c = detail::mod_n(c, order);
            g = std::gcd(g, c);
        }
        if (std::gcd(g, static_cast<long>(order)) != 1)
            throw MathError(ErrorCode::invalid_argument, "character is not surjective onto Z/" + std::to_string(order));
        return Character{field, order, std::move(exponents), {}};
    }

    FieldElement value(size_t i) const { return root_of_unity(field, order, exponents[i]); }
};

struct Representation {
    size_t generator_count = 0;
    size_t rank = 0;
    std::vector<FMatrix> matrices;
    std::map<std::string, FMatrix> residues;

    static Representation make(std::vector<FMatrix> mats, std::map<std::string, FMatrix> residues = {})
    {
        Representation rho;
        rho.generator_count = mats.size();
        rho.rank = mats.empty() ? 0 : mats[0].rows();
        rho.matrices = std::move(mats);
        rho.residues = std::move(residues);
        rho.check();
        return rho;
    }

    void check() const
    {
        if (matrices.size() != generator_count)
            throw MathError(ErrorCode::invalid_argument, "representation lists the wrong number of matrices");
        for (const auto& m : matrices) {
            if (m.rows() != rank || m.cols() != rank)
                throw MathError(ErrorCode::invalid_argument, "representation matrix has the wrong shape");
            if (determinant(m).is_zero())
                throw MathError(ErrorCode::invalid_argument, "representation matrix is singular");
        }
        for (const auto& [label, m] : residues)
            if (m.rows() != rank || m.cols() != rank)
                throw MathError(ErrorCode::invalid_argument, "residue at " + label + " has the wrong shape");
    }

    /// Image of a word.
    FMatrix eval(const Word& w) const
    {
        FMatrix out = FMatrix::identity(rank);
        for (int x : w) {
            const FMatrix& m = matrices.at(static_cast<size_t>(std::abs(x) - 1));
            out = out * (x > 0 ? m : inverse_or_throw(m));
        }
        return out;
    }
};

/// A representation of ker(chi), given on the Reidemeister-Schreier generators.
inline FMatrix eval_subgroup(const Representation& sigma, const SchreierData& rs, const Word& w)
{
    FMatrix out = FMatrix::identity(sigma.rank);
    for (auto [s, e] : rs.rewrite(w))
        out = out * (e > 0 ? sigma.matrices[s] : inverse_or_throw(sigma.matrices[s]));
    return out;
}

inline SchreierData schreier_for(const Character& chi)
{
    return reidemeister_schreier(chi.generator_count(), chi.order, chi.exponents);
}

/// rho tensored with chi: rho(g_i) zeta^{c_i}; residues move by the character's tags.
inline Representation twist(const Representation& rho, const Character& chi)
{
    if (rho.generator_count != chi.generator_count())
        throw MathError(ErrorCode::invalid_argument, "character and representation disagree on generators");
    Representation out = rho;
    for (size_t i = 0; i < rho.generator_count; ++i)
        out.matrices[i] = chi.value(i) * rho.matrices[i];
    for (auto& [label, m] : out.residues)
        if (auto it = chi.residue_tags.find(label); it != chi.residue_tags.end())
            m = m + FieldElement(it->second) * FMatrix::identity(rho.rank);
    return out;
}

/// Basis of {H : H rho1(g_i) = rho2(g_i) H for all i}.
inline std::vector<FMatrix> intertwiner_space(const Representation& a, const Representation& b)
{
    if (a.rank != b.rank || a.generator_count != b.generator_count)
        throw MathError(ErrorCode::invalid_argument, "intertwiner needs equal rank and generator count");
    size_t r = a.rank, g = a.generator_count;
    // unknown H(p, q) sits in column p * r + q
    FMatrix sys(g * r * r, r * r);
    for (size_t i = 0; i < g; ++i) {
        const FMatrix& x = a.matrices[i];
        const FMatrix& y = b.matrices[i];
        for (size_t p = 0; p < r; ++p)
            for (size_t q = 0; q < r; ++q) {
                size_t row = (i * r + p) * r + q;
                // (H x)(p, q) - (y H)(p, q)
                for (size_t k = 0; k < r; ++k) {
                    if (!x(k, q).is_zero())
                        sys(row, p * r + k) += x(k, q);
                    if (!y(p, k).is_zero())
                        sys(row, k * r + q) -= y(p, k);
                }
            }
    }
    std::vector<FMatrix> out;
    // full column rank mod p already proves the space is zero
    if (auto rk = modular_rank(sys); rk && *rk == r * r)
        return out;
    for (const auto& v : nullspace(sys)) {
        FMatrix h(r, r);
        for (size_t p = 0; p < r; ++p)
            for (size_t q = 0; q < r; ++q)
                h(p, q) = v(p * r + q, 0);
        out.push_back(h);
    }
    return out;
}

/// Absolute irreducibility: the matrices generate the full matrix algebra.
inline bool is_irreducible(const Representation& rho)
{
    size_t r = rho.rank;
    if (r <= 1 || modular_generates_full_algebra(rho.matrices, r))
        return true;
    // echelon rows of the span so far, each with its pivot column
    std::vector<std::pair<size_t, std::vector<FieldElement>>> rows;
    auto absorb = [&](const FMatrix& m) {
        std::vector<FieldElement> v(r * r);
        for (size_t p = 0; p < r; ++p)
            for (size_t q = 0; q < r; ++q)
                v[p * r + q] = m(p, q);
        for (const auto& [piv, row] : rows) {
            if (v[piv].is_zero())
                continue;
            FieldElement f = v[piv];
            for (size_t k = 0; k < v.size(); ++k)
                if (!row[k].is_zero())
                    v[k] -= f * row[k];
        }
        for (size_t k = 0; k < v.size(); ++k) {
            if (v[k].is_zero())
                continue;
            FieldElement inv = v[k].inverse();
            for (auto& x : v)
                x *= inv;
            rows.emplace_back(k, std::move(v));
            return true;
        }
        return false;
    };
    absorb(FMatrix::identity(r));
    std::vector<FMatrix> frontier{FMatrix::identity(r)};
    while (!frontier.empty() && rows.size() < r * r) {
        std::vector<FMatrix> next;
        for (const auto& a : frontier)
            for (const auto& x : rho.matrices) {
                FMatrix cand = a * x;
                if (absorb(cand))
                    next.push_back(std::move(cand));
            }
        frontier = std::move(next);
    }
    return rows.size() == r * r;
}

struct FixedPointCertificate {
    FMatrix h;
    bool normalized = false;
};

enum class FixedPointStatus { certified, not_fixed, normalization_failed };

inline const char* status_name(FixedPointStatus s)
{
    switch (s) {
    case FixedPointStatus::certified: return "certified";
    case FixedPointStatus::not_fixed: return "not-fixed";
    case FixedPointStatus::normalization_failed: return "normalization-failed";
    }
    return "unknown";
}

struct FixedPointResult {
    FixedPointStatus status = FixedPointStatus::not_fixed;
    std::optional<FixedPointCertificate> certificate;
    std::string detail;
};

/// H rho(g_i) = zeta^{c_i} rho(g_i) H for all i, H invertible, and H^n = Id when normalized.
inline ValidationReport verify_certificate(const Representation& rho, const Character& chi,
                                           const FixedPointCertificate& cert)
{
    if (cert.h.rows() != rho.rank || cert.h.cols() != rho.rank)
        return {false, "certificate has the wrong shape"};
    if (determinant(cert.h).is_zero())
        return {false, "certificate is singular"};
    for (size_t i = 0; i < rho.generator_count; ++i)
        if (!(cert.h * rho.matrices[i] == chi.value(i) * rho.matrices[i] * cert.h))
            return {false, "certificate does not intertwine generator " + std::to_string(i + 1)};
    if (cert.normalized && !(cert.h.pow(chi.order) == FMatrix::identity(rho.rank)))
        return {false, "normalized certificate has H^n != Id"};
    return {};
}

namespace detail {

/// Scalar c when m = c Id.
inline std::optional<FieldElement> scalar_value(const FMatrix& m)
{
    FieldElement c = m(0, 0);
    if (!(m == c * FMatrix::identity(m.rows())))
        return std::nullopt;
    return c;
}

/// Coefficient vectors over {0, 1, -1, 2, -2}, smallest support first, at most `cap` of them.
inline std::vector<std::vector<long>> small_combinations(size_t dim, size_t cap)
{
    static const long vals[] = {1, -1, 2, -2};
    std::vector<std::vector<long>> out;
    for (size_t k = 0; k < dim && out.size() < cap; ++k) {
        std::vector<long> v(dim, 0);
        v[k] = 1;
        out.push_back(v);
    }
    // odometer over base-5 digits
    std::vector<int> digit(dim, 0);
    while (out.size() < cap) {
        size_t p = 0;
        while (p < dim && ++digit[p] == 5)
            digit[p++] = 0;
        if (p == dim)
            break;
        std::vector<long> v(dim, 0);
        size_t support = 0;
        for (size_t k = 0; k < dim; ++k)
            if (digit[k]) {
                v[k] = vals[digit[k] - 1];
                ++support;
            }
        if (support >= 2)
            out.push_back(v);
    }
    return out;
}

inline FMatrix combine(const std::vector<FMatrix>& basis, const std::vector<long>& coef)
{
    FMatrix h(basis[0].rows(), basis[0].cols());
    for (size_t k = 0; k < basis.size(); ++k)
        if (coef[k])
            h = h + FieldElement(coef[k]) * basis[k];
    return h;
}

}  // namespace detail

/// Looks for an invertible H : rho -> rho (x) chi and rescales it so H^n = Id.
/// Irreducible rho: H is unique up to scalars and H^n is scalar (Schur).
/// Otherwise a bounded sweep over small combinations of the intertwiner basis.
inline FixedPointResult certify_fixed_point(const Representation& rho, const Character& chi, size_t sweep_cap = 4096)
{
    if (rho.rank % chi.order != 0)
        throw MathError(ErrorCode::invalid_argument, "rank is not a multiple of the character order");
    auto basis = intertwiner_space(rho, twist(rho, chi));
    FixedPointResult res;
    if (basis.empty()) {
        res.detail = "no intertwiner";
        return res;
    }
    bool irreducible = is_irreducible(rho);
    std::vector<std::vector<long>> combos =
        irreducible ? std::vector<std::vector<long>>{{1}} : detail::small_combinations(basis.size(), sweep_cap);
    bool any_invertible = false;
    for (const auto& coef : combos) {
        FMatrix h = detail::combine(basis, coef);
        if (determinant(h).is_zero())
            continue;
        any_invertible = true;
        auto c = detail::scalar_value(h.pow(chi.order));
        if (!c)
            continue;
        auto root = nth_root_scalar(*c, chi.order);
        if (!root)
            continue;
        res.status = FixedPointStatus::certified;
        res.certificate = FixedPointCertificate{root->inverse() * h, true};
        res.detail = irreducible ? "irreducible" : "sweep";
        return res;
    }
    if (any_invertible) {
        res.status = FixedPointStatus::normalization_failed;
        res.detail = "H^n has no n-th root in the field";
    } else {
        res.detail = "intertwiners found but none invertible";
    }
    return res;
}

struct Decomposition {
    SchreierData subgroup;
    FMatrix v_basis;                  ///< columns span the fixed space of H
    std::vector<FMatrix> eigenspaces; ///< eigenspaces[j] for zeta^j
    Representation sigma;             ///< ker(chi) acting on V, on subgroup.generators
    std::map<std::string, std::vector<FMatrix>> residue_blocks; ///< per label, compression to each eigenspace
};

namespace detail {

/// M with a * basis = basis * M (basis has full column rank, columns span an a-stable space).
inline FMatrix restrict_to(const FMatrix& a, const FMatrix& basis)
{
    size_t k = basis.cols(), r = basis.rows();
    FMatrix img = a * basis;
    FMatrix m(k, k);
    for (size_t j = 0; j < k; ++j) {
        FMatrix aug(r, k + 1);
        aug.set_block(0, 0, basis);
        for (size_t i = 0; i < r; ++i)
            aug(i, k) = img(i, j);
        auto sol = nullspace(aug);
        if (sol.size() != 1 || sol[0](k, 0).is_zero())
            throw MathError(ErrorCode::eigenspace_dimension_mismatch, "subspace is not invariant");
        FieldElement scale = -sol[0](k, 0).inverse();
        for (size_t i = 0; i < k; ++i)
            m(i, j) = scale * sol[0](i, 0);
    }
    return m;
}

}  // namespace detail

/// The fixed space V of a normalized certificate, with the induced action of ker(chi).
inline Decomposition decompose(const Representation& rho, const Character& chi, const FixedPointCertificate& cert)
{
    if (!cert.normalized)
        throw MathError(ErrorCode::eigenspace_dimension_mismatch, "certificate is not normalized");
    if (auto v = verify_certificate(rho, chi, cert); !v)
        throw MathError(ErrorCode::eigenspace_dimension_mismatch, v.message);
    size_t r = rho.rank, n = chi.order, k = r / n;
    Decomposition out;
    out.subgroup = schreier_for(chi);
    for (size_t j = 0; j < n; ++j) {
        auto space = nullspace(cert.h - root_of_unity(chi.field, chi.order, static_cast<long>(j)) * FMatrix::identity(r));
        if (space.size() != k)
            throw MathError(ErrorCode::eigenspace_dimension_mismatch,
                            "eigenspace " + std::to_string(j) + " has dimension " + std::to_string(space.size()) +
                                ", expected " + std::to_string(k));
        out.eigenspaces.push_back(hstack(space, r));
    }
    out.v_basis = out.eigenspaces[0];
    std::vector<FMatrix> mats;
    for (const auto& w : out.subgroup.generators)
        mats.push_back(detail::restrict_to(rho.eval(w), out.v_basis));
    out.sigma = Representation::make(std::move(mats));
    if (!rho.residues.empty()) {
        FMatrix p = hstack(out.eigenspaces, r);
        FMatrix pinv = inverse_or_throw(p);
        for (const auto& [label, res] : rho.residues) {
            FMatrix conj = pinv * res * p;
            auto& blocks = out.residue_blocks[label];
            for (size_t j = 0; j < n; ++j)
                blocks.push_back(conj.block(j * k, j * k, k, k));
        }
    }
    return out;
}

/// Induced representation on blocks indexed by cosets: block (k, j) of rho(x)
/// is sigma(T_k^{-1} x T_j) when x T_j lies in coset k.
inline Representation induce(const Representation& sigma, const Character& chi)
{
    SchreierData rs = schreier_for(chi);
    if (sigma.generator_count != rs.generators.size())
        throw MathError(ErrorCode::invalid_argument,
                        "subgroup representation needs " + std::to_string(rs.generators.size()) + " generators");
    size_t n = chi.order, k = sigma.rank;
    std::vector<FMatrix> mats;
    for (size_t i = 0; i < chi.generator_count(); ++i) {
        FMatrix m(n * k, n * k);
        for (size_t j = 0; j < n; ++j) {
            size_t target = static_cast<size_t>(detail::mod_n(static_cast<long>(j) + chi.exponents[i], n));
            Word w = inverse_word(rs.transversal[target]);
            w.push_back(static_cast<int>(i) + 1);
            w = concat(w, rs.transversal[j]);
            m.set_block(target * k, j * k, eval_subgroup(sigma, rs, w));
        }
        mats.push_back(m);
    }
    std::map<std::string, FMatrix> residues;
    for (const auto& [label, res] : sigma.residues) {
        FMatrix big(n * k, n * k);
        for (size_t j = 0; j < n; ++j)
            big.set_block(j * k, j * k, res);
        residues[label] = big;
    }
    return Representation::make(std::move(mats), std::move(residues));
}

/// sigma conjugated by the transversal element of coset j: h -> sigma(T_j^{-1} h T_j).
inline Representation conjugate_by_coset(const Representation& sigma, const Character& chi, size_t j)
{
    SchreierData rs = schreier_for(chi);
    std::vector<FMatrix> mats;
    for (const auto& w : rs.generators) {
        Word c = concat(concat(inverse_word(rs.transversal[j]), w), rs.transversal[j]);
        mats.push_back(eval_subgroup(sigma, rs, c));
    }
    return Representation::make(std::move(mats), sigma.residues);
}

/// An invertible intertwiner a -> b, if a small sweep finds one.
inline std::optional<FMatrix> find_isomorphism(const Representation& a, const Representation& b, size_t cap = 512)
{
    auto basis = intertwiner_space(a, b);
    if (basis.empty())
        return std::nullopt;
    for (const auto& coef : detail::small_combinations(basis.size(), cap)) {
        FMatrix h = detail::combine(basis, coef);
        if (!determinant(h).is_zero())
            return h;
    }
    return std::nullopt;
}

/// decompose(induce(sigma)) agrees with sigma up to conjugation by a coset representative.
inline bool induce_roundtrip(const Representation& sigma, const Character& chi)
{
    Representation rho = induce(sigma, chi);
    FixedPointResult fp = certify_fixed_point(rho, chi);
    if (fp.status != FixedPointStatus::certified)
        return false;
    Decomposition d = decompose(rho, chi, *fp.certificate);
    for (size_t j = 0; j < chi.order; ++j)
        if (find_isomorphism(d.sigma, conjugate_by_coset(sigma, chi, j)))
            return true;
    return false;
}

}  // namespace logconn
