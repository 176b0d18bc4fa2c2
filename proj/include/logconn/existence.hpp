#pragma once

// Logarithmic connections with central residues lambda_i * Id at prescribed
// points on a split bundle over P^1: the subset criterion, the diagonal
// construction, and the Cech splitting obstruction paired against H^0(End E).

#include <optional>
#include <string>
#include <vector>

#include "logconn/connection.hpp"

namespace logconn {

struct ResiduePrescription {
    std::vector<P1Point> points;
    std::vector<FieldElement> lambdas;

    FieldElement lambda_sum() const
    {
        FieldElement s;
        for (const auto& l : lambdas)
            s += l;
        return s;
    }

    bool all_finite() const
    {
        for (const auto& p : points)
            if (p.is_infinity())
                return false;
        return true;
    }
};

inline void require_well_formed(const ResiduePrescription& p)
{
    if (p.points.size() != p.lambdas.size())
        throw MathError(ErrorCode::invalid_argument, "prescription has " + std::to_string(p.points.size()) +
                                                         " points but " + std::to_string(p.lambdas.size()) + " residues");
    for (size_t i = 0; i < p.points.size(); ++i)
        for (size_t j = i + 1; j < p.points.size(); ++j)
            if (p.points[i] == p.points[j])
                throw MathError(ErrorCode::invalid_argument, "prescription lists " + detail::point_str(p.points[i]) + " twice");
}

struct CriterionResult {
    bool exists = true;
    std::vector<size_t> witness;  ///< twist indices of a violating summand; all indices when the degree condition fails
    FieldElement defect;          ///< sum of twists over the witness plus |witness| * sum(lambda)

    explicit operator bool() const { return exists; }
};

/// Checks the degree condition on E and on every proper direct summand,
/// i.e. every proper nonempty subset of the twists.
inline CriterionResult criterion_check(const SplitBundle& e, const ResiduePrescription& p)
{
    require_well_formed(p);
    size_t r = e.rank();
    if (r == 0 || r > 10)
        throw MathError(ErrorCode::invalid_argument, "criterion needs 1 <= rank <= 10");
    FieldElement sum = p.lambda_sum();
    auto defect = [&](unsigned long mask) {
        FieldElement d;
        long count = 0;
        for (size_t i = 0; i < r; ++i)
            if (mask >> i & 1) {
                d += FieldElement(e.twists[i]);
                ++count;
            }
        return d + FieldElement(count) * sum;
    };
    auto indices = [&](unsigned long mask) {
        std::vector<size_t> out;
        for (size_t i = 0; i < r; ++i)
            if (mask >> i & 1)
                out.push_back(i);
        return out;
    };
    unsigned long full = (1UL << r) - 1;
    CriterionResult res;
    if (FieldElement d = defect(full); !d.is_zero())
        return {false, indices(full), d};
    for (unsigned long mask = 1; mask < full; ++mask)
        if (FieldElement d = defect(mask); !d.is_zero())
            return {false, indices(mask), d};
    return res;
}

/// A coordinate z -> 1/(z - a) that moves infinity to 0 and a to infinity,
/// where a is the least nonnegative integer not among the points.
struct MobiusNormalization {
    FieldElement a;
    ResiduePrescription prescription;
};

inline MobiusNormalization normalize_points(const ResiduePrescription& p)
{
    require_well_formed(p);
    long a = 0;
    while (contains(p.points, P1Point::finite(FieldElement(a))))
        ++a;
    MobiusNormalization out{FieldElement(a), {{}, p.lambdas}};
    for (const auto& x : p.points)
        out.prescription.points.push_back(x.is_infinity() ? P1Point::finite(FieldElement(0))
                                                          : P1Point::finite((x.value - out.a).inverse()));
    return out;
}

namespace detail {

inline ResiduePrescription finite_prescription(const ResiduePrescription& p)
{
    require_well_formed(p);
    return p.all_finite() ? p : normalize_points(p).prescription;
}

/// sum_i lambda_i / (z - x_i) for finite points.
inline RatFun central_form(const ResiduePrescription& p)
{
    RatFun f;
    for (size_t i = 0; i < p.points.size(); ++i)
        if (!p.lambdas[i].is_zero())
            f += RatFun::simple_pole(p.lambdas[i], p.points[i].value);
    return f;
}

/// The diagonal operator with the central form in every entry, unchecked.
inline LogConnection diagonal_candidate(const SplitBundle& e, const ResiduePrescription& p)
{
    RMatrix a(e.rank(), e.rank());
    RatFun f = central_form(p);
    for (size_t i = 0; i < e.rank(); ++i)
        a(i, i) = f;
    return LogConnection{e, a, p.points};
}

}  // namespace detail

/// The diagonal connection sum lambda_i dz / (z - x_i) * Id. When infinity is
/// among the points, the result is expressed in the coordinate of normalize_points.
inline LogConnection construct_connection(const SplitBundle& e, const ResiduePrescription& p)
{
    if (auto crit = criterion_check(e, p); !crit)
        throw MathError(ErrorCode::criterion_violated,
                        "degree condition fails on a summand of rank " + std::to_string(crit.witness.size()) +
                            " with defect " + crit.defect.str());
    return audited(detail::diagonal_candidate(e, detail::finite_prescription(p)), "construct_connection");
}

/// Basis element z^m E_ij of H^0(End E), defined when d_i - d_j >= m >= 0.
struct EndomorphismMonomial {
    size_t i = 0, j = 0;
    long m = 0;

    friend bool operator==(const EndomorphismMonomial&, const EndomorphismMonomial&) = default;
};

inline std::vector<EndomorphismMonomial> endomorphism_basis(const SplitBundle& e)
{
    std::vector<EndomorphismMonomial> out;
    for (size_t i = 0; i < e.rank(); ++i)
        for (size_t j = 0; j < e.rank(); ++j)
            for (long m = 0; m <= e.twists[i] - e.twists[j]; ++m)
                out.push_back({i, j, m});
    return out;
}

struct ObstructionFunctional {
    std::vector<EndomorphismMonomial> basis;
    std::vector<FieldElement> values;

    bool is_zero() const
    {
        for (const auto& v : values)
            if (!v.is_zero())
                return false;
        return true;
    }

    FieldElement at(const EndomorphismMonomial& s) const
    {
        for (size_t k = 0; k < basis.size(); ++k)
            if (basis[k] == s)
                return values[k];
        throw MathError(ErrorCode::invalid_argument, "not a basis element of H^0(End E)");
    }

    /// Value on the identity endomorphism.
    FieldElement at_identity(size_t rank) const
    {
        FieldElement s;
        for (size_t i = 0; i < rank; ++i)
            s += at({i, i, 0});
        return s;
    }
};

/// Difference, in the z-frame, of the z-chart operator d + A_0 and the
/// w-chart operator d in the frame e_w: an End(E)-valued form on the overlap.
inline RMatrix splitting_cocycle(const SplitBundle& e, const ResiduePrescription& finite)
{
    size_t r = e.rank();
    RMatrix a0 = detail::diagonal_candidate(e, finite).matrix;
    // d on e_w = e_z g, g = diag(z^{d_i}), reads -g' g^{-1} = -diag(d_i / z) in e_z
    RMatrix g(r, r), gprime(r, r), ginv(r, r);
    for (size_t i = 0; i < r; ++i) {
        g(i, i) = RatFun::monomial(FieldElement(1), e.twists[i]);
        gprime(i, i) = g(i, i).derivative();
        ginv(i, i) = RatFun::monomial(FieldElement(1), -e.twists[i]);
    }
    RMatrix ainf = gprime * ginv;
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            ainf(i, j) = -ainf(i, j);
    RMatrix c(r, r);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < r; ++j)
            c(i, j) = a0(i, j) - ainf(i, j);
    return c;
}

/// theta(s) = sum of finite residues of tr(s c) dz, which is minus the residue at infinity.
inline ObstructionFunctional cech_obstruction(const SplitBundle& e, const ResiduePrescription& p)
{
    ResiduePrescription finite = detail::finite_prescription(p);
    RMatrix c = splitting_cocycle(e, finite);
    ObstructionFunctional out;
    out.basis = endomorphism_basis(e);
    for (const auto& s : out.basis) {
        RatFun tr = RatFun::monomial(FieldElement(1), s.m) * c(s.j, s.i);
        out.values.push_back(-residue_form(tr, P1Point::infinity()));
    }
    return out;
}

struct AgreementReport {
    bool ok = true;
    bool criterion = false;
    bool obstruction_vanishes = false;
    bool construction_valid = false;
    bool identity_law = false;  ///< theta(Id) = deg E + rank * sum(lambda)
    std::string message;

    explicit operator bool() const { return ok; }
};

/// Compares the three answers; the construction leg validates the diagonal
/// candidate directly rather than going through the criterion gate.
inline AgreementReport oracle_agreement(const SplitBundle& e, const ResiduePrescription& p)
{
    AgreementReport rep;
    rep.criterion = criterion_check(e, p).exists;
    ObstructionFunctional theta = cech_obstruction(e, p);
    rep.obstruction_vanishes = theta.is_zero();
    FieldElement expected = FieldElement(e.degree()) + FieldElement(static_cast<long>(e.rank())) * p.lambda_sum();
    rep.identity_law = theta.at_identity(e.rank()) == expected;

    ResiduePrescription finite = detail::finite_prescription(p);
    LogConnection cand = detail::diagonal_candidate(e, finite);
    rep.construction_valid = conn_validate(cand).ok && fuchs_check(cand).is_zero();
    if (rep.construction_valid)
        for (size_t k = 0; k < finite.points.size(); ++k)
            if (residue_at(cand, finite.points[k]).matrix !=
                FMatrix::identity(e.rank()) * finite.lambdas[k])
                rep.construction_valid = false;
    if (rep.construction_valid && rep.criterion)
        rep.construction_valid = construct_connection(e, p).matrix == cand.matrix;

    if (rep.criterion != rep.obstruction_vanishes || rep.criterion != rep.construction_valid) {
        rep.ok = false;
        rep.message = std::string("criterion ") + (rep.criterion ? "holds" : "fails") + ", obstruction " +
                      (rep.obstruction_vanishes ? "vanishes" : "nonzero") + ", construction " +
                      (rep.construction_valid ? "valid" : "invalid");
    }
    if (!rep.identity_law) {
        rep.ok = false;
        rep.message += (rep.message.empty() ? "" : "; ") + std::string("theta(Id) = ") +
                       theta.at_identity(e.rank()).str() + ", expected " + expected.str();
    }
    return rep;
}

}  // namespace logconn
