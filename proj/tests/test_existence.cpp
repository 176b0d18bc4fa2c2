#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "logconn/existence.hpp"

using namespace logconn;
using namespace logconn::testing;

namespace {

P1Point pt(long v) { return P1Point::finite(FieldElement(v)); }

ResiduePrescription presc(std::vector<long> points, std::vector<Rational> lambdas)
{
    ResiduePrescription p;
    for (long x : points)
        p.points.push_back(pt(x));
    for (const auto& l : lambdas)
        p.lambdas.push_back(FieldElement(l));
    return p;
}

// theta(s) as the sum of residues of tr(s c) dz at the finite poles {0} + points
FieldElement theta_by_finite_residues(const SplitBundle& e, const ResiduePrescription& p,
                                      const EndomorphismMonomial& s)
{
    RMatrix c = splitting_cocycle(e, p);
    RatFun tr = RatFun::monomial(FieldElement(1), s.m) * c(s.j, s.i);
    std::vector<P1Point> poles = p.points;
    if (!contains(poles, pt(0)))
        poles.push_back(pt(0));
    FieldElement sum;
    for (const auto& q : poles)
        sum += residue_form(tr, q);
    return sum;
}

// Hand-derived: the cocycle is diagonal with entries sum lambda/(z-x) + d_i/z,
// so only z^0 E_ii pairs nontrivially, to d_i + sum(lambda).
FieldElement theta_closed_form(const SplitBundle& e, const ResiduePrescription& p, const EndomorphismMonomial& s)
{
    if (s.i != s.j || s.m != 0)
        return FieldElement();
    return FieldElement(e.twists[s.i]) + p.lambda_sum();
}

bool subsets_balanced(const std::vector<long>& d, const FieldElement& sum)
{
    size_t r = d.size();
    for (unsigned long mask = 1; mask < (1UL << r); ++mask) {
        FieldElement acc;
        for (size_t i = 0; i < r; ++i)
            if (mask >> i & 1)
                acc += FieldElement(d[i]) + sum;
        if (!acc.is_zero())
            return false;
    }
    return true;
}

}  // namespace

TEST(Criterion, Examples)
{
    EXPECT_TRUE(criterion_check({{-2, -2}}, presc({0, 1}, {1, 1})).exists);

    auto fail = criterion_check({{-1, -3}}, presc({0, 1}, {1, 1}));
    EXPECT_FALSE(fail.exists);
    EXPECT_EQ(fail.witness, std::vector<size_t>{0});
    EXPECT_EQ(fail.defect, FieldElement(1));

    EXPECT_TRUE(criterion_check({{0}}, presc({}, {})).exists);
    EXPECT_FALSE(criterion_check({{1, -1}}, presc({0}, {0})).exists);
}

TEST(Criterion, DegreeConditionWitnessIsEverything)
{
    auto res = criterion_check({{0, 0}}, presc({0}, {1}));
    EXPECT_FALSE(res.exists);
    EXPECT_EQ(res.witness, (std::vector<size_t>{0, 1}));
    EXPECT_EQ(res.defect, FieldElement(2));
}

TEST(Criterion, RejectsMalformedPrescriptions)
{
    EXPECT_THROW(criterion_check({{0}}, presc({0, 0}, {0, 0})), MathError);
    EXPECT_THROW(criterion_check({{0}}, presc({0}, {})), MathError);
    EXPECT_THROW(criterion_check({{}}, presc({}, {})), MathError);
}

TEST(Criterion, PermutationAndRelabelingInvariance)
{
    std::mt19937 rng(404);
    const std::vector<Rational> lams{Rational(0), Rational(1), Rational(-1), Rational(1, 2), Rational(-1, 2), Rational(1, 3)};
    for (int t = 0; t < 300; ++t) {
        size_t r = 1 + rng() % 3, k = rng() % 4;
        std::vector<long> d(r);
        for (auto& x : d)
            x = static_cast<long>(rng() % 7) - 3;
        ResiduePrescription p;
        for (size_t i = 0; i < k; ++i) {
            p.points.push_back(pt(static_cast<long>(i) * 2 - 1));
            p.lambdas.push_back(FieldElement(lams[rng() % lams.size()]));
        }
        bool base = criterion_check({d}, p).exists;
        EXPECT_EQ(base, subsets_balanced(d, p.lambda_sum()));

        std::vector<long> shuffled = d;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(criterion_check({shuffled}, p).exists, base);

        ResiduePrescription moved = normalize_points(p).prescription;
        EXPECT_EQ(criterion_check({d}, moved).exists, base);
    }
}

TEST(Construct, Examples)
{
    auto c = construct_connection({{-2, -2}}, presc({0, 1}, {1, 1}));
    RatFun f = RatFun::simple_pole(FieldElement(1), FieldElement(0)) + RatFun::simple_pole(FieldElement(1), FieldElement(1));
    EXPECT_EQ(c.matrix(0, 0), f);
    EXPECT_EQ(c.matrix(1, 1), f);
    EXPECT_TRUE(c.matrix(0, 1).is_zero());
    EXPECT_EQ(residue_at(c, pt(0)).matrix, FMatrix::identity(2));
    EXPECT_EQ(residue_at(c, pt(1)).matrix, FMatrix::identity(2));
    EXPECT_TRUE(residue_at(c, P1Point::infinity()).matrix.is_zero());
    EXPECT_TRUE(fuchs_check(c).is_zero());

    auto z = construct_connection({{0}}, presc({}, {}));
    EXPECT_TRUE(z.matrix(0, 0).is_zero());

    auto three = construct_connection({{-3}}, presc({0, 1, -1}, {1, 1, 1}));
    // 1/z + 1/(z-1) + 1/(z+1) = (3z^2 - 1) / (z^3 - z)
    RatFun expect(Poly(std::vector<FieldElement>{FieldElement(-1), FieldElement(0), FieldElement(3)}),
                  Poly(std::vector<FieldElement>{FieldElement(0), FieldElement(-1), FieldElement(0), FieldElement(1)}));
    EXPECT_EQ(three.matrix(0, 0), expect);
}

TEST(Construct, RefusesWhenCriterionFails)
{
    try {
        construct_connection({{-1, -3}}, presc({0, 1}, {1, 1}));
        FAIL() << "expected criterion-violated";
    } catch (const MathError& e) {
        EXPECT_EQ(e.code(), ErrorCode::criterion_violated);
    }
}

TEST(Construct, InfinityIsMovedToZero)
{
    ResiduePrescription p;
    p.points = {pt(0), P1Point::infinity()};
    p.lambdas = {FieldElement(Rational(1, 2)), FieldElement(Rational(1, 2))};
    auto norm = normalize_points(p);
    EXPECT_EQ(norm.a, FieldElement(1));
    // 0 -> 1/(0 - 1) = -1, infinity -> 0
    EXPECT_EQ(norm.prescription.points, (std::vector<P1Point>{pt(-1), pt(0)}));

    auto c = construct_connection({{-1}}, p);
    EXPECT_EQ(residue_at(c, pt(-1)).matrix(0, 0), FieldElement(Rational(1, 2)));
    EXPECT_EQ(residue_at(c, pt(0)).matrix(0, 0), FieldElement(Rational(1, 2)));
    EXPECT_TRUE(cech_obstruction({{-1}}, p).is_zero());
}

TEST(Obstruction, Examples)
{
    for (long d : {-3, 0, 2})
        for (Rational l : {Rational(0), Rational(1, 2), Rational(-5, 3)}) {
            auto th = cech_obstruction({{d}}, presc({0}, {l}));
            EXPECT_EQ(th.at({0, 0, 0}), FieldElement(d) + FieldElement(l));
        }
    EXPECT_TRUE(cech_obstruction({{-2, -2}}, presc({0, 1}, {1, 1})).is_zero());

    auto th = cech_obstruction({{-1, -3}}, presc({0, 1}, {1, 1}));
    EXPECT_EQ(th.at({0, 0, 0}), FieldElement(1));
    EXPECT_FALSE(th.is_zero());
    // H^0(End E) for (-1, -3): two scalars plus Hom(O(-3), O(-1)) of dimension 3
    EXPECT_EQ(th.basis.size(), 5u);
}

TEST(Obstruction, AgreesWithFiniteResiduesAndClosedForm)
{
    std::mt19937 rng(77);
    auto ctx = field_make(3);
    for (int t = 0; t < 200; ++t) {
        size_t r = 1 + rng() % 3, k = rng() % 4;
        SplitBundle e;
        for (size_t i = 0; i < r; ++i)
            e.twists.push_back(static_cast<long>(rng() % 7) - 3);
        ResiduePrescription p;
        for (size_t i = 0; i < k; ++i) {
            p.points.push_back(P1Point::finite(FieldElement(static_cast<long>(i) + 1) * FieldElement::zeta(ctx, static_cast<long>(rng() % 3))));
            p.lambdas.push_back(FieldElement(Rational(static_cast<long>(rng() % 7) - 3, 1 + static_cast<long>(rng() % 3))));
        }
        auto th = cech_obstruction(e, p);
        ASSERT_EQ(th.basis.size(), th.values.size());
        for (size_t b = 0; b < th.basis.size(); ++b) {
            EXPECT_EQ(th.values[b], theta_by_finite_residues(e, p, th.basis[b]));
            EXPECT_EQ(th.values[b], theta_closed_form(e, p, th.basis[b]));
        }
        EXPECT_EQ(th.at_identity(r), FieldElement(e.degree()) + FieldElement(static_cast<long>(r)) * p.lambda_sum());
    }
}

TEST(Agreement, Examples)
{
    auto triv = oracle_agreement({{0, 0}}, presc({0}, {0}));
    EXPECT_TRUE(triv.ok);
    EXPECT_TRUE(triv.criterion && triv.obstruction_vanishes && triv.construction_valid);

    auto split = oracle_agreement({{1, -1}}, presc({0}, {0}));
    EXPECT_TRUE(split.ok) << split.message;
    EXPECT_FALSE(split.criterion || split.obstruction_vanishes || split.construction_valid);
}

TEST(Agreement, SmallSweepIncludingInfinity)
{
    const std::vector<Rational> lams{Rational(0), Rational(1), Rational(-1), Rational(1, 2), Rational(-1, 2), Rational(1, 3)};
    const std::vector<P1Point> pts{pt(0), P1Point::infinity(), pt(2)};
    int agreeing = 0, existing = 0;
    for (long d0 = -2; d0 <= 2; ++d0)
        for (long d1 = -2; d1 <= 2; ++d1)
            for (size_t k = 0; k <= 3; ++k) {
                size_t combos = 1;
                for (size_t i = 0; i < k; ++i)
                    combos *= lams.size();
                for (size_t code = 0; code < combos; ++code) {
                    ResiduePrescription p;
                    size_t c = code;
                    for (size_t i = 0; i < k; ++i) {
                        p.points.push_back(pts[i]);
                        p.lambdas.push_back(FieldElement(lams[c % lams.size()]));
                        c /= lams.size();
                    }
                    SplitBundle e{{d0, d1}};
                    if (!(FieldElement(e.degree()) + FieldElement(2) * p.lambda_sum()).is_zero())
                        continue;
                    auto rep = oracle_agreement(e, p);
                    EXPECT_TRUE(rep.ok) << rep.message;
                    agreeing += rep.ok;
                    existing += rep.criterion;
                }
            }
    EXPECT_GT(agreeing, 50);
    EXPECT_GT(existing, 10);
}
