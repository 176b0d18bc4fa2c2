#include <gtest/gtest.h>

#include <random>

#include "logconn/ratfun.hpp"

using namespace logconn;

namespace {

Poly P(std::initializer_list<long> c)
{
    std::vector<FieldElement> v;
    for (long x : c)
        v.emplace_back(x);
    return Poly(v);
}

FieldElement Q(long n, long d = 1) { return FieldElement(Rational(n, d)); }

const P1Point inf = P1Point::infinity();
P1Point at(const FieldElement& v) { return P1Point::finite(v); }

// Random rational function with poles at a few small integers.
RatFun random_ratfun(std::mt19937& rng, std::vector<FieldElement>& poles, const FieldPtr& ctx)
{
    std::uniform_int_distribution<int> c(-3, 3);
    RatFun f(Poly(std::vector<FieldElement>{Q(c(rng)), Q(c(rng))}));
    int k = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < k; ++i) {
        FieldElement p = Q(c(rng)) + (ctx ? Q(c(rng)) * FieldElement::zeta(ctx) : FieldElement());
        FieldElement coef = Q(c(rng), 1 + static_cast<long>(rng() % 3));
        f += RatFun::simple_pole(coef, p);
        if (rng() % 2)
            f += RatFun::simple_pole(FieldElement(1), p) * RatFun::simple_pole(coef, p);
        if (std::find(poles.begin(), poles.end(), p) == poles.end())
            poles.push_back(p);
    }
    return f;
}

bool reduced(const RatFun& f)
{
    return gcd(f.num(), f.den()).degree() == 0 && f.den().lead().is_one();
}

}  // namespace

TEST(RatArith, SumOfSimplePoles)
{
    RatFun f = RatFun::simple_pole(Q(1), Q(1)) + RatFun::simple_pole(Q(1), Q(-1));
    // cross-multiplication: (z+1) + (z-1) over (z-1)(z+1)
    EXPECT_EQ(f.num(), P({0, 2}));
    EXPECT_EQ(f.den(), P({-1, 0, 1}));
    EXPECT_EQ(f * RatFun(1), f);
    EXPECT_TRUE((f - f).is_zero());
    EXPECT_THROW(f / RatFun(), MathError);
}

TEST(RatArith, ReductionOnConstruction)
{
    RatFun f(P({-1, 0, 1}), P({-1, 1}));
    EXPECT_EQ(f, RatFun(P({1, 1})));
    RatFun g(P({2}), P({4, 2}));
    EXPECT_EQ(g.den(), P({2, 1}));
    EXPECT_EQ(g.num(), P({1}));
}

TEST(RatArith, RandomResultsAreReducedAndAgreeWithEvaluation)
{
    std::mt19937 rng(7);
    auto ctx = field_make(3);
    for (int t = 0; t < 150; ++t) {
        std::vector<FieldElement> poles;
        RatFun f = random_ratfun(rng, poles, t % 2 ? ctx : nullptr);
        RatFun g = random_ratfun(rng, poles, t % 3 ? ctx : nullptr);
        RatFun s = f + g, d = f - g, m = f * g;
        EXPECT_TRUE(reduced(s) && reduced(d) && reduced(m));
        for (long x = 5; x < 8; ++x) {
            FieldElement xv = Q(x, 7) + FieldElement(10);
            auto fx = f.eval(xv), gx = g.eval(xv);
            ASSERT_TRUE(fx && gx);
            EXPECT_EQ(*s.eval(xv), *fx + *gx);
            EXPECT_EQ(*d.eval(xv), *fx - *gx);
            EXPECT_EQ(*m.eval(xv), *fx * *gx);
            if (!g.is_zero() && !gx->is_zero()) {
                RatFun q = f / g;
                EXPECT_TRUE(reduced(q));
                auto qx = q.eval(xv);
                if (qx) {
                    EXPECT_EQ(*qx, *fx / *gx);
                }
            }
        }
    }
}

TEST(Laurent, Examples)
{
    RatFun inv_z = RatFun::monomial(Q(1), -1);
    LaurentSeries s = laurent_at(inv_z, at(Q(0)), 1);
    EXPECT_EQ(s.lowest_order, -1);
    EXPECT_EQ(s.coeff(-1), Q(1));
    EXPECT_EQ(s.coeff(0), Q(0));
    EXPECT_EQ(s.coeff(1), Q(0));

    // geometric series: 1/(z-1) = w/(1-w) = w + w^2 + ...
    LaurentSeries g = laurent_at(RatFun::simple_pole(Q(1), Q(1)), inf, 2);
    EXPECT_EQ(g.lowest_order, 1);
    EXPECT_EQ(g.coeff(0), Q(0));
    EXPECT_EQ(g.coeff(1), Q(1));
    EXPECT_EQ(g.coeff(2), Q(1));
    EXPECT_THROW(g.coeff(3), MathError);

    LaurentSeries sq = laurent_at(RatFun::monomial(Q(1), 2), inf, 0);
    EXPECT_EQ(sq.lowest_order, -2);
    EXPECT_EQ(sq.coeff(-2), Q(1));
    EXPECT_EQ(sq.coeff(-1), Q(0));
    EXPECT_EQ(sq.coeff(0), Q(0));
}

TEST(Laurent, CoefficientsAgreeWithShiftedDivision)
{
    // 1/(z^2 (z-2)) at 0: -1/2 z^-2 - 1/4 z^-1 - 1/8 - ...
    RatFun f(P({1}), P({0, 0, -2, 1}));
    LaurentSeries s = laurent_at(f, at(Q(0)), 2);
    EXPECT_EQ(s.lowest_order, -2);
    EXPECT_EQ(s.coeff(-2), Q(-1, 2));
    EXPECT_EQ(s.coeff(-1), Q(-1, 4));
    EXPECT_EQ(s.coeff(0), Q(-1, 8));
    EXPECT_EQ(s.coeff(2), Q(-1, 32));
}

TEST(Residue, Examples)
{
    auto ctx = field_make(3);
    FieldElement lambda = Q(2, 5) + FieldElement::zeta(ctx);
    RatFun f = RatFun::monomial(lambda, -1);
    EXPECT_EQ(residue_form(f, at(Q(0))), lambda);
    EXPECT_EQ(residue_form(f, inf), -lambda);
    RatFun g = RatFun::simple_pole(Q(1), Q(1)) + RatFun::simple_pole(Q(2), Q(-1));
    // w-chart oracle: g(1/w)(-1/w^2) = -(1/w)(1/(1-w) + 2/(1+w)), residue -(1 + 2)
    EXPECT_EQ(residue_form(g, inf), Q(-3));
    EXPECT_EQ(residue_form(g, at(Q(1))), Q(1));
    EXPECT_EQ(residue_form(g, at(Q(5))), Q(0));
    // a polynomial has residue at infinity zero (dz = -dw/w^2 times polynomial in 1/w)
    EXPECT_EQ(residue_form(RatFun(P({1, 2, 3})), inf), Q(0));
}

TEST(Residue, GlobalResidueTheorem)
{
    std::mt19937 rng(99);
    auto ctx = field_make(4);
    for (int t = 0; t < 200; ++t) {
        std::vector<FieldElement> poles;
        RatFun f = random_ratfun(rng, poles, t % 2 ? ctx : nullptr);
        if (t % 5 == 0)
            f = f * random_ratfun(rng, poles, ctx);
        FieldElement total = residue_form(f, inf);
        for (const auto& p : poles)
            total += residue_form(f, at(p));
        EXPECT_TRUE(total.is_zero()) << t;
    }
}

TEST(PartialFractions, Examples)
{
    RatFun f(P({0, 2}), P({-1, 0, 1}));
    auto pf = partial_fractions(f, {at(Q(1)), at(Q(-1))});
    ASSERT_EQ(pf.parts.size(), 2u);
    EXPECT_EQ(pf.parts[0].first, at(Q(1)));
    EXPECT_EQ(pf.parts[0].second, (std::vector<FieldElement>{Q(1)}));
    EXPECT_EQ(pf.parts[1].first, at(Q(-1)));
    EXPECT_EQ(pf.parts[1].second, (std::vector<FieldElement>{Q(1)}));
    EXPECT_TRUE(pf.remainder.is_zero());
    EXPECT_EQ(pf.reassemble(), f);

    RatFun poly(P({1, 2, 3}));
    auto pp = partial_fractions(poly, {});
    EXPECT_TRUE(pp.parts.empty());
    EXPECT_EQ(pp.remainder, poly.num());

    try {
        partial_fractions(RatFun(P({1}), P({-2, 0, 1})), {}, field_make(4));
        FAIL();
    } catch (const MathError& e) {
        EXPECT_EQ(e.code(), ErrorCode::unsplit_denominator);
    }
}

TEST(PartialFractions, UndeclaredRationalAndCyclotomicPoles)
{
    auto ctx = field_make(4);
    // 1/(z^2 + 1) splits over Q(i) at +-i; 1/(3z - 1) has the rational pole 1/3
    RatFun f = RatFun(P({1}), P({1, 0, 1})).scale(FieldElement(1).in(ctx)) + RatFun(P({1}), P({-1, 3}));
    auto pf = partial_fractions(f, {});
    EXPECT_EQ(pf.parts.size(), 3u);
    EXPECT_EQ(pf.reassemble(), f);
}

TEST(PartialFractions, ReassemblyAndLaurentAgreeOnRandomInputs)
{
    std::mt19937 rng(3);
    auto ctx = field_make(3);
    for (int t = 0; t < 150; ++t) {
        std::vector<FieldElement> poles;
        RatFun f = random_ratfun(rng, poles, t % 2 ? ctx : nullptr);
        f = f * RatFun(P({1, 1, static_cast<long>(rng() % 3)}));
        std::vector<P1Point> pts;
        for (const auto& p : poles)
            pts.push_back(at(p));
        auto pf = partial_fractions(f, pts);
        EXPECT_EQ(pf.reassemble(), f);
        for (const auto& [p, cs] : pf.parts) {
            LaurentSeries s = laurent_at(f, p, 0);
            EXPECT_EQ(s.lowest_order, -static_cast<long>(cs.size()));
            for (size_t j = 0; j < cs.size(); ++j)
                EXPECT_EQ(s.coeff(-static_cast<long>(j) - 1), cs[j]);
        }
    }
}

TEST(PolyOps, ShiftScaleCompose)
{
    Poly p = P({1, -2, 0, 3});
    for (long a = -2; a <= 2; ++a)
        for (long x = -3; x <= 3; ++x) {
            EXPECT_EQ(p.shift(Q(a)).eval(Q(x)), p.eval(Q(x + a)));
            EXPECT_EQ(p.scale(Q(a)).eval(Q(x)), p.eval(Q(a * x)));
            EXPECT_EQ(p.compose_power(3).eval(Q(x)), p.eval(Q(x * x * x)));
        }
    RatFun f(P({1, 1}), P({0, 0, 1}));
    EXPECT_EQ(f.compose_inverse(), RatFun(P({0, 1, 1})));
    EXPECT_EQ(f.compose_inverse().compose_inverse(), f);
}
