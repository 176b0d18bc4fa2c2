// Acceptance gate: one PASS/FAIL line per criterion. All comparisons are exact;
// the only tolerances are the wall-clock limits below.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>

#include "audit.hpp"
#include "fixtures.hpp"
#include "torsion_fixtures.hpp"
#include "logconn/existence.hpp"
#include "logconn/format.hpp"

using namespace logconn;
using namespace logconn::testing;

namespace {

struct Outcome {
    bool pass = true;
    long cases = 0;
    std::string note;

    void require(bool ok, const std::string& what)
    {
        if (!ok && pass) {
            pass = false;
            note = what;
        }
    }
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<void(Outcome&)>& body)
{
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs >= limit_s)
        o.require(false, "over the time limit");
    if (!o.pass)
        ++failures;
    char line[512];
    std::snprintf(line, sizeof line, "%s  %d  %-44s %6ld cases  %8.3f s", o.pass ? "PASS" : "FAIL", id, name, o.cases, secs);
    std::cout << line;
    if (limit_s > 0)
        std::cout << " (limit " << limit_s << " s)";
    if (!o.note.empty())
        std::cout << "  -- " << o.note;
    std::cout << std::endl;
}

const P1Point kZero = P1Point::finite(FieldElement(0));
const P1Point kInf = P1Point::infinity();

FieldElement frac(long a, long b) { return FieldElement(Rational(a, b)); }

FMatrix diag_of(const std::vector<FieldElement>& d)
{
    FMatrix m(d.size(), d.size());
    for (size_t i = 0; i < d.size(); ++i)
        m(i, i) = d[i];
    return m;
}

/// Diagonalizable with exactly the given multiset: nullities of (M - w) add up to the size.
bool spectrum_is(const FMatrix& m, const std::map<Rational, size_t>& want)
{
    size_t total = 0;
    for (const auto& [w, mult] : want) {
        size_t nullity = m.rows() - rank(m - FMatrix::identity(m.rows()) * FieldElement(w));
        if (nullity != mult)
            return false;
        total += mult;
    }
    return total == m.rows();
}

}  // namespace

int main()
{
    install_audit_hook();

    criterion(1, "local-model residue law", 1.0, [](Outcome& o) {
        // fiber action zeta^-m on sections means the matrix R = zeta^m in the convention s(zeta y) = R s(y)
        for (unsigned n = 2; n <= 6; ++n) {
            auto cv = CoverDesc::make(n, field_make(n));
            for (long m = 0; m < static_cast<long>(n); ++m) {
                EquivariantConnection e{cv, LogConnection{SplitBundle{{0}}, RMatrix(1, 1), {}}, FMatrix{{cv.zeta(m)}}};
                ParabolicConnection p = invariant_part(e);
                o.require(residue_at(p.conn, kZero).matrix == FMatrix{{frac(m, n)}},
                          "n=" + std::to_string(n) + " m=" + std::to_string(m));
                ++o.cases;
            }
        }
    });

    criterion(2, "pushforward spectrum", 0, [](Outcome& o) {
        for (unsigned n = 2; n <= 6; ++n) {
            auto cv = CoverDesc::make(n, field_make(n));
            EquivariantConnection e{cv, LogConnection{SplitBundle{{0}}, RMatrix(1, 1), {}}, FMatrix{{FieldElement(1)}}};
            LogConnection pf = pushforward_full(e);
            std::vector<long> twists(n, -1);
            twists[0] = 0;
            std::vector<FieldElement> d;
            for (long k = 0; k < static_cast<long>(n); ++k)
                d.push_back(frac(k, n));
            std::string tag = "n=" + std::to_string(n);
            o.require(pf.bundle.twists == twists, tag + " twists");
            o.require(residue_at(pf, kZero).matrix == diag_of(d), tag + " residue at 0");
            o.require(fuchs_check(pf).is_zero(), tag + " degree defect");
            ++o.cases;
        }
    });

    criterion(3, "parabolic round trip with explicit gauge", 30.0, [](Outcome& o) {
        std::mt19937 rng(0xacce55);
        for (int t = 0; t < 200; ++t) {
            unsigned n = 2 + rng() % 5;
            size_t r = 1 + rng() % 4;
            auto cv = CoverDesc::make(n, field_make(n));
            ParabolicConnection p = random_parabolic(rng, r, cv, 2);
            RoundtripReport rep = roundtrip_check(p, cv);
            std::string tag = "fixture " + std::to_string(t) + " (n=" + std::to_string(n) + ", rank " + std::to_string(r) + ")";
            o.require(rep.ok && rep.gauge && rep.recovered, tag + ": " + rep.message);
            if (rep.ok && rep.gauge && rep.recovered) {
                o.require(rep.recovered->conn.bundle.sorted_twists() == p.conn.bundle.sorted_twists(), tag + " twists");
                for (const auto& f : p.flags) {
                    const ParabolicFlag* g = rep.recovered->flag_at(f.point);
                    o.require(g && g->weights == f.weights && g->multiplicities == f.multiplicities, tag + " weights");
                }
                // g^{-1} A_rec g + g^{-1} g' must reproduce the input exactly
                LogConnection q = rep.recovered->conn;
                q.singular_set = union_points(q.singular_set, p.conn.singular_set);
                o.require(gauge_transform(q, *rep.gauge, p.conn.bundle).matrix == p.conn.matrix, tag + " gauge");
            }
            ++o.cases;
        }
    });

    criterion(4, "invariant-part spectrum law", 0, [](Outcome& o) {
        std::mt19937 rng(0x5bec);
        for (int t = 0; t < 200; ++t) {
            unsigned n = 2 + rng() % 5;
            size_t r = 1 + rng() % 4;
            auto cv = CoverDesc::make(n, field_make(n));
            EquivariantConnection e = random_equivariant(rng, r, cv, 2);
            ParabolicConnection p = invariant_part(e);
            std::map<Rational, size_t> at0, atinf;
            for (long k = 0; k < static_cast<long>(n); ++k) {
                size_t dim = r - rank(e.action - FMatrix::identity(r) * cv.zeta(k));
                if (dim == 0)
                    continue;
                at0[Rational(k, n)] += dim;
                atinf[Rational((n - k) % n, n)] += dim;
            }
            std::string tag = "fixture " + std::to_string(t);
            o.require(spectrum_is(residue_at(p.conn, kZero).matrix, at0), tag + " at 0");
            o.require(spectrum_is(residue_at(p.conn, kInf).matrix, atinf), tag + " at inf");
            ++o.cases;
        }
    });

    criterion(6, "fixed point iff induced (monodromy)", 60.0, [](Outcome& o) {
        std::mt19937 rng(0x7e0);
        long induced = 0, plain = 0;
        while (induced < 100) {
            unsigned n = 2 + rng() % 3;
            size_t g = 1 + rng() % 3, k = 1 + rng() % 2;
            auto ctx = field_make(n);
            Character chi = random_character(rng, ctx, n, g);
            Representation sigma = random_rep(rng, schreier_for(chi).generators.size(), k, ctx);
            Representation rho = induce(sigma, chi);
            FixedPointResult fp = certify_fixed_point(rho, chi);
            std::string tag = "induced fixture " + std::to_string(induced);
            o.require(fp.status == FixedPointStatus::certified, tag + ": " + status_name(fp.status));
            if (fp.status == FixedPointStatus::certified) {
                o.require(verify_certificate(rho, chi, *fp.certificate).ok, tag + " certificate");
                Decomposition d = decompose(rho, chi, *fp.certificate);
                o.require(find_isomorphism(induce(d.sigma, chi), rho).has_value(), tag + " induce(decompose) != rho");
                o.require(induce_roundtrip(sigma, chi), tag + " decompose(induce) != sigma");
            }
            ++induced;
        }
        for (long tries = 0; plain < 100 && tries < 2000; ++tries) {
            unsigned n = 2 + rng() % 3;
            size_t g = 1 + rng() % 3;
            auto ctx = field_make(n);
            Representation rho = random_rep(rng, g, n * (1 + rng() % (6 / n)), ctx);
            Character chi = random_character(rng, ctx, n, g);
            if (!is_irreducible(rho) || kronecker_intertwiner_dim(rho, twist(rho, chi)) != 0)
                continue;
            FixedPointResult fp = certify_fixed_point(rho, chi);
            o.require(fp.status == FixedPointStatus::not_fixed, "non-induced fixture " + std::to_string(plain) + ": " + status_name(fp.status));
            ++plain;
        }
        o.require(plain >= 100, "only " + std::to_string(plain) + " non-induced fixtures");
        o.cases = induced + plain;
    });

    criterion(7, "existence three-way agreement sweep", 120.0, [](Outcome& o) {
        const std::vector<Rational> lams{Rational(0), Rational(1), Rational(-1), Rational(1, 2), Rational(-1, 2), Rational(1, 3)};
        const std::vector<P1Point> pts{kZero, P1Point::finite(FieldElement(1)), P1Point::finite(FieldElement(-1))};
        long exists = 0;
        for (size_t r = 1; r <= 3; ++r) {
            size_t tw_count = 1;
            for (size_t i = 0; i < r; ++i)
                tw_count *= 7;
            for (size_t tc = 0; tc < tw_count; ++tc) {
                SplitBundle e;
                for (size_t i = 0, c = tc; i < r; ++i, c /= 7)
                    e.twists.push_back(static_cast<long>(c % 7) - 3);
                for (size_t k = 0; k <= 3; ++k) {
                    size_t lc = 1;
                    for (size_t i = 0; i < k; ++i)
                        lc *= lams.size();
                    for (size_t code = 0; code < lc; ++code) {
                        ResiduePrescription p;
                        for (size_t i = 0, c = code; i < k; ++i, c /= lams.size()) {
                            p.points.push_back(pts[i]);
                            p.lambdas.push_back(FieldElement(lams[c % lams.size()]));
                        }
                        FieldElement deg = FieldElement(e.degree()) + FieldElement(static_cast<long>(r)) * p.lambda_sum();
                        if (!deg.is_zero())
                            continue;
                        AgreementReport rep = oracle_agreement(e, p);
                        o.require(rep.ok, rep.message);
                        // theta(Id) is recomputed here from the functional itself
                        ObstructionFunctional th = cech_obstruction(e, p);
                        FieldElement id;
                        for (size_t i = 0; i < r; ++i)
                            id += th.at({i, i, 0});
                        o.require(id == FieldElement(e.degree()) + FieldElement(static_cast<long>(r)) * p.lambda_sum(),
                                  "theta(Id) law");
                        exists += rep.criterion;
                        ++o.cases;
                    }
                }
            }
        }
        o.require(exists > 0 && exists < o.cases, "sweep is one-sided");
    });

    criterion(8, "print/parse round trip", 10.0, [](Outcome& o) {
        std::mt19937 rng(0xf0a7);
        const std::vector<unsigned> orders{1, 3, 4, 5, 8, 12};
        for (int t = 0; t < 10000; ++t) {
            auto ctx = field_make(orders[static_cast<size_t>(t) % orders.size()]);
            switch (t % 3) {
            case 0: {
                FieldElement x = wide_element(rng, ctx);
                o.require(parse_scalar(print_scalar(x), ctx) == x, "scalar " + print_scalar(x));
                break;
            }
            case 1: {
                RatFun f = random_ratfun(rng, ctx);
                o.require(parse_ratfun(print_ratfun(f), ctx) == f, "function " + print_ratfun(f));
                break;
            }
            default: {
                size_t r = 1 + rng() % 3;
                RMatrix m(r, r);
                for (size_t i = 0; i < r; ++i)
                    for (size_t j = 0; j < r; ++j)
                        m(i, j) = random_ratfun(rng, ctx, 2);
                std::string text = matrix_json(m).dump();
                o.require(rmatrix_from_json(nlohmann::json::parse(text), ctx) == m, "matrix " + text);
            }
            }
            ++o.cases;
        }
    });

    // criterion 5 last, so it covers every connection published above
    criterion(5, "degree relation on every published connection", 0, [](Outcome& o) {
        auto& k = audit_counters();
        o.cases = k.seen;
        o.require(k.seen > 0, "audit hook saw nothing");
        o.require(k.failures == 0, std::to_string(k.failures.load()) + " connections with a nonzero defect");
    });

    std::cout << (failures ? "FAILED: " + std::to_string(failures) + " criteria" : std::string("all criteria passed")) << std::endl;
    return failures ? 1 : 0;
}
