#include <cmath>
#include <vector>

#include "robustqs/risk.hpp"
#include "test_helpers.hpp"

using namespace rqs;
using rqstest::check_close;
using rqstest::make_family;
using rqstest::make_space;
using rqstest::ratio;

namespace {

template <class T>
PerPrior<T> neg_expectation_block() {
    return [](const Prior<T>& p, const std::vector<T>& restricted) {
        const auto idx = p.support().indices();
        T e(0);
        for (std::size_t k = 0; k < idx.size(); ++k) e += p.weight(idx[k]) * restricted[k];
        return -e;
    };
}

} // namespace

TEST_CASE_TEMPLATE("sup functional construction", T, rqs::Rational, double) {
    auto space = make_space(2);
    auto family = make_family<T>(space, {{T(1), T(0)}, {T(0), T(1)}});
    std::vector<Prior<T>> priors{Prior<T>(space, {T(1), T(0)}), Prior<T>(space, {T(0), T(1)})};

    {
        std::vector<PerPrior<T>> blocks(2, neg_expectation_block<T>());
        auto f = build_sup_functional<T>(family, priors, blocks,
                                         RiskFunctional<T>::Kind::convex, false, false);
        QsVector<T> x(family, {T(1), T(-1)});
        check_close<T>(f.evaluate(x).value(), T(1));
        REQUIRE(f.reduction_family);
        CHECK(f.reduction_family->size() == 2);

        QsVector<T> k = QsVector<T>::constant(family, ratio<T>(3, 2));
        check_close<T>(f.evaluate(k).value(), ratio<T>(-3, 2));
    }
    {
        auto f = make_expectation<T>(family);
        QsVector<T> x(family, {T(4), T(-2)});
        check_close<T>(f.evaluate(x).value(), T(4));
    }
    {
        auto thin = make_family<T>(space, {{T(1), T(0)}});
        std::vector<Prior<T>> bad{Prior<T>(space, {T(0), T(1)})};
        std::vector<PerPrior<T>> blocks(1, neg_expectation_block<T>());
        CHECK_THROWS_AS(build_sup_functional<T>(thin, bad, blocks,
                                                RiskFunctional<T>::Kind::convex, false, false),
                        domination_error);
    }
}

TEST_CASE_TEMPLATE("worst case functional", T, rqs::Rational, double) {
    auto space = make_space(2);
    auto family =
        make_family<T>(space, {{ratio<T>(1, 2), ratio<T>(1, 2)}, {ratio<T>(9, 10), ratio<T>(1, 10)}});
    auto f = make_worst_case<T>(family);

    QsVector<T> x(family, {T(2), T(1)});
    check_close<T>(f.evaluate(x).value(), ratio<T>(19, 10));

    // Cash additivity and monotonicity, randomized.
    ProbeRng rng(611);
    for (int it = 0; it < 40; ++it) {
        auto fam = rqstest::random_family<T>(rng, 2 + rng.below(3), 3);
        auto g = make_worst_case<T>(fam);
        auto a = rqstest::random_qsvector<T>(rng, fam);
        T k = T(static_cast<long>(rng.integer(6))) / T(2);
        check_close<T>(g.evaluate(a.shifted(k)).value(), g.evaluate(a).value() + k);

        std::vector<T> up = a.values();
        for (auto& v : up) v += T(static_cast<long>(rng.below(3)));
        QsVector<T> b(fam, std::move(up));
        CHECK(g.evaluate(a).value() <= g.evaluate(b).value());
    }

    // Invariance across polar modification.
    auto wide = make_space(3);
    auto thin = make_family<T>(wide, {{ratio<T>(1, 2), ratio<T>(1, 2), T(0)}});
    auto h = make_worst_case<T>(thin);
    QsVector<T> u(thin, {T(1), T(2), T(7)});
    QsVector<T> v(thin, {T(1), T(2), T(-7)});
    CHECK(h.evaluate(u).value() == h.evaluate(v).value());
}

TEST_CASE("entropic functional") {
    auto space = make_space(2);

    {
        auto family = make_family<rqs::Rational>(
            space, {{ratio<rqs::Rational>(1, 2), ratio<rqs::Rational>(1, 2)}});
        CHECK_THROWS_AS(make_entropic<rqs::Rational>(family), validation_error);
    }

    auto family = make_family<double>(space, {{0.5, 0.5}});
    auto f = make_entropic<double>(family);
    QsVector<double> x(family, {1.0, 0.0});
    const double want = std::log((std::exp(1.0) + 1.0) / 2.0);
    check_close<double>(f.evaluate(x).value(), want);

    // Cash additivity of the entropic form.
    check_close<double>(f.evaluate(x.shifted(0.75)).value(), want + 0.75);

    // Gibbs probes are normalized reweightings of the priors.
    REQUIRE(f.probe_measures);
    auto probes = f.probe_measures(x);
    REQUIRE(probes.size() == 1);
    check_close<double>(probes[0].total_mass(), 1.0);
    check_close<double>(probes[0].mass(0), std::exp(1.0) / (std::exp(1.0) + 1.0));
}

TEST_CASE_TEMPLATE("average value at risk", T, rqs::Rational, double) {
    auto space = make_space(2);
    auto family = make_family<T>(space, {{ratio<T>(1, 2), ratio<T>(1, 2)}});

    QsVector<T> x(family, {T(1), T(0)});
    check_close<T>(make_avar<T>(family, ratio<T>(1, 2)).evaluate(x).value(), T(1));
    check_close<T>(make_avar<T>(family, ratio<T>(3, 4)).evaluate(x).value(), ratio<T>(2, 3));
    check_close<T>(make_avar<T>(family, T(1)).evaluate(x).value(), ratio<T>(1, 2));

    // Fractional atom split.
    auto skew = make_family<T>(space, {{ratio<T>(2, 3), ratio<T>(1, 3)}});
    QsVector<T> y(skew, {T(3), T(0)});
    check_close<T>(make_avar<T>(skew, ratio<T>(1, 2)).evaluate(y).value(), T(3));
    check_close<T>(make_avar<T>(skew, ratio<T>(5, 6)).evaluate(y).value(), ratio<T>(12, 5));

    // Worst case across priors.
    auto two = make_family<T>(space, {{T(1), T(0)}, {ratio<T>(1, 2), ratio<T>(1, 2)}});
    QsVector<T> z(two, {T(0), T(1)});
    check_close<T>(make_avar<T>(two, ratio<T>(1, 2)).evaluate(z).value(), T(1));

    CHECK_THROWS_AS(make_avar<T>(family, T(0)), validation_error);
    CHECK_THROWS_AS(make_avar<T>(family, T(2)), validation_error);

    // avar at level 1 coincides with the worst-case expectation everywhere.
    ProbeRng rng(612);
    for (int it = 0; it < 25; ++it) {
        auto fam = rqstest::random_family<T>(rng, 2 + rng.below(3), 3);
        auto a = rqstest::random_qsvector<T>(rng, fam);
        check_close<T>(make_avar<T>(fam, T(1)).evaluate(a).value(),
                       make_worst_case<T>(fam).evaluate(a).value());
    }
}

TEST_CASE_TEMPLATE("functional zoo lookup", T, rqs::Rational, double) {
    auto space = make_space(2);
    auto family = make_family<T>(space, {{ratio<T>(1, 2), ratio<T>(1, 2)}});
    QsVector<T> x(family, {T(1), T(0)});

    check_close<T>(make_functional<T>("worst_case", family).evaluate(x).value(), ratio<T>(1, 2));
    check_close<T>(make_functional<T>("expectation", family).evaluate(x).value(), ratio<T>(1, 2));
    check_close<T>(make_functional<T>("avar", family).evaluate(x).value(), T(1));
    CHECK_THROWS_AS(make_functional<T>("sharpe", family), usage_error);
}

TEST_CASE_TEMPLATE("continuity checks", T, rqs::Rational, double) {
    auto space = make_space(2);
    auto family = make_family<T>(space, {{ratio<T>(1, 2), ratio<T>(1, 2)}, {T(1), T(0)}});
    auto f = make_worst_case<T>(family);

    QsVector<T> x(family, {T(2), T(-1)});
    std::vector<QsVector<T>> seq;
    for (long n = 1; n <= 12; ++n) seq.push_back(x.shifted(-T(1) / T(n)));

    CHECK(continuity_checks(f, seq, x, ContinuityMode::fatou).pass);
    CHECK(continuity_checks(f, seq, x, ContinuityMode::monotone).pass);

    // Alternating sequence: no declared limit is compatible with it.
    std::vector<QsVector<T>> alt{QsVector<T>(family, {T(1), T(0)}),
                                 QsVector<T>(family, {T(0), T(1)}),
                                 QsVector<T>(family, {T(1), T(0)}),
                                 QsVector<T>(family, {T(0), T(1)})};
    QsVector<T> claimed(family, {T(1), T(0)});
    CHECK_THROWS_AS(continuity_checks(f, alt, claimed, ContinuityMode::fatou), validation_error);
    CHECK_THROWS_AS(continuity_checks(f, alt, claimed, ContinuityMode::monotone), validation_error);

    // Norm bound enforcement.
    CHECK_THROWS_AS(continuity_checks(f, seq, x, ContinuityMode::fatou, default_tol<T>(),
                                      std::optional<T>(T(1))),
                    validation_error);

    // A jump at zero breaks both modes, with a witness.
    RiskFunctional<T> jump;
    jump.family = family;
    jump.evaluate = [family](const QsVector<T>& y) -> ExtReal<T> {
        T worst = y.values()[0];
        for (std::size_t i = 0; i < y.values().size(); ++i)
            if (family->charged(i) && y.values()[i] > worst) worst = y.values()[i];
        return ExtReal<T>(worst < T(0) ? T(0) : T(1));
    };
    std::vector<QsVector<T>> rising;
    for (long n = 1; n <= 16; ++n)
        rising.push_back(QsVector<T>::constant(family, -T(1) / T(n)));
    QsVector<T> zero = QsVector<T>::constant(family, T(0));

    auto fat = continuity_checks(jump, rising, zero, ContinuityMode::fatou);
    CHECK(!fat.pass);
    CHECK(fat.witness);
    auto mono = continuity_checks(jump, rising, zero, ContinuityMode::monotone);
    CHECK(!mono.pass);
    CHECK(mono.witness);

    CHECK_THROWS_AS(continuity_checks(f, std::vector<QsVector<T>>{}, x, ContinuityMode::fatou),
                    validation_error);
}

TEST_CASE_TEMPLATE("fatou check on randomized convergent sequences", T, rqs::Rational, double) {
    ProbeRng rng(613);
    for (int it = 0; it < 30; ++it) {
        auto fam = rqstest::random_family<T>(rng, 2 + rng.below(3), 3);
        auto f = make_worst_case<T>(fam);
        auto x = rqstest::random_qsvector<T>(rng, fam);
        auto dir = rqstest::random_qsvector<T>(rng, fam);

        std::vector<QsVector<T>> seq;
        T scale(1);
        for (int n = 0; n < 10; ++n) {
            seq.push_back(x + dir.scaled(scale));
            scale /= T(2);
        }
        CHECK(continuity_checks(f, seq, x, ContinuityMode::fatou).pass);
    }
}

TEST_CASE_TEMPLATE("sensitivity certification", T, rqs::Rational, double) {
    auto space = make_space(2);

    {
        auto family = make_family<T>(space, {{T(1), T(0)}, {T(0), T(1)}});
        auto f = make_worst_case<T>(family);
        auto rep = sensitivity_check<T>(family, level_set_oracle(f), *f.reduction_family);
        CHECK(rep.verdict == SensitivityVerdict::certified_ok);
    }
    {
        // Membership decided by an inequality on w1 alone, but the reduction
        // family only sees w2: values on w1 patch freely, so the set is not
        // determined prior-by-prior.
        auto family = make_family<T>(space, {{ratio<T>(1, 2), ratio<T>(1, 2)}});
        auto oracle = polytope_oracle<T>(family, {{{T(1), T(0)}, T(0)}});
        std::vector<Prior<T>> reduction{Prior<T>(space, {T(0), T(1)})};
        auto rep = sensitivity_check<T>(family, oracle, reduction);
        CHECK(rep.verdict == SensitivityVerdict::violation);
        REQUIRE(rep.witness);
        CHECK(!oracle.contains(*rep.witness));
    }
    {
        auto family = make_family<T>(space, {{ratio<T>(1, 2), ratio<T>(1, 2)}});
        auto oracle = polytope_oracle<T>(family, {});
        std::vector<Prior<T>> reduction{Prior<T>(space, {ratio<T>(1, 2), ratio<T>(1, 2)})};
        auto rep = sensitivity_check<T>(family, oracle, reduction);
        CHECK(rep.verdict == SensitivityVerdict::certified_ok);
    }
    {
        // Probe-only oracle without polytope form never certifies.
        auto family = make_family<T>(space, {{ratio<T>(1, 2), ratio<T>(1, 2)}});
        MembershipOracle<T> ball;
        ball.contains = [family](const QsVector<T>& y) {
            return qs_norm(y) <= T(1);
        };
        std::vector<Prior<T>> reduction{Prior<T>(space, {ratio<T>(1, 2), ratio<T>(1, 2)})};
        auto rep = sensitivity_check<T>(family, ball, reduction, 16, 7);
        CHECK(rep.verdict == SensitivityVerdict::no_violation_found);
    }
    {
        auto family = make_family<T>(space, {{T(1), T(0)}});
        auto oracle = polytope_oracle<T>(family, {});
        std::vector<Prior<T>> reduction{Prior<T>(space, {T(0), T(1)})};
        CHECK_THROWS_AS(sensitivity_check<T>(family, oracle, reduction), domination_error);
    }
}

TEST_CASE_TEMPLATE("sup functionals pass their own sensitivity check", T, rqs::Rational, double) {
    ProbeRng rng(614);
    for (int it = 0; it < 25; ++it) {
        auto fam = rqstest::random_family<T>(rng, 2 + rng.below(3), 3);
        auto f = (it % 2 == 0) ? make_worst_case<T>(fam) : make_expectation<T>(fam);
        auto rep = sensitivity_check<T>(fam, level_set_oracle(f), *f.reduction_family, 16,
                                        static_cast<std::uint64_t>(it));
        CHECK(rep.verdict == SensitivityVerdict::certified_ok);
    }
}
