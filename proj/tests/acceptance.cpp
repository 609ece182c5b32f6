// Acceptance gate: every release-blocking criterion in one binary, one
// verdict line each. Exit status is the number of failed criteria. Seeds,
// instance counts, and tolerances are pinned here; loosening any of them
// is a release decision, not a test fix.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "gen.hpp"
#include "robustqs/duality.hpp"
#include "robustqs/engine.hpp"
#include "robustqs/pricing.hpp"
#include "robustqs/risk.hpp"

using namespace rqs;
using namespace rqstest;

namespace {

struct Gate {
    int failures = 0;

    void verdict(int index, const std::string& name, bool pass, const std::string& detail) {
        std::printf("%s  criterion %2d  %s (%s)\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixture_path(const char* name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

// Parallel generator streams: the same seed drives the same structural
// draws for both backends, so each random model is priced in both modes.
template <class T>
struct PricedInstance {
    GeneratedMarket<T> market;
    QsVector<T> payoff;
};

template <class T>
PricedInstance<T> draw_priced(ProbeRng& rng, bool polar) {
    auto g = random_na_market<T>(rng, 32, 3, 2, 8, polar);
    auto x = random_qsvector<T>(rng, g.family);
    return {std::move(g), std::move(x)};
}

// 1. Superhedging duality: primal minimum equals dual maximum over the
// martingale polytope, exactly on rationals and within 1e-8 on doubles.
void criterion_1(Gate& gate) {
    const int kModels = 220;
    const double kFloatTol = 1e-8;
    const auto start = std::chrono::steady_clock::now();

    ProbeRng rng_exact(101), rng_float(101);
    double worst_float_gap = 0;
    int bad = 0;
    for (int it = 0; it < kModels; ++it) {
        const bool polar = it % 4 == 0;
        auto exact = draw_priced<Rational>(rng_exact, polar);
        auto res = superhedge(exact.market.model, *exact.market.family, exact.payoff);
        if (res.gap != Rational(0)) ++bad;

        auto fl = draw_priced<double>(rng_float, polar);
        auto fres = superhedge(fl.market.model, *fl.market.family, fl.payoff);
        const double gap = std::fabs(fres.gap);
        if (gap > worst_float_gap) worst_float_gap = gap;
        if (gap > kFloatTol) ++bad;
    }
    const double elapsed = seconds_since(start);

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%d models priced in both modes, %d gap violations, worst float gap %.2e, "
                  "%.1fs of 120s",
                  kModels, bad, worst_float_gap, elapsed);
    gate.verdict(1, "superhedging duality gap", bad == 0 && elapsed <= 120.0, detail);
}

// 2. The arbitrage test and the martingale-equivalence criterion reach the
// same verdict, across plain, engineered-arbitrage, and polar-laden models.
void criterion_2(Gate& gate) {
    ProbeRng rng(202);
    int total = 0, disagreements = 0, wrong_verdicts = 0, arbitrage_models = 0, polar_models = 0;

    auto run = [&](bool engineered, bool force_polar) {
        GeneratedMarket<Rational> g =
            engineered ? random_arbitrage_market<Rational>(rng, 16, 3, 2, 6, force_polar)
                       : random_na_market<Rational>(rng, 16, 3, 2, 6, force_polar);
        auto report = ftap_check(g.model, *g.family);
        ++total;
        if (!report.agree) ++disagreements;
        if (report.na.arbitrage != engineered) ++wrong_verdicts;
        if (report.na.arbitrage) ++arbitrage_models;
        if (!g.family->polar_atoms().empty()) ++polar_models;
    };

    for (int it = 0; it < 300; ++it) run(false, it % 3 == 0);
    for (int it = 0; it < 200; ++it) run(true, it % 2 == 0);

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%d models, %d disagreements, %d wrong constructed verdicts, "
                  "%d arbitrage, %d with polar outcomes",
                  total, disagreements, wrong_verdicts, arbitrage_models, polar_models);
    gate.verdict(2, "arbitrage test vs martingale equivalence",
                 disagreements == 0 && wrong_verdicts == 0 && total >= 500 &&
                     arbitrage_models >= 50 && polar_models >= 50,
                 detail);
}

// 3. Bipolar identity: hedging-cone membership coincides with nonpositive
// expectation at every martingale vertex.
void criterion_3(Gate& gate) {
    ProbeRng rng(303);
    int total = 0, disagreements = 0, members = 0, nonmembers = 0;

    while (total < 200) {
        auto g = random_na_market<Rational>(rng, 10, 2, 2, 4, total % 5 == 0);
        QsVector<Rational> x = random_qsvector<Rational>(rng, g.family);
        switch (total % 3) {
            case 0: {
                // Dominated by a strategy's gains, so in the cone.
                auto h = random_strategy<Rational>(rng, g.model);
                auto gi = gains<Rational>(g.model, h, g.family);
                x = gi - QsVector<Rational>::constant(g.family, Rational(rng.below(2)));
                break;
            }
            case 1:
                // Strictly positive somewhere charged with nonnegative rest.
                x = x.abs() + QsVector<Rational>::constant(g.family, Rational(1));
                break;
            default:
                break;
        }
        auto report = bipolar_check(g.model, *g.family, x);
        ++total;
        if (!report.agree) ++disagreements;
        if (report.member) ++members; else ++nonmembers;
    }

    char detail[120];
    std::snprintf(detail, sizeof(detail), "%d pairs, %d disagreements, %d members, %d outside",
                  total, disagreements, members, nonmembers);
    gate.verdict(3, "bipolar identity", disagreements == 0 && members > 0 && nonmembers > 0,
                 detail);
}

// 4. The hand-solved binomial fixture, through the library and the CLI.
void criterion_4(Gate& gate) {
    bool ok = true;
    std::string why = "library exact, library float, and CLI all match";

    {
        auto m = binomial_model<Rational>();
        auto fam = binomial_family<Rational>(m);
        QsVector<Rational> call(fam, {Rational(1), Rational(0)});
        auto res = superhedge(m, *fam, call);
        const Rational third = ratio<Rational>(1, 3);
        if (!(res.price == third && res.lower_price == third && res.gap == Rational(0) &&
              res.strategy.holdings[0][0][0] == ratio<Rational>(2, 3) &&
              res.strategy.holdings[0][0][1] == ratio<Rational>(2, 3) &&
              res.dual.mass(0) == third && res.dual.mass(1) == ratio<Rational>(2, 3))) {
            ok = false;
            why = "exact library surface deviates from the hand-solved values";
        }
    }
    {
        auto m = binomial_model<double>();
        auto fam = binomial_family<double>(m);
        QsVector<double> call(fam, {1.0, 0.0});
        auto res = superhedge(m, *fam, call);
        if (!(std::fabs(res.price - 1.0 / 3.0) <= 1e-9 &&
              std::fabs(res.strategy.holdings[0][0][0] - 2.0 / 3.0) <= 1e-9 &&
              std::fabs(res.dual.mass(1) - 2.0 / 3.0) <= 1e-9)) {
            ok = false;
            why = "float library surface deviates beyond 1e-9";
        }
    }
    {
        auto run = run_cli({"price", "--model", fixture_path("binomial.json"), "--payoff", "call",
                            "--mode", "exact"});
        if (run.exit_code != 0 || run.out.find("\"price\": \"1/3\"") == std::string::npos ||
            run.out.find("\"gap\": \"0\"") == std::string::npos ||
            run.out.find("\"2/3\"") == std::string::npos) {
            ok = false;
            why = "CLI report deviates from the golden strings";
        }
    }
    gate.verdict(4, "binomial golden fixture", ok, why);
}

// 5. Convex bidual representation: exact recovery for worst-case
// functionals, 1e-3 relative recovery for the entropic family under the
// default discretization.
void criterion_5(Gate& gate) {
    ProbeRng rng(505);
    int exact_bad = 0;
    const int kExact = 110;
    for (int it = 0; it < kExact; ++it) {
        auto fam = random_family<Rational>(rng, 2 + rng.below(3), 4);
        auto f = make_worst_case<Rational>(fam);
        auto x = random_qsvector<Rational>(rng, fam);
        const Rational direct = f.evaluate(x).value();
        if (bidual_convex(f, x) != direct) ++exact_bad;
    }

    int entropic_bad = 0;
    double worst_rel = 0;
    const int kEntropic = 12;
    ProbeRng erng(515);
    for (int it = 0; it < kEntropic; ++it) {
        auto fam = random_family<double>(erng, 2 + erng.below(2), 3);
        auto f = make_entropic<double>(fam);
        auto x = random_qsvector<double>(erng, fam);
        const double direct = f.evaluate(x).value();
        const double bid = bidual_convex(f, x);
        const double rel = std::fabs(bid - direct) / std::max(1.0, std::fabs(direct));
        if (rel > worst_rel) worst_rel = rel;
        if (rel > 1e-3 || bid > direct + 1e-9) ++entropic_bad;
    }

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%d worst-case payoffs (%d inexact), %d entropic payoffs (%d beyond 1e-3, "
                  "worst rel %.2e)",
                  kExact, exact_bad, kEntropic, entropic_bad, worst_rel);
    gate.verdict(5, "convex bidual recovery", exact_bad == 0 && entropic_bad == 0, detail);
}

bool ext_nondecreasing(const std::vector<ExtReal<Rational>>& values) {
    for (std::size_t i = 1; i < values.size(); ++i) {
        const auto& a = values[i - 1];
        const auto& b = values[i];
        if (a.is_pos_inf() && !b.is_pos_inf()) return false;
        if (!a.is_pos_inf() && !b.is_pos_inf() && b.value() < a.value()) return false;
    }
    return true;
}

// 6. Quasiconvex bidual: max over measures of R(t, mu) at t = integral of
// x dmu matches direct evaluation; the dual function is monotone in t.
void criterion_6(Gate& gate) {
    ProbeRng rng(606);
    int agree_bad = 0;
    double worst_err = 0;
    const int kPayoffs = 50;
    BidualOptions<double> opts;
    opts.mesh = 8;
    opts.point_cap = 256;
    for (int it = 0; it < kPayoffs; ++it) {
        auto fam = random_family<double>(rng, 2 + rng.below(3), 3);
        auto f = (it % 2 == 0) ? make_worst_case<double>(fam) : make_expectation<double>(fam);
        auto x = random_qsvector<double>(rng, fam);
        const double direct = f.evaluate(x).value();
        const double v = bidual_quasiconvex(f, x, opts);
        const double err = std::fabs(v - direct);
        if (err > worst_err) worst_err = err;
        if (err > 1e-6) ++agree_bad;
    }

    ProbeRng mrng(616);
    int grid_bad = 0, grids = 0;
    for (int it = 0; it < 10; ++it) {
        auto fam = random_family<Rational>(mrng, 2 + mrng.below(2), 3);
        auto f = (it % 2 == 0) ? make_worst_case<Rational>(fam) : make_expectation<Rational>(fam);

        std::vector<MeasureVector<Rational>> tested;
        for (const auto& p : fam->priors())
            tested.push_back(MeasureVector<Rational>::from_prior(p));
        {
            const auto& support = fam->qs_support().indices();
            std::vector<Rational> masses(fam->space().size(), Rational(0));
            for (auto i : support) masses[i] = Rational(1) / Rational(long(support.size()));
            tested.emplace_back(fam->space_ptr(), std::move(masses));
        }

        // One box for the whole grid: the truncated dual function is only
        // monotone when every level sees the same search region.
        QuasiROptions<Rational> ropts;
        ropts.box = Rational(24);
        for (const auto& mu : tested) {
            std::vector<ExtReal<Rational>> values;
            for (int k = 0; k < 20; ++k) {
                const Rational t = Rational(-2) + ratio<Rational>(4, 19) * Rational(k);
                values.push_back(quasi_R(f, t, mu, ropts).value);
            }
            ++grids;
            if (!ext_nondecreasing(values)) ++grid_bad;
        }
    }

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "%d payoffs (%d beyond 1e-6, worst err %.2e), %d level grids (%d not monotone)",
                  kPayoffs, agree_bad, worst_err, grids, grid_bad);
    gate.verdict(6, "quasiconvex bidual and level monotonicity", agree_bad == 0 && grid_bad == 0,
                 detail);
}

// 7. Sensitivity: sup-of-expectations level sets are decided prior by
// prior; a half-space that ignores the reduction family is refuted with a
// witness.
void criterion_7(Gate& gate) {
    ProbeRng rng(707);
    int certified = 0;
    const int kFunctionals = 40;
    for (int it = 0; it < kFunctionals; ++it) {
        auto fam = random_family<Rational>(rng, 2 + rng.below(4), 4);
        auto f = (it % 2 == 0) ? make_worst_case<Rational>(fam) : make_expectation<Rational>(fam);
        auto rep = sensitivity_check<Rational>(fam, level_set_oracle(f), *f.reduction_family, 32,
                                               static_cast<std::uint64_t>(it));
        if (rep.verdict == SensitivityVerdict::certified_ok) ++certified;
    }

    bool violation_ok = false;
    {
        auto space = make_space(2);
        auto fam = make_family<Rational>(space, {{ratio<Rational>(1, 2), ratio<Rational>(1, 2)}});
        auto oracle = polytope_oracle<Rational>(fam, {{{Rational(1), Rational(0)}, Rational(0)}});
        std::vector<Prior<Rational>> reduction{Prior<Rational>(space, {Rational(0), Rational(1)})};
        auto rep = sensitivity_check<Rational>(fam, oracle, reduction);
        violation_ok = rep.verdict == SensitivityVerdict::violation && rep.witness &&
                       !oracle.contains(*rep.witness);
    }

    char detail[120];
    std::snprintf(detail, sizeof(detail), "%d of %d functionals certified, violation witness %s",
                  certified, kFunctionals, violation_ok ? "found" : "missing");
    gate.verdict(7, "prior-by-prior sensitivity", certified == kFunctionals && violation_ok,
                 detail);
}

// 8. Greedy reduction: the surviving subfamily is equivalent to the input
// and no larger than the support size.
void criterion_8(Gate& gate) {
    ProbeRng rng(808);
    int bad = 0;
    const int kFamilies = 200;
    for (int it = 0; it < kFamilies; ++it) {
        auto fam = random_family<Rational>(rng, 2 + rng.below(7), 8);
        auto red = reduce_family(*fam);
        bool ok = red.family.size() <= fam->qs_support().size() &&
                  red.picked.size() == red.family.size() &&
                  family_dominance(*fam, red.family) == FamilyOrder::equivalent;
        for (std::size_t k = 0; ok && k < red.picked.size(); ++k) {
            if (red.picked[k] >= fam->size()) ok = false;
            if (k > 0 && red.picked[k] <= red.picked[k - 1]) ok = false;
            if (ok && !(red.family.priors()[k].weights() ==
                        fam->priors()[red.picked[k]].weights()))
                ok = false;
        }
        // Polar events must coincide: probe a few random events.
        for (int e = 0; ok && e < 5; ++e) {
            auto idx = random_subset(rng, fam->space().size(), false);
            EventSet ev = EventSet::of_indices(idx, fam->space().size());
            const bool zero_full = capacity(*fam, ev) == Rational(0);
            const bool zero_red = capacity(red.family, ev) == Rational(0);
            if (zero_full != zero_red) ok = false;
        }
        if (!ok) ++bad;
    }

    char detail[96];
    std::snprintf(detail, sizeof(detail), "%d families reduced, %d violations", kFamilies, bad);
    gate.verdict(8, "prior family reduction", bad == 0, detail);
}

// 9. Essential supremum: least upper bound in the quasi-sure order, and
// the exact patchwork formula on disjointly supported nonnegative parts.
void criterion_9(Gate& gate) {
    ProbeRng rng(909);
    int bad = 0, bounds_checked = 0;
    const int kSets = 200;
    for (int it = 0; it < kSets; ++it) {
        auto fam = random_family<Rational>(rng, 2 + rng.below(7), 4);
        const std::size_t n = fam->space().size();

        std::vector<QsVector<Rational>> set;
        const std::size_t count = 1 + rng.below(6);
        for (std::size_t k = 0; k < count; ++k) set.push_back(random_qsvector<Rational>(rng, fam));
        auto u = ess_sup(*fam, set);

        bool ok = true;
        for (const auto& x : set)
            if (!qs_leq(x, u)) ok = false;

        // Any competing upper bound must dominate u.
        for (int b = 0; b < 4; ++b) {
            std::vector<Rational> raw(n, Rational(0));
            for (std::size_t i = 0; i < n; ++i)
                raw[i] = b % 2 == 0 ? u[i] + Rational(long(rng.below(2)))
                                    : Rational(rng.integer(8)) / Rational(2);
            QsVector<Rational> cand(fam, std::move(raw));
            bool upper = true;
            for (const auto& x : set)
                if (!qs_leq(x, cand)) upper = false;
            if (upper) {
                ++bounds_checked;
                if (!qs_leq(u, cand)) ok = false;
            }
        }

        // Patchwork: nonnegative parts on disjoint support blocks.
        {
            const auto& support = fam->qs_support().indices();
            std::vector<std::size_t> owner(n, 0);
            const std::size_t parts = 1 + rng.below(3);
            for (auto i : support) owner[i] = rng.below(parts);
            std::vector<QsVector<Rational>> pieces;
            std::vector<Rational> expected(n, Rational(0));
            for (std::size_t p = 0; p < parts; ++p) {
                std::vector<Rational> vals(n, Rational(0));
                for (auto i : support)
                    if (owner[i] == p) {
                        vals[i] = Rational(long(rng.below(9))) / Rational(2);
                        expected[i] = vals[i];
                    }
                pieces.emplace_back(fam, std::move(vals));
            }
            auto patch = ess_sup(*fam, pieces);
            if (!(patch.values() == expected)) ok = false;
        }
        if (!ok) ++bad;
    }

    char detail[120];
    std::snprintf(detail, sizeof(detail), "%d sets, %d violations, %d upper bounds exercised",
                  kSets, bad, bounds_checked);
    gate.verdict(9, "essential supremum completeness", bad == 0 && bounds_checked >= 200, detail);
}

// 10. Monotone and Fatou continuity of the superhedging price and the
// worst-case functional along bounded monotone sequences.
void criterion_10(Gate& gate) {
    const double kTol = 1e-9;
    ProbeRng rng(1010);
    int sequences = 0, bad = 0;

    auto run_sequence = [&](const RiskFunctional<double>& f, const QsVector<double>& limit,
                            ProbeRng& r) {
        std::vector<double> bump(limit.family().space().size(), 0.0);
        for (auto i : limit.family().qs_support().indices())
            bump[i] = static_cast<double>(r.below(5)) / 2.0;
        QsVector<double> g(limit.family_ptr(), std::move(bump));

        std::vector<QsVector<double>> seq;
        for (int k = 1; k <= 10; ++k) seq.push_back(limit - g.scaled(1.0 / k));

        ++sequences;
        auto mono = continuity_checks(f, seq, limit, ContinuityMode::monotone, kTol);
        auto fatou = continuity_checks(f, seq, limit, ContinuityMode::fatou, kTol);
        if (!mono.pass || !fatou.pass) ++bad;
    };

    for (int it = 0; it < 60; ++it) {
        auto fam = random_family<double>(rng, 2 + rng.below(4), 4);
        auto f = make_worst_case<double>(fam);
        run_sequence(f, random_qsvector<double>(rng, fam), rng);
    }

    ProbeRng prng(1020);
    for (int it = 0; it < 48; ++it) {
        auto g = random_na_market<double>(prng, 8, 2, 2, 4, it % 4 == 0);
        RiskFunctional<double> price;
        price.family = g.family;
        price.kind = RiskFunctional<double>::Kind::convex;
        price.cash_additive = true;
        price.monotone = true;
        const auto model = g.model;
        const auto fam = g.family;
        price.evaluate = [model, fam](const QsVector<double>& x) {
            return ExtReal<double>(superhedge(model, *fam, x).price);
        };
        run_sequence(price, random_qsvector<double>(prng, g.family), prng);
    }

    char detail[96];
    std::snprintf(detail, sizeof(detail), "%d sequences checked in both modes, %d failures",
                  sequences, bad);
    gate.verdict(10, "monotone and Fatou continuity", bad == 0 && sequences >= 100, detail);
}

} // namespace

int main() {
    Gate gate;
    criterion_1(gate);
    criterion_2(gate);
    criterion_3(gate);
    criterion_4(gate);
    criterion_5(gate);
    criterion_6(gate);
    criterion_7(gate);
    criterion_8(gate);
    criterion_9(gate);
    criterion_10(gate);
    std::printf("%s: %d of 10 criteria failed\n", gate.failures == 0 ? "ACCEPT" : "REJECT",
                gate.failures);
    return gate.failures;
}
