#include "she/strategy.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace she;

namespace {

const InverterConfig kPlant = InverterConfig::uniform(3, 100.0);

PsoParams quick() {
    PsoParams p;
    p.swarm_size = 30;
    p.max_iterations = 300;
    return p;
}

SweepRow fake_row(double pu, Method m, double thd_total) {
    SweepRow r;
    r.v_out_pu = pu;
    r.method = m;
    r.thd_total_pct = thd_total;
    return r;
}

} // namespace

TEST_CASE("method names") {
    CHECK(to_string(Method::classic) == "classic");
    CHECK(parse_method("proposed") == Method::proposed);
    CHECK_THROWS_AS(parse_method("halved"), Error);
}

TEST_CASE("plant resolution") {
    SUBCASE("proposed below the threshold halves the DC link") {
        const auto r = resolve_plant(kPlant, {0.3, Method::proposed});
        CHECK(r.halved);
        CHECK(r.effective_vdc == 50.0);
        CHECK(r.effective_target_pu == doctest::Approx(0.6));
        CHECK(r.effective.vdc == 50.0);
        CHECK(r.effective.base_voltage == 150.0);
        CHECK(r.effective.cells == 3);
    }
    SUBCASE("proposed above the threshold matches classic") {
        const auto p = resolve_plant(kPlant, {0.7, Method::proposed});
        const auto c = resolve_plant(kPlant, {0.7, Method::classic});
        CHECK_FALSE(p.halved);
        CHECK(p.effective == c.effective);
        CHECK(p.effective_target_pu == c.effective_target_pu);
    }
    SUBCASE("classic is the identity") {
        const auto r = resolve_plant(kPlant, {0.5, Method::classic});
        CHECK(r.effective_vdc == 100.0);
        CHECK(r.effective_target_pu == 0.5);
    }
    SUBCASE("the threshold itself belongs to the halved regime") {
        CHECK(resolve_plant(kPlant, {0.5, Method::proposed}).halved);
        CHECK(resolve_plant(kPlant, {0.5, Method::proposed}).effective_target_pu == 1.0);
        CHECK_FALSE(resolve_plant(kPlant, {0.5000001, Method::proposed}).halved);
    }
    SUBCASE("output fundamental is preserved exactly") {
        std::mt19937_64 rng(51);
        std::uniform_real_distribution<double> u(1e-6, 0.5);
        for (int i = 0; i < 1000; ++i) {
            const double pu = u(rng);
            const auto r = resolve_plant(kPlant, {pu, Method::proposed});
            CHECK(kPlant.cells * r.effective_vdc * r.effective_target_pu == kPlant.cells * kPlant.vdc * pu);
            CHECK(r.effective_target_pu * r.effective.base_voltage == pu * kPlant.base_voltage);
        }
    }
    SUBCASE("invalid inputs") {
        CHECK_THROWS_AS(resolve_plant(kPlant, {0.0, Method::classic}), Error);
        CHECK_THROWS_AS(resolve_plant(kPlant, {1.2, Method::classic}), Error);
        CHECK_THROWS_AS(resolve_plant(kPlant, {0.3, Method::proposed}, 0.0), Error);
        // A threshold above 0.5 can demand more than the halved plant delivers.
        CHECK_THROWS_AS(resolve_plant(kPlant, {0.7, Method::proposed}, 0.8), Error);
    }
}

TEST_CASE("solving one operating point") {
    for (Method m : {Method::classic, Method::proposed}) {
        const auto row = solve_operating_point(kPlant, {0.1, m}, quick(), SheOptions{});
        CHECK(row.achieved_v1 == doctest::Approx(30.0).epsilon(1e-3));
        CHECK(row.achieved_pu == doctest::Approx(0.1).epsilon(1e-3));
        CHECK(row.thd_total_pct >= row.thd_spectral_pct);
        CHECK(row.best_cost == row.solve.best_cost);
        CHECK(row.effective_vdc == (m == Method::classic ? 100.0 : 50.0));
    }
}

TEST_CASE("halving reduces the waveform peak") {
    const auto row = solve_operating_point(kPlant, {0.3, Method::proposed}, quick(), SheOptions{});
    const auto plant = resolve_plant(kPlant, {0.3, Method::proposed}).effective;
    const auto w = synthesize(plant, row.angles, 4096);
    CHECK(*std::max_element(w.begin(), w.end()) == 150.0);

    const auto classic = solve_operating_point(kPlant, {0.3, Method::classic}, quick(), SheOptions{});
    const auto wc = synthesize(kPlant, classic.angles, 4096);
    CHECK(*std::max_element(wc.begin(), wc.end()) == 300.0);
}

TEST_CASE("row seeds") {
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < 100; ++i)
        seen.insert(row_seed(42, i));
    CHECK(seen.size() == 100);
    CHECK(row_seed(42, 3) == row_seed(42, 3));
    CHECK(row_seed(42, 3) != row_seed(43, 3));
}

TEST_CASE("sweep") {
    const std::vector<Method> both{Method::proposed, Method::classic};

    SUBCASE("table shape and ordering") {
        const auto t = sweep(kPlant, {0.1, 0.2, 0.3, 0.4, 0.5}, both, quick(), SheOptions{});
        REQUIRE(t.size() == 10);
        for (std::size_t i = 0; i < t.size(); ++i) {
            CHECK(t[i].v_out_pu == doctest::Approx(0.1 * static_cast<double>(i / 2 + 1)));
            CHECK(t[i].method == (i % 2 == 0 ? Method::classic : Method::proposed));
            CHECK(t[i].seed == row_seed(quick().seed, i / 2));
        }
        CHECK(compare_methods(t).size() == 5);
        CHECK(angle_trajectory(t, Method::proposed).size() == 5);
    }
    SUBCASE("above the threshold both methods give the same row") {
        const auto t = sweep(kPlant, {1.0}, both, quick(), SheOptions{});
        REQUIRE(t.size() == 2);
        CHECK(t[0].angles == t[1].angles);
        CHECK(t[0].thd_total_pct == t[1].thd_total_pct);
        CHECK(t[0].seed == t[1].seed);
    }
    SUBCASE("thread count does not change the result") {
        SweepOptions one;
        SweepOptions four;
        four.threads = 4;
        const auto a = sweep(kPlant, {0.2, 0.6, 0.9}, both, quick(), SheOptions{}, one);
        const auto b = sweep(kPlant, {0.2, 0.6, 0.9}, both, quick(), SheOptions{}, four);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].angles == b[i].angles);
            CHECK(a[i].best_cost == b[i].best_cost);
        }
    }
    SUBCASE("grid validation") {
        CHECK_THROWS_AS(sweep(kPlant, {}, both, quick(), SheOptions{}), Error);
        CHECK_THROWS_AS(sweep(kPlant, {0.2, 0.2}, both, quick(), SheOptions{}), Error);
        CHECK_THROWS_AS(sweep(kPlant, {0.3, 0.2}, both, quick(), SheOptions{}), Error);
        CHECK_THROWS_AS(sweep(kPlant, {0.5, 1.1}, both, quick(), SheOptions{}), Error);
        CHECK_THROWS_AS(sweep(kPlant, {0.5}, {}, quick(), SheOptions{}), Error);
    }
}

TEST_CASE("method comparison") {
    CHECK(improvement_pct(84.66, 33.23) == doctest::Approx(60.74).epsilon(0.02 / 60.74));
    CHECK(improvement_pct(31.29, 18.66) == doctest::Approx(40.37).epsilon(0.02 / 40.37));
    CHECK(improvement_pct(20.0, 20.0) == 0.0);
    CHECK_THROWS_AS(improvement_pct(0.0, 1.0), Error);

    const SweepTable t{fake_row(0.2, Method::classic, 84.66), fake_row(0.2, Method::proposed, 33.23),
                       fake_row(0.1, Method::proposed, 87.94), fake_row(0.1, Method::classic, 158.62)};
    const auto c = compare_methods(t);
    REQUIRE(c.size() == 2);
    CHECK(c[0].v_out_pu == 0.1);
    CHECK(c[0].thd_classic_pct == 158.62);
    CHECK(c[1].improvement_pct == doctest::Approx(60.75).epsilon(1e-3));

    const SweepTable missing{fake_row(0.2, Method::classic, 84.66)};
    CHECK_THROWS_AS(compare_methods(missing), Error);
}
