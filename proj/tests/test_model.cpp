#include <doctest.h>

#include <random>

#include "difc/model.hpp"

using namespace difc;

namespace {
const GammaParams kNominal{3.0, 1000.0, 0.1};
const PlantConfig kCfg{};
}  // namespace

TEST_CASE("permeate flux matches direct evaluation") {
    // 3 (ln 1000 - ln 50 - 0.1 ln 50)
    CHECK(permeate_flux({50.0, 50.0, 0.0}, kNominal) ==
          doctest::Approx(7.813589919033529).epsilon(1e-12));
    // c1 = gamma2, c2 = 1: logs cancel exactly
    CHECK(permeate_flux({1000.0, 1.0, 0.0}, kNominal) == doctest::Approx(0.0).epsilon(1e-15));
    // gamma3 = 0 reduces to the limiting-flux model
    const GammaParams lim{3.0, 1000.0, 0.0};
    CHECK(permeate_flux({50.0, 50.0, 0.0}, lim) ==
          doctest::Approx(3.0 * (std::log(1000.0) - std::log(50.0))).epsilon(1e-12));
    CHECK(permeate_flux({50.0, 50.0, 0.0}, lim) == doctest::Approx(8.98720).epsilon(1e-5));
}

TEST_CASE("rhs") {
    const ProcessState x{50.0, 50.0, 0.0};
    auto d0 = rhs(x, 0.0, kNominal, kCfg);
    CHECK(d0.dc1 == doctest::Approx(2500.0 * 7.813589919033529 / 1000.0).epsilon(1e-12));
    CHECK(d0.dc2 == 0.0);  // pure filtration leaves c2 untouched

    auto d1 = rhs(x, 1.0, kNominal, kCfg);
    CHECK(d1.dc1 == 0.0);
    CHECK(d1.dc2 == doctest::Approx(-50.0 * 50.0 * 7.813589919033529 / 1000.0).epsilon(1e-12));
}

TEST_CASE("dilution") {
    const ProcessState x{406.51837194633134, 0.13550612398211045, 9.0};
    const double factor = x.c1 / 150.0;
    auto d = apply_dilution(x, factor);
    CHECK(d.c1 == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(d.c2 == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(d.t == 9.0);

    auto same = apply_dilution(x, 1.0);
    CHECK(same.c1 == x.c1);
    CHECK(same.c2 == x.c2);

    auto half = apply_dilution({100.0, 10.0, 0.0}, 2.0);
    CHECK(half.c1 == doctest::Approx(50.0));
    CHECK(half.c2 == doctest::Approx(5.0));

    CHECK_THROWS_AS(apply_dilution(x, 0.9), InvalidFactor);
}

TEST_CASE("gamma/p round trip") {
    auto p = gamma_to_p(kNominal);
    CHECK(p.p1 == doctest::Approx(20.72326583694641).epsilon(1e-12));  // 3 ln 1000
    CHECK(p.p2 == 3.0);
    CHECK(p.p3 == doctest::Approx(0.3).epsilon(1e-14));

    auto e = gamma_to_p({1.0, std::exp(1.0), 0.0});
    CHECK(e.p1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(e.p2 == 1.0);
    CHECK(e.p3 == 0.0);

    auto g = p_to_gamma({20.72326583694641, 3.0, 0.3});
    CHECK(g.gamma1 == 3.0);
    CHECK(g.gamma2 == doctest::Approx(1000.0).epsilon(1e-12));
    CHECK(g.gamma3 == doctest::Approx(0.1).epsilon(1e-13));

    // round trip over the +-10% box to 1e-12 relative
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const GammaParams gg{2.7 + 0.6 * u(rng), 900.0 + 200.0 * u(rng),
                             0.09 + 0.02 * u(rng)};
        const auto back = p_to_gamma(gamma_to_p(gg));
        CHECK(back.gamma1 == doctest::Approx(gg.gamma1).epsilon(1e-12));
        CHECK(back.gamma2 == doctest::Approx(gg.gamma2).epsilon(1e-12));
        CHECK(back.gamma3 == doctest::Approx(gg.gamma3).epsilon(1e-12));
    }
}

TEST_CASE("config validation") {
    PlantConfig bad = kCfg;
    bad.Ts = 0.05;  // three measurement periods: fine
    bad.meas_period = 1.0 / 60.0;
    CHECK_NOTHROW(bad.validate());
    bad.Ts = 0.025;  // 1.5 measurement periods
    CHECK_THROWS_AS(bad.validate(), ModelError);
    bad = kCfg;
    bad.c1_f = 10.0;
    CHECK_THROWS_AS(bad.validate(), ModelError);
}
