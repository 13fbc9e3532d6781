#include <doctest.h>

#include <cmath>

#include "difc/integrate.hpp"
#include "difc/policy.hpp"
#include "oracle_rk4.hpp"

using namespace difc;

namespace {
const GammaParams kNominal{3.0, 1000.0, 0.1};
const PlantConfig kCfg{};
const ProcessState kX0{50.0, 50.0, 0.0};
}  // namespace

TEST_CASE("zero-duration arc returns the state unchanged") {
    auto r = integrate_arc(kX0, 0.0, kNominal, kCfg, StopCondition::for_duration(0.0));
    CHECK(r.state.c1 == kX0.c1);
    CHECK(r.state.c2 == kX0.c2);
    CHECK(r.state.t == kX0.t);
}

TEST_CASE("c2 exactly constant on u=0 arcs") {
    auto r = integrate_arc(kX0, 0.0, kNominal, kCfg, StopCondition::for_duration(2.0));
    CHECK(std::abs(r.state.c2 - kX0.c2) / kX0.c2 <= 1e-12);
}

TEST_CASE("switching event lands on the algebraic locus") {
    auto stop = StopCondition::for_event(
        [](const ProcessState& x) { return switching_value(x, kNominal); }, -1);
    auto r = integrate_arc(kX0, 0.0, kNominal, kCfg, stop);
    REQUIRE(r.event_hit);
    // c1* = gamma2 e^{-(1+gamma3)} / c2^gamma3
    const double c1_star = 1000.0 * std::exp(-1.1) / std::pow(50.0, 0.1);
    CHECK(r.state.c1 == doctest::Approx(c1_star).epsilon(1e-9));
    CHECK(r.state.c1 == doctest::Approx(225.10185269917).epsilon(1e-9));
    CHECK(std::abs(switching_value(r.state, kNominal)) <= 1e-9);
}

TEST_CASE("ratio event from the singular arc matches the algebraic oracle") {
    auto stop_s = StopCondition::for_event(
        [](const ProcessState& x) { return switching_value(x, kNominal); }, -1);
    auto sw = integrate_arc(kX0, 0.0, kNominal, kCfg, stop_s);
    auto r = integrate_arc(sw.state, singular_control(kNominal), kNominal, kCfg,
                           StopCondition::for_ratio(kCfg.target_ratio()));
    REQUIRE(r.event_hit);
    // solve S = 0 and c1/c2 = 3000 simultaneously:
    // ln c2 = (ln g2 - (1+g3) - ln 3000)/(1+g3)
    const double lnc2 = (std::log(1000.0) - 1.1 - std::log(3000.0)) / 1.1;
    CHECK(r.state.c2 == doctest::Approx(std::exp(lnc2)).epsilon(1e-8));
    CHECK(r.state.c1 == doctest::Approx(3000.0 * std::exp(lnc2)).epsilon(1e-8));
    CHECK(std::abs(r.state.c1 / r.state.c2 - 3000.0) <= 1e-9 * 3000.0);
}

TEST_CASE("solute-1 mass is conserved along arcs and dilutions") {
    const double m0 = kX0.c1 * volume(kX0, kCfg);
    auto a = integrate_arc(kX0, 0.7, kNominal, kCfg, StopCondition::for_duration(3.0));
    CHECK(a.state.c1 * volume(a.state, kCfg) == doctest::Approx(m0).epsilon(1e-9));
    auto d = apply_dilution(a.state, 2.5);
    CHECK(d.c1 * volume(d, kCfg) == doctest::Approx(m0).epsilon(1e-12));
}

TEST_CASE("step-size convergence: halved h_max moves the endpoint <= 1e-7 relative") {
    IntegrateOptions o1;
    o1.h_max = 0.2;
    IntegrateOptions o2;
    o2.h_max = 0.1;
    auto r1 = integrate_arc(kX0, 0.3, kNominal, kCfg, StopCondition::for_duration(4.0), o1);
    auto r2 = integrate_arc(kX0, 0.3, kNominal, kCfg, StopCondition::for_duration(4.0), o2);
    CHECK(std::abs(r1.state.c1 - r2.state.c1) / r2.state.c1 <= 1e-7);
    CHECK(std::abs(r1.state.c2 - r2.state.c2) / r2.state.c2 <= 1e-7);
}

TEST_CASE("agrees with the fixed-step RK4 reference") {
    auto mine = integrate_arc(kX0, 0.4, kNominal, kCfg, StopCondition::for_duration(5.0));
    auto ref = oracle::integrate_for({kX0.c1, kX0.c2, 0.0}, 0.4, kNominal, kCfg, 5.0);
    CHECK(mine.state.c1 == doctest::Approx(ref.c1).epsilon(1e-8));
    CHECK(mine.state.c2 == doctest::Approx(ref.c2).epsilon(1e-8));
}

TEST_CASE("event that never fires raises EventNotBracketed") {
    IntegrateOptions opt;
    opt.t_cap = 0.5;
    auto stop = StopCondition::for_event(
        [](const ProcessState& x) { return x.c1 + 1.0; }, -1);  // always positive
    CHECK_THROWS_AS(integrate_arc(kX0, 0.0, kNominal, kCfg, stop, opt), EventNotBracketed);

    opt.cap_is_stop = true;  // same setup, cap as a soft stop
    auto r = integrate_arc(kX0, 0.0, kNominal, kCfg, stop, opt);
    CHECK_FALSE(r.event_hit);
    CHECK(r.state.t == doctest::Approx(0.5));
}

TEST_CASE("trajectory sampling on the measurement grid") {
    IntegrateOptions opt;
    opt.record = true;
    auto r = integrate_arc(kX0, 0.0, kNominal, kCfg, StopCondition::for_duration(0.1), opt);
    REQUIRE(r.traj.size() == 7);  // t = 0, 1..6 minutes
    for (std::size_t i = 0; i < r.traj.size(); ++i)
        CHECK(r.traj[i].t == doctest::Approx(i * kCfg.meas_period).epsilon(1e-12));
    CHECK(r.traj.back().qp ==
          doctest::Approx(permeate_flux(r.state, kNominal)).epsilon(1e-12));
}
