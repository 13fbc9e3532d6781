#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

// Batch diafiltration plant model: two retained/permeating solutes, a
// logarithmic flux law, and a scalar wash-water ratio u as the input.
// Concentrations are g/L, flows L/h, time h.

namespace difc {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidFactor : ModelError {
    using ModelError::ModelError;
};

// Flux-law parameters in phenomenological form.
struct GammaParams {
    double gamma1{};  // flux scale, L/h
    double gamma2{};  // concentration scale, g/L
    double gamma3{};  // dimensionless exponent

    bool valid() const { return gamma1 > 0.0 && gamma2 > 1.0 && gamma3 >= 0.0; }
};

// Same law reparameterized to be linear in the parameters,
// q_p = p1 - p2 ln c1 - p3 ln c2. This is the estimation-friendly form.
struct PParams {
    double p1{};  // L/h
    double p2{};  // L/h
    double p3{};  // L/h
};

inline PParams gamma_to_p(const GammaParams& g) {
    return {g.gamma1 * std::log(g.gamma2), g.gamma1, g.gamma1 * g.gamma3};
}

inline GammaParams p_to_gamma(const PParams& p) {
    return {p.p2, std::exp(p.p1 / p.p2), p.p3 / p.p2};
}

struct ProcessState {
    double c1{};  // retained solute, g/L
    double c2{};  // permeating solute, g/L
    double t{};   // elapsed batch time, h

    bool valid() const { return c1 > 0.0 && c2 > 0.0; }
};

struct PlantConfig {
    double c1_0 = 50.0;
    double c2_0 = 50.0;
    double c1_f = 150.0;
    double c2_f = 0.05;
    double V0 = 20.0;           // initial volume, L
    double sigma = 1e-2;        // flux measurement noise bound, L/h
    double Ts = 0.1;            // control sampling period, h
    double meas_period = 1.0 / 60.0;  // measurement period, h

    double hold_mass() const { return c1_0 * V0; }  // conserved c1*V, g
    double target_ratio() const { return c1_f / c2_f; }

    void validate() const {
        if (!(c1_f > c1_0) || !(c2_f < c2_0))
            throw ModelError("plant config: targets must concentrate c1 and wash out c2");
        if (!(sigma > 0.0)) throw ModelError("plant config: sigma must be positive");
        double k = Ts / meas_period;
        if (!(Ts > 0.0) || std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
            throw ModelError("plant config: Ts must be a positive integer multiple of meas_period");
    }
};

// Permeate flux q_p = g1 (ln g2 - ln c1 - g3 ln c2). May come out negative
// for extreme states; callers decide what that means.
inline double permeate_flux(const ProcessState& x, const GammaParams& g) {
    return g.gamma1 * (std::log(g.gamma2) - std::log(x.c1) - g.gamma3 * std::log(x.c2));
}

struct Derivatives {
    double dc1{};
    double dc2{};
};

inline Derivatives rhs(const ProcessState& x, double u, const GammaParams& g,
                       const PlantConfig& cfg) {
    const double qp = permeate_flux(x, g);
    const double scale = qp / cfg.hold_mass();
    return {x.c1 * x.c1 * scale * (1.0 - u), -x.c1 * x.c2 * scale * u};
}

// Instantaneous dilution with wash water: concentrations scale down by
// `factor`, time does not advance, solute-1 mass is conserved by V scaling.
inline ProcessState apply_dilution(const ProcessState& x, double factor) {
    if (!(factor >= 1.0)) throw InvalidFactor("dilution factor must be >= 1");
    return {x.c1 / factor, x.c2 / factor, x.t};
}

// Derived volume, from the solute-1 invariant c1*V = c1_0*V0.
inline double volume(const ProcessState& x, const PlantConfig& cfg) {
    return cfg.hold_mass() / x.c1;
}

}  // namespace difc
