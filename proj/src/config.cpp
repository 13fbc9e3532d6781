#include "difc/config.hpp"

#include <fstream>
#include <sstream>

namespace difc::config {
namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double num(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (...) {
    }
    throw ConfigError("config: bad numeric value for " + key + ": '" + v + "'");
}

}  // namespace

Settings defaults() { return {}; }

Settings parse(const std::string& text) {
    Settings s = defaults();
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " +
                              std::to_string(lineno));
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "plant.c1_0") s.plant.c1_0 = num(val, key);
        else if (key == "plant.c2_0") s.plant.c2_0 = num(val, key);
        else if (key == "plant.c1_f") s.plant.c1_f = num(val, key);
        else if (key == "plant.c2_f") s.plant.c2_f = num(val, key);
        else if (key == "plant.V0") s.plant.V0 = num(val, key);
        else if (key == "plant.sigma") s.plant.sigma = num(val, key);
        else if (key == "plant.Ts") s.plant.Ts = num(val, key);
        else if (key == "plant.meas_period") s.plant.meas_period = num(val, key);
        else if (key == "prior.gamma1_lo") s.prior.lo.gamma1 = num(val, key);
        else if (key == "prior.gamma1_hi") s.prior.hi.gamma1 = num(val, key);
        else if (key == "prior.gamma2_lo") s.prior.lo.gamma2 = num(val, key);
        else if (key == "prior.gamma2_hi") s.prior.hi.gamma2 = num(val, key);
        else if (key == "prior.gamma3_lo") s.prior.lo.gamma3 = num(val, key);
        else if (key == "prior.gamma3_hi") s.prior.hi.gamma3 = num(val, key);
        else if (key == "controller.kind") {
            if (val == "nominal") s.controller.kind = control::ControllerKind::Nominal;
            else if (val == "adaptive") s.controller.kind = control::ControllerKind::Adaptive;
            else if (val == "dual") s.controller.kind = control::ControllerKind::Dual;
            else throw ConfigError("config: unknown controller.kind '" + val + "'");
        } else if (key == "controller.nr") {
            s.controller.robust_horizon = static_cast<int>(num(val, key));
        } else if (key == "controller.eps") {
            s.controller.eps = num(val, key);
        } else if (key == "controller.adaptive_mode") {
            if (val == "ce") s.controller.adaptive_mode = control::AdaptiveMode::CertaintyEquivalent;
            else if (val == "varmin") s.controller.adaptive_mode = control::AdaptiveMode::VarianceMin;
            else throw ConfigError("config: unknown controller.adaptive_mode '" + val + "'");
        } else if (key == "controller.branching") {
            if (val == "joint3") s.controller.branching = control::Branching::Joint3;
            else if (val == "full3m") s.controller.branching = control::Branching::Full3m;
            else throw ConfigError("config: unknown controller.branching '" + val + "'");
        } else if (key == "controller.dual_reference") {
            if (val == "mid-scenario") s.controller.dual_reference = control::DualReference::MidScenario;
            else if (val == "ce-nominal") s.controller.dual_reference = control::DualReference::CeNominal;
            else throw ConfigError("config: unknown controller.dual_reference '" + val + "'");
        } else if (key == "controller.candidate_inputs") {
            s.controller.candidate_inputs.clear();
            std::istringstream vs(val);
            std::string tok;
            while (std::getline(vs, tok, ','))
                s.controller.candidate_inputs.push_back(num(trim(tok), key));
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    s.plant.validate();
    s.controller.validate();
    if (!(s.prior.lo.gamma1 < s.prior.hi.gamma1) ||
        !(s.prior.lo.gamma2 < s.prior.hi.gamma2) ||
        !(s.prior.lo.gamma3 < s.prior.hi.gamma3))
        throw ConfigError("config: prior box must have positive widths");
    return s;
}

Settings load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

}  // namespace difc::config
