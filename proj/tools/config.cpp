#include "config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qpspec::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: cannot parse number '" + s + "' for " + what);
    }
}

long long to_int(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config: cannot parse integer '" + s + "' for " + what);
    }
}

}  // namespace

bool RawConfig::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) return false;
    for (const auto& [k, v] : it->second)
        if (k == key) return true;
    return false;
}

std::string RawConfig::get(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    auto it = sections.find(section);
    if (it == sections.end()) return fallback;
    for (const auto& [k, v] : it->second)
        if (k == key) return v;
    return fallback;
}

std::vector<std::string> RawConfig::get_all(const std::string& section,
                                            const std::string& key) const {
    std::vector<std::string> out;
    auto it = sections.find(section);
    if (it == sections.end()) return out;
    for (const auto& [k, v] : it->second)
        if (k == key) out.push_back(v);
    return out;
}

RawConfig parse_raw_config(const std::string& text) {
    RawConfig raw;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw std::invalid_argument("config: key outside any [section] at line " +
                                        std::to_string(lineno));
        raw.sections[section].emplace_back(key, value);
    }
    return raw;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

cocycle::CocycleSpec ExperimentConfig::cocycle_spec(algebra::cplx energy, double eps) const {
    cocycle::CocycleSpec spec;
    spec.alpha = frequency;
    spec.energy = energy;
    spec.pot = potential;
    spec.phase_shift = eps;
    spec.validate();
    return spec;
}

algebra::ConeSpec ExperimentConfig::cone_or_full() const {
    if (cone) return *cone;
    return algebra::ConeSpec{1.0, scheme};
}

ExperimentConfig config_from_text(const std::string& text) {
    const RawConfig raw = parse_raw_config(text);
    ExperimentConfig cfg;
    cfg.digest = fnv1a_hex(text);

    // weights
    const int dim = int(to_int(raw.get("weights", "d", "1"), "weights.d"));
    const double eta = to_double(raw.get("weights", "eta", "1.0"), "weights.eta");
    cfg.scheme = algebra::WeightScheme::uniform(dim, eta);
    if (raw.has("weights", "w")) {
        const auto toks = split_ws(raw.get("weights", "w"));
        if (int(toks.size()) != dim)
            throw std::invalid_argument("config: weights.w length != d");
        for (int j = 0; j < dim; ++j)
            cfg.scheme.weights[std::size_t(j)] = to_double(toks[std::size_t(j)], "weights.w");
    }
    cfg.scheme.validate();

    // frequency
    if (raw.has("frequency", "preset")) {
        cfg.frequency = dioph::Frequency::preset(raw.get("frequency", "preset"));
    } else if (raw.has("frequency", "alpha")) {
        const auto toks = split_ws(raw.get("frequency", "alpha"));
        for (const auto& t : toks) cfg.frequency.alpha.push_back(to_double(t, "frequency.alpha"));
    } else {
        throw std::invalid_argument("config: [frequency] needs preset or alpha");
    }
    if (cfg.frequency.dim() != dim)
        throw std::invalid_argument("config: frequency dimension != weights.d");

    // potential
    const double lambda = to_double(raw.get("potential", "lambda", "0.0"), "potential.lambda");
    const double width = to_double(raw.get("potential", "h", "1.0"), "potential.h");
    cfg.potential.lambda = lambda;
    cfg.potential.v = algebra::ScalarSeries(cfg.scheme, width);
    for (const auto& mode : raw.get_all("potential", "mode")) {
        const std::size_t colon = mode.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("config: potential.mode needs 'k... : re im'");
        const auto ks = split_ws(mode.substr(0, colon));
        const auto cs = split_ws(mode.substr(colon + 1));
        if (int(ks.size()) != dim || cs.size() != 2)
            throw std::invalid_argument("config: potential.mode arity mismatch");
        algebra::MultiIndex k;
        for (const auto& t : ks) k.push_back(int(to_int(t, "potential.mode")));
        cfg.potential.v.add(k, algebra::cplx(to_double(cs[0], "potential.mode"),
                                             to_double(cs[1], "potential.mode")));
    }

    // cone (optional)
    if (raw.sections.count("cone")) {
        algebra::ConeSpec cone;
        cone.aperture = to_double(raw.get("cone", "r", "1.0"), "cone.r");
        cone.scheme = cfg.scheme;
        cone.validate();
        for (const auto& [k, v] : cfg.potential.v.coefficients())
            if (!algebra::cone_contains(k, cone))
                throw std::invalid_argument(
                    "config: cone-tagged potential has a mode outside the cone");
        cfg.cone = cone;
    }

    // engine
    cfg.engine.iterates = to_int(raw.get("engine", "iterates", "100000"), "engine.iterates");
    cfg.engine.phases = int(to_int(raw.get("engine", "phases", "8"), "engine.phases"));
    cfg.engine.seed =
        std::uint64_t(to_int(raw.get("engine", "seed", "1"), "engine.seed"));
    cfg.engine.uh.iterates = cfg.engine.iterates;
    cfg.engine.uh.phases = cfg.engine.phases;
    cfg.engine.uh.seed = cfg.engine.seed;
    cfg.engine.uh.l_min = to_double(raw.get("engine", "l_min", "5e-3"), "engine.l_min");
    cfg.engine.uh.theta_min =
        to_double(raw.get("engine", "theta_min", "1e-3"), "engine.theta_min");
    cfg.engine.uh.affinity_tol =
        to_double(raw.get("engine", "affinity_tol", "1e-2"), "engine.affinity_tol");
    cfg.engine.uh.affinity_step =
        to_double(raw.get("engine", "affinity_step", "0.1"), "engine.affinity_step");

    // scan region
    if (raw.sections.count("scan")) {
        const auto re = split_ws(raw.get("scan", "re", "-3 3"));
        const auto im = split_ws(raw.get("scan", "im", "-1 1"));
        if (re.size() != 2 || im.size() != 2)
            throw std::invalid_argument("config: scan.re / scan.im need two numbers");
        cfg.region.re_min = to_double(re[0], "scan.re");
        cfg.region.re_max = to_double(re[1], "scan.re");
        cfg.region.im_min = to_double(im[0], "scan.im");
        cfg.region.im_max = to_double(im[1], "scan.im");
        cfg.region.re_count = int(to_int(raw.get("scan", "nre", "21"), "scan.nre"));
        cfg.region.im_count = int(to_int(raw.get("scan", "nim", "7"), "scan.nim"));
        if (cfg.region.re_count < 2 || cfg.region.im_count < 2)
            throw std::invalid_argument("config: scan resolution must be >= 2 per axis");
    }

    // kam options
    cfg.kam.h_final = to_double(raw.get("kam", "h_final", "0.3"), "kam.h_final");
    cfg.kam.r_final = to_double(raw.get("kam", "r_final", "0.5"), "kam.r_final");
    cfg.kam.max_steps = int(to_int(raw.get("kam", "max_steps", "24"), "kam.max_steps"));
    cfg.kam.f_target = to_double(raw.get("kam", "f_target", "1e-12"), "kam.f_target");
    cfg.kam.k_cap = to_double(raw.get("kam", "k_cap", "64"), "kam.k_cap");
    cfg.kam.scan_bound = to_double(raw.get("kam", "scan_bound", "64"), "kam.scan_bound");
    cfg.kam.delta_cap = to_double(raw.get("kam", "delta_cap", "0.02"), "kam.delta_cap");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_text(ss.str());
}

}  // namespace qpspec::cli
