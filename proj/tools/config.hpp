#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpspec/cocycle.hpp"
#include "qpspec/kam.hpp"
#include "qpspec/spectral.hpp"

namespace qpspec::cli {

// Raw key/value tables parsed from the INI-style configuration text:
// [section] headers, `key = value` lines, '#' comments. Repeated keys
// accumulate (used for potential mode lists).
struct RawConfig {
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const;
    std::vector<std::string> get_all(const std::string& section,
                                     const std::string& key) const;
};

RawConfig parse_raw_config(const std::string& text);

struct EngineOptions {
    std::int64_t iterates = 100000;
    int phases = 8;
    std::uint64_t seed = 1;
    cocycle::UhOptions uh;  // iterates/phases/seed mirrored in
};

// Everything a command needs, validated at parse time: every potential mode
// must pass the cone test when a cone is declared, weights must normalize,
// the phase shift must fit in the strip.
struct ExperimentConfig {
    algebra::WeightScheme scheme;
    dioph::Frequency frequency;
    cocycle::Potential potential;
    std::optional<algebra::ConeSpec> cone;
    EngineOptions engine;
    spectral::ScanRegion region;
    kam::KamOptions kam;
    std::string digest;  // FNV-1a of the canonical source text

    cocycle::CocycleSpec cocycle_spec(algebra::cplx energy, double eps) const;
    algebra::ConeSpec cone_or_full() const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_text(const std::string& text);

std::string fnv1a_hex(const std::string& data);

}  // namespace qpspec::cli
