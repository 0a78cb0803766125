#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eja/verify.hpp"

#include "json.hpp"

namespace eja::report {

using nlohmann::json;

/// Tool version string baked in at build time.
std::string version();
/// Current UTC time, ISO 8601.
std::string utc_timestamp();

struct RunConfig {
    std::vector<std::string> suites;
    std::vector<std::string> algebras;
    int trials = 100;
    std::uint64_t seed = 0;
    verify::Tolerances tol;
    std::string out;
    std::string format = "json";

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct RunRecord {
    int schema = 1;
    std::string timestamp;
    std::string version;
    RunConfig config;
    std::vector<verify::SuiteReport> reports;
    bool pass = true;

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Doubles are written as numbers when finite and as "inf", "-inf" or
/// "nan" otherwise, so every value survives a round trip.
json encode_double(double v);
double decode_double(const json& j);

json to_json(const verify::TrialRecord& r);
json to_json(const verify::SuiteReport& r);
json to_json(const RunConfig& c);
json to_json(const RunRecord& r);

verify::TrialRecord trial_from_json(const json& j);
verify::SuiteReport suite_from_json(const json& j);
RunConfig config_from_json(const json& j);
RunRecord record_from_json(const json& j);

std::string serialize(const RunRecord& r, int indent = 2);
/// Throws std::invalid_argument on malformed input.
RunRecord parse(const std::string& text);

/// One row per (suite, trial, residual key).
void write_csv(std::ostream& os, const RunRecord& r);

/// {"algebra": "...", "coords": [...]}
json element_to_json(const Element& x);
/// Throws std::invalid_argument when the algebra does not parse or the
/// coordinate count does not match its dimension.
Element element_from_json(const json& j);
Element read_element_file(const std::string& path);

json to_json(const opt::OptResult& r);

/// Most significant checked residual of a report: the limited key with the
/// largest worst/limit ratio (margins excluded).
std::pair<std::string, double> headline(const verify::SuiteReport& r);

}  // namespace eja::report
