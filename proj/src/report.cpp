#include "eja/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#ifndef EJA_VERSION
#define EJA_VERSION "0.0.0"
#endif

namespace eja::report {

namespace {

json encode_map(const std::map<std::string, double>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = encode_double(v);
    return j;
}

std::map<std::string, double> decode_map(const json& j) {
    std::map<std::string, double> m;
    for (const auto& [k, v] : j.items()) m[k] = decode_double(v);
    return m;
}

json encode_vector(const std::vector<double>& v) {
    json j = json::array();
    for (double x : v) j.push_back(encode_double(x));
    return j;
}

std::vector<double> decode_vector(const json& j) {
    if (!j.is_array()) throw std::invalid_argument("expected an array of numbers");
    std::vector<double> v;
    for (const auto& x : j) v.push_back(decode_double(x));
    return v;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string version() { return EJA_VERSION; }

std::string utc_timestamp() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json encode_double(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double decode_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw std::invalid_argument("expected a number, got " + j.dump());
}

json to_json(const verify::TrialRecord& r) {
    json j{{"index", r.index},
           {"seed", r.seed},
           {"inputs_hash", r.inputs_hash},
           {"residuals", encode_map(r.residuals)},
           {"passed", r.passed},
           {"skipped", r.skipped},
           {"uncertified", r.uncertified},
           {"note", r.note}};
    json in = json::object();
    for (const auto& [k, v] : r.inputs) in[k] = encode_vector(v);
    j["inputs"] = in;
    return j;
}

json to_json(const verify::SuiteReport& r) {
    json recs = json::array();
    for (const auto& t : r.records) recs.push_back(to_json(t));
    return {{"name", r.name},
            {"algebra", r.algebra},
            {"trials", r.trials},
            {"violations", r.violations},
            {"skipped", r.skipped},
            {"uncertified", r.uncertified},
            {"worst", encode_map(r.worst)},
            {"limits", encode_map(r.limits)},
            {"control",
             {{"trials", r.control.trials},
              {"hits", r.control.hits},
              {"threshold", encode_double(r.control.threshold)},
              {"required_fraction", r.control.required_fraction}}},
            {"notes", r.notes},
            {"passed", r.passed()},
            {"records", recs}};
}

json to_json(const RunConfig& c) {
    return {{"suites", c.suites},
            {"algebras", c.algebras},
            {"trials", c.trials},
            {"seed", c.seed},
            {"tolerances", {{"commute", c.tol.commute}, {"feas", c.tol.feas}, {"value", c.tol.value}}},
            {"out", c.out},
            {"format", c.format}};
}

json to_json(const RunRecord& r) {
    json reps = json::array();
    for (const auto& s : r.reports) reps.push_back(to_json(s));
    return {{"schema", r.schema}, {"timestamp", r.timestamp}, {"version", r.version},
            {"config", to_json(r.config)}, {"reports", reps}, {"pass", r.pass}};
}

verify::TrialRecord trial_from_json(const json& j) {
    verify::TrialRecord r;
    r.index = j.at("index").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.inputs_hash = j.at("inputs_hash").get<std::string>();
    r.residuals = decode_map(j.at("residuals"));
    r.passed = j.at("passed").get<bool>();
    r.skipped = j.at("skipped").get<bool>();
    r.uncertified = j.at("uncertified").get<bool>();
    r.note = j.at("note").get<std::string>();
    for (const auto& [k, v] : j.at("inputs").items()) r.inputs[k] = decode_vector(v);
    return r;
}

verify::SuiteReport suite_from_json(const json& j) {
    verify::SuiteReport r;
    r.name = j.at("name").get<std::string>();
    r.algebra = j.at("algebra").get<std::string>();
    r.trials = j.at("trials").get<int>();
    r.violations = j.at("violations").get<int>();
    r.skipped = j.at("skipped").get<int>();
    r.uncertified = j.at("uncertified").get<int>();
    r.worst = decode_map(j.at("worst"));
    r.limits = decode_map(j.at("limits"));
    const auto& c = j.at("control");
    r.control.trials = c.at("trials").get<int>();
    r.control.hits = c.at("hits").get<int>();
    r.control.threshold = decode_double(c.at("threshold"));
    r.control.required_fraction = c.at("required_fraction").get<double>();
    r.notes = j.at("notes").get<std::vector<std::string>>();
    for (const auto& t : j.at("records")) r.records.push_back(trial_from_json(t));
    return r;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.suites = j.at("suites").get<std::vector<std::string>>();
    c.algebras = j.at("algebras").get<std::vector<std::string>>();
    c.trials = j.at("trials").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& t = j.at("tolerances");
    c.tol.commute = t.at("commute").get<double>();
    c.tol.feas = t.at("feas").get<double>();
    c.tol.value = t.at("value").get<double>();
    c.out = j.at("out").get<std::string>();
    c.format = j.at("format").get<std::string>();
    return c;
}

RunRecord record_from_json(const json& j) {
    RunRecord r;
    r.schema = j.at("schema").get<int>();
    if (r.schema != 1) throw std::invalid_argument("unsupported report schema " + std::to_string(r.schema));
    r.timestamp = j.at("timestamp").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.config = config_from_json(j.at("config"));
    for (const auto& s : j.at("reports")) r.reports.push_back(suite_from_json(s));
    r.pass = j.at("pass").get<bool>();
    return r;
}

std::string serialize(const RunRecord& r, int indent) { return to_json(r).dump(indent); }

RunRecord parse(const std::string& text) {
    try {
        return record_from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed report: ") + e.what());
    }
}

void write_csv(std::ostream& os, const RunRecord& r) {
    os << "suite,algebra,trial,seed,inputs_hash,passed,skipped,uncertified,key,value\n";
    for (const auto& s : r.reports)
        for (const auto& t : s.records)
            for (const auto& [k, v] : t.residuals)
                os << csv_field(s.name) << ',' << csv_field(s.algebra) << ',' << t.index << ',' << t.seed << ','
                   << t.inputs_hash << ',' << int(t.passed) << ',' << int(t.skipped) << ',' << int(t.uncertified)
                   << ',' << csv_field(k) << ',' << number(v) << '\n';
}

json element_to_json(const Element& x) {
    return {{"algebra", x.algebra().to_string()},
            {"coords", std::vector<double>(x.coords().data(), x.coords().data() + x.dim())}};
}

Element element_from_json(const json& j) {
    try {
        if (!j.is_object()) throw std::invalid_argument("element must be an object");
        const AlgebraSpec spec = AlgebraSpec::parse(j.at("algebra").get<std::string>());
        const auto coords = decode_vector(j.at("coords"));
        if (int(coords.size()) != spec.dim())
            throw std::invalid_argument("expected " + std::to_string(spec.dim()) + " coordinates for " +
                                        spec.to_string() + ", got " + std::to_string(coords.size()));
        for (double c : coords)
            if (!std::isfinite(c)) throw std::invalid_argument("coordinates must be finite");
        return Element(spec, Eigen::Map<const Eigen::VectorXd>(coords.data(), Eigen::Index(coords.size())));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed element: ") + e.what());
    }
}

Element read_element_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open element file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed element file '" + path + "': " + e.what());
    }
    return element_from_json(j);
}

json to_json(const opt::OptResult& r) {
    json pairs = json::object();
    for (const auto& [label, v] : r.diagnostics.pairs) pairs[label] = encode_double(v);
    return {{"x", element_to_json(r.x)},
            {"value", encode_double(r.value)},
            {"iterations", r.iterations},
            {"stationarity", encode_double(r.stationarity)},
            {"converged", r.converged},
            {"line_search_failed", r.line_search_failed},
            {"start", r.start},
            {"diagnostics", {{"tol", r.diagnostics.tol}, {"residuals", pairs}}}};
}

std::pair<std::string, double> headline(const verify::SuiteReport& r) {
    std::pair<std::string, double> best{"", 0.0};
    double ratio = -1.0;
    for (const auto& [k, limit] : r.limits) {
        const auto it = r.worst.find(k);
        if (it == r.worst.end() || (k.size() >= 7 && k.compare(k.size() - 7, 7, "_margin") == 0)) continue;
        const double q = limit > 0.0 ? it->second / limit : it->second;
        if (q > ratio) {
            ratio = q;
            best = {k, it->second};
        }
    }
    return best;
}

}  // namespace eja::report
