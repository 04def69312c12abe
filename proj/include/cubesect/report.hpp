#pragma once

// JSON and CSV emission for certificates and command reports.

#include <charconv>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "cubesect/bounds.hpp"
#include "cubesect/core.hpp"

namespace cubesect {

/// 17 significant digits, '.' decimal point regardless of locale.
inline std::string format_number(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    if (res.ec != std::errc()) return "nan";
    return std::string(buf, res.ptr);
}

inline const char* to_string(Relation r) {
    switch (r) {
        case Relation::Greater: return ">";
        case Relation::GreaterEqual: return ">=";
        case Relation::Less: return "<";
        case Relation::LessEqual: return "<=";
        case Relation::Near: return "~=";
    }
    return "?";
}

inline nlohmann::ordered_json to_json(const ProbabilityBound& p) {
    nlohmann::ordered_json j;
    j["value"] = p.value;
    j["raw_value"] = p.raw_value;
    j["method"] = to_string(p.method);
    if (p.lambda_star) j["lambda_star"] = *p.lambda_star;
    if (p.q_used) j["q_used"] = *p.q_used;
    if (p.orlicz_scale_used) j["orlicz_scale_used"] = *p.orlicz_scale_used;
    return j;
}

inline nlohmann::ordered_json to_json(const BoundCertificate& c) {
    nlohmann::ordered_json j;
    j["field"] = to_string(c.field.field);
    j["k"] = c.field.k;
    j["p_lower"] = to_json(c.p_lower);
    j["threshold"] = c.threshold;
    j["final_bound"] = c.final_bound;
    j["valid"] = c.valid();
    auto& chain = j["chain"] = nlohmann::ordered_json::array();
    for (const auto& l : c.chain) {
        nlohmann::ordered_json e;
        e["name"] = l.name;
        e["value"] = l.value;
        e["inequality"] = l.inequality;
        e["reference"] = l.reference;
        e["satisfied"] = l.holds();
        chain.push_back(std::move(e));
    }
    return j;
}

struct ReportRow {
    std::string label;
    double value;
    std::optional<double> std_error;
};

struct RunReport {
    std::string command;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    std::vector<ReportRow> outputs;
    std::uint64_t seed = 0;
    std::int64_t wall_time_ms = 0;
    bool passed = true;
    std::string failure;

    void add(std::string label, double value, std::optional<double> se = std::nullopt) {
        outputs.push_back({std::move(label), value, se});
    }
    void fail(const std::string& why) {
        if (passed) failure = why;
        passed = false;
    }
};

inline nlohmann::ordered_json to_json(const RunReport& r) {
    nlohmann::ordered_json j;
    j["command"] = r.command;
    j["inputs"] = r.inputs;
    auto& rows = j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& row : r.outputs) {
        nlohmann::ordered_json e;
        e["label"] = row.label;
        e["value"] = row.value;
        if (row.std_error) e["std_error"] = *row.std_error;
        rows.push_back(std::move(e));
    }
    j["seed"] = r.seed;
    j["wall_time_ms"] = r.wall_time_ms;
    j["passed"] = r.passed;
    if (!r.passed) j["failure"] = r.failure;
    return j;
}

/// Plain-text rendering: one "label = value [+- se]" line per output.
inline void print_report(std::ostream& os, const RunReport& r) {
    for (const auto& row : r.outputs) {
        os << row.label << " = " << format_number(row.value);
        if (row.std_error) os << " +- " << format_number(*row.std_error);
        os << '\n';
    }
    os << (r.passed ? "status = pass" : "status = FAIL (" + r.failure + ")") << '\n';
}

struct SweepRow {
    double t;
    double volume;
    double std_error;
    double upper_bound;
};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "t,volume,std_error,upper_bound\n";
    for (const auto& r : rows)
        os << format_number(r.t) << ',' << format_number(r.volume) << ',' << format_number(r.std_error) << ','
           << format_number(r.upper_bound) << '\n';
}

}  // namespace cubesect
