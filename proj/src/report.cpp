#include "robustqs/report.hpp"

#include <cstdio>
#include <sstream>

#include "robustqs/errors.hpp"

namespace rqs {

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string scalar_text(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
}

} // namespace

std::string emit(const Report& report, const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json doc;
        doc["command"] = report.command;
        doc["mode"] = report.mode;
        doc["inputs"] = report.inputs;
        for (const auto& [key, value] : report.body.items()) doc[key] = value;
        if (report.seconds) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f", *report.seconds);
            doc["seconds"] = buf;
        }
        return doc.dump(2) + "\n";
    }
    if (format != "csv") throw usage_error("unknown output format '" + format + "'");

    std::ostringstream os;
    os << "command," << csv_field(report.command) << "\n";
    os << "mode," << csv_field(report.mode) << "\n";
    os << "inputs," << csv_field(report.inputs) << "\n";
    for (const auto& [key, value] : report.body.items()) {
        if (key == "vertices" && value.is_array()) continue;  // table below
        if (value.is_object() || value.is_array()) continue;  // numeric scalars only
        os << csv_field(key) << "," << csv_field(scalar_text(value)) << "\n";
    }
    if (report.body.contains("vertices") && report.body["vertices"].is_array()) {
        os << "vertex";
        if (report.body.contains("outcomes") && report.body["outcomes"].is_array())
            for (const auto& label : report.body["outcomes"])
                os << "," << csv_field(scalar_text(label));
        os << "\n";
        std::size_t row = 0;
        for (const auto& vertex : report.body["vertices"]) {
            os << row++;
            for (const auto& mass : vertex) os << "," << csv_field(scalar_text(mass));
            os << "\n";
        }
    }
    if (report.seconds) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6f", *report.seconds);
        os << "seconds," << buf << "\n";
    }
    return os.str();
}

} // namespace rqs
