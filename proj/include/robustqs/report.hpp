#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace rqs {

/// Command output. The body is insertion-ordered and every numeric value
/// is pre-rendered as a string (exact fractions in rational mode, 12
/// significant digits in float mode), so emitted bytes are deterministic
/// for fixed inputs, mode, and seed. Timing is attached only on request,
/// since wall-clock values would break that determinism.
struct Report {
    std::string command;
    std::string mode;    // "exact" | "float"
    std::string inputs;  // digest of the model bytes and the effective flags
    nlohmann::ordered_json body = nlohmann::ordered_json::object();
    std::optional<double> seconds;
};

/// FNV-1a over bytes; the running value doubles as a seed for chaining.
std::uint64_t fnv1a(const std::string& bytes,
                    std::uint64_t seed = 14695981039346656037ULL);

std::string hex64(std::uint64_t value);

/// Renders the report: "json" (two-space indent, stable field order) or
/// "csv" (numeric scalars as key,value rows; a "vertices" table flattens
/// to one row per vertex).
std::string emit(const Report& report, const std::string& format);

} // namespace rqs
