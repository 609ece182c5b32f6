#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robustqs/family.hpp"
#include "robustqs/market.hpp"
#include "robustqs/qs_vector.hpp"

namespace rqs {

/// JSON value tree that keeps every number as its source lexeme, so the
/// exact backend can read "0.3" as 3/10 instead of the nearest double.
struct JsonNode {
    enum class Kind { object, array, string, number, boolean, null_value };

    Kind kind = Kind::null_value;
    std::string text;  // string payload, or the number lexeme
    bool flag = false;
    std::vector<std::pair<std::string, JsonNode>> members;  // object, in file order
    std::vector<JsonNode> items;                            // array

    const JsonNode* find(const std::string& key) const;
};

/// Parses bytes into the lexeme tree. On failure returns false and fills
/// `error` with the parser message and byte position.
bool parse_json(const std::string& bytes, JsonNode& root, std::string& error);

/// One located problem in a model file.
struct ModelIssue {
    std::string where;
    std::string what;
};

std::string issues_text(const std::vector<ModelIssue>& issues);

/// A fully validated model file: market, prior family, and named payoffs.
template <class T>
struct ModelBundle {
    SpacePtr space;
    MarketModel<T> model;
    FamilyPtr<T> family;
    std::vector<std::pair<std::string, QsVector<T>>> payoffs;

    const QsVector<T>* payoff(const std::string& name) const {
        for (const auto& [label, x] : payoffs)
            if (label == name) return &x;
        return nullptr;
    }
};

/// Builds the domain objects from parsed JSON. Every schema violation is
/// reported with its location; the bundle is returned only when the issue
/// list stays empty.
template <class T>
std::optional<ModelBundle<T>> build_model(const JsonNode& root, std::vector<ModelIssue>& issues);

/// parse_json + build_model over raw bytes.
template <class T>
std::optional<ModelBundle<T>> load_model(const std::string& bytes, std::vector<ModelIssue>& issues);

/// Serializes a bundle back to the documented file schema. All numbers are
/// rendered as strings (exact fractions in rational mode, 12 significant
/// digits in float mode), so load(render(m)) reproduces m.
template <class T>
std::string render_model(const ModelBundle<T>& bundle);

extern template std::optional<ModelBundle<Rational>> build_model<Rational>(
    const JsonNode&, std::vector<ModelIssue>&);
extern template std::optional<ModelBundle<double>> build_model<double>(
    const JsonNode&, std::vector<ModelIssue>&);
extern template std::optional<ModelBundle<Rational>> load_model<Rational>(
    const std::string&, std::vector<ModelIssue>&);
extern template std::optional<ModelBundle<double>> load_model<double>(
    const std::string&, std::vector<ModelIssue>&);
extern template std::string render_model<Rational>(const ModelBundle<Rational>&);
extern template std::string render_model<double>(const ModelBundle<double>&);

} // namespace rqs
