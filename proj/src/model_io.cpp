#include "robustqs/model_io.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rqs {

const JsonNode* JsonNode::find(const std::string& key) const {
    for (const auto& [k, v] : members)
        if (k == key) return &v;
    return nullptr;
}

namespace {

/// SAX handler that builds the lexeme tree. Floating literals keep the raw
/// token handed over by the parser; integer literals are re-rendered, which
/// is lossless for them.
struct LexemeSax {
    JsonNode root;
    std::string error;

    std::vector<JsonNode*> stack;
    std::string pending_key;

    JsonNode* attach(JsonNode node) {
        if (stack.empty()) {
            root = std::move(node);
            return &root;
        }
        JsonNode* top = stack.back();
        if (top->kind == JsonNode::Kind::object) {
            top->members.emplace_back(std::move(pending_key), std::move(node));
            return &top->members.back().second;
        }
        top->items.push_back(std::move(node));
        return &top->items.back();
    }

    bool null() {
        attach(JsonNode{});
        return true;
    }
    bool boolean(bool val) {
        JsonNode n;
        n.kind = JsonNode::Kind::boolean;
        n.flag = val;
        attach(std::move(n));
        return true;
    }
    bool number_integer(std::int64_t val) {
        JsonNode n;
        n.kind = JsonNode::Kind::number;
        n.text = std::to_string(val);
        attach(std::move(n));
        return true;
    }
    bool number_unsigned(std::uint64_t val) {
        JsonNode n;
        n.kind = JsonNode::Kind::number;
        n.text = std::to_string(val);
        attach(std::move(n));
        return true;
    }
    bool number_float(double, const std::string& lexeme) {
        JsonNode n;
        n.kind = JsonNode::Kind::number;
        n.text = lexeme;
        attach(std::move(n));
        return true;
    }
    bool string(std::string& val) {
        JsonNode n;
        n.kind = JsonNode::Kind::string;
        n.text = val;
        attach(std::move(n));
        return true;
    }
    bool binary(nlohmann::json::binary_t&) {
        error = "binary values are not part of the model schema";
        return false;
    }
    bool start_object(std::size_t) {
        JsonNode n;
        n.kind = JsonNode::Kind::object;
        stack.push_back(attach(std::move(n)));
        return true;
    }
    bool key(std::string& val) {
        pending_key = val;
        return true;
    }
    bool end_object() {
        stack.pop_back();
        return true;
    }
    bool start_array(std::size_t) {
        JsonNode n;
        n.kind = JsonNode::Kind::array;
        stack.push_back(attach(std::move(n)));
        return true;
    }
    bool end_array() {
        stack.pop_back();
        return true;
    }
    bool parse_error(std::size_t position, const std::string&,
                     const nlohmann::json::exception& ex) {
        error = "parse error at byte " + std::to_string(position) + ": " + ex.what();
        return false;
    }
};

std::string json_quote(const std::string& s) {
    return nlohmann::json(s).dump();
}

} // namespace

bool parse_json(const std::string& bytes, JsonNode& root, std::string& error) {
    LexemeSax sax;
    if (!nlohmann::json::sax_parse(bytes, &sax)) {
        error = sax.error.empty() ? "malformed JSON" : sax.error;
        return false;
    }
    root = std::move(sax.root);
    return true;
}

std::string issues_text(const std::vector<ModelIssue>& issues) {
    std::ostringstream os;
    for (const auto& issue : issues) os << issue.where << ": " << issue.what << "\n";
    return os.str();
}

namespace {

template <class T>
class Builder {
public:
    Builder(const JsonNode& root, std::vector<ModelIssue>& issues)
        : root_(root), issues_(issues) {}

    std::optional<ModelBundle<T>> run() {
        if (root_.kind != JsonNode::Kind::object) {
            report("$", "model file must be a JSON object");
            return std::nullopt;
        }
        read_outcomes();
        if (!issues_.empty()) return std::nullopt;

        read_filtration();
        read_prices();
        read_priors();
        read_payoffs();
        if (!issues_.empty()) return std::nullopt;

        ModelBundle<T> bundle;
        bundle.space = space_;
        bundle.model = MarketModel<T>{space_, filtration_, prices_};

        ModelCheck check = validate_model(bundle.model);
        for (const auto& p : check.problems) report("model", p);

        try {
            std::vector<Prior<T>> priors;
            priors.reserve(prior_weights_.size());
            for (auto& w : prior_weights_) priors.emplace_back(space_, std::move(w));
            bundle.family = std::make_shared<PriorFamily<T>>(space_, std::move(priors));
        } catch (const validation_error& e) {
            report("priors", e.what());
        }
        if (!issues_.empty()) return std::nullopt;

        for (auto& [name, values] : payoff_values_)
            bundle.payoffs.emplace_back(name, QsVector<T>(bundle.family, std::move(values)));
        return bundle;
    }

private:
    void report(std::string where, std::string what) {
        issues_.push_back({std::move(where), std::move(what)});
    }

    std::optional<T> number_at(const JsonNode& node, const std::string& where) {
        if (node.kind != JsonNode::Kind::number && node.kind != JsonNode::Kind::string) {
            report(where, "expected a number or a fraction string");
            return std::nullopt;
        }
        try {
            return parse_number<T>(node.text);
        } catch (const validation_error& e) {
            report(where, e.what());
            return std::nullopt;
        }
    }

    std::optional<std::size_t> outcome_index(const std::string& label, const std::string& where) {
        auto it = outcome_index_.find(label);
        if (it == outcome_index_.end()) {
            report(where, "unknown outcome label '" + label + "'");
            return std::nullopt;
        }
        return it->second;
    }

    /// label → value object, as a dense vector over outcomes. Labels that
    /// the map omits stay at zero; `require_all` demands full coverage.
    std::optional<std::vector<T>> label_map(const JsonNode& node, const std::string& where,
                                            bool require_all) {
        if (node.kind != JsonNode::Kind::object) {
            report(where, "expected an object of outcome labels to numbers");
            return std::nullopt;
        }
        std::vector<T> values(space_->size(), T(0));
        std::vector<char> seen(space_->size(), 0);
        bool ok = true;
        for (const auto& [label, value] : node.members) {
            auto idx = outcome_index(label, where);
            if (!idx) {
                ok = false;
                continue;
            }
            if (seen[*idx]) {
                report(where, "duplicate outcome label '" + label + "'");
                ok = false;
                continue;
            }
            seen[*idx] = 1;
            auto v = number_at(value, where + "." + label);
            if (!v) {
                ok = false;
                continue;
            }
            values[*idx] = *v;
        }
        if (require_all)
            for (std::size_t i = 0; i < seen.size(); ++i)
                if (!seen[i]) {
                    report(where, "missing outcome label '" + space_->label(i) + "'");
                    ok = false;
                }
        if (!ok) return std::nullopt;
        return values;
    }

    void read_outcomes() {
        const JsonNode* node = root_.find("outcomes");
        if (!node || node->kind != JsonNode::Kind::array || node->items.empty()) {
            report("outcomes", "expected a nonempty array of outcome labels");
            return;
        }
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < node->items.size(); ++i) {
            const JsonNode& item = node->items[i];
            if (item.kind != JsonNode::Kind::string || item.text.empty()) {
                report("outcomes[" + std::to_string(i) + "]", "expected a nonempty string");
                return;
            }
            if (outcome_index_.count(item.text)) {
                report("outcomes[" + std::to_string(i) + "]",
                       "duplicate outcome label '" + item.text + "'");
                return;
            }
            outcome_index_[item.text] = i;
            labels.push_back(item.text);
        }
        space_ = std::make_shared<SampleSpace>(std::move(labels));
    }

    void read_filtration() {
        const JsonNode* node = root_.find("filtration");
        if (!node || node->kind != JsonNode::Kind::array || node->items.empty()) {
            report("filtration", "expected a nonempty array of partitions");
            return;
        }
        for (std::size_t t = 0; t < node->items.size(); ++t) {
            const JsonNode& part = node->items[t];
            const std::string where = "filtration[" + std::to_string(t) + "]";
            if (part.kind != JsonNode::Kind::array) {
                report(where, "expected an array of blocks");
                continue;
            }
            std::vector<EventSet> blocks;
            for (const JsonNode& block : part.items) {
                if (block.kind != JsonNode::Kind::array) {
                    report(where, "expected each block to be an array of labels");
                    continue;
                }
                std::vector<std::size_t> idx;
                for (const JsonNode& label : block.items) {
                    if (label.kind != JsonNode::Kind::string) {
                        report(where, "expected outcome labels in blocks");
                        continue;
                    }
                    if (auto i = outcome_index(label.text, where)) idx.push_back(*i);
                }
                blocks.push_back(EventSet::of_indices(std::move(idx), space_->size()));
            }
            filtration_.partitions.push_back(std::move(blocks));
        }
    }

    void read_prices() {
        const JsonNode* node = root_.find("prices");
        if (!node || node->kind != JsonNode::Kind::array || node->items.empty()) {
            report("prices", "expected a nonempty array of time slices");
            return;
        }
        for (std::size_t t = 0; t < node->items.size(); ++t) {
            const JsonNode& slice = node->items[t];
            const std::string twhere = "prices[" + std::to_string(t) + "]";
            std::vector<std::vector<T>> assets;
            if (slice.kind != JsonNode::Kind::array || slice.items.empty()) {
                report(twhere, "expected a nonempty array of per-asset price rows");
                prices_.push_back(std::move(assets));
                continue;
            }
            for (std::size_t j = 0; j < slice.items.size(); ++j) {
                auto row = label_map(slice.items[j],
                                     twhere + "[" + std::to_string(j) + "]", true);
                assets.push_back(row ? std::move(*row) : std::vector<T>(space_->size(), T(0)));
            }
            prices_.push_back(std::move(assets));
        }
    }

    void read_priors() {
        const JsonNode* node = root_.find("priors");
        if (!node || node->kind != JsonNode::Kind::array || node->items.empty()) {
            report("priors", "expected a nonempty array of weight maps");
            return;
        }
        for (std::size_t k = 0; k < node->items.size(); ++k) {
            const std::string where = "priors[" + std::to_string(k) + "]";
            auto weights = label_map(node->items[k], where, false);
            if (!weights) continue;
            T sum(0);
            bool signed_weight = false;
            for (const T& w : *weights) {
                if (w < T(0)) signed_weight = true;
                sum += w;
            }
            if (signed_weight) report(where, "negative prior weight");
            const T gap = sum - T(1);
            const bool normalized =
                num<T>::exact ? num<T>::is_zero(gap)
                              : !(num<T>::abs(gap) > T(num<double>::mass_tol));
            if (!normalized)
                report(where, "prior weights sum to " + num<T>::str(sum) + ", expected 1");
            prior_weights_.push_back(std::move(*weights));
        }
    }

    void read_payoffs() {
        const JsonNode* node = root_.find("payoffs");
        if (!node) return;  // payoffs are optional
        if (node->kind != JsonNode::Kind::object) {
            report("payoffs", "expected an object of named payoffs");
            return;
        }
        for (const auto& [name, map] : node->members) {
            auto values = label_map(map, "payoffs." + name, false);
            if (values) payoff_values_.emplace_back(name, std::move(*values));
        }
    }

    const JsonNode& root_;
    std::vector<ModelIssue>& issues_;

    SpacePtr space_;
    std::map<std::string, std::size_t> outcome_index_;
    Filtration filtration_;
    std::vector<std::vector<std::vector<T>>> prices_;
    std::vector<std::vector<T>> prior_weights_;
    std::vector<std::pair<std::string, std::vector<T>>> payoff_values_;
};

} // namespace

template <class T>
std::optional<ModelBundle<T>> build_model(const JsonNode& root, std::vector<ModelIssue>& issues) {
    return Builder<T>(root, issues).run();
}

template <class T>
std::optional<ModelBundle<T>> load_model(const std::string& bytes,
                                         std::vector<ModelIssue>& issues) {
    JsonNode root;
    std::string error;
    if (!parse_json(bytes, root, error)) {
        issues.push_back({"$", error});
        return std::nullopt;
    }
    return build_model<T>(root, issues);
}

template <class T>
std::string render_model(const ModelBundle<T>& bundle) {
    const SampleSpace& space = *bundle.space;
    std::ostringstream os;

    os << "{\n  \"outcomes\": [";
    for (std::size_t i = 0; i < space.size(); ++i)
        os << (i ? ", " : "") << json_quote(space.label(i));
    os << "],\n  \"filtration\": [\n";
    const auto& parts = bundle.model.filtration.partitions;
    for (std::size_t t = 0; t < parts.size(); ++t) {
        os << "    [";
        for (std::size_t b = 0; b < parts[t].size(); ++b) {
            os << (b ? ", " : "") << "[";
            const auto idx = parts[t][b].indices();
            for (std::size_t k = 0; k < idx.size(); ++k)
                os << (k ? ", " : "") << json_quote(space.label(idx[k]));
            os << "]";
        }
        os << "]" << (t + 1 < parts.size() ? "," : "") << "\n";
    }
    os << "  ],\n  \"prices\": [\n";
    for (std::size_t t = 0; t < bundle.model.prices.size(); ++t) {
        os << "    [";
        for (std::size_t j = 0; j < bundle.model.prices[t].size(); ++j) {
            os << (j ? ", " : "") << "{";
            for (std::size_t i = 0; i < space.size(); ++i)
                os << (i ? ", " : "")
                   << json_quote(space.label(i)) << ": "
                   << json_quote(num<T>::str(bundle.model.prices[t][j][i]));
            os << "}";
        }
        os << "]" << (t + 1 < bundle.model.prices.size() ? "," : "") << "\n";
    }
    os << "  ],\n  \"priors\": [\n";
    const auto& priors = bundle.family->priors();
    for (std::size_t k = 0; k < priors.size(); ++k) {
        os << "    {";
        bool first = true;
        for (std::size_t i = 0; i < space.size(); ++i) {
            if (num<T>::is_zero(priors[k].weight(i))) continue;
            os << (first ? "" : ", ")
               << json_quote(space.label(i)) << ": "
               << json_quote(num<T>::str(priors[k].weight(i)));
            first = false;
        }
        os << "}" << (k + 1 < priors.size() ? "," : "") << "\n";
    }
    os << "  ]";
    if (!bundle.payoffs.empty()) {
        os << ",\n  \"payoffs\": {\n";
        for (std::size_t p = 0; p < bundle.payoffs.size(); ++p) {
            const auto& [name, x] = bundle.payoffs[p];
            os << "    " << json_quote(name) << ": {";
            for (std::size_t i = 0; i < space.size(); ++i)
                os << (i ? ", " : "")
                   << json_quote(space.label(i)) << ": "
                   << json_quote(num<T>::str(x.values()[i]));
            os << "}" << (p + 1 < bundle.payoffs.size() ? "," : "") << "\n";
        }
        os << "  }";
    }
    os << "\n}\n";
    return os.str();
}

template std::optional<ModelBundle<Rational>> build_model<Rational>(const JsonNode&,
                                                                    std::vector<ModelIssue>&);
template std::optional<ModelBundle<double>> build_model<double>(const JsonNode&,
                                                                std::vector<ModelIssue>&);
template std::optional<ModelBundle<Rational>> load_model<Rational>(const std::string&,
                                                                   std::vector<ModelIssue>&);
template std::optional<ModelBundle<double>> load_model<double>(const std::string&,
                                                               std::vector<ModelIssue>&);
template std::string render_model<Rational>(const ModelBundle<Rational>&);
template std::string render_model<double>(const ModelBundle<double>&);

} // namespace rqs
