#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "robustqs/errors.hpp"

namespace rqs {

/// Finite sample space: an ordered list of distinct outcome labels.
/// Everything downstream indexes outcomes by position in this list.
class SampleSpace {
public:
    explicit SampleSpace(std::vector<std::string> outcomes) : outcomes_(std::move(outcomes)) {
        if (outcomes_.empty()) throw validation_error("sample space needs at least one outcome");
        for (std::size_t i = 0; i < outcomes_.size(); ++i) {
            if (outcomes_[i].empty()) throw validation_error("empty outcome label");
            auto [it, fresh] = index_.emplace(outcomes_[i], i);
            if (!fresh) throw validation_error("duplicate outcome label '" + outcomes_[i] + "'");
        }
    }

    std::size_t size() const { return outcomes_.size(); }
    const std::vector<std::string>& outcomes() const { return outcomes_; }
    const std::string& label(std::size_t i) const { return outcomes_.at(i); }

    std::size_t index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end()) throw validation_error("unknown outcome label '" + label + "'");
        return it->second;
    }
    bool has_label(const std::string& label) const { return index_.count(label) != 0; }

    bool operator==(const SampleSpace& o) const { return outcomes_ == o.outcomes_; }

private:
    std::vector<std::string> outcomes_;
    std::map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

/// An event as a sorted, duplicate-free set of outcome indices.
class EventSet {
public:
    EventSet() = default;

    static EventSet of_indices(std::vector<std::size_t> idx, std::size_t space_size) {
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        if (!idx.empty() && idx.back() >= space_size)
            throw validation_error("outcome index out of range");
        EventSet e;
        e.indices_ = std::move(idx);
        return e;
    }

    static EventSet of_labels(const std::vector<std::string>& labels, const SampleSpace& space) {
        std::vector<std::size_t> idx;
        idx.reserve(labels.size());
        for (const auto& l : labels) idx.push_back(space.index_of(l));
        return of_indices(std::move(idx), space.size());
    }

    static EventSet full(std::size_t space_size) {
        std::vector<std::size_t> idx(space_size);
        for (std::size_t i = 0; i < space_size; ++i) idx[i] = i;
        return of_indices(std::move(idx), space_size);
    }

    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }

    bool contains(std::size_t i) const {
        return std::binary_search(indices_.begin(), indices_.end(), i);
    }
    bool subset_of(const EventSet& o) const {
        return std::includes(o.indices_.begin(), o.indices_.end(), indices_.begin(), indices_.end());
    }
    bool strict_subset_of(const EventSet& o) const {
        return subset_of(o) && indices_.size() < o.indices_.size();
    }

    EventSet intersect(const EventSet& o) const {
        EventSet r;
        std::set_intersection(indices_.begin(), indices_.end(), o.indices_.begin(), o.indices_.end(),
                              std::back_inserter(r.indices_));
        return r;
    }

    std::vector<std::string> labels(const SampleSpace& space) const {
        std::vector<std::string> out;
        out.reserve(indices_.size());
        for (auto i : indices_) out.push_back(space.label(i));
        return out;
    }

    bool operator==(const EventSet& o) const { return indices_ == o.indices_; }

private:
    std::vector<std::size_t> indices_;
};

} // namespace rqs
