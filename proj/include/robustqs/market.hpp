#pragma once

#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "robustqs/family.hpp"
#include "robustqs/qs_vector.hpp"
#include "robustqs/space.hpp"

namespace rqs {

/// Information structure as a chain of refining partitions of the outcome
/// set. partitions[0] is the trivial partition; partitions[t] is what is
/// known at time t.
struct Filtration {
    std::vector<std::vector<EventSet>> partitions;

    std::size_t horizon() const { return partitions.empty() ? 0 : partitions.size() - 1; }

    /// Index of the block of partitions[t] containing outcome i, or the
    /// block count when no block covers it (malformed partition).
    std::size_t block_containing(std::size_t t, std::size_t i) const {
        const auto& blocks = partitions.at(t);
        for (std::size_t b = 0; b < blocks.size(); ++b)
            if (blocks[b].contains(i)) return b;
        return blocks.size();
    }
};

/// Price system S[t][j][omega] for d traded assets over T periods, in units
/// of an implicit constant numeraire. Prices must be adapted: constant on
/// every block of the time-t partition.
template <class T>
struct MarketModel {
    SpacePtr space;
    Filtration filtration;
    std::vector<std::vector<std::vector<T>>> prices;  // [t][asset][outcome]

    std::size_t periods() const { return prices.empty() ? 0 : prices.size() - 1; }
    std::size_t assets() const { return prices.empty() ? 0 : prices[0].size(); }
};

/// holdings[k][j][omega] is the position in asset j held over the period
/// (k, k+1]. Predictability: holdings[k][j] is constant on every block of
/// partitions[k].
template <class T>
struct Strategy {
    std::vector<std::vector<std::vector<T>>> holdings;  // [period][asset][outcome]

    static Strategy zero(std::size_t periods, std::size_t assets, std::size_t n) {
        Strategy h;
        h.holdings.assign(periods, std::vector<std::vector<T>>(assets, std::vector<T>(n, T(0))));
        return h;
    }

    static Strategy constant(std::size_t periods, std::size_t assets, std::size_t n, const T& v) {
        Strategy h;
        h.holdings.assign(periods, std::vector<std::vector<T>>(assets, std::vector<T>(n, v)));
        return h;
    }
};

/// Itemized structural verdict; ok iff problems is empty.
struct ModelCheck {
    bool ok = true;
    std::vector<std::string> problems;

    void flag(std::string p) {
        ok = false;
        problems.push_back(std::move(p));
    }
};

namespace market_detail {

inline std::string block_text(const SampleSpace& space, const EventSet& block) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (std::size_t i : block.indices()) {
        if (!first) os << ",";
        os << space.label(i);
        first = false;
    }
    os << "}";
    return os.str();
}

template <class T>
bool constant_on(const std::vector<T>& values, const EventSet& block) {
    const auto& idx = block.indices();
    for (std::size_t k = 1; k < idx.size(); ++k)
        if (!(values[idx[k]] == values[idx[0]])) return false;
    return true;
}

} // namespace market_detail

/// Checks the filtration chain (trivial root, refinement, blocks partition
/// the space) and price adaptedness. Never throws for content problems;
/// every violation is itemized with its (t, asset, block) location.
template <class T>
ModelCheck validate_model(const MarketModel<T>& model) {
    ModelCheck check;
    if (!model.space) {
        check.flag("model has no sample space");
        return check;
    }
    const SampleSpace& space = *model.space;
    const std::size_t n = space.size();
    const auto& parts = model.filtration.partitions;

    if (parts.empty()) {
        check.flag("filtration has no partitions");
        return check;
    }
    if (!(parts[0].size() == 1 && parts[0][0] == EventSet::full(n)))
        check.flag("partition 0 is not the trivial partition {omega-set}");

    for (std::size_t t = 0; t < parts.size(); ++t) {
        std::vector<char> covered(n, 0);
        for (std::size_t b = 0; b < parts[t].size(); ++b) {
            const EventSet& block = parts[t][b];
            if (block.indices().empty())
                check.flag("partition " + std::to_string(t) + " has an empty block");
            for (std::size_t i : block.indices()) {
                if (i >= n) {
                    check.flag("partition " + std::to_string(t) + " block " + std::to_string(b) +
                               " references an outcome out of range");
                    continue;
                }
                if (covered[i])
                    check.flag("partition " + std::to_string(t) + " blocks overlap at outcome " +
                               space.label(i));
                covered[i] = 1;
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!covered[i])
                check.flag("partition " + std::to_string(t) + " does not cover outcome " +
                           space.label(i));
        if (t > 0) {
            for (const EventSet& block : parts[t]) {
                bool refined = false;
                for (const EventSet& coarse : parts[t - 1])
                    if (block.subset_of(coarse)) {
                        refined = true;
                        break;
                    }
                if (!refined)
                    check.flag("partition " + std::to_string(t) + " block " +
                               market_detail::block_text(space, block) +
                               " is not contained in any block of partition " +
                               std::to_string(t - 1));
            }
        }
    }

    if (model.prices.size() != parts.size()) {
        check.flag("price array has " + std::to_string(model.prices.size()) +
                   " time slices for " + std::to_string(parts.size()) + " partitions");
        return check;
    }
    const std::size_t d = model.assets();
    if (d == 0) check.flag("model has no assets");
    for (std::size_t t = 0; t < model.prices.size(); ++t) {
        if (model.prices[t].size() != d) {
            check.flag("price slice " + std::to_string(t) + " has wrong asset count");
            continue;
        }
        for (std::size_t j = 0; j < d; ++j) {
            if (model.prices[t][j].size() != n) {
                check.flag("prices[" + std::to_string(t) + "][" + std::to_string(j) +
                           "] has wrong outcome count");
                continue;
            }
            if (t >= parts.size()) continue;
            for (const EventSet& block : parts[t]) {
                if (!market_detail::constant_on(model.prices[t][j], block))
                    check.flag("prices[" + std::to_string(t) + "][" + std::to_string(j) +
                               "] not constant on block " +
                               market_detail::block_text(space, block) + " of partition " +
                               std::to_string(t));
            }
        }
    }
    return check;
}

/// Throwing form for operations that require a structurally valid model.
template <class T>
void ensure_valid(const MarketModel<T>& model) {
    ModelCheck check = validate_model(model);
    if (check.ok) return;
    std::string msg = "invalid market model:";
    for (const auto& p : check.problems) msg += "\n  " + p;
    throw validation_error(msg);
}

/// Checks strategy shape and predictability against the model's filtration.
template <class T>
void ensure_predictable(const MarketModel<T>& model, const Strategy<T>& h) {
    const std::size_t periods = model.periods();
    const std::size_t d = model.assets();
    const std::size_t n = model.space->size();
    if (h.holdings.size() != periods) throw validation_error("strategy has wrong period count");
    for (std::size_t k = 0; k < periods; ++k) {
        if (h.holdings[k].size() != d) throw validation_error("strategy has wrong asset count");
        for (std::size_t j = 0; j < d; ++j) {
            if (h.holdings[k][j].size() != n)
                throw validation_error("strategy has wrong outcome count");
            for (const EventSet& block : model.filtration.partitions[k])
                if (!market_detail::constant_on(h.holdings[k][j], block))
                    throw validation_error("strategy not predictable: holdings for period " +
                                           std::to_string(k + 1) + ", asset " + std::to_string(j) +
                                           " vary on block " +
                                           market_detail::block_text(*model.space, block));
        }
    }
}

/// Terminal gain of a self-financing strategy, per outcome:
/// sum over periods and assets of H[k][j] * (S[k+1][j] - S[k][j]).
template <class T>
std::vector<T> gains_raw(const MarketModel<T>& model, const Strategy<T>& h) {
    ensure_predictable(model, h);
    const std::size_t n = model.space->size();
    std::vector<T> g(n, T(0));
    for (std::size_t k = 0; k < model.periods(); ++k)
        for (std::size_t j = 0; j < model.assets(); ++j)
            for (std::size_t i = 0; i < n; ++i)
                g[i] += h.holdings[k][j][i] * (model.prices[k + 1][j][i] - model.prices[k][j][i]);
    return g;
}

/// Gain vector as a class in L-infinity over the family (values off the
/// q.s. support are quotiented away).
template <class T>
QsVector<T> gains(const MarketModel<T>& model, const Strategy<T>& h, FamilyPtr<T> family) {
    return QsVector<T>(std::move(family), gains_raw(model, h));
}

} // namespace rqs
