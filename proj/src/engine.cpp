#include "robustqs/engine.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "robustqs/duality.hpp"
#include "robustqs/model_io.hpp"
#include "robustqs/pricing.hpp"
#include "robustqs/report.hpp"
#include "robustqs/risk.hpp"

namespace rqs {

const char* engine_version() { return "0.1.0"; }

namespace {

struct Options {
    std::string command;
    std::string model_path;
    std::string payoff;
    std::string functional = "worst_case";
    std::string mode = "float";
    std::string format = "json";
    std::string event;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    bool timing = false;
};

const std::vector<std::string> kCommands{"validate",            "capacity", "na",
                                         "martingale-measures", "price",    "risk",
                                         "reduce",              "sensitivity"};

/// Returns -1 when parsing succeeded and the command should run; otherwise
/// the process exit code (help text goes to `out`, the complaint to `err`).
int parse_flags(const std::vector<std::string>& args, Options& opt, std::string& out,
                std::string& err) {
    CLI::App app{"quasi-sure analysis of finite-market models under prior families"};
    app.name("rqs");
    app.add_option("command", opt.command, "one of: validate, capacity, na, "
                                           "martingale-measures, price, risk, reduce, sensitivity")
        ->required();
    app.add_option("--model", opt.model_path, "path to the model file")->required();
    app.add_option("--payoff", opt.payoff, "payoff name from the model file");
    app.add_option("--mode", opt.mode, "arithmetic backend (default float)")
        ->check(CLI::IsMember({"exact", "float"}));
    app.add_option("--tol", opt.tol, "float-mode verification tolerance (default 1e-9)");
    app.add_option("--functional", opt.functional,
                   "risk functional: worst_case, expectation, entropic, avar");
    app.add_option("--format", opt.format, "output format (default json)")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--event", opt.event, "comma-separated outcome labels");
    app.add_option("--seed", opt.seed, "seed for randomized probes");
    app.add_flag("--timing", opt.timing, "attach wall-clock seconds to the report");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out = app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err = std::string("usage: ") + e.what() + "\n";
        return 2;
    }
    if (std::find(kCommands.begin(), kCommands.end(), opt.command) == kCommands.end()) {
        err = "usage: unknown command '" + opt.command + "'\n";
        return 2;
    }
    return -1;
}

template <class T>
nlohmann::ordered_json strategy_json(const SampleSpace& space, const Strategy<T>& h) {
    nlohmann::ordered_json periods = nlohmann::ordered_json::array();
    for (const auto& slice : h.holdings) {
        nlohmann::ordered_json assets = nlohmann::ordered_json::array();
        for (const auto& row : slice) {
            nlohmann::ordered_json holdings = nlohmann::ordered_json::object();
            for (std::size_t i = 0; i < row.size(); ++i)
                holdings[space.label(i)] = num<T>::str(row[i]);
            assets.push_back(std::move(holdings));
        }
        periods.push_back(std::move(assets));
    }
    return periods;
}

template <class T>
nlohmann::ordered_json measure_json(const SampleSpace& space, const MeasureVector<T>& q) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < space.size(); ++i) out[space.label(i)] = num<T>::str(q.mass(i));
    return out;
}

template <class T>
nlohmann::ordered_json values_json(const SampleSpace& space, const std::vector<T>& values) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < space.size(); ++i) out[space.label(i)] = num<T>::str(values[i]);
    return out;
}

nlohmann::ordered_json label_array(const SampleSpace& space, const EventSet& ev) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (std::size_t i : ev.indices()) out.push_back(space.label(i));
    return out;
}

template <class T>
const QsVector<T>& required_payoff(const ModelBundle<T>& bundle, const Options& opt) {
    if (opt.payoff.empty())
        throw usage_error("command '" + opt.command + "' requires --payoff");
    const QsVector<T>* x = bundle.payoff(opt.payoff);
    if (!x) {
        std::string names;
        for (const auto& [name, _] : bundle.payoffs) names += (names.empty() ? "" : ", ") + name;
        throw validation_error("payoff '" + opt.payoff + "' is not in the model file" +
                               (names.empty() ? "" : "; available: " + names));
    }
    return *x;
}

EventSet parse_event(const SampleSpace& space, const std::string& text) {
    std::vector<std::string> labels;
    std::stringstream ss(text);
    std::string label;
    while (std::getline(ss, label, ','))
        if (!label.empty()) labels.push_back(label);
    return EventSet::of_labels(labels, space);
}

template <class T>
nlohmann::ordered_json cmd_validate(const ModelBundle<T>& bundle) {
    nlohmann::ordered_json body;
    body["valid"] = true;
    body["outcomes"] = bundle.space->size();
    body["periods"] = bundle.model.periods();
    body["assets"] = bundle.model.assets();
    body["priors"] = bundle.family->size();
    body["qs_support"] = label_array(*bundle.space, bundle.family->qs_support());
    body["polar_outcomes"] = label_array(*bundle.space, bundle.family->polar_atoms());
    nlohmann::ordered_json payoffs = nlohmann::ordered_json::array();
    for (const auto& [name, _] : bundle.payoffs) payoffs.push_back(name);
    body["payoffs"] = std::move(payoffs);
    return body;
}

template <class T>
nlohmann::ordered_json cmd_capacity(const ModelBundle<T>& bundle, const Options& opt) {
    if (opt.event.empty()) throw usage_error("capacity requires --event LABEL[,LABEL...]");
    EventSet ev = parse_event(*bundle.space, opt.event);
    nlohmann::ordered_json body;
    body["event"] = label_array(*bundle.space, ev);
    body["capacity"] = num<T>::str(capacity(*bundle.family, ev));
    body["polar"] = bundle.family->is_polar(ev);
    return body;
}

template <class T>
nlohmann::ordered_json cmd_na(const ModelBundle<T>& bundle) {
    auto report = ftap_check(bundle.model, *bundle.family);
    if (!report.agree)
        throw contract_error(
            "arbitrage verdict and martingale-measure equivalence disagree on this model");
    nlohmann::ordered_json body;
    body["verdict"] = report.na.arbitrage ? "arbitrage" : "no_arbitrage";
    body["polytope_equivalent"] = report.polytope_equivalent;
    body["agree"] = true;
    if (report.na.arbitrage) {
        nlohmann::ordered_json cert;
        cert["outcome"] = bundle.space->label(*report.na.outcome);
        cert["strategy"] = strategy_json(*bundle.space, *report.na.strategy);
        body["certificate"] = std::move(cert);
    }
    return body;
}

template <class T>
nlohmann::ordered_json cmd_martingale_measures(const ModelBundle<T>& bundle) {
    auto poly = martingale_polytope(bundle.model, *bundle.family, true);
    nlohmann::ordered_json body;
    body["empty"] = poly.empty;
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < bundle.space->size(); ++i) labels.push_back(bundle.space->label(i));
    body["outcomes"] = std::move(labels);
    nlohmann::ordered_json vertices = nlohmann::ordered_json::array();
    if (poly.vertices)
        for (const auto& q : *poly.vertices) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i < bundle.space->size(); ++i)
                row.push_back(num<T>::str(q.mass(i)));
            vertices.push_back(std::move(row));
        }
    body["vertices"] = std::move(vertices);
    return body;
}

template <class T>
nlohmann::ordered_json cmd_price(const ModelBundle<T>& bundle, const Options& opt) {
    const QsVector<T>& x = required_payoff(bundle, opt);
    auto res = superhedge(bundle.model, *bundle.family, x);
    if constexpr (!num<T>::exact) {
        if (num<T>::abs(res.gap) > T(opt.tol))
            throw contract_error("duality gap " + num<T>::str(res.gap) +
                                 " exceeds the tolerance " + num<T>::str(T(opt.tol)));
    }
    nlohmann::ordered_json body;
    body["payoff"] = opt.payoff;
    body["price"] = num<T>::str(res.price);
    body["lower_price"] = num<T>::str(res.lower_price);
    body["gap"] = num<T>::str(res.gap);
    body["strategy"] = strategy_json(*bundle.space, res.strategy);
    body["dual_measure"] = measure_json(*bundle.space, res.dual);
    return body;
}

template <class T>
nlohmann::ordered_json cmd_risk(const ModelBundle<T>& bundle, const Options& opt) {
    const QsVector<T>& x = required_payoff(bundle, opt);
    auto f = make_functional<T>(opt.functional, bundle.family);
    const T value = f.evaluate(x).value();

    // The generic grid conjugate is kept coarse here: the report documents
    // the bidual as a certified lower bound, exact on the closed-form path.
    BidualOptions<T> opts;
    if (!f.sup_of_expectations) {
        opts.mesh = 8;
        opts.point_cap = 512;
        opts.eval_cap = 20000;
    }
    const T dual = bidual_convex(f, x, opts);

    nlohmann::ordered_json body;
    body["payoff"] = opt.payoff;
    body["functional"] = opt.functional;
    body["value"] = num<T>::str(value);
    body["bidual"] = num<T>::str(dual);
    body["bidual_gap"] = num<T>::str(value - dual);
    return body;
}

template <class T>
nlohmann::ordered_json cmd_reduce(const ModelBundle<T>& bundle) {
    auto red = reduce_family(*bundle.family);
    nlohmann::ordered_json body;
    body["original"] = bundle.family->size();
    body["reduced"] = red.family.size();
    body["picked"] = red.picked;
    nlohmann::ordered_json priors = nlohmann::ordered_json::array();
    for (const auto& p : red.family.priors())
        priors.push_back(values_json(*bundle.space, p.weights()));
    body["priors"] = std::move(priors);
    return body;
}

template <class T>
nlohmann::ordered_json cmd_sensitivity(const ModelBundle<T>& bundle, const Options& opt) {
    auto f = make_functional<T>(opt.functional, bundle.family);
    if (!f.sup_of_expectations)
        throw validation_error("sensitivity requires a sup-of-expectations functional "
                               "(worst_case or expectation)");
    auto rep = sensitivity_check<T>(bundle.family, level_set_oracle(f), *f.reduction_family, 64,
                                    opt.seed);
    nlohmann::ordered_json body;
    body["functional"] = opt.functional;
    body["verdict"] = to_string(rep.verdict);
    body["detail"] = rep.detail;
    if (rep.witness) body["witness"] = values_json(*bundle.space, rep.witness->values());
    return body;
}

template <class T>
nlohmann::ordered_json dispatch(const ModelBundle<T>& bundle, const Options& opt) {
    if (opt.command == "validate") return cmd_validate(bundle);
    if (opt.command == "capacity") return cmd_capacity(bundle, opt);
    if (opt.command == "na") return cmd_na(bundle);
    if (opt.command == "martingale-measures") return cmd_martingale_measures(bundle);
    if (opt.command == "price") return cmd_price(bundle, opt);
    if (opt.command == "risk") return cmd_risk(bundle, opt);
    if (opt.command == "reduce") return cmd_reduce(bundle);
    return cmd_sensitivity(bundle, opt);
}

template <class T>
int run_typed(const Options& opt, const std::string& model_bytes, Report& report,
              std::string& err) {
    std::vector<ModelIssue> issues;
    auto bundle = load_model<T>(model_bytes, issues);
    if (!bundle) {
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (const auto& issue : issues) {
            nlohmann::ordered_json item;
            item["where"] = issue.where;
            item["what"] = issue.what;
            list.push_back(std::move(item));
        }
        report.body["error"] = "invalid model";
        report.body["issues"] = std::move(list);
        err = "invalid model: " + std::to_string(issues.size()) + " issue(s)\n";
        return 2;
    }

    const auto started = std::chrono::steady_clock::now();
    report.body = dispatch<T>(*bundle, opt);
    if (opt.timing) {
        const auto elapsed = std::chrono::steady_clock::now() - started;
        report.seconds = std::chrono::duration<double>(elapsed).count();
    }
    return 0;
}

} // namespace

RunResult run_cli(const std::vector<std::string>& args) {
    RunResult result;
    Options opt;
    {
        const int code = parse_flags(args, opt, result.out, result.err);
        if (code >= 0) {
            result.exit_code = code;
            return result;
        }
    }

    std::ifstream in(opt.model_path, std::ios::binary);
    if (!in) {
        result.exit_code = 2;
        result.err = "cannot read model file '" + opt.model_path + "'\n";
        return result;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string model_bytes = buffer.str();

    std::uint64_t digest = fnv1a(model_bytes);
    digest = fnv1a(opt.command + "|" + opt.mode + "|" + opt.payoff + "|" + opt.functional + "|" +
                       opt.event + "|" + std::to_string(opt.seed),
                   digest);

    Report report;
    report.command = opt.command;
    report.mode = opt.mode;
    report.inputs = hex64(digest);

    try {
        result.exit_code = opt.mode == "exact"
                               ? run_typed<Rational>(opt, model_bytes, report, result.err)
                               : run_typed<double>(opt, model_bytes, report, result.err);
    } catch (const error& e) {
        result.exit_code = static_cast<int>(e.code());
        report.body = nlohmann::ordered_json::object();
        report.body["error"] = e.what();
        result.err = std::string(e.what()) + "\n";
    } catch (const std::exception& e) {
        result.exit_code = 3;
        report.body = nlohmann::ordered_json::object();
        report.body["error"] = e.what();
        result.err = std::string(e.what()) + "\n";
    }

    result.out = emit(report, opt.format);
    return result;
}

} // namespace rqs
