#include "robustqs.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "robustqs/engine.hpp"
#include "robustqs/errors.hpp"
#include "robustqs/model_io.hpp"

struct rqs_model {
    std::variant<rqs::ModelBundle<rqs::Rational>, rqs::ModelBundle<double>> bundle;
};

namespace {

void put(char** slot, const std::string& text) {
    if (!slot) return;
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (buf) std::memcpy(buf, text.c_str(), text.size() + 1);
    *slot = buf;
}

template <class T>
int parse_typed(const std::string& bytes, rqs_model** out, char** err) {
    std::vector<rqs::ModelIssue> issues;
    auto bundle = rqs::load_model<T>(bytes, issues);
    if (!bundle) {
        put(err, rqs::issues_text(issues));
        return RQS_INVALID;
    }
    *out = new rqs_model{std::move(*bundle)};
    return RQS_OK;
}

int parse_bytes(const char* bytes, const char* mode, rqs_model** out, char** err) {
    if (!bytes || !mode || !out) {
        put(err, "null argument\n");
        return RQS_INVALID;
    }
    *out = nullptr;
    const std::string m(mode);
    if (m == "exact") return parse_typed<rqs::Rational>(bytes, out, err);
    if (m == "float") return parse_typed<double>(bytes, out, err);
    put(err, "mode must be \"exact\" or \"float\"\n");
    return RQS_INVALID;
}

template <class Fn>
int guarded(char** err, Fn&& body) {
    try {
        return body();
    } catch (const rqs::error& e) {
        put(err, std::string(e.what()) + "\n");
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        put(err, std::string(e.what()) + "\n");
        return RQS_INTERNAL;
    }
}

} // namespace

extern "C" {

const char* rqs_version(void) { return rqs::engine_version(); }

void rqs_free(char* buffer) { std::free(buffer); }

int rqs_run(int argc, const char* const* argv, char** out, char** err) {
    return guarded(err, [&]() -> int {
        std::vector<std::string> args;
        args.reserve(argc > 0 ? static_cast<std::size_t>(argc) : 0);
        for (int i = 0; i < argc; ++i) args.emplace_back(argv[i] ? argv[i] : "");
        rqs::RunResult result = rqs::run_cli(args);
        if (!result.out.empty()) put(out, result.out);
        if (!result.err.empty()) put(err, result.err);
        return result.exit_code;
    });
}

int rqs_model_parse(const char* bytes, const char* mode, rqs_model** out, char** err) {
    return guarded(err, [&]() { return parse_bytes(bytes, mode, out, err); });
}

int rqs_model_open(const char* path, const char* mode, rqs_model** out, char** err) {
    return guarded(err, [&]() -> int {
        if (!path) {
            put(err, "null path\n");
            return RQS_INVALID;
        }
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            put(err, "cannot read model file '" + std::string(path) + "'\n");
            return RQS_INVALID;
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return parse_bytes(buffer.str().c_str(), mode, out, err);
    });
}

int rqs_model_render(const rqs_model* model, char** out) {
    return guarded(nullptr, [&]() -> int {
        if (!model || !out) return RQS_INVALID;
        std::visit([&](const auto& bundle) { put(out, rqs::render_model(bundle)); },
                   model->bundle);
        return RQS_OK;
    });
}

void rqs_model_close(rqs_model* model) { delete model; }

} // extern "C"
