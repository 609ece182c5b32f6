#pragma once

#include <stdexcept>
#include <string>

namespace rqs {

/// Error taxonomy. Codes mirror the process exit codes of the CLI:
/// anything wrong with the *inputs* is a validation-class error (2),
/// a broken engine invariant is an internal error (3).
enum class errc {
    validation = 2,
    internal = 3,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

/// Bad input: dimension mismatch, unknown label, malformed file, ...
class validation_error : public error {
public:
    explicit validation_error(const std::string& what) : error(errc::validation, what) {}
};

/// A measure or prior charges a polar outcome where domination is required.
class domination_error : public validation_error {
public:
    explicit domination_error(const std::string& what) : validation_error(what) {}
};

/// An operation was asked to run outside its declared contract
/// (e.g. bidual of a functional not marked convex, inf minus inf).
class contract_error : public error {
public:
    explicit contract_error(const std::string& what) : error(errc::internal, what) {}
};

/// Exact enumeration refused because the instance exceeds the size cap.
class size_error : public validation_error {
public:
    explicit size_error(const std::string& what) : validation_error(what) {}
};

/// Pricing requested on a market that admits arbitrage.
class arbitrage_error : public validation_error {
public:
    explicit arbitrage_error(const std::string& what) : validation_error(what) {}
};

/// Command line / options misuse.
class usage_error : public validation_error {
public:
    explicit usage_error(const std::string& what) : validation_error(what) {}
};

} // namespace rqs
