#pragma once

#include <stdexcept>
#include <string>

namespace gmner {

/// Malformed or inconsistent input data (schema violations, bad offsets,
/// dimension mismatches). Maps to CLI exit status 2.
class DataError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Transport or protocol failure talking to a model backend. Exit status 3.
class BackendError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Bad command-line usage. Exit status 1.
class UsageError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

} // namespace gmner
