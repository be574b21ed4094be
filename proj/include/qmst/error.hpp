#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmst {

// Malformed or inconsistent input data (ingestion, shapes, ranges).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter outside its admissible domain (q <= 0, bad scale grid, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A series or matrix is numerically degenerate (zero variance, zero
// fluctuation function). Carries the offending asset indices when known.
class DegenerateError : public std::runtime_error {
public:
    explicit DegenerateError(const std::string& what, std::vector<std::size_t> assets = {})
        : std::runtime_error(what), assets_(std::move(assets)) {}

    const std::vector<std::size_t>& assets() const noexcept { return assets_; }

private:
    std::vector<std::size_t> assets_;
};

}  // namespace qmst
