#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qmst {

using Series = std::vector<double>;

enum class Layout { Wide, Long };

Layout parse_layout(const std::string& name);

// Prices of N assets on a common uniform time grid. Rows are assets.
struct PricePanel {
    std::vector<std::int64_t> timestamps;  // epoch milliseconds
    std::vector<std::string> assets;
    std::vector<std::string> sectors;      // optional, empty or one per asset
    std::vector<Series> prices;
    std::int64_t step_ms = 0;
    // Assets present in the input but dropped for lacking an observation at
    // the first grid point.
    std::vector<std::string> dropped;

    std::size_t num_assets() const { return assets.size(); }
    std::size_t length() const { return timestamps.size(); }

    // Throws DataError on any broken invariant.
    void validate() const;
};

// Log-returns. timestamps[m] is the end of the m-th return interval.
struct ReturnPanel {
    std::vector<std::int64_t> timestamps;
    std::vector<std::string> assets;
    std::vector<std::string> sectors;
    std::vector<Series> returns;

    std::size_t num_assets() const { return assets.size(); }
    std::size_t length() const { return timestamps.size(); }

    void validate() const;

    // Keeps only the listed asset rows, in the given order.
    ReturnPanel select_assets(const std::vector<std::size_t>& rows) const;
};

struct CsvOptions {
    char delimiter = ',';
};

PricePanel load_prices(const std::filesystem::path& source, Layout layout, CsvOptions opts = {});
PricePanel parse_prices(std::istream& in, Layout layout, CsvOptions opts = {});

// Reads a wide table of already-computed returns. No positivity constraint.
ReturnPanel load_returns(const std::filesystem::path& source, CsvOptions opts = {});

ReturnPanel to_returns(const PricePanel& p);

// Running sum along each asset row.
std::vector<Series> cumulative_returns(const ReturnPanel& r);

ReturnPanel slice_window(const ReturnPanel& r, std::size_t start, std::size_t length);

// Pseudo-prices exp(cumsum(returns)) with a unit first price; one more
// sample than the return panel. Inverse of to_returns up to rounding.
PricePanel to_prices(const ReturnPanel& r, std::int64_t first_timestamp);

// Wide-layout writers: `timestamp,A,B,...`.
void write_wide(std::ostream& out, const std::vector<std::int64_t>& timestamps,
                const std::vector<std::string>& assets, const std::vector<Series>& rows);

// Parses ISO-8601 (`YYYY-MM-DD[THH:MM[:SS[.fff]]][Z]`) or integer epoch-ms.
std::int64_t parse_timestamp(const std::string& text, bool iso);
bool looks_like_iso(const std::string& text);

}  // namespace qmst
