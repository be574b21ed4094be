#include "qmst/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "qmst/error.hpp"
#include "qmst/format.hpp"

namespace qmst {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

struct Row {
    std::size_t line;  // 1-based line number in the file
    std::vector<std::string> cells;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;
};

Table read_table(std::istream& in, char delim) {
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (t.header.empty()) {
            t.header = split(line, delim);
            continue;
        }
        t.rows.push_back({lineno, split(line, delim)});
    }
    if (t.header.empty()) throw DataError("empty input: header row required");
    return t;
}

std::optional<double> parse_number(const std::string& cell) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
    return v;
}

// Timestamp column parser that enforces one format per column.
class TimestampColumn {
public:
    std::int64_t parse(const std::string& cell, std::size_t line) {
        bool iso = looks_like_iso(cell);
        if (!format_) format_ = iso;
        if (*format_ != iso) {
            throw DataError("line " + std::to_string(line) +
                            ": timestamp format differs from earlier rows (mixed ISO-8601 and epoch-ms)");
        }
        try {
            return parse_timestamp(cell, iso);
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line) + ": " + e.what());
        }
    }

private:
    std::optional<bool> format_;
};

double parse_price(const std::string& cell, std::size_t line) {
    auto v = parse_number(cell);
    if (!v || !std::isfinite(*v)) {
        throw DataError("line " + std::to_string(line) + ": malformed price '" + cell + "'");
    }
    if (*v <= 0.0) {
        throw DataError("line " + std::to_string(line) + ": non-positive price " + cell);
    }
    return *v;
}

struct Observation {
    std::int64_t t;
    double price;
};

struct RawAsset {
    std::string name;
    std::string sector;
    std::vector<Observation> obs;
};

PricePanel align(std::vector<RawAsset> raw) {
    std::set<std::int64_t> grid_set;
    for (const auto& a : raw)
        for (const auto& o : a.obs) grid_set.insert(o.t);
    std::vector<std::int64_t> grid(grid_set.begin(), grid_set.end());
    if (grid.size() < 2) throw DataError("need at least 2 time points, got " + std::to_string(grid.size()));

    std::int64_t step = grid[1] - grid[0];
    for (std::size_t i = 2; i < grid.size(); ++i) {
        if (grid[i] - grid[i - 1] != step) {
            throw DataError("non-uniform time grid: spacing " + std::to_string(grid[i] - grid[i - 1]) +
                            " ms at timestamp " + std::to_string(grid[i]) + ", expected " +
                            std::to_string(step) + " ms");
        }
    }

    PricePanel p;
    p.timestamps = grid;
    p.step_ms = step;
    bool any_sector = std::any_of(raw.begin(), raw.end(), [](const RawAsset& a) { return !a.sector.empty(); });
    for (auto& a : raw) {
        if (a.obs.empty() || a.obs.front().t != grid.front()) {
            p.dropped.push_back(a.name);
            continue;
        }
        Series row(grid.size());
        std::size_t k = 0;
        double last = a.obs.front().price;
        for (std::size_t m = 0; m < grid.size(); ++m) {
            if (k < a.obs.size() && a.obs[k].t == grid[m]) {
                last = a.obs[k].price;
                ++k;
            }
            row[m] = last;
        }
        p.assets.push_back(a.name);
        if (any_sector) p.sectors.push_back(a.sector);
        p.prices.push_back(std::move(row));
    }
    p.validate();
    return p;
}

PricePanel parse_wide(const Table& t) {
    if (t.header.size() < 3) {
        throw DataError("wide layout needs a timestamp column and at least 2 asset columns");
    }
    std::vector<RawAsset> raw(t.header.size() - 1);
    for (std::size_t j = 1; j < t.header.size(); ++j) raw[j - 1].name = t.header[j];

    TimestampColumn tcol;
    std::optional<std::int64_t> prev;
    for (const auto& row : t.rows) {
        if (row.cells.size() != t.header.size()) {
            throw DataError("line " + std::to_string(row.line) + ": expected " +
                            std::to_string(t.header.size()) + " cells, got " +
                            std::to_string(row.cells.size()));
        }
        std::int64_t ts = tcol.parse(row.cells[0], row.line);
        if (prev && ts <= *prev) {
            throw DataError("line " + std::to_string(row.line) + ": timestamps not strictly increasing");
        }
        prev = ts;
        for (std::size_t j = 1; j < row.cells.size(); ++j) {
            if (row.cells[j].empty()) continue;
            raw[j - 1].obs.push_back({ts, parse_price(row.cells[j], row.line)});
        }
    }
    return align(std::move(raw));
}

PricePanel parse_long(const Table& t) {
    if (t.header.size() != 3 && t.header.size() != 4) {
        throw DataError("long layout needs columns timestamp,asset,price[,sector]");
    }
    std::vector<RawAsset> raw;
    std::unordered_map<std::string, std::size_t> index;
    TimestampColumn tcol;
    for (const auto& row : t.rows) {
        if (row.cells.size() != t.header.size()) {
            throw DataError("line " + std::to_string(row.line) + ": expected " +
                            std::to_string(t.header.size()) + " cells, got " +
                            std::to_string(row.cells.size()));
        }
        std::int64_t ts = tcol.parse(row.cells[0], row.line);
        const std::string& name = row.cells[1];
        if (name.empty()) throw DataError("line " + std::to_string(row.line) + ": empty asset name");
        auto [it, inserted] = index.try_emplace(name, raw.size());
        if (inserted) raw.push_back({name, {}, {}});
        RawAsset& a = raw[it->second];
        if (t.header.size() == 4 && !row.cells[3].empty()) a.sector = row.cells[3];
        if (!a.obs.empty() && ts <= a.obs.back().t) {
            throw DataError("line " + std::to_string(row.line) + ": timestamps for asset " + name +
                            " not strictly increasing");
        }
        a.obs.push_back({ts, parse_price(row.cells[2], row.line)});
    }
    if (raw.size() < 2) throw DataError("need at least 2 assets, got " + std::to_string(raw.size()));
    return align(std::move(raw));
}

void check_labels(const std::vector<std::string>& assets) {
    std::unordered_set<std::string> seen;
    for (const auto& a : assets) {
        if (!seen.insert(a).second) throw DataError("duplicate asset label '" + a + "'");
    }
}

}  // namespace

Layout parse_layout(const std::string& name) {
    if (name == "wide") return Layout::Wide;
    if (name == "long") return Layout::Long;
    throw ConfigError("unknown layout '" + name + "' (expected wide|long)");
}

bool looks_like_iso(const std::string& text) {
    // Epoch-ms is an optionally signed run of digits; anything with a date
    // separator after the first character is treated as ISO-8601.
    return text.size() >= 10 && text.find('-', 1) != std::string::npos;
}

std::int64_t parse_timestamp(const std::string& text, bool iso) {
    if (!iso) {
        std::int64_t v = 0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
            throw DataError("malformed epoch-ms timestamp '" + text + "'");
        }
        return v;
    }
    // YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z]
    auto bad = [&]() { return DataError("malformed ISO-8601 timestamp '" + text + "'"); };
    std::size_t pos = 0;
    auto digits = [&](std::size_t count) {
        if (pos + count > text.size()) throw bad();
        int v = 0;
        for (std::size_t k = 0; k < count; ++k) {
            char c = text[pos + k];
            if (c < '0' || c > '9') throw bad();
            v = v * 10 + (c - '0');
        }
        pos += count;
        return v;
    };
    auto expect = [&](char c) {
        if (pos >= text.size() || text[pos] != c) throw bad();
        ++pos;
    };
    int y = digits(4);
    expect('-');
    int mo = digits(2);
    expect('-');
    int d = digits(2);
    int h = 0, mi = 0;
    double sec = 0.0;
    if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
        ++pos;
        h = digits(2);
        expect(':');
        mi = digits(2);
        if (pos < text.size() && text[pos] == ':') {
            ++pos;
            std::size_t b = pos;
            while (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) ++pos;
            auto v = parse_number(text.substr(b, pos - b));
            if (!v) throw bad();
            sec = *v;
        }
    }
    if (pos < text.size() && text[pos] == 'Z') ++pos;
    if (pos != text.size()) throw bad();
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0) {
        throw DataError("invalid calendar time '" + text + "'");
    }
    auto days = sys_days{ymd}.time_since_epoch().count();
    auto ms = static_cast<std::int64_t>(std::llround(sec * 1000.0));
    return static_cast<std::int64_t>(days) * 86'400'000LL + h * 3'600'000LL + mi * 60'000LL + ms;
}

void PricePanel::validate() const {
    if (assets.size() < 2) throw DataError("need at least 2 assets, got " + std::to_string(assets.size()));
    if (timestamps.size() < 2) {
        throw DataError("need at least 2 time points, got " + std::to_string(timestamps.size()));
    }
    if (prices.size() != assets.size()) throw DataError("price rows do not match asset count");
    if (!sectors.empty() && sectors.size() != assets.size()) throw DataError("sector labels do not match assets");
    check_labels(assets);
    for (std::size_t m = 1; m < timestamps.size(); ++m) {
        if (timestamps[m] <= timestamps[m - 1]) throw DataError("timestamps not strictly increasing");
        if (step_ms > 0 && timestamps[m] - timestamps[m - 1] != step_ms) throw DataError("non-uniform time grid");
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (prices[i].size() != timestamps.size()) throw DataError("asset " + assets[i] + ": wrong row length");
        for (double v : prices[i]) {
            if (!(v > 0.0) || !std::isfinite(v)) throw DataError("asset " + assets[i] + ": non-positive price");
        }
    }
}

void ReturnPanel::validate() const {
    if (returns.size() != assets.size()) throw DataError("return rows do not match asset count");
    if (!sectors.empty() && sectors.size() != assets.size()) throw DataError("sector labels do not match assets");
    check_labels(assets);
    for (std::size_t i = 0; i < returns.size(); ++i) {
        if (returns[i].size() != timestamps.size()) throw DataError("asset " + assets[i] + ": wrong row length");
        for (double v : returns[i]) {
            if (!std::isfinite(v)) throw DataError("asset " + assets[i] + ": non-finite return");
        }
    }
}

ReturnPanel ReturnPanel::select_assets(const std::vector<std::size_t>& rows) const {
    ReturnPanel out;
    out.timestamps = timestamps;
    for (std::size_t r : rows) {
        if (r >= assets.size()) throw DataError("asset row " + std::to_string(r) + " out of range");
        out.assets.push_back(assets[r]);
        if (!sectors.empty()) out.sectors.push_back(sectors[r]);
        out.returns.push_back(returns[r]);
    }
    return out;
}

PricePanel parse_prices(std::istream& in, Layout layout, CsvOptions opts) {
    Table t = read_table(in, opts.delimiter);
    if (t.rows.empty()) throw DataError("input has a header but no data rows");
    return layout == Layout::Wide ? parse_wide(t) : parse_long(t);
}

PricePanel load_prices(const std::filesystem::path& source, Layout layout, CsvOptions opts) {
    std::ifstream in(source);
    if (!in) throw DataError("cannot open " + source.string());
    try {
        return parse_prices(in, layout, opts);
    } catch (const DataError& e) {
        throw DataError(source.string() + ": " + e.what());
    }
}

ReturnPanel load_returns(const std::filesystem::path& source, CsvOptions opts) {
    std::ifstream in(source);
    if (!in) throw DataError("cannot open " + source.string());
    Table t = read_table(in, opts.delimiter);
    if (t.header.size() < 2) throw DataError(source.string() + ": returns table needs asset columns");
    ReturnPanel r;
    r.assets.assign(t.header.begin() + 1, t.header.end());
    r.returns.resize(r.assets.size());
    TimestampColumn tcol;
    for (const auto& row : t.rows) {
        if (row.cells.size() != t.header.size()) {
            throw DataError(source.string() + ": line " + std::to_string(row.line) + ": expected " +
                            std::to_string(t.header.size()) + " cells, got " + std::to_string(row.cells.size()));
        }
        std::int64_t ts = tcol.parse(row.cells[0], row.line);
        if (!r.timestamps.empty() && ts <= r.timestamps.back()) {
            throw DataError(source.string() + ": line " + std::to_string(row.line) +
                            ": timestamps not strictly increasing");
        }
        r.timestamps.push_back(ts);
        for (std::size_t j = 1; j < row.cells.size(); ++j) {
            auto v = parse_number(row.cells[j]);
            if (!v || !std::isfinite(*v)) {
                throw DataError(source.string() + ": line " + std::to_string(row.line) + ": malformed return '" +
                                row.cells[j] + "'");
            }
            r.returns[j - 1].push_back(*v);
        }
    }
    if (r.timestamps.empty()) throw DataError(source.string() + ": no data rows");
    r.validate();
    return r;
}

ReturnPanel to_returns(const PricePanel& p) {
    p.validate();
    ReturnPanel r;
    r.timestamps.assign(p.timestamps.begin() + 1, p.timestamps.end());
    r.assets = p.assets;
    r.sectors = p.sectors;
    r.returns.reserve(p.prices.size());
    for (const auto& row : p.prices) {
        Series ret(row.size() - 1);
        for (std::size_t m = 0; m + 1 < row.size(); ++m) ret[m] = std::log(row[m + 1]) - std::log(row[m]);
        r.returns.push_back(std::move(ret));
    }
    return r;
}

std::vector<Series> cumulative_returns(const ReturnPanel& r) {
    std::vector<Series> out;
    out.reserve(r.returns.size());
    for (const auto& row : r.returns) {
        Series c(row.size());
        double acc = 0.0;
        for (std::size_t m = 0; m < row.size(); ++m) {
            acc += row[m];
            c[m] = acc;
        }
        out.push_back(std::move(c));
    }
    return out;
}

ReturnPanel slice_window(const ReturnPanel& r, std::size_t start, std::size_t length) {
    if (length == 0 || start > r.length() || length > r.length() - start) {
        throw DataError("window [" + std::to_string(start) + ", " + std::to_string(start + length) +
                        ") outside panel of length " + std::to_string(r.length()));
    }
    ReturnPanel out;
    out.timestamps.assign(r.timestamps.begin() + start, r.timestamps.begin() + start + length);
    out.assets = r.assets;
    out.sectors = r.sectors;
    out.returns.reserve(r.returns.size());
    for (const auto& row : r.returns) {
        out.returns.emplace_back(row.begin() + start, row.begin() + start + length);
    }
    return out;
}

PricePanel to_prices(const ReturnPanel& r, std::int64_t first_timestamp) {
    PricePanel p;
    p.assets = r.assets;
    p.sectors = r.sectors;
    p.timestamps.push_back(first_timestamp);
    p.timestamps.insert(p.timestamps.end(), r.timestamps.begin(), r.timestamps.end());
    if (p.timestamps.size() >= 2) p.step_ms = p.timestamps[1] - p.timestamps[0];
    for (const auto& row : r.returns) {
        Series pr(row.size() + 1);
        double acc = 0.0;
        pr[0] = 1.0;
        for (std::size_t m = 0; m < row.size(); ++m) {
            acc += row[m];
            pr[m + 1] = std::exp(acc);
        }
        p.prices.push_back(std::move(pr));
    }
    return p;
}

void write_wide(std::ostream& out, const std::vector<std::int64_t>& timestamps,
                const std::vector<std::string>& assets, const std::vector<Series>& rows) {
    out << "timestamp";
    for (const auto& a : assets) out << ',' << a;
    out << '\n';
    for (std::size_t m = 0; m < timestamps.size(); ++m) {
        out << timestamps[m];
        for (const auto& row : rows) out << ',' << format_double(row[m]);
        out << '\n';
    }
}

}  // namespace qmst
