#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "cli.hpp"
#include "qmst/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("qmst_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

struct Result {
    int code;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "qmst");
    std::ostringstream err, out;
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    int code = qmst::cli::run(args);
    std::cerr.rdbuf(old_err);
    std::cout.rdbuf(old_out);
    return {code, err.str() + out.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    f << text;
}

std::size_t columns(const fs::path& csv) {
    std::ifstream f(csv);
    std::string header;
    std::getline(f, header);
    return static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
}

std::size_t data_rows(const fs::path& csv) {
    std::ifstream f(csv);
    std::string line;
    std::size_t n = 0;
    while (std::getline(f, line)) ++n;
    return n - 1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& csv) {
    std::ifstream f(csv);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(f, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::vector<std::string> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a).string());
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b).string());
    }
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) return false;
    for (const auto& f : fa) {
        if (slurp(a / f) != slurp(b / f)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("returns writes both tables and a manifest") {
    TempDir t;
    write(t / "p.csv", "timestamp,A,B\n0,1,2\n60000,2,2\n120000,4,1\n");
    REQUIRE(run({"returns", "--input", (t / "p.csv").string(), "--out", (t / "out").string()}).code == 0);
    CHECK(fs::exists(t / "out/returns.csv"));
    CHECK(fs::exists(t / "out/cumulative_returns.csv"));
    CHECK(data_rows(t / "out/returns.csv") == 2);
    auto m = json::parse(slurp(t / "out/manifest.json"));
    CHECK(m["command"] == "returns");
    CHECK(m["version"] == qmst::cli::kVersion);
    CHECK_FALSE(fs::exists(t / "out.partial"));
}

TEST_CASE("ingestion failures exit with the data error code") {
    TempDir t;
    write(t / "bad.csv", "timestamp,A,B\n0,1,2\n60000,x,2\n");
    auto r = run({"returns", "--input", (t / "bad.csv").string(), "--out", (t / "out").string()});
    CHECK(r.code == qmst::cli::kDataError);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK_FALSE(fs::exists(t / "out"));
    CHECK_FALSE(fs::exists(t / "out.partial"));
    write(t / "empty.csv", "");
    CHECK(run({"returns", "--input", (t / "empty.csv").string(), "--out", (t / "out").string()}).code ==
          qmst::cli::kDataError);
    CHECK(run({"returns", "--input", (t / "missing.csv").string(), "--out", (t / "out").string()}).code ==
          qmst::cli::kDataError);
}

TEST_CASE("synth outputs") {
    TempDir t;
    REQUIRE(run({"synth", "--kind", "fgn", "--H", "0.7", "--length", "65536", "--seed", "1", "--out", (t / "f").string()})
                .code == 0);
    CHECK(columns(t / "f/returns.csv") == 2);
    CHECK(data_rows(t / "f/returns.csv") == 65536);
    REQUIRE(run({"synth", "--kind", "crash_panel", "--assets", "30", "--length", "2000", "--out", (t / "c").string()})
                .code == 0);
    CHECK(columns(t / "c/returns.csv") == 31);
    CHECK(run({"synth", "--kind", "fgn", "--H", "1.5", "--out", (t / "bad").string()}).code == qmst::cli::kUsage);
    CHECK_FALSE(fs::exists(t / "bad"));
}

TEST_CASE("synth pseudo-prices load back as the same returns") {
    TempDir t;
    REQUIRE(run({"synth", "--kind", "factor_panel", "--assets", "4", "--length", "300", "--prices", "--out",
                 (t / "s").string()})
                .code == 0);
    REQUIRE(run({"returns", "--input", (t / "s/prices.csv").string(), "--out", (t / "r").string()}).code == 0);
    auto direct = qmst::gen_factor_panel(4, 300, 1.0, 1.0, 1);
    auto rows = read_csv(t / "r/returns.csv");
    REQUIRE(rows.size() == 301);
    for (std::size_t m = 0; m < 300; ++m) {
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::stod(rows[m + 1][i + 1]) == doctest::Approx(direct.returns[i][m]).epsilon(1e-9));
    }
}

TEST_CASE("usage errors") {
    CHECK(run({"analyze", "--bogus"}).code == qmst::cli::kUsage);
    CHECK(run({}).code == qmst::cli::kUsage);
    CHECK(run({"frobnicate"}).code == qmst::cli::kUsage);
    CHECK(run({"--version"}).code == 0);
    CHECK(run({"analyze", "--help"}).code == 0);
}

TEST_CASE("analyze single window and rerun from manifest") {
    TempDir t;
    REQUIRE(run({"synth", "--kind", "crash_panel", "--assets", "12", "--length", "1200", "--prices", "--out",
                 (t / "s").string()})
                .code == 0);
    auto a = run({"analyze", "--input", (t / "s/prices.csv").string(), "--window", "1200", "--step", "100", "--filter",
                  "--emit-trees", "--track", "A1,A2", "--out", (t / "a").string()});
    REQUIRE(a.code == 0);
    CHECK(data_rows(t / "a/diag_q1_s10.csv") == 1);
    CHECK(data_rows(t / "a/dist_q1-4_s10.csv") == 1);
    CHECK(fs::exists(t / "a/eigen_q4_s10.json"));
    CHECK(fs::exists(t / "a/trees/q4_s10_w00000.json"));
    CHECK(fs::exists(t / "a/trees/filtered_q1_s10_w00000.dot"));
    auto rerun = run({"analyze", "--config", (t / "a/manifest.json").string(), "--out", (t / "b").string()});
    REQUIRE(rerun.code == 0);
    CHECK(same_tree(t / "a", t / "b"));
}

TEST_CASE("flags override the config file, which overrides defaults") {
    TempDir t;
    REQUIRE(run({"synth", "--kind", "factor_panel", "--assets", "5", "--length", "900", "--prices", "--out",
                 (t / "s").string()})
                .code == 0);
    write(t / "run.ini", "input = \"" + (t / "s/prices.csv").string() + "\"\nwindow = 400\nstep = 250\nq = \"2\"\npairs = \"\"\n");
    REQUIRE(run({"analyze", "--config", (t / "run.ini").string(), "--step", "100", "--out", (t / "a").string()}).code == 0);
    auto m = json::parse(slurp(t / "a/manifest.json"));
    CHECK(m["config"]["window"] == 400);
    CHECK(m["config"]["step"] == 100);
    CHECK(m["config"]["q"] == "2");
    CHECK(m["config"]["order"] == 2);
    CHECK(m["windows"] == 6);
    CHECK(run({"synth", "--config", (t / "a/manifest.json").string(), "--out", (t / "x").string()}).code ==
          qmst::cli::kUsage);
}

TEST_CASE("failed analysis leaves no output behind") {
    TempDir t;
    REQUIRE(run({"synth", "--kind", "factor_panel", "--assets", "5", "--length", "300", "--prices", "--out",
                 (t / "s").string()})
                .code == 0);
    auto r = run({"analyze", "--input", (t / "s/prices.csv").string(), "--out", (t / "a").string()});
    CHECK(r.code == qmst::cli::kUsage);
    CHECK_FALSE(fs::exists(t / "a"));
    CHECK_FALSE(fs::exists(t / "a.partial"));
}

TEST_CASE("crash panel with the default configuration shows a distance spike at the crash") {
    TempDir t;
    const std::size_t length = 10080 + 12 * 1440 + 1;
    REQUIRE(run({"synth", "--kind", "crash_panel", "--assets", "30", "--length", std::to_string(length), "--prices",
                 "--out", (t / "s").string()})
                .code == 0);
    REQUIRE(run({"analyze", "--input", (t / "s/prices.csv").string(), "--out", (t / "a").string()}).code == 0);
    auto rows = read_csv(t / "a/dist_q1-4_s10.csv");
    REQUIRE(rows.size() == 14);
    const std::size_t burst = qmst::crash_burst_start(length, length / 2);
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t w = 0; w + 1 < rows.size(); ++w) {
        double v = std::stod(rows[w + 1][2]);
        if (v > best_value) {
            best_value = v;
            best = w;
        }
    }
    const std::size_t start = best * 1440;
    CHECK(start <= burst);
    CHECK(burst + qmst::kCrashBurstLength <= start + 10080);
}

TEST_CASE("graphdist on two edge lists") {
    TempDir t;
    write(t / "star.json", R"({"assets":["a","b","c","d"],"edges":[{"i":0,"j":1},{"i":0,"j":2},{"i":0,"j":3}]})");
    write(t / "path.json", R"({"assets":["a","b","c","d"],"edges":[{"i":0,"j":1},{"i":1,"j":2},{"i":2,"j":3}]})");
    REQUIRE(run({"graphdist", "--tree-a", (t / "path.json").string(), "--tree-b", (t / "star.json").string(), "--out",
                 (t / "g").string()})
                .code == 0);
    auto j = json::parse(slurp(t / "g/graphdist.json"));
    CHECK(j["d_rp1"].get<double>() == doctest::Approx(5.0));
    CHECK(j["d_dc0"].get<double>() > 0.0);
    write(t / "other.json", R"({"assets":["a","b","x","d"],"edges":[{"i":0,"j":1},{"i":1,"j":2},{"i":2,"j":3}]})");
    CHECK(run({"graphdist", "--tree-a", (t / "path.json").string(), "--tree-b", (t / "other.json").string()}).code ==
          qmst::cli::kDataError);
}

TEST_CASE("mfdfa report and degenerate input") {
    TempDir t;
    REQUIRE(run({"synth", "--kind", "fgn", "--H", "0.7", "--length", "16384", "--out", (t / "s").string()}).code == 0);
    REQUIRE(run({"mfdfa", "--input", (t / "s/returns.csv").string(), "--returns-input", "--q", "2", "--out",
                 (t / "m").string()})
                .code == 0);
    auto j = json::parse(slurp(t / "m/exponents.json"));
    CHECK(std::fabs(j["exponents"][0]["h_x"]["slope"].get<double>() - 0.7) < 0.1);
    write(t / "flat.csv", "timestamp,A,B\n0,1,1\n60000,1,2\n120000,1,1\n180000,1,3\n240000,1,1\n300000,1,2\n"
                          "360000,1,2\n420000,1,1\n480000,1,3\n540000,1,1\n600000,1,2\n660000,1,4\n");
    CHECK(run({"mfdfa", "--input", (t / "flat.csv").string(), "--asset", "A", "--scales", "4", "--q", "2", "--order",
               "1", "--out", (t / "d").string()})
              .code == qmst::cli::kDegenerate);
}

TEST_CASE("thread cap") {
    TempDir t;
    REQUIRE(run({"synth", "--kind", "factor_panel", "--assets", "6", "--length", "500", "--prices", "--out",
                 (t / "s").string()})
                .code == 0);
    REQUIRE(run({"analyze", "--input", (t / "s/prices.csv").string(), "--window", "400", "--step", "50", "--threads",
                 "1", "--out", (t / "one").string()})
                .code == 0);
    REQUIRE(run({"analyze", "--input", (t / "s/prices.csv").string(), "--window", "400", "--step", "50", "--threads",
                 "3", "--out", (t / "three").string()})
                .code == 0);
    CHECK(slurp(t / "one/diag_q4_s10.csv") == slurp(t / "three/diag_q4_s10.csv"));
    CHECK(run({"analyze", "--threads", "0"}).code == qmst::cli::kUsage);
}

TEST_CASE("long layout input") {
    TempDir t;
    write(t / "long.csv",
          "timestamp,asset,price,sector\n"
          "2021-01-01T00:00:00Z,BTC,100,L1\n2021-01-01T00:00:00Z,ETH,10,L1\n"
          "2021-01-01T00:01:00Z,BTC,101,L1\n2021-01-01T00:02:00Z,BTC,99,L1\n2021-01-01T00:02:00Z,ETH,11,L1\n");
    REQUIRE(run({"returns", "--input", (t / "long.csv").string(), "--layout", "long", "--out", (t / "r").string()}).code ==
            0);
    auto rows = read_csv(t / "r/returns.csv");
    CHECK(rows[0] == std::vector<std::string>{"timestamp", "BTC", "ETH"});
    CHECK(rows[1][2] == "0");
}
