#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "mqmc/cli.hpp"
#include "mqmc/config.hpp"

using namespace mqmc;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = 0;
    std::string out;
    std::string err;
};

RunResult run(std::vector<std::string> args) {
    args.insert(args.begin(), "mqmc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct Workdir {
    fs::path path;
    explicit Workdir(const std::string& tag) {
        path = fs::temp_directory_path() / ("mqmc-cli-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return (path / name).string();
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// CSV without its "#" provenance lines.
std::string csv_body(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line, body;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        body += line + "\n";
    }
    return body;
}

const char* kExpLinear = R"({
  "seed": 7,
  "problem": {"kind": "exp-linear", "a": [0.5]},
  "integrate": {"N": 1021, "k": 11}
})";

} // namespace

TEST_CASE("config syntax errors report line and column") {
    try {
        parse_config_text("{\n  \"a\": 1,\n  \"b\": [1, 2,, 3]\n}");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("column") != std::string::npos);
    }
}

TEST_CASE("config sections") {
    const auto cfg = parse_config_text(R"({"space": {"dimension": 3, "weight_function": {"kind": "exp-abs", "alpha": 0.0625},
        "weights": {"kind": "product", "gamma": {"rule": "inverse-power", "exponent": 2}}}})");
    const auto space = parse_space(cfg["space"]);
    CHECK(space.dimension() == 3);
    CHECK(space.weights().gamma[2] == doctest::Approx(1.0 / 9.0).epsilon(1e-15));

    const auto pod = parse_space(parse_config_text(R"({"weight_functions": [{"kind": "constant"}, {"kind": "gaussian", "beta": 0.1}],
        "weights": {"kind": "pod", "gamma": [1, 0.5], "order_weights": [1, 1, 2]}})"));
    CHECK(pod.weights().kind == WeightKind::pod);
    CHECK(pod.weight_function(1).kind == WeightFunctionKind::gaussian);

    CHECK_THROWS_AS(parse_space(parse_config_text(R"({"dimension": 2, "weight_function": {"kind": "cubic"},
        "weights": {"kind": "product", "gamma": [1, 1]}})")), ConfigError);
    CHECK_THROWS_AS(parse_space(parse_config_text(R"({"dimension": 2, "weight_function": {"kind": "constant"},
        "weights": {"kind": "product", "gamma": [1]}})")), ConfigError);
    CHECK_THROWS_AS(require_section(parse_config_text("{}"), "problem"), ConfigError);

    const auto asian = parse_problem(parse_config_text(R"({"kind": "asian", "mode": "cdf", "x": 110})"));
    CHECK(asian.integrand.dimension == 15);
    CHECK(asian.default_grid.size() == 9);
    CHECK(asian.full_grid.back() == 32771);
    const auto pde = parse_problem(parse_config_text(R"({"kind": "pde", "x0": 0.6666666666666666})"));
    CHECK(pde.default_grid.front() == 16);
    CHECK(pde.default_grid.back() == 4096);
    CHECK(pde.full_grid.back() == 32768);
    CHECK(pde.default_space().dimension() == 30);
    CHECK_THROWS_AS(parse_problem(parse_config_text(R"({"kind": "asian", "mode": "value"})")), ConfigError);

    CHECK(config_digest(parse_config_text(R"({"a": 1, "b": 2})")) == config_digest(parse_config_text(R"({"b": 2, "a": 1})")));
    CHECK(config_digest(parse_config_text(R"({"a": 1})")).size() == 16);
}

TEST_CASE("empirical quantile") {
    CHECK(empirical_quantile({5.0, 1.0, 3.0, 2.0, 4.0}, 0.75) == 4.0);
    CHECK(empirical_quantile({5.0, 1.0, 3.0, 2.0, 4.0}, 0.9) == doctest::Approx(4.6).epsilon(1e-15));
    CHECK(empirical_quantile({2.0}, 0.3) == 2.0);
    CHECK_THROWS_AS(empirical_quantile({}, 0.5), ArgumentError);
}

TEST_CASE("integrate is deterministic") {
    Workdir w("integrate");
    const auto cfg = w.write("cfg.json", kExpLinear);
    const auto a = run({"integrate", "-c", cfg, "--json", "-j", "1"});
    const auto b = run({"integrate", "-c", cfg, "--json", "-j", "4"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto rec = nlohmann::json::parse(a.out);
    CHECK(rec["seed"] == 7);
    CHECK(rec["k"] == 11);
    CHECK(rec["N"] == 1021);
    CHECK(rec["tool_version"] == kToolVersion);
    CHECK(rec["replicates"].size() == 11);
    CHECK(rec["value"].get<double>() == doctest::Approx(std::exp(0.125)).epsilon(1e-4));

    const auto other = run({"integrate", "-c", cfg, "--json", "--seed", "8"});
    CHECK(nlohmann::json::parse(other.out)["config_digest"] != rec["config_digest"]);

    const auto text = run({"integrate", "-c", cfg});
    CHECK(text.out.find("value") != std::string::npos);
}

TEST_CASE("integrate rejects bad configs") {
    Workdir w("bad");
    const auto even = run({"integrate", "-c", w.write("even.json", R"({"problem": {"kind": "exp-linear", "a": [0.5]}, "integrate": {"N": 101, "k": 4}})")});
    CHECK(even.code == kExitUsage);
    CHECK(even.err.find("integrate.k") != std::string::npos);

    const auto missing = run({"integrate", "-c", w.write("missing.json", R"({"integrate": {"N": 101}})")});
    CHECK(missing.code == kExitUsage);
    CHECK(missing.err.find("'problem'") != std::string::npos);

    const auto syntax = run({"integrate", "-c", w.write("syntax.json", "{\n\"problem\": }\n")});
    CHECK(syntax.code == kExitUsage);
    CHECK(syntax.err.find("line 2") != std::string::npos);

    const auto field = run({"integrate", "-c", w.write("field.json", R"({"problem": {"kind": "exp-linear", "a": "x"}, "integrate": {"N": 101}})")});
    CHECK(field.code == kExitUsage);
    CHECK(field.err.find("problem.a") != std::string::npos);

    CHECK(run({"integrate"}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"--version"}).code == kExitSuccess);
    CHECK(run({"--help"}).code == kExitSuccess);
}

TEST_CASE("invalid spaces map to the numeric exit code") {
    Workdir w("space");
    const auto cfg = w.write("cfg.json", R"({"space": {"dimension": 2, "weight_function": {"kind": "gaussian", "beta": 1},
        "weights": {"kind": "product", "gamma": [1, 0.25]}}, "cbc": {"N": 31}})");
    const auto r = run({"cbc", "-c", cfg, "-o", w.sub("out")});
    CHECK(r.code == kExitNumeric);
}

TEST_CASE("cbc output roundtrips through integrate") {
    Workdir w("cbc");
    const auto cfg = w.write("cfg.json", R"({"seed": 3, "space": {"preset": "example1", "dimension": 4},
        "problem": {"kind": "exp-linear", "a": [0.25, 0.0625, 0.03, 0.015]}, "cbc": {"N": 127}})");
    const auto out = w.sub("out");
    const auto r = run({"cbc", "-c", cfg, "-o", out});
    REQUIRE(r.code == 0);
    const auto z = generating_vector_from_text(slurp(fs::path(out) / "cbc-N127.txt"));
    CHECK(z.dimension() == 4);
    CHECK(z[0] == 1);
    CHECK(generating_vector_from_json(nlohmann::json::parse(slurp(fs::path(out) / "cbc-N127.json"))) == z);

    const auto trace = csv_body(fs::path(out) / "cbc-N127-trace.csv");
    std::istringstream lines(trace);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "d,z_d,e2");
    double prev = 0.0;
    int rows = 0;
    while (std::getline(lines, line)) {
        const double e2 = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(e2 >= prev);
        prev = e2;
        ++rows;
    }
    CHECK(rows == 4);
    CHECK(slurp(fs::path(out) / "cbc-N127-trace.csv").find("# seed=3") != std::string::npos);

    CHECK(run({"cbc", "-c", cfg, "-o", out}).code == kExitUsage);
    CHECK(run({"cbc", "-c", cfg, "-o", out, "--force"}).code == 0);

    const auto one = run({"cbc", "-c", cfg, "-o", w.sub("one"), "--s", "1"});
    REQUIRE(one.code == 0);
    CHECK(generating_vector_from_text(slurp(fs::path(w.sub("one")) / "cbc-N127.txt")) == GeneratingVector(127, {1}));

    for (const auto* ext : {".txt", ".json"}) {
        const auto vec = (fs::path(out) / (std::string("cbc-N127") + ext)).string();
        const auto rr = run({"integrate", "-c", cfg, "--vector", vec, "--k", "3", "--json"});
        REQUIRE(rr.code == 0);
        const auto rec = nlohmann::json::parse(rr.out);
        CHECK(rec["estimator"] == "shifted-mean");
        CHECK(rec["z"] == z.components());
        CHECK(rec["N"] == 127);
    }
    const auto mismatch = run({"integrate", "-c", cfg, "--vector", (fs::path(out) / "cbc-N127.txt").string(), "--N", "131", "--k", "3"});
    CHECK(mismatch.code == kExitUsage);
}

TEST_CASE("wce histogram") {
    Workdir w("hist");
    const auto cfg = w.write("cfg.json", R"({"seed": 5, "space": {"preset": "example1", "dimension": 6}, "wce_hist": {"N": 61, "samples": 200}})");
    const auto r1 = run({"wce-hist", "-c", cfg, "-o", w.sub("a"), "-j", "1"});
    const auto r4 = run({"wce-hist", "-c", cfg, "-o", w.sub("b"), "-j", "4"});
    REQUIRE(r1.code == 0);
    REQUIRE(r4.code == 0);
    CHECK(slurp(fs::path(w.sub("a")) / "wce-hist.csv") == slurp(fs::path(w.sub("b")) / "wce-hist.csv"));
    const auto summary = nlohmann::json::parse(slurp(fs::path(w.sub("a")) / "wce-hist-summary.json"));
    CHECK(summary["samples"] == 200);
    CHECK(summary["quantiles"]["0.75"].get<double>() <= summary["quantiles"]["0.9"].get<double>());
    CHECK(summary["cbc"]["log2_wce"].get<double>() <= summary["quantiles"]["0.75"].get<double>());
    CHECK(summary["fraction_within_4x_cbc"].get<double>() >= summary["fraction_within_3x_cbc"].get<double>());
    CHECK(summary["config_digest"].get<std::string>().size() == 16);

    const auto med = run({"wce-hist", "-c", cfg, "-o", w.sub("c"), "--k", "5", "--no-cbc"});
    REQUIRE(med.code == 0);
    const auto ms = nlohmann::json::parse(slurp(fs::path(w.sub("c")) / "wce-hist-summary.json"));
    CHECK(ms["k"] == 5);
    CHECK_FALSE(ms.contains("cbc"));
    // The median of 5 concentrates: its upper quantile sits below the single-vector one.
    CHECK(ms["quantiles"]["0.9"].get<double>() < summary["quantiles"]["0.9"].get<double>());
}

TEST_CASE("experiment outputs and lazy theta tables") {
    Workdir w("exp");
    const auto cache = w.sub("cache");
    const auto cfg = w.write("cfg.json", R"({"seed": 9, "problem": {"kind": "exp-linear", "a": [0.25, 0.0625]},
        "experiment": {"grid": [31, 61], "k": 3, "L": 4, "methods": ["mc", "median-lattice"]}})");
    ::setenv("MQMC_CACHE_DIR", cache.c_str(), 1);
    const auto r = run({"experiment", "-c", cfg, "-o", w.sub("mc")});
    const bool cache_empty = !fs::exists(cache) || fs::is_empty(cache);
    const auto with_cbc = w.write("cbc.json", R"({"seed": 9, "problem": {"kind": "exp-linear", "a": [0.25, 0.0625]},
        "experiment": {"grid": [31], "k": 3, "L": 4, "methods": ["cbc-lattice"]}})");
    const auto rc = run({"experiment", "-c", with_cbc, "-o", w.sub("cbc")});
    const bool cache_used = fs::exists(cache) && !fs::is_empty(cache);
    ::unsetenv("MQMC_CACHE_DIR");

    REQUIRE(r.code == 0);
    REQUIRE(rc.code == 0);
    CHECK(cache_empty);
    CHECK(cache_used);

    const auto body = csv_body(fs::path(w.sub("mc")) / "experiment.csv");
    CHECK(body.rfind("method,N,budget,MAE,L,reference,reference_dispersion,seed\n", 0) == 0);
    CHECK(std::count(body.begin(), body.end(), '\n') == 5);
    const auto meta = nlohmann::json::parse(slurp(fs::path(w.sub("mc")) / "experiment.json"));
    CHECK(meta["provenance"]["seed"] == 9);
    CHECK(meta.contains("wall_clock_seconds"));
    CHECK(meta["reference"]["provenance"] == "analytic");
    const auto cmeta = nlohmann::json::parse(slurp(fs::path(w.sub("cbc")) / "experiment.json"));
    CHECK(cmeta["cbc_vectors"]["31"]["source"] == "constructed");

    const auto again = run({"experiment", "-c", cfg, "-o", w.sub("mc2"), "-j", "3"});
    REQUIRE(again.code == 0);
    CHECK(csv_body(fs::path(w.sub("mc2")) / "experiment.csv") == body);
}
