#include "mqmc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mqmc/cbc.hpp"
#include "mqmc/config.hpp"
#include "mqmc/estimators.hpp"
#include "mqmc/parallel.hpp"
#include "mqmc/problems.hpp"

namespace mqmc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t resolve_threads(std::size_t t) { return t == 0 ? hardware_threads() : t; }

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    std::string out;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool out_required) {
    cmd->add_option("--config,-c", o.config, "JSON config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed (overrides the config's \"seed\")");
    cmd->add_option("--threads,-j", o.threads, "worker threads, 0 = all cores")->capture_default_str();
    auto* out = cmd->add_option("--out,-o", o.out, "output directory");
    if (out_required) out->default_str("mqmc-out");
    cmd->add_flag("--force", o.force, "overwrite existing output files");
}

/// The config file plus command-line overrides; its digest identifies a run.
struct RunContext {
    json config;
    fs::path config_dir;
    SeedSpec seed;
    std::string digest;
    std::size_t threads = 1;
    fs::path out_dir;
    bool force = false;
};

RunContext load_context(const CommonOptions& o, const std::string& section, const json& overrides,
                        const std::string& default_out) {
    RunContext ctx;
    ctx.config = read_config_file(o.config);
    ctx.config_dir = fs::path(o.config).parent_path();
    std::uint64_t seed = 1;
    if (o.seed) {
        seed = *o.seed;
    } else if (auto it = ctx.config.find("seed"); it != ctx.config.end()) {
        if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
            throw ConfigError("config field 'seed': expected a nonnegative integer");
        }
        seed = it->get<std::uint64_t>();
    }
    ctx.config["seed"] = seed;
    for (const auto& [key, value] : overrides.items()) ctx.config[section][key] = value;
    ctx.seed = SeedSpec{seed};
    ctx.digest = config_digest(ctx.config);
    ctx.threads = resolve_threads(o.threads);
    ctx.out_dir = o.out.empty() ? fs::path(default_out) : fs::path(o.out);
    ctx.force = o.force;
    return ctx;
}

const json& optional_section(const json& config, const std::string& name) {
    static const json empty = json::object();
    auto it = config.find(name);
    if (it == config.end()) return empty;
    if (!it->is_object()) throw ConfigError("config field '" + name + "': expected an object");
    return *it;
}

std::uint64_t field_uint(const json& section, const std::string& path, const std::string& key,
                         std::optional<std::uint64_t> fallback) {
    auto it = section.find(key);
    if (it == section.end()) {
        if (fallback) return *fallback;
        throw ConfigError("config field '" + path + "." + key + "': missing");
    }
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
        throw ConfigError("config field '" + path + "." + key + "': expected a nonnegative integer");
    }
    return it->get<std::uint64_t>();
}

std::size_t field_odd_k(const json& section, const std::string& path, std::size_t fallback) {
    const auto k = field_uint(section, path, "k", fallback);
    if (k == 0 || k % 2 == 0) throw ConfigError("config field '" + path + ".k': must be odd (got " + std::to_string(k) + ")");
    return static_cast<std::size_t>(k);
}

std::string csv_preamble(const RunContext& ctx) {
    std::ostringstream os;
    os << "# tool=mqmc " << kToolVersion << "\n# seed=" << ctx.seed.master_seed << "\n# config_digest=" << ctx.digest
       << "\n";
    return os.str();
}

json provenance(const RunContext& ctx) {
    return {{"tool_version", kToolVersion}, {"seed", ctx.seed.master_seed}, {"config_digest", ctx.digest}};
}

/// Refuses to clobber existing files unless --force; checked before any work starts.
void check_outputs(const RunContext& ctx, const std::vector<std::string>& names) {
    if (ctx.force) return;
    for (const auto& name : names) {
        const auto p = ctx.out_dir / name;
        if (fs::exists(p)) throw OutputExistsError("output file '" + p.string() + "' exists (use --force to overwrite)");
    }
}

void write_output(const RunContext& ctx, const std::string& name, const std::string& content) {
    fs::create_directories(ctx.out_dir);
    const auto path = ctx.out_dir / name;
    if (!ctx.force && fs::exists(path)) {
        throw OutputExistsError("output file '" + path.string() + "' exists (use --force to overwrite)");
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << content;
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
}

GeneratingVector load_vector_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open generating vector file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (path.extension() == ".json") {
        try {
            return generating_vector_from_json(json::parse(ss.str()));
        } catch (const json::exception& e) {
            throw ArgumentError("generating vector file '" + path.string() + "': " + e.what());
        }
    }
    return generating_vector_from_text(ss.str());
}

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Space for CBC/WCE work, matched to dimension s.
WeightedSpace space_for_dimension(const WeightedSpace& space, std::size_t s) {
    if (space.dimension() < s) {
        throw ConfigError("config field 'space': dimension " + std::to_string(space.dimension()) +
                          " is smaller than the problem dimension " + std::to_string(s));
    }
    return space.dimension() == s ? space : space.truncated(s);
}

// ---------------------------------------------------------------------------

struct IntegrateOptions {
    CommonOptions common;
    std::optional<std::uint64_t> n_points;
    std::optional<std::size_t> k;
    std::string vector;
    bool json_output = false;
};

int cmd_integrate(const IntegrateOptions& o, std::ostream& out) {
    json overrides = json::object();
    if (o.n_points) overrides["N"] = *o.n_points;
    if (o.k) overrides["k"] = *o.k;
    if (!o.vector.empty()) overrides["vector"] = o.vector;
    const auto ctx = load_context(o.common, "integrate", overrides, "");
    const auto problem = parse_problem(require_section(ctx.config, "problem"));
    const json& section = optional_section(ctx.config, "integrate");

    std::optional<GeneratingVector> fixed;
    if (auto it = section.find("vector"); it != section.end()) {
        if (!it->is_string()) throw ConfigError("config field 'integrate.vector': expected a path");
        fs::path p = it->get<std::string>();
        if (p.is_relative() && o.vector.empty()) p = ctx.config_dir / p;
        fixed = load_vector_file(p);
        if (fixed->dimension() < problem.integrand.dimension) {
            throw ArgumentError("generating vector has dimension " + std::to_string(fixed->dimension()) +
                                " but the problem needs " + std::to_string(problem.integrand.dimension));
        }
        fixed = fixed->truncated(problem.integrand.dimension);
    }
    const std::uint64_t n_points =
        fixed ? field_uint(section, "integrate", "N", fixed->n_points()) : field_uint(section, "integrate", "N", {});
    if (fixed && fixed->n_points() != n_points) {
        throw ArgumentError("generating vector is for N = " + std::to_string(fixed->n_points()) + ", not " +
                            std::to_string(n_points));
    }
    const std::size_t k = field_odd_k(section, "integrate", choose_k(n_points, 1.0));

    const bool write_file = !o.common.out.empty();
    if (write_file) check_outputs(ctx, {"integrate.json"});

    json record = provenance(ctx);
    record["problem"] = problem.integrand.name;
    record["N"] = n_points;
    record["k"] = k;
    record["dimension"] = problem.integrand.dimension;
    double value = 0.0;
    std::vector<double> reps;
    if (fixed) {
        value = shifted_mean_estimate(problem.integrand, *fixed, k, ctx.seed, ctx.threads);
        record["estimator"] = "shifted-mean";
        record["z"] = fixed->components();
    } else {
        const auto result = median_estimate(problem.integrand, n_points, k, ctx.seed, ctx.threads);
        value = result.value;
        for (const auto& r : result.replicates.replicates) reps.push_back(r.value);
        record["estimator"] = "median-lattice";
        record["replicates"] = reps;
    }
    record["value"] = value;
    if (!reps.empty()) {
        const auto [lo, hi] = std::minmax_element(reps.begin(), reps.end());
        record["replicate_min"] = *lo;
        record["replicate_max"] = *hi;
    }
    if (problem.integrand.exact) record["exact"] = *problem.integrand.exact;

    if (write_file) write_output(ctx, "integrate.json", record.dump(2) + "\n");
    if (o.json_output) {
        out << record.dump(2) << "\n";
    } else {
        out << "problem  " << problem.integrand.name << "\n";
        out << "value    " << fmt(value) << "\n";
        out << "N        " << n_points << "\nk        " << k << "\nseed     " << ctx.seed.master_seed << "\n";
        if (!reps.empty()) {
            out << "spread   [" << fmt(record["replicate_min"].get<double>()) << ", "
                << fmt(record["replicate_max"].get<double>()) << "]\n";
        }
        if (problem.integrand.exact) out << "exact    " << fmt(*problem.integrand.exact) << "\n";
    }
    return kExitSuccess;
}

// ---------------------------------------------------------------------------

struct WceHistOptions {
    CommonOptions common;
    std::optional<std::uint64_t> n_points;
    std::optional<std::size_t> samples;
    std::optional<std::size_t> k;
    bool no_cbc = false;
};

int cmd_wce_hist(const WceHistOptions& o, std::ostream& out) {
    json overrides = json::object();
    if (o.n_points) overrides["N"] = *o.n_points;
    if (o.samples) overrides["samples"] = *o.samples;
    if (o.k) overrides["k"] = *o.k;
    if (o.no_cbc) overrides["cbc"] = false;
    const auto ctx = load_context(o.common, "wce_hist", overrides, "mqmc-out");
    const auto space = parse_space(require_section(ctx.config, "space"));
    const json& section = optional_section(ctx.config, "wce_hist");
    const std::uint64_t n_points = field_uint(section, "wce_hist", "N", {});
    const std::size_t samples = field_uint(section, "wce_hist", "samples", 20000);
    const std::size_t k = field_odd_k(section, "wce_hist", 1);
    const bool with_cbc = section.value("cbc", true);
    if (samples == 0) throw ConfigError("config field 'wce_hist.samples': must be positive");
    check_outputs(ctx, {"wce-hist.csv", "wce-hist-summary.json"});

    const auto table = build_theta_table(space, n_points, ctx.threads);
    const auto h = wce_histogram(space, table, samples, k, ctx.seed, with_cbc, ctx.threads);

    std::string csv = csv_preamble(ctx) + "sample,log2_wce\n";
    for (std::size_t i = 0; i < h.log2_wce.size(); ++i) csv += std::to_string(i + 1) + "," + fmt(h.log2_wce[i]) + "\n";

    json summary = provenance(ctx);
    summary["N"] = n_points;
    summary["dimension"] = space.dimension();
    summary["samples"] = samples;
    summary["k"] = k;
    summary["quantiles"] = {{"0.75", empirical_quantile(h.log2_wce, 0.75)},
                            {"0.9", empirical_quantile(h.log2_wce, 0.9)}};
    summary["max_log2_wce"] = *std::max_element(h.log2_wce.begin(), h.log2_wce.end());
    summary["min_log2_wce"] = *std::min_element(h.log2_wce.begin(), h.log2_wce.end());
    if (h.cbc_log2_wce) {
        summary["cbc"] = {{"log2_wce", *h.cbc_log2_wce}, {"z", h.cbc_z}};
        summary["fraction_within_3x_cbc"] = fraction_within(h, 3.0);
        summary["fraction_within_4x_cbc"] = fraction_within(h, 4.0);
    }
    write_output(ctx, "wce-hist.csv", csv);
    write_output(ctx, "wce-hist-summary.json", summary.dump(2) + "\n");

    out << "N=" << n_points << " s=" << space.dimension() << " samples=" << samples << " k=" << k << "\n";
    out << "q0.75 log2 e^sh = " << fmt(summary["quantiles"]["0.75"].get<double>()) << "\n";
    out << "q0.9  log2 e^sh = " << fmt(summary["quantiles"]["0.9"].get<double>()) << "\n";
    if (h.cbc_log2_wce) {
        out << "CBC   log2 e^sh = " << fmt(*h.cbc_log2_wce) << "\n";
        out << "fraction <= 4x CBC: " << fmt(summary["fraction_within_4x_cbc"].get<double>()) << "\n";
    }
    out << "wrote " << (ctx.out_dir / "wce-hist.csv").string() << "\n";
    return kExitSuccess;
}

// ---------------------------------------------------------------------------

struct CbcOptions {
    CommonOptions common;
    std::optional<std::uint64_t> n_points;
    std::optional<std::size_t> s;
};

int cmd_cbc(const CbcOptions& o, std::ostream& out) {
    json overrides = json::object();
    if (o.n_points) overrides["N"] = *o.n_points;
    if (o.s) overrides["s"] = *o.s;
    const auto ctx = load_context(o.common, "cbc", overrides, "mqmc-out");
    const auto full_space = parse_space(require_section(ctx.config, "space"));
    const json& section = optional_section(ctx.config, "cbc");
    const std::uint64_t n_points = field_uint(section, "cbc", "N", {});
    const std::size_t s = field_uint(section, "cbc", "s", full_space.dimension());
    if (s == 0) throw ConfigError("config field 'cbc.s': must be positive");
    const auto space = space_for_dimension(full_space, s);
    const std::string stem = "cbc-N" + std::to_string(n_points);
    check_outputs(ctx, {stem + ".txt", stem + ".json", stem + "-trace.csv"});

    const auto table = build_theta_table(space, n_points, ctx.threads);
    const auto result = cbc_construct(space, n_points, table, s, ctx.threads);

    std::string trace = csv_preamble(ctx) + "d,z_d,e2\n";
    for (const auto& e : result.trace) trace += std::to_string(e.d) + "," + std::to_string(e.z) + "," + fmt(e.wce_squared) + "\n";
    json vec = to_json(result.z);
    vec["provenance"] = provenance(ctx);
    vec["log2_wce"] = log2_wce(result.trace.back().wce_squared);

    write_output(ctx, stem + ".txt", csv_preamble(ctx) + to_text(result.z));
    write_output(ctx, stem + ".json", vec.dump(2) + "\n");
    write_output(ctx, stem + "-trace.csv", trace);

    out << "N=" << n_points << " s=" << s << " log2 e^sh = " << fmt(log2_wce(result.trace.back().wce_squared)) << "\n";
    out << "z =";
    for (auto c : result.z.components()) out << " " << c;
    out << "\nwrote " << (ctx.out_dir / (stem + ".txt")).string() << "\n";
    return kExitSuccess;
}

// ---------------------------------------------------------------------------

struct ExperimentOptions {
    CommonOptions common;
    bool full_grid = false;
};

ReferenceSpec parse_reference_spec(const json& section) {
    ReferenceSpec spec;
    spec.n_points = field_uint(section, "experiment.reference", "n_points", spec.n_points);
    spec.k = field_odd_k(section, "experiment.reference", spec.k);
    spec.repetitions = field_uint(section, "experiment.reference", "repetitions", spec.repetitions);
    if (spec.repetitions < 1) throw ConfigError("config field 'experiment.reference.repetitions': must be >= 1");
    return spec;
}

int cmd_experiment(const ExperimentOptions& o, std::ostream& out, std::ostream& err) {
    json overrides = json::object();
    if (o.full_grid) overrides["full_grid"] = true;
    const auto ctx = load_context(o.common, "experiment", overrides, "mqmc-out");
    const auto problem = parse_problem(require_section(ctx.config, "problem"));
    const json& section = optional_section(ctx.config, "experiment");
    const auto& f = problem.integrand;

    MAEStudyOptions opts;
    opts.seed = ctx.seed;
    opts.threads = ctx.threads;
    opts.k = field_odd_k(section, "experiment", 11);
    opts.replicates = field_uint(section, "experiment", "L", 20);
    if (section.value("full_grid", false)) {
        opts.n_points = problem.full_grid;
    } else if (auto it = section.find("grid"); it != section.end()) {
        if (!it->is_array() || it->empty()) throw ConfigError("config field 'experiment.grid': expected a nonempty array");
        for (const auto& v : *it) {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 2) {
                throw ConfigError("config field 'experiment.grid': entries must be integers >= 2");
            }
            opts.n_points.push_back(v.get<std::uint64_t>());
        }
    } else {
        opts.n_points = problem.default_grid;
    }
    if (auto it = section.find("methods"); it != section.end()) {
        if (!it->is_array() || it->empty()) throw ConfigError("config field 'experiment.methods': expected a nonempty array");
        opts.methods.clear();
        for (const auto& v : *it) {
            if (!v.is_string()) throw ConfigError("config field 'experiment.methods': expected method names");
            try {
                opts.methods.push_back(parse_method(v.get<std::string>()));
            } catch (const ArgumentError& e) {
                throw ConfigError(std::string("config field 'experiment.methods': ") + e.what());
            }
        }
    }
    const json& ref = optional_section(section, "reference");
    const std::string ref_kind = ref.value("kind", f.exact ? std::string("analytic") : std::string("median-lattice"));
    if (ref_kind == "analytic") {
        if (!f.exact) throw ConfigError("config field 'experiment.reference.kind': problem has no analytic value");
        opts.use_analytic_reference = true;
    } else if (ref_kind != "median-lattice") {
        throw ConfigError("config field 'experiment.reference.kind': expected analytic or median-lattice");
    }
    opts.reference = parse_reference_spec(ref);
    check_outputs(ctx, {"experiment.csv", "experiment.json"});

    const auto started = iso_utc_now();
    const auto t0 = std::chrono::steady_clock::now();

    // CBC vectors, and with them theta tables, only when the cbc-lattice method is requested.
    json cbc_meta = json::object();
    if (std::find(opts.methods.begin(), opts.methods.end(), Method::cbc_lattice) != opts.methods.end()) {
        std::map<std::string, std::string> files;
        if (auto it = section.find("cbc_vectors"); it != section.end()) {
            if (!it->is_object()) throw ConfigError("config field 'experiment.cbc_vectors': expected {\"N\": path}");
            for (const auto& [key, value] : it->items()) files[key] = value.get<std::string>();
        }
        std::optional<WeightedSpace> space;
        for (auto n : opts.n_points) {
            if (opts.cbc_vectors.count(n) != 0) continue;
            GeneratingVector z;
            std::string source;
            if (auto it = files.find(std::to_string(n)); it != files.end()) {
                fs::path p = it->second;
                if (p.is_relative()) p = ctx.config_dir / p;
                z = load_vector_file(p);
                if (z.n_points() != n || z.dimension() < f.dimension) {
                    throw ArgumentError("CBC vector file '" + p.string() + "' does not match N = " + std::to_string(n) +
                                        ", s = " + std::to_string(f.dimension));
                }
                z = z.truncated(f.dimension);
                source = p.string();
            } else {
                if (!space) {
                    auto it_space = ctx.config.find("space");
                    space = space_for_dimension(
                        it_space != ctx.config.end() ? parse_space(*it_space) : problem.default_space(), f.dimension);
                }
                const auto table = build_theta_table(*space, n, ctx.threads);
                z = cbc_construct(*space, n, table, f.dimension, ctx.threads).z;
                source = "constructed";
            }
            cbc_meta[std::to_string(n)] = {{"z", z.components()}, {"source", source}};
            opts.cbc_vectors.emplace(n, std::move(z));
        }
    }

    auto study = run_mae_study(f, opts);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json meta = to_json(study);
    meta["provenance"] = provenance(ctx);
    meta["started_at"] = started;
    meta["wall_clock_seconds"] = seconds;
    meta["threads"] = ctx.threads;
    meta["cbc_vectors"] = cbc_meta;
    meta["grid"] = opts.n_points;

    write_output(ctx, "experiment.csv", csv_preamble(ctx) + to_csv(study));
    write_output(ctx, "experiment.json", meta.dump(2) + "\n");

    for (const auto& w : study.warnings) err << "warning: " << w << "\n";
    out << "problem " << study.problem << "  reference " << fmt(study.reference.value) << " ("
        << study.reference.provenance << ", dispersion " << fmt(study.reference.dispersion) << ")\n";
    for (Method m : opts.methods) {
        const auto rows = rows_for(study, m);
        std::vector<double> x, y;
        for (const auto* r : rows) {
            x.push_back(static_cast<double>(r->budget));
            y.push_back(r->mae);
        }
        out << method_name(m) << ":";
        for (const auto* r : rows) out << " N=" << r->n_points << " MAE=" << fmt(r->mae) << ";";
        if (rows.size() >= 2) out << " slope=" << fmt(loglog_slope(x, y));
        out << "\n";
    }
    out << "wrote " << (ctx.out_dir / "experiment.csv").string() << " (" << fmt(seconds) << " s)\n";
    return kExitSuccess;
}

} // namespace

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ArgumentError("empirical_quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("empirical_quantile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

WceHistogram wce_histogram(const WeightedSpace& space, const ThetaTable& table, std::size_t samples, std::size_t k,
                           SeedSpec seed, bool with_cbc, std::size_t threads) {
    if (k == 0 || k % 2 == 0) throw ArgumentError("wce_histogram: k must be odd");
    if (table.dimension() != space.dimension()) throw ArgumentError("wce_histogram: table does not match the space");
    threads = resolve_threads(threads);
    WceHistogram h;
    h.n_points = table.n_points();
    h.dimension = space.dimension();
    h.k = k;
    h.log2_wce.resize(samples);
    parallel_for(samples, threads, [&](std::size_t i) {
        if (k == 1) {
            const auto z = sample_generating_vector(h.n_points, h.dimension,
                                                    derive_replicate_seed(seed, i + 1, StreamRole::vector));
            h.log2_wce[i] = log2_wce(wce_squared(space, z, table));
            return;
        }
        const auto sub = derive_replicate_seed(seed, i + 1, StreamRole::study);
        std::vector<double> values(k);
        for (std::size_t l = 1; l <= k; ++l) {
            const auto z = sample_generating_vector(h.n_points, h.dimension,
                                                    derive_replicate_seed(sub, l, StreamRole::vector));
            values[l - 1] = log2_wce(wce_squared(space, z, table));
        }
        h.log2_wce[i] = median_of(std::move(values));
    });
    if (with_cbc) {
        const auto result = cbc_construct(space, h.n_points, table, h.dimension, threads);
        h.cbc_log2_wce = log2_wce(wce_squared(space, result.z, table));
        h.cbc_z = result.z.components();
    }
    return h;
}

double fraction_within(const WceHistogram& h, double factor) {
    if (!h.cbc_log2_wce) throw ArgumentError("fraction_within: histogram has no CBC value");
    if (h.log2_wce.empty()) return 0.0;
    const double limit = *h.cbc_log2_wce + std::log2(factor);
    const auto count = std::count_if(h.log2_wce.begin(), h.log2_wce.end(), [&](double v) { return v <= limit; });
    return static_cast<double>(count) / static_cast<double>(h.log2_wce.size());
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Median-of-lattices QMC toolkit: estimates, worst-case errors, CBC vectors and MAE studies", "mqmc"};
    app.set_version_flag("--version", std::string("mqmc ") + kToolVersion);
    app.require_subcommand(1);

    IntegrateOptions integrate;
    auto* c_int = app.add_subcommand("integrate", "median-of-lattices estimate of a configured problem");
    add_common(c_int, integrate.common, false);
    c_int->add_option("--N", integrate.n_points, "lattice size");
    c_int->add_option("--k", integrate.k, "number of replicates (odd)");
    c_int->add_option("--vector", integrate.vector, "fixed generating vector file (.txt or .json); averages k shifts");
    c_int->add_flag("--json", integrate.json_output, "print the JSON record instead of the text summary");

    WceHistOptions hist;
    auto* c_hist = app.add_subcommand("wce-hist", "log2 e^sh of randomly drawn generating vectors");
    add_common(c_hist, hist.common, true);
    c_hist->add_option("--N", hist.n_points, "lattice size");
    c_hist->add_option("--samples,-M", hist.samples, "number of samples");
    c_hist->add_option("--k", hist.k, "median of k vectors per sample (odd)");
    c_hist->add_flag("--no-cbc", hist.no_cbc, "skip the CBC baseline");

    CbcOptions cbc;
    auto* c_cbc = app.add_subcommand("cbc", "component-by-component construction");
    add_common(c_cbc, cbc.common, true);
    c_cbc->add_option("--N", cbc.n_points, "lattice size");
    c_cbc->add_option("--s", cbc.s, "number of components");

    ExperimentOptions exp;
    auto* c_exp = app.add_subcommand("experiment", "MAE study of MC, CBC lattice and median lattice");
    add_common(c_exp, exp.common, true);
    c_exp->add_flag("--full-grid", exp.full_grid, "use the full N grid instead of the truncated default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        if (c_int->parsed()) return cmd_integrate(integrate, out);
        if (c_hist->parsed()) return cmd_wce_hist(hist, out);
        if (c_cbc->parsed()) return cmd_cbc(cbc, out);
        if (c_exp->parsed()) return cmd_experiment(exp, out, err);
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CapabilityError& e) {
        err << "capability error: " << e.what() << "\n";
        return kExitCapability;
    } catch (const AccuracyError& e) {
        err << "numerical error: " << e.what() << " (estimate " << fmt(e.estimate()) << ", error bound "
            << fmt(e.error_bound()) << ")\n";
        return kExitNumeric;
    } catch (const NumericalConsistencyError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DomainError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const SpaceInvalidError& e) {
        err << "invalid space: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

} // namespace mqmc
