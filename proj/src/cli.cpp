#include "sstlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sstlab/cylinders.hpp"
#include "sstlab/parallel.hpp"
#include "sstlab/ziegler.hpp"

namespace sstlab::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw UsageError("invalid integer for " + what + ": '" + text + "'");
    }
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    for (const auto& part : split(text, ',')) out.push_back(static_cast<int>(parse_int(part, what)));
    return out;
}

// Flags and config entries, after merging.
class Params {
public:
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string str(const std::string& key, const std::string& fallback) const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min = 1) const {
        const std::int64_t v = has(key) ? parse_int(values.at(key), key) : fallback;
        if (v < min) throw UsageError(key + " must be >= " + std::to_string(min));
        return v;
    }
    double real(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        try {
            return parse_real(values.at(key));
        } catch (const std::invalid_argument&) {
            throw UsageError("invalid number for " + key + ": '" + values.at(key) + "'");
        }
    }
    double tolerance(double fallback) const {
        const double t = real("tol", fallback);
        if (!(t > 0.0)) throw UsageError("tol must be > 0");
        return t;
    }
    std::uint64_t seed() const {
        std::string text;
        if (has("seed")) {
            text = values.at("seed");
        } else if (const char* env = std::getenv("SSTLAB_SEED")) {
            text = env;
        } else {
            return 1;
        }
        try {
            std::size_t pos = 0;
            if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
            const unsigned long long v = std::stoull(text, &pos, 0);
            if (pos != text.size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw UsageError("seed must be a 64-bit unsigned integer, got '" + text + "'");
        }
    }
};

struct CheckRow {
    std::string name;
    Complex value;
    double std_error = 0.0;
    double tolerance = 0.0;
    bool exact = false;
    bool pass = true;
};

struct NamedTrace {
    std::string name;
    std::vector<TracePoint> points;
};

struct Report {
    std::string command;
    std::vector<CheckRow> checks;
    std::vector<NamedTrace> traces;
    Json details = Json::object();

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const CheckRow& c) { return c.pass; });
    }
    void add(CheckRow c) { checks.push_back(std::move(c)); }
};

Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

Json estimate_json(const CorrelationEstimate& e) {
    return Json{{"value_re", e.value.real()}, {"value_im", e.value.imag()}, {"stderr", e.std_error},
                {"budget", e.budget}};
}

Method make_method(const Params& p, const SystemSpec& sys, std::int64_t units) {
    const std::string m = p.str("method", "mc");
    if (m == "mc") return MonteCarlo{p.seed(), units};
    if (m == "orbit") {
        Rng rng(derive_seed(p.seed(), 99));
        return OrbitAverage{sample_invariant(sys, rng), units};
    }
    throw UsageError("method must be 'mc' or 'orbit', got '" + m + "'");
}

std::vector<Observable> observables_from(const Params& p, const SystemSpec& sys, const std::string& fallback) {
    if (p.has("weights")) {
        const int dims = coordinate_count(sys);
        const int coord = static_cast<int>(p.integer("coord", dims - 1, 0));
        if (coord >= dims) throw UsageError("coord out of range for " + describe(sys));
        std::vector<Observable> fs;
        for (int w : parse_int_list(p.str("weights", ""), "weights")) fs.push_back(coordinate_character(dims, coord, w));
        return fs;
    }
    return parse_observables(sys, p.str("fs", fallback));
}

double sup_product(std::span<const Observable> fs) {
    double b = 1.0;
    for (const auto& f : fs) b *= sup_norm(f);
    return b;
}

CheckRow bound_check(const std::string& name, const CorrelationEstimate& e, std::span<const Observable> fs) {
    const double bound = sup_product(fs);
    return {name, e.value, e.std_error, bound, false, std::abs(e.value) <= bound + 5.0 * e.std_error};
}

// ---------------------------------------------------------------------------
// Subcommands

Report cmd_verify_sst(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "skew2"));
    const std::string algebra = p.str("algebra", "characters");
    const int F = static_cast<int>(p.integer("max-freq", algebra == "characters" ? 1 : 2));
    const auto gens = parse_algebra(sys, algebra, F);
    const int kmax = static_cast<int>(p.integer("kmax", 3));
    const std::int64_t nmax = p.integer("nmax", 16, 2);
    const double tol = p.tolerance(1e-3);
    const SstReport rep = sst_check(sys, gens, kmax, nmax, tol, make_method(p, sys, p.integer("budget", 100000)));

    const auto worst = std::max_element(rep.entries.begin(), rep.entries.end(), [&](const auto& a, const auto& b) {
        return a.deviation / (tol + 3.0 * a.std_error) < b.deviation / (tol + 3.0 * b.std_error);
    });
    // The entry closest to its own threshold represents the check.
    r.add({"strong-stationarity", worst == rep.entries.end() ? 0.0 : worst->deviation,
           worst == rep.entries.end() ? 0.0 : worst->std_error, tol, false, rep.pass});
    r.details["max_deviation"] = rep.max_deviation;
    Json failing = Json::array();
    for (const auto& e : rep.entries) {
        if (e.pass || failing.size() >= 50) continue;
        failing.push_back({{"k", e.k}, {"tuple", e.tuple}, {"n", e.n}, {"corr_1", complex_json(e.corr_1)},
                           {"corr_n", complex_json(e.corr_n)}, {"deviation", e.deviation}, {"stderr", e.std_error}});
    }
    r.details["generators"] = gens.size();
    r.details["entries"] = rep.entries.size();
    r.details["failing_entries"] = failing;
    return r;
}

Report cmd_correlation(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "rotation"));
    const auto fs = observables_from(p, sys, "one");
    const std::int64_t n = p.integer("n", 1, 0);
    const auto e = multicorrelation(sys, fs, n, make_method(p, sys, p.integer("budget", 100000)));
    r.add(bound_check("multicorrelation", e, fs));
    r.details["estimate"] = estimate_json(e);
    return r;
}

Report cmd_cesaro(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "rotation"));
    const auto fs = observables_from(p, sys, "one");
    CesaroOptions opts;
    opts.N = p.integer("N", 1000);
    opts.step = p.integer("step", 1);
    opts.draws = p.integer("draws", 0, 0);
    const auto est = cesaro_average(sys, fs, opts, make_method(p, sys, p.integer("budget", 10000)));
    r.add(bound_check("cesaro-average", est.estimate, fs));
    r.traces.push_back({"cesaro", est.trace});
    r.details["estimate"] = estimate_json(est.estimate);
    return r;
}

Report cmd_spectrum(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "rotation"));
    const auto fs = observables_from(p, sys, "char:1");
    std::vector<double> thetas;
    if (p.has("theta")) {
        for (const auto& t : split(p.str("theta", ""), ',')) thetas.push_back(parse_real(t));
    } else {
        const std::int64_t grid = p.integer("grid", 64);
        for (std::int64_t i = 0; i < grid; ++i) thetas.push_back(static_cast<double>(i) / static_cast<double>(grid));
    }
    const std::int64_t N = p.integer("N", 1000);
    const auto masses = spectral_mass_grid(sys, fs.front(), thetas, N, make_method(p, sys, p.integer("budget", 1000)));
    Json rows = Json::array();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        Json row = estimate_json(masses[i]);
        row["theta"] = thetas[i];
        rows.push_back(row);
        if (std::abs(masses[i].value) > std::abs(masses[worst].value)) worst = i;
    }
    r.details["masses"] = rows;
    const bool bounded = p.has("tol");
    const double tol = bounded ? p.tolerance(1.0) : 0.0;
    r.add({"sup-spectral-mass", std::abs(masses[worst].value), masses[worst].std_error, tol, false,
           !bounded || std::abs(masses[worst].value) <= tol + 3.0 * masses[worst].std_error});
    return r;
}

BoxIndicator parse_box(const SystemSpec& sys, const std::string& text) {
    const Observable o = parse_observable(sys, "box:" + text);
    return std::get<BoxIndicator>(o);
}

Report cmd_recurrence(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "rotation"));
    const BoxIndicator a = parse_box(sys, p.str("box", "0-0.1"));
    const int k = static_cast<int>(p.integer("k", 2));
    const std::int64_t rr = p.integer("r", 2);
    const std::int64_t j = p.integer("j", 1, 0);
    const std::int64_t nmax = p.integer("nmax", 200);
    const auto scan = recurrence_scan(sys, a, k, rr, j, nmax, make_method(p, sys, p.integer("budget", 100000)));
    r.details["found"] = scan.found;
    if (scan.found) {
        r.details["n"] = scan.n;
        r.details["estimate"] = estimate_json(scan.estimate);
    }
    r.details["scanned"] = scan.scanned.size();
    // Not finding a positive n within the budget is an outcome, not a failure.
    r.add({"recurrence", scan.found ? scan.estimate.value : Complex{}, scan.found ? scan.estimate.std_error : 0.0, 0.0,
           false, true});
    return r;
}

HeisenbergRot heisenberg_of(const SystemSpec& sys) {
    const auto* h = std::get_if<HeisenbergRot>(&sys);
    if (h == nullptr) throw UsageError("ziegler-check needs a heisenberg system, got " + describe(sys));
    return *h;
}

Report cmd_ziegler(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "heisenberg"));
    const HeisenbergRot nil = heisenberg_of(sys);
    const auto fs = observables_from(p, sys, "char:0,0,1;char:0,0,-2;char:0,0,1");
    const std::int64_t budget = p.integer("budget", 100000);
    const std::int64_t draws = p.integer("draws", 100);
    const double tol = p.tolerance(5e-3);
    const std::uint64_t seed = p.seed();

    ZieglerLhsOptions opts;
    opts.N = p.integer("N", 10000);
    opts.mode = LhsMode::Integrated;
    opts.draws = draws;
    opts.starts = MonteCarlo{seed, std::max<std::int64_t>(1, budget / std::min(draws, opts.N))};
    const auto lhs = ziegler_lhs(nil, fs, opts);
    const auto rhs = ziegler_rhs(nil, fs, MonteCarlo{derive_seed(seed, 77), budget});
    const double dev = std::abs(lhs.estimate.value - rhs.value);
    const double se = lhs.estimate.std_error + rhs.std_error;
    r.add({"ziegler-identity", dev, se, tol, false, dev <= tol + 3.0 * se});
    r.traces.push_back({"lhs", lhs.trace});
    r.details["lhs"] = estimate_json(lhs.estimate);
    r.details["rhs"] = estimate_json(rhs);
    return r;
}

Report cmd_dilation(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "rotskew"));
    const auto fs = observables_from(p, sys, "one;one");
    const std::int64_t N = p.integer("N", 10000);
    const std::int64_t draws = p.integer("draws", 100);
    const std::int64_t budget = p.integer("budget", 100000);
    const double tol = p.tolerance(5e-3);
    const std::int64_t units = std::max<std::int64_t>(1, budget / std::min(draws, N));
    const auto rep =
        dilation_invariance_check(sys, p.integer("r", 2), fs, N, draws, make_method(p, sys, units), tol);
    r.add({"dilation-invariance", rep.deviation, rep.std_error, tol, false, rep.pass});
    r.traces.push_back({"step-1", rep.step_one.trace});
    r.traces.push_back({"step-r", rep.step_r.trace});
    r.details["step_one"] = estimate_json(rep.step_one.estimate);
    r.details["step_r"] = estimate_json(rep.step_r.estimate);
    return r;
}

CellCoding coding_from(const Params& p) {
    const int coord = static_cast<int>(p.integer("coord", 0, 0));
    return CellCoding::uniform(coord, static_cast<int>(p.integer("cells", 2, 2)));
}

Report cmd_sigma_av(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "rotation"));
    TableSpec spec;
    const std::string kind = p.str("kind", "moments");
    if (kind == "moments") {
        spec.kind = TableKind::Moments;
    } else if (kind == "partition") {
        spec.kind = TableKind::Partition;
    } else {
        throw UsageError("kind must be 'moments' or 'partition'");
    }
    spec.coding = coding_from(p);
    spec.max_freq = static_cast<int>(p.integer("max-freq", 1));
    spec.depth = static_cast<int>(p.integer("depth", 2));
    const std::int64_t nmax = p.integer("nmax", 4, 2);
    spec.max_step = static_cast<int>(nmax);
    const std::int64_t N = p.integer("N", 1000);
    const std::int64_t draws = p.integer("draws", 100, 0);
    const std::int64_t budget = p.integer("budget", 100000);
    const double tol = p.tolerance(1e-2);
    const std::int64_t per_unit = draws == 0 ? N : std::min(draws, N);
    const auto table = sigma_av_build(sys, spec, N, draws, make_method(p, sys, std::max<std::int64_t>(1, budget / per_unit)));
    const auto sst = sigma_av_sst_check(table, nmax, tol);
    const auto stat = stationarity_check(table, tol);
    r.add({"sigma-av-strong-stationarity", sst.max_deviation, 0.0, tol, false, sst.pass});
    r.add({"sigma-av-stationarity", stat.max_deviation, stat.std_error_at_max, tol, false, stat.pass});
    Json trace = Json::array();
    for (const auto& c : table.trace) trace.push_back({{"checkpoint", c.checkpoint}, {"max_change", c.max_change}});
    r.details["convergence"] = trace;
    r.details["index_sets"] = table.entries.size();
    if (p.has("table")) {
        std::ofstream out(p.str("table", ""));
        if (!out) throw UsageError("cannot write table to '" + p.str("table", "") + "'");
        write_table(out, table);
    }
    return r;
}

Report cmd_majorize(const Params& p) {
    Report r;
    const SystemSpec sys = parse_system(p.str("system", "rotation"));
    const double tol = p.tolerance(1e-2);
    const auto res = majorize_fixed_point(sys, coding_from(p), static_cast<int>(p.integer("depth", 1)),
                                          p.integer("N", 256), static_cast<int>(p.integer("mcheck", 3, 2)),
                                          MonteCarlo{p.seed(), p.integer("budget", 20000)}, tol);
    r.add({"dilation-invariance-of-nu", res.invariance.max_deviation, res.invariance.std_error_at_max, tol, false,
           res.invariance.pass});
    double worst = 0.0, worst_se = 0.0;
    for (const auto& row : res.majorization) {
        if (row.margin < worst) {
            worst = row.margin;
            worst_se = row.std_error;
        }
    }
    r.add({"majorization", worst, worst_se, 0.0, false, res.majorization_pass});
    Json rows = Json::array();
    for (const auto& row : res.majorization)
        rows.push_back({{"index", row.index}, {"cells", row.cells}, {"sup_base", row.sup_base},
                        {"sup_at", row.sup_at}, {"nu", row.nu}, {"margin", row.margin}, {"stderr", row.std_error}});
    r.details["majorization"] = rows;
    if (p.has("table")) {
        std::ofstream out(p.str("table", ""));
        if (!out) throw UsageError("cannot write table to '" + p.str("table", "") + "'");
        write_table(out, res.nu);
    }
    return r;
}

Report cmd_vdc(const Params& p) {
    Report r;
    const std::int64_t N = p.integer("N", 1000);
    const std::int64_t M = p.integer("M", 30);
    if (M > N) throw UsageError("M must be <= N");
    const auto D = static_cast<std::size_t>(p.integer("dim", 1));
    const std::int64_t count = p.integer("sequences", 100);
    Rng rng(derive_seed(p.seed(), 41));

    auto record = [&](const std::string& name, const std::vector<std::vector<Complex>>& xs) {
        const VdcResult v = finite_vdc_check(xs, M);
        r.add({name, v.lhs, 0.0, v.rhs, true, v.holds});
        return v;
    };
    double worst_ratio = 0.0;
    bool all_hold = true;
    for (std::int64_t s = 0; s < count; ++s) {
        std::vector<std::vector<Complex>> xs(static_cast<std::size_t>(N), std::vector<Complex>(D));
        for (auto& v : xs)
            for (auto& c : v) c = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const VdcResult v = finite_vdc_check(xs, M);
        worst_ratio = std::max(worst_ratio, v.lhs / v.rhs);
        all_hold = all_hold && v.holds;
    }
    r.add({"random-sign-sequences", worst_ratio, 0.0, 1.0, true, all_hold});
    std::vector<std::vector<Complex>> constant(static_cast<std::size_t>(N), std::vector<Complex>(D));
    for (auto& v : constant) v[0] = 1.0;
    record("constant-unit-vector", constant);
    std::vector<std::vector<Complex>> rot(static_cast<std::size_t>(N), std::vector<Complex>(D));
    for (std::int64_t n = 0; n < N; ++n)
        rot[static_cast<std::size_t>(n)][0] = std::polar(1.0, 2.0 * std::numbers::pi * kSqrt2Minus1 * static_cast<double>(n));
    record("rotation-sequence", rot);
    return r;
}

using Handler = Report (*)(const Params&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"verify-sst", cmd_verify_sst},   {"correlation", cmd_correlation},
        {"cesaro", cmd_cesaro},           {"spectrum", cmd_spectrum},
        {"recurrence", cmd_recurrence},   {"ziegler-check", cmd_ziegler},
        {"dilation-invariance", cmd_dilation}, {"sigma-av", cmd_sigma_av},
        {"majorize", cmd_majorize},       {"vdc", cmd_vdc},
    };
    return table;
}

const std::vector<std::pair<std::string, std::string>>& option_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"system", "system, e.g. skew2, rotation:a=sqrt2-1, heisenberg, bernoulli:p=.5/.5"},
        {"algebra", "generator set: characters, y-characters, last-characters, x3-characters, cylinders"},
        {"max-freq", "largest character frequency"},
        {"fs", "observables separated by ';' (one, char:..., box:lo-hi,..., sym:s)"},
        {"weights", "character weights along --coord, e.g. 1,-2,1"},
        {"coord", "coordinate index"},
        {"method", "mc or orbit"},
        {"budget", "sample budget"},
        {"seed", "master seed (64-bit unsigned; env SSTLAB_SEED)"},
        {"threads", "worker threads (env SSTLAB_THREADS)"},
        {"tol", "tolerance"},
        {"N", "Cesaro / orbit length"},
        {"n", "dilation index"},
        {"draws", "n-values per sample (0 = all)"},
        {"step", "Cesaro step"},
        {"kmax", "largest k"},
        {"nmax", "largest n"},
        {"theta", "comma-separated frequencies"},
        {"grid", "theta grid size"},
        {"box", "box as lo-hi per coordinate, comma-separated"},
        {"k", "number of returns"},
        {"r", "modulus / dilation factor"},
        {"j", "residue"},
        {"M", "Van der Corput lag"},
        {"dim", "vector dimension"},
        {"sequences", "number of random sequences"},
        {"kind", "table kind: moments or partition"},
        {"cells", "number of equal cells"},
        {"depth", "cylinder depth"},
        {"mcheck", "largest dilation checked"},
        {"table", "write the cylinder table to this path"},
        {"report", "write the JSON report to this path"},
        {"csv", "write convergence traces as CSV to this path"},
    };
    return keys;
}

Json report_json(const std::string& command, const Params& p, const Report& r, double seconds) {
    Json j;
    j["schema"] = kReportSchema;
    j["schema_version"] = kReportSchemaVersion;
    j["version"] = kVersion;
    j["command"] = command;
    Json config = Json::object();
    for (const auto& [k, v] : p.values) config[k] = v;
    config["resolved_seed"] = std::to_string(p.seed());
    j["config"] = config;
    Json checks = Json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name}, {"value_re", c.value.real()}, {"value_im", c.value.imag()},
                          {"stderr", c.std_error}, {"tolerance", c.tolerance}, {"exact", c.exact}, {"pass", c.pass}});
    j["checks"] = checks;
    Json traces = Json::array();
    for (const auto& t : r.traces) {
        Json pts = Json::array();
        for (const auto& q : t.points)
            pts.push_back({{"checkpoint", q.checkpoint}, {"value_re", q.value.real()}, {"value_im", q.value.imag()},
                           {"stderr", q.std_error}});
        traces.push_back({{"name", t.name}, {"points", pts}});
    }
    j["traces"] = traces;
    j["details"] = r.details;
    j["pass"] = r.pass();
    j["wall_clock_seconds"] = seconds;
    return j;
}

void write_csv(const std::string& path, const Report& r) {
    namespace fs = std::filesystem;
    for (std::size_t i = 0; i < r.traces.size(); ++i) {
        fs::path target(path);
        if (r.traces.size() > 1)
            target.replace_filename(target.stem().string() + "_" + r.traces[i].name + target.extension().string());
        std::ofstream out(target);
        if (!out) throw UsageError("cannot write CSV to '" + target.string() + "'");
        out.precision(17);
        out << "checkpoint,value_re,value_im,stderr\n";
        for (const auto& q : r.traces[i].points)
            out << q.checkpoint << ',' << q.value.real() << ',' << q.value.imag() << ',' << q.std_error << '\n';
    }
}

void print_text(std::ostream& out, const std::string& command, const Report& r) {
    out << "sstlab " << kVersion << " " << command << '\n';
    for (const auto& c : r.checks) {
        out << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << ": value=" << c.value.real();
        if (c.value.imag() != 0.0) out << (c.value.imag() < 0 ? "" : "+") << c.value.imag() << "i";
        if (c.exact) {
            out << " (exact)";
        } else {
            out << " stderr=" << c.std_error;
        }
        out << " tol=" << c.tolerance << '\n';
    }
    for (const auto& t : r.traces) {
        out << "  trace " << t.name << ':';
        for (const auto& q : t.points) out << " [" << q.checkpoint << "] " << q.value.real() << "," << q.value.imag();
        out << '\n';
    }
    out << (r.pass() ? "PASS" : "FAIL") << '\n';
}

}  // namespace

double parse_real(const std::string& raw) {
    const std::string text = trim(raw);
    if (text == "sqrt2-1") return kSqrt2Minus1;
    if (text == "sqrt3-1") return kSqrt3Minus1;
    try {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size() || !std::isfinite(v)) throw std::invalid_argument("bad");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid real number '" + text + "'");
    }
}

namespace {

std::map<std::string, std::string> parse_params(const std::string& body, const std::string& system) {
    std::map<std::string, std::string> out;
    if (body.empty()) return out;
    // Values may themselves contain ',' only for heisenberg (none do), so split on ','.
    for (const auto& item : split(body, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("system '" + system + "': expected key=value, got '" + item + "'");
        out[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    return out;
}

SystemSpec parse_single_system(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = trim(text.substr(0, colon));
    const auto params = parse_params(colon == std::string::npos ? "" : text.substr(colon + 1), text);
    auto get = [&](const std::string& key, const std::string& fallback) {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (const auto& [k, v] : params)
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                throw UsageError("system '" + name + "' has no parameter '" + k + "'");
    };
    try {
        if (name == "skew2") {
            allow({});
            return skew2();
        }
        if (name == "rotation") {
            allow({"a"});
            return rotation(parse_real(get("a", "sqrt2-1")));
        }
        if (name == "rotskew") {
            allow({"a"});
            return rot_skew(parse_real(get("a", "sqrt2-1")));
        }
        if (name == "affine") {
            allow({"d"});
            return affine_skew(static_cast<int>(parse_int(get("d", "3"), "d")));
        }
        if (name == "heisenberg") {
            allow({"a1", "a2", "a3"});
            return heisenberg_rot(parse_real(get("a1", "sqrt2-1")), parse_real(get("a2", "sqrt3-1")),
                                  parse_real(get("a3", "0")));
        }
        if (name == "bernoulli") {
            allow({"p"});
            std::vector<double> p;
            for (const auto& s : split(get("p", ".5/.5"), '/')) p.push_back(parse_real(s));
            return bernoulli_shift(std::move(p));
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    throw UsageError("unknown system '" + name + "'");
}

}  // namespace

SystemSpec parse_system(const std::string& text) {
    const auto parts = split(text, '*');
    if (parts.empty() || std::any_of(parts.begin(), parts.end(), [](const auto& s) { return s.empty(); }))
        throw UsageError("empty system description");
    if (parts.size() == 1) return parse_single_system(parts[0]);
    std::vector<SystemSpec> factors;
    for (const auto& part : parts) factors.push_back(parse_single_system(part));
    return product(std::move(factors));
}

Observable parse_observable(const SystemSpec& sys, const std::string& raw) {
    const std::string text = trim(raw);
    const int dims = coordinate_count(sys);
    Observable f;
    try {
        if (text == "one") return constant_one(dims);
        if (text.rfind("char:", 0) == 0) {
            f = Character{parse_int_list(text.substr(5), "char")};
        } else if (text.rfind("box:", 0) == 0) {
            BoxIndicator b;
            for (const auto& iv : split(text.substr(4), ',')) {
                const auto dash = iv.find('-', 1);
                if (dash == std::string::npos) throw UsageError("box interval must be lo-hi, got '" + iv + "'");
                b.intervals.push_back({parse_real(iv.substr(0, dash)), parse_real(iv.substr(dash + 1))});
            }
            f = b;
        } else if (text.rfind("sym:", 0) == 0) {
            const auto* bern = std::get_if<BernoulliShift>(&sys);
            if (bern == nullptr) throw UsageError("sym: needs a bernoulli system");
            f = symbol_indicator(static_cast<int>(bern->p.size()), static_cast<int>(parse_int(text.substr(4), "sym")));
        } else {
            throw UsageError("unknown observable '" + text + "'");
        }
        check_observable(sys, f);
    } catch (const UsageError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("observable '") + text + "': " + e.what());
    }
    return f;
}

std::vector<Observable> parse_observables(const SystemSpec& sys, const std::string& text) {
    std::vector<Observable> out;
    for (const auto& part : split(text, ';')) out.push_back(parse_observable(sys, part));
    if (out.empty()) throw UsageError("no observables given");
    return out;
}

std::vector<Observable> parse_algebra(const SystemSpec& sys, const std::string& name, int max_freq) {
    if (max_freq < 1) throw UsageError("max-freq must be >= 1");
    const int dims = coordinate_count(sys);
    std::vector<Observable> gens;
    if (name == "characters") {
        // Every nonzero frequency vector in [-F, F]^dims.
        std::vector<int> freq(static_cast<std::size_t>(dims), -max_freq);
        while (true) {
            if (std::any_of(freq.begin(), freq.end(), [](int v) { return v != 0; })) gens.push_back(Character{freq});
            std::size_t i = 0;
            while (i < freq.size() && freq[i] == max_freq) freq[i++] = -max_freq;
            if (i == freq.size()) break;
            ++freq[i];
        }
        if (gens.size() > 64) throw UsageError("character algebra too large; lower max-freq");
    } else if (name == "y-characters" || name == "last-characters" || name == "x3-characters") {
        if (name == "y-characters" && dims != 2) throw UsageError("y-characters need a two-dimensional space");
        if (name == "x3-characters" && dims != 3) throw UsageError("x3-characters need a three-coordinate space");
        for (int m = -max_freq; m <= max_freq; ++m)
            if (m != 0) gens.push_back(coordinate_character(dims, dims - 1, m));
    } else if (name == "cylinders") {
        const auto* bern = std::get_if<BernoulliShift>(&sys);
        if (bern == nullptr) throw UsageError("cylinders need a bernoulli system");
        const int m = static_cast<int>(bern->p.size());
        for (int s = 0; s < m; ++s) gens.push_back(symbol_indicator(m, s));
    } else {
        throw UsageError("unknown algebra '" + name + "'");
    }
    return gens;
}

std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical laboratory for strongly stationary processes"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::map<std::string, std::string> flags;
    std::map<std::string, std::pair<CLI::App*, std::vector<CLI::Option*>>> subs;
    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        std::vector<CLI::Option*> opts;
        for (const auto& [key, help] : option_keys()) opts.push_back(sub->add_option("--" + key, flags[key], help));
        sub->add_option("--config", config_path, "key=value configuration file (flags override it)");
        return opts;
    };
    for (const auto& [name, handler] : handlers()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        subs[name] = {sub, add_common(sub)};
    }
    CLI::App* run_sub = app.add_subcommand("run", "run the experiment described by --config");
    subs["run"] = {run_sub, add_common(run_sub)};

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kPass : kUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        std::string command;
        std::vector<CLI::Option*>* opts = nullptr;
        for (auto& [name, entry] : subs)
            if (entry.first->parsed()) {
                command = name;
                opts = &entry.second;
            }

        Params params;
        if (!config_path.empty()) params.values = read_config(config_path);
        if (command == "run") {
            if (config_path.empty()) throw UsageError("run needs --config");
            if (!params.has("command")) throw UsageError("config file lacks 'command'");
            command = params.values["command"];
            if (!handlers().count(command)) throw UsageError("unknown command '" + command + "' in config");
        }
        params.values.erase("command");
        std::size_t i = 0;
        for (const auto& [key, help] : option_keys()) {
            if ((*opts)[i++]->count() > 0) params.values[key] = flags[key];
        }
        for (const auto& [key, value] : params.values)
            if (std::none_of(option_keys().begin(), option_keys().end(), [&](const auto& kv) { return kv.first == key; }))
                throw UsageError("unknown configuration key '" + key + "'");

        if (params.has("threads")) set_thread_count(static_cast<int>(params.integer("threads", 1)));
        const Report report = handlers().at(command)(params);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        print_text(out, command, report);
        if (params.has("report")) {
            std::ofstream f(params.str("report", ""));
            if (!f) throw UsageError("cannot write report to '" + params.str("report", "") + "'");
            f << report_json(command, params, report, seconds).dump(2) << '\n';
        }
        if (params.has("csv")) write_csv(params.str("csv", ""), report);
        return report.pass() ? kPass : kFail;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace sstlab::cli
