#include "driftwatch/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftwatch/calibration.hpp"
#include "driftwatch/csv.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/estimator.hpp"
#include "driftwatch/kernels.hpp"
#include "driftwatch/limitsim.hpp"
#include "driftwatch/monitor.hpp"
#include "driftwatch/optkernel.hpp"
#include "driftwatch/random.hpp"
#include "driftwatch/seriesgen.hpp"
#include "driftwatch/variance.hpp"

namespace driftwatch {
namespace {

using nlohmann::json;

// Reports carry ten significant digits so they are stable across platforms.
double report(double x) { return std::strtod(format_report(x).c_str(), nullptr); }

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    if (std::count(text.begin(), text.end(), ':') == 2) {
        const auto a = text.find(':');
        const auto b = text.find(':', a + 1);
        const double lo = std::stod(text.substr(0, a));
        const double hi = std::stod(text.substr(a + 1, b - a - 1));
        const long count = std::stol(text.substr(b + 1));
        if (count < 1 || !(hi >= lo)) throw DomainError("threshold grid lo:hi:count is invalid");
        for (long i = 0; i < count; ++i) {
            out.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) /
                                                      static_cast<double>(count - 1));
        }
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw DomainError("threshold grid is empty");
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw DomainError("cannot open '" + path + "'");
    return file;
}

// Options shared by several subcommands.
struct KernelOptions {
    std::string name = "gaussian";
    std::string file;

    void add(CLI::App* app) {
        app->add_option("--kernel", name, "gaussian, epanechnikov or laplace")
            ->capture_default_str();
        app->add_option("--kernel-file", file, "tabulated kernel CSV with header z,k");
    }
    KernelSpec resolve() const {
        return file.empty() ? KernelSpec::from_name(name) : load_kernel_csv(file);
    }
};

struct AlternativeOptions {
    std::string name = "zero";
    std::string file;

    void add(CLI::App* app, const std::string& fallback) {
        name = fallback;
        app->add_option("--m0", name, "generic alternative: zero, step or ramp")
            ->capture_default_str();
        app->add_option("--m0-file", file, "tabulated alternative CSV with header t,m0");
    }
    GenericAlternative resolve() const {
        if (file.empty()) return GenericAlternative::from_name(name);
        auto in = open_input(file);
        return read_alternative_csv(in);
    }
};

struct Global {
    std::optional<std::uint64_t> seed;
    std::string config;
    unsigned jobs = 0;
};

std::uint64_t resolve_seed(const Global& g, std::ostream& err) {
    std::uint64_t seed;
    if (g.seed) {
        seed = *g.seed;
    } else if (const char* env = std::getenv("DRIFTWATCH_SEED"); env && *env) {
        char* end = nullptr;
        seed = std::strtoull(env, &end, 10);
        if (*end != '\0') throw DomainError("DRIFTWATCH_SEED must be an unsigned integer");
    } else {
        seed = entropy_seed();
    }
    err << "seed=" << seed << '\n';
    return seed;
}

std::optional<VarianceMethod> variance_option(const std::string& name) {
    if (name.empty() || name == "none" || name == "known") return std::nullopt;
    return variance_method_from_name(name);
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
    long n = 100;
    double sigma = 1.0;
    std::string innovations = "iid";
    double ar_a = 0.5;
    double alpha0 = 0.1;
    double alpha1 = 0.1;
    double beta1 = 0.8;
    AlternativeOptions m0;
    double beta = 0.0;
    std::optional<long> cp1;
    std::optional<double> cp2;
    double h = 10.0;
    std::optional<double> h_link;
    std::optional<double> design_gamma;
    std::string design_mode = "cp1";
    std::optional<double> snap;
    std::string output;
};

void add_generate(CLI::App* sub, GenerateOptions& o) {
    sub->add_option("--n", o.n, "horizon N")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--sigma", o.sigma, "innovation scale")->capture_default_str();
    sub->add_option("--innovations", o.innovations, "iid, ar1 or garch")
        ->capture_default_str()
        ->check(CLI::IsMember({"iid", "ar1", "garch"}));
    sub->add_option("--ar-a", o.ar_a, "AR(1) coefficient")->capture_default_str();
    sub->add_option("--garch-alpha0", o.alpha0)->capture_default_str();
    sub->add_option("--garch-alpha1", o.alpha1)->capture_default_str();
    sub->add_option("--garch-beta1", o.beta1)->capture_default_str();
    o.m0.add(sub, "zero");
    sub->add_option("--beta", o.beta, "drift rate exponent in (-1, 0]")->capture_default_str();
    auto* cp1 = sub->add_option("--cp1", o.cp1, "CP1 change point q");
    sub->add_option("--cp2", o.cp2, "CP2 change fraction theta")->excludes(cp1);
    sub->add_option("--h", o.h, "bandwidth h, the default drift bandwidth")->capture_default_str();
    sub->add_option("--h-link", o.h_link, "drift bandwidth h_N (defaults to --h)");
    sub->add_option("--design-gamma", o.design_gamma, "power time design F^{-1}(u) = u^{1/gamma}");
    sub->add_option("--design-mode", o.design_mode, "cp1 (rolling) or cp2 (fixed)")
        ->capture_default_str()
        ->check(CLI::IsMember({"cp1", "cp2"}));
    sub->add_option("--snap", o.snap, "snap design times to this grid spacing");
    sub->add_option("--output,-o", o.output, "output CSV (default standard output)");
}

int run_generate(const GenerateOptions& o, const Global& g, std::ostream& out, std::ostream& err) {
    SeriesSpec spec;
    spec.N = o.n;
    if (o.innovations == "ar1") {
        spec.innovations = InnovationSpec::ar1(o.ar_a, o.sigma);
    } else if (o.innovations == "garch") {
        spec.innovations = InnovationSpec::garch11(o.alpha0, o.alpha1, o.beta1, o.sigma);
    } else {
        spec.innovations = InnovationSpec::iid(o.sigma);
    }
    spec.drift.m0 = o.m0.resolve();
    spec.drift.beta = o.beta;
    spec.drift.h_link = o.h_link.value_or(o.h);
    if (o.cp2) {
        spec.drift.change_point = ChangePointFraction{*o.cp2};
    } else {
        spec.drift.change_point = ChangePointFixed{o.cp1.value_or(0)};
    }
    if (o.design_gamma) {
        auto design = TimeDesign::power(
            *o.design_gamma, o.design_mode == "cp2" ? DesignMode::cp2_fixed : DesignMode::cp1_rolling);
        if (o.snap) design.with_snap_grid(*o.snap);
        spec.design = design;
    }
    const std::uint64_t seed = resolve_seed(g, err);
    const TimeSeries series = generate(spec, seed);
    if (o.output.empty()) {
        write_series_csv(out, series);
    } else {
        std::ofstream file(o.output);
        if (!file) throw DomainError("cannot write '" + o.output + "'");
        write_series_csv(file, series);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// monitor

struct MonitorOptions {
    std::string input;
    bool stream = false;
    KernelOptions kernel;
    double h = 10.0;
    double c = 0.0;
    double a = 0.0;
    std::optional<long> n;
    std::string scaling = "null";
    std::string variance;
    std::string prerun_file;
};

void add_monitor(CLI::App* sub, MonitorOptions& o) {
    auto* input = sub->add_option("--input,-i", o.input, "series CSV with header t,y ('-' = stdin)");
    sub->add_flag("--stream", o.stream, "read t,y records from standard input one at a time")
        ->excludes(input);
    o.kernel.add(sub);
    sub->add_option("--h", o.h, "bandwidth")->required()->check(CLI::PositiveNumber);
    sub->add_option("--c", o.c, "threshold")->required();
    sub->add_option("--a", o.a, "start fraction in [0, 1)")->capture_default_str();
    sub->add_option("--n", o.n, "horizon N (default: series length; required with --stream)");
    sub->add_option("--scaling", o.scaling, "raw, null, slow_alt or stationary")
        ->capture_default_str();
    sub->add_option("--variance", o.variance, "standardize with naive, gasser or rice");
    sub->add_option("--prerun-file", o.prerun_file, "prerun series CSV seeding the variance");
}

json alarm_record(long index, double time, double statistic, double threshold, long N) {
    return json{{"alarm", true},
                {"index", index},
                {"time", report(time)},
                {"statistic", report(statistic)},
                {"threshold", report(threshold)},
                {"normed_time", report(static_cast<double>(index) / static_cast<double>(N))}};
}

json truncation_record(long N, long observed, double threshold) {
    return json{{"alarm", false},
                {"index", N},
                {"observed", observed},
                {"threshold", report(threshold)},
                {"normed_time", 1.0}};
}

int run_monitor_cmd(const MonitorOptions& o, std::istream& in, std::ostream& out) {
    MonitorConfig cfg;
    cfg.smoother.kernel = o.kernel.resolve();
    cfg.smoother.h = o.h;
    cfg.smoother.scaling = scaling_from_name(o.scaling);
    cfg.threshold = o.c;
    cfg.start_fraction = o.a;
    cfg.variance_method = variance_option(o.variance);
    if (!o.prerun_file.empty()) {
        auto file = open_input(o.prerun_file);
        cfg.prerun = read_series_csv(file).values;
    }

    if (o.stream) {
        if (!o.n) throw DomainError("--stream needs the horizon --n");
        cfg.N = *o.n;
        OnlineMonitor monitor(cfg);
        std::string line;
        long line_no = 0;
        while (monitor.count() < cfg.N && std::getline(in, line)) {
            ++line_no;
            const std::string view = trim(line);
            if (view.empty() || (monitor.count() == 0 && view == "t,y")) continue;
            double t = 0.0, y = 0.0;
            if (!parse_pair(view, t, y)) {
                throw DomainError("malformed t,y record on input line " + std::to_string(line_no));
            }
            const double stat = monitor.push(t, y);
            if (monitor.alarm_index()) {
                out << alarm_record(*monitor.alarm_index(), t, stat, cfg.threshold, cfg.N).dump()
                    << std::endl;
                return kExitAlarm;
            }
        }
        out << truncation_record(cfg.N, monitor.count(), cfg.threshold).dump() << std::endl;
        return kExitOk;
    }

    TimeSeries series;
    if (o.input.empty() || o.input == "-") {
        series = read_series_csv(in);
    } else {
        auto file = open_input(o.input);
        series = read_series_csv(file);
    }
    if (series.size() < 1) throw DomainError("input series is empty");
    cfg.N = o.n.value_or(series.size());
    const StoppingResult r = run_monitor(series, cfg);
    if (r.alarmed) {
        out << alarm_record(r.alarm_index, series.times[r.alarm_index - 1],
                            r.trajectory[r.alarm_index - 1], cfg.threshold, cfg.N)
                   .dump()
            << '\n';
        return kExitAlarm;
    }
    out << truncation_record(cfg.N, cfg.N, cfg.threshold).dump() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
    std::string variant = "limit";
    std::optional<double> zeta;
    std::optional<long> n;
    std::optional<double> h;
    KernelOptions kernel;
    std::string c_grid = "0:1:21";
    long reps = 10000;
    double a = 0.0;
    std::string variance;
    long prerun = 0;
    long grid_m = 2048;
    std::optional<double> target;
    std::string output;
};

void add_calibrate(CLI::App* sub, CalibrateOptions& o) {
    sub->add_option("--variant", o.variant, "limit or finite")
        ->capture_default_str()
        ->check(CLI::IsMember({"limit", "finite"}));
    sub->add_option("--zeta", o.zeta, "zeta = N / h");
    sub->add_option("--n", o.n, "horizon N (finite variant)");
    sub->add_option("--h", o.h, "bandwidth h (finite variant)");
    o.kernel.add(sub);
    sub->add_option("--c-grid", o.c_grid, "thresholds as lo:hi:count or a comma list")
        ->capture_default_str();
    sub->add_option("--reps", o.reps, "Monte Carlo replicates")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--a", o.a, "start fraction in [0, 1)")->capture_default_str();
    sub->add_option("--variance", o.variance, "finite variant: naive, gasser or rice");
    sub->add_option("--prerun", o.prerun, "finite variant: prerun length for the variance")
        ->capture_default_str();
    sub->add_option("--grid-m", o.grid_m, "limit variant: Brownian grid size")->capture_default_str();
    sub->add_option("--target", o.target, "also report the critical value for this normed ARL");
    sub->add_option("--output,-o", o.output, "table CSV (default standard output)");
}

int run_calibrate(const CalibrateOptions& o, const Global& g, std::ostream& out,
                  std::ostream& err) {
    const KernelSpec kernel = o.kernel.resolve();
    const std::vector<double> grid = parse_grid(o.c_grid);
    ArlVariant variant;
    if (o.variant == "finite") {
        FiniteSampleVariant f;
        if (o.n && o.h) {
            f.N = *o.n;
            f.h = *o.h;
        } else if (o.n && o.zeta) {
            f.N = *o.n;
            f.h = static_cast<double>(*o.n) / *o.zeta;
        } else {
            throw DomainError("the finite variant needs --n with --h or --zeta");
        }
        f.variance = variance_option(o.variance);
        f.prerun = o.prerun;
        variant = f;
    } else {
        LimitVariant l;
        if (o.zeta) {
            l.config.zeta = *o.zeta;
        } else if (o.n && o.h) {
            l.config.zeta = static_cast<double>(*o.n) / *o.h;
        } else {
            throw DomainError("the limit variant needs --zeta (or --n with --h)");
        }
        l.config.grid_M = o.grid_m;
        variant = l;
    }
    const std::uint64_t seed = resolve_seed(g, err);
    const CalibrationTable table = arl_curve(variant, kernel, grid, o.reps, seed, o.a, g.jobs);
    if (!o.output.empty()) {
        std::ofstream file(o.output);
        if (!file) throw DomainError("cannot write '" + o.output + "'");
        write_calibration_csv(file, table);
    } else if (!o.target) {
        write_calibration_csv(out, table);
    }
    if (o.target) {
        const double c = critical_value_for_arl(table, *o.target);
        out << json{{"target", report(*o.target)},
                    {"critical_value", report(c)},
                    {"variant", table.meta.variant},
                    {"zeta", report(table.meta.zeta)},
                    {"kernel", table.meta.kernel},
                    {"reps", table.meta.reps}}
                   .dump()
            << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// coverage

struct CoverageOptions {
    double zeta = 2.0;
    long n = 100;
    KernelOptions kernel;
    double alpha = 0.05;
    long reps = 10000;
    std::string variance = "naive";
    long prerun = 0;
};

void add_coverage(CLI::App* sub, CoverageOptions& o) {
    sub->add_option("--zeta", o.zeta, "zeta = N / h")->capture_default_str();
    sub->add_option("--n", o.n, "horizon N")->capture_default_str()->check(CLI::PositiveNumber);
    o.kernel.add(sub);
    sub->add_option("--alpha", o.alpha, "1 - nominal coverage")->capture_default_str();
    sub->add_option("--reps", o.reps, "Monte Carlo replicates")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--variance", o.variance, "naive, gasser, rice or known")
        ->capture_default_str();
    sub->add_option("--prerun", o.prerun, "prerun length pooled into the variance estimate")
        ->capture_default_str();
}

int run_coverage(const CoverageOptions& o, const Global& g, std::ostream& out, std::ostream& err) {
    const KernelSpec kernel = o.kernel.resolve();
    if (!(o.zeta >= 1.0)) throw DomainError("zeta must be at least 1");
    const double h = static_cast<double>(o.n) / o.zeta;
    const std::uint64_t seed = resolve_seed(g, err);
    const double coverage = coverage_sim(o.n, h, kernel, o.alpha, o.reps, seed,
                                         variance_option(o.variance), o.prerun, g.jobs);
    out << json{{"zeta", report(o.zeta)}, {"N", o.n},         {"h", report(h)},
                {"kernel", kernel.name()}, {"alpha", report(o.alpha)}, {"reps", o.reps},
                {"coverage", report(coverage)}}
               .dump()
        << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// table1

int run_table1(double s, std::ostream& out) {
    const std::vector<std::pair<std::string, double>> zetas = {
        {"10", 10.0}, {"5", 5.0}, {"4", 4.0}, {"2", 2.0}, {"1.5", 1.5}, {"1.2", 1.2}, {"1", 1.0}};
    out << "kernel";
    for (const auto& z : zetas) out << ',' << z.first;
    out << '\n';
    for (const auto& kernel : {KernelSpec::gaussian(), KernelSpec::laplace(), KernelSpec::epanechnikov()}) {
        out << kernel.name();
        for (const auto& z : zetas) {
            LimitConfig cfg;
            cfg.zeta = z.second;
            cfg.kernel = kernel;
            out << ',' << format_report(sigma_k_sq(cfg, s));
        }
        out << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// optkernel

struct OptkernelOptions {
    AlternativeOptions m0;
    double c = 0.0;
    double zeta = 1.0;
    std::optional<double> t_max;
    std::string output;
};

void add_optkernel(CLI::App* sub, OptkernelOptions& o) {
    o.m0.add(sub, "step");
    sub->add_option("--c", o.c, "threshold")->required();
    sub->add_option("--zeta", o.zeta, "zeta = N / h")->capture_default_str();
    sub->add_option("--t-max", o.t_max, "truncation point of m0 (default zeta)");
    sub->add_option("--output,-o", o.output, "write the K* table (CSV z,k) here");
}

int run_optkernel(const OptkernelOptions& o, std::ostream& out) {
    const GenericAlternative m0 = o.m0.resolve();
    const OptimalSolution sol = optimal_kernel(m0, o.zeta, o.c, o.t_max.value_or(o.zeta));
    if (!o.output.empty()) {
        std::ofstream file(o.output);
        if (!file) throw DomainError("cannot write '" + o.output + "'");
        write_optimal_kernel_csv(file, sol);
    }
    out << json{{"m0", m0.name()},
                {"c", report(o.c)},
                {"s_star", report(sol.s_star)},
                {"zeta", report(sol.zeta)},
                {"t_max", report(sol.t_max)},
                {"normalizer", report(sol.normalizer)},
                {"points", sol.z.size()}}
               .dump()
        << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// paths

struct PathsOptions {
    double zeta = 2.0;
    KernelOptions kernel;
    long grid_m = 2048;
    long count = 1;
    double sigma = 1.0;
    std::string m0;
    std::optional<double> cp2;
};

void add_paths(CLI::App* sub, PathsOptions& o) {
    sub->add_option("--zeta", o.zeta, "zeta = N / h")->capture_default_str();
    o.kernel.add(sub);
    sub->add_option("--grid-m", o.grid_m, "Brownian grid size")->capture_default_str();
    sub->add_option("--count", o.count, "number of paths")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--sigma", o.sigma, "scale of the Brownian motion")->capture_default_str();
    sub->add_option("--m0", o.m0, "add the limit drift of this alternative (step or ramp)");
    sub->add_option("--cp2", o.cp2, "CP2 change fraction of the drift");
}

int run_paths(const PathsOptions& o, const Global& g, std::ostream& out, std::ostream& err) {
    LimitConfig cfg;
    cfg.zeta = o.zeta;
    cfg.kernel = o.kernel.resolve();
    cfg.grid_M = o.grid_m;
    cfg.sigma = o.sigma;
    if (!o.m0.empty()) {
        cfg.drift = LimitDrift{GenericAlternative::from_name(o.m0), o.cp2.has_value(),
                               o.cp2.value_or(0.5)};
    }
    const std::uint64_t seed = resolve_seed(g, err);
    const LimitPathSampler sampler(cfg);
    const Eigen::MatrixXd paths = sampler.sample(0, o.count, seed, cfg.drift.has_value());
    out << 's';
    for (long p = 1; p <= o.count; ++p) out << ",path_" << p;
    out << '\n';
    for (long j = 1; j <= cfg.grid_M; ++j) {
        out << format_exact(static_cast<double>(j) / static_cast<double>(cfg.grid_M));
        for (long p = 0; p < o.count; ++p) out << ',' << format_exact(paths(j - 1, p));
        out << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// configuration files

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

// Adds config entries as flags of the subcommand (or of the top level) unless
// the same flag is already on the command line.
std::vector<std::string> apply_config(const CLI::App& app, std::vector<std::string> args,
                                      const std::map<std::string, std::string>& config) {
    auto sub_pos = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
        return app.get_subcommand_no_throw(a) != nullptr;
    });
    const CLI::App* sub = sub_pos == args.end() ? nullptr : app.get_subcommand_no_throw(*sub_pos);
    std::vector<std::string> top, tail;
    for (const auto& [key, value] : config) {
        const std::string flag = "--" + key;
        if (given_on_command_line(args, flag)) continue;
        const CLI::Option* opt = nullptr;
        std::vector<std::string>* target = nullptr;
        if (sub && (opt = sub->get_option_no_throw(flag))) {
            target = &tail;
        } else if ((opt = app.get_option_no_throw(flag))) {
            target = &top;
        } else {
            throw CLI::ConfigError("unknown configuration key '" + key + "'");
        }
        if (opt->get_expected_max() == 0) {
            if (value == "true" || value == "1" || value == "yes") target->push_back(flag);
        } else {
            target->push_back(flag);
            target->push_back(value);
        }
    }
    if (sub_pos == args.end()) {
        args.insert(args.begin(), top.begin(), top.end());
        return args;
    }
    const auto offset = sub_pos - args.begin();
    args.insert(args.begin() + offset + 1, tail.begin(), tail.end());
    args.insert(args.begin(), top.begin(), top.end());
    return args;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError("config line " + std::to_string(line_no) + " is not key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw DomainError("config line " + std::to_string(line_no) + " has no key");
        std::replace(key.begin(), key.end(), '_', '-');
        out[key] = value;
    }
    return out;
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Kernel-weighted sequential monitoring of random walks for drift", "driftwatch"};
    app.require_subcommand(1);
    // global options may also follow the subcommand
    app.fallthrough();
    // "-h" is left free for the bandwidth option
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    Global global;
    app.add_option("--seed", global.seed, "64-bit seed (default: DRIFTWATCH_SEED or entropy)");
    app.add_option("--config", global.config, "flat key = value file of option defaults");
    app.add_option("--jobs", global.jobs, "worker threads (0 = all cores); results do not depend on it")
        ->capture_default_str();

    GenerateOptions gen;
    add_generate(app.add_subcommand("generate", "simulate a series and write CSV t,y"), gen);
    MonitorOptions mon;
    add_monitor(app.add_subcommand("monitor", "run the stopping rule on a series or a stream"), mon);
    CalibrateOptions cal;
    add_calibrate(app.add_subcommand("calibrate", "normed ARL curve c,normed_arl"), cal);
    CoverageOptions cov;
    add_coverage(app.add_subcommand("coverage", "coverage of the asymptotic confidence interval"), cov);
    double table_s = 1.0;
    app.add_subcommand("table1", "limit variances sigma_K^2 for three kernels and seven zeta")
        ->add_option("--s", table_s, "evaluation point s in (0, 1]")
        ->capture_default_str();
    OptkernelOptions opt;
    add_optkernel(app.add_subcommand("optkernel", "optimal normed delay and kernel K*"), opt);
    PathsOptions paths;
    add_paths(app.add_subcommand("paths", "sample limit-process paths as CSV"), paths);

    try {
        std::vector<std::string> argv = args;
        if (const auto path = find_config_path(args)) {
            argv = apply_config(app, argv, read_config_file(*path));
        }
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (app.got_subcommand("generate")) return run_generate(gen, global, out, err);
        if (app.got_subcommand("monitor")) return run_monitor_cmd(mon, in, out);
        if (app.got_subcommand("calibrate")) return run_calibrate(cal, global, out, err);
        if (app.got_subcommand("coverage")) return run_coverage(cov, global, out, err);
        if (app.got_subcommand("table1")) return run_table1(table_s, out);
        if (app.got_subcommand("optkernel")) return run_optkernel(opt, out);
        if (app.got_subcommand("paths")) return run_paths(paths, global, out, err);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: malformed number (" << e.what() << ")\n";
        return kExitUsage;
    } catch (const DegenerateError& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace driftwatch
