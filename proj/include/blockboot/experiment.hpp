#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "blockboot/ar1.hpp"
#include "blockboot/asymptotics.hpp"
#include "blockboot/block.hpp"
#include "blockboot/errors.hpp"
#include "blockboot/series.hpp"
#include "blockboot/weights.hpp"
#include "json.hpp"

namespace blockboot {

enum class ExperimentKind { ratio, coefficient, mse };

inline const char* experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::ratio: return "ratio";
        case ExperimentKind::coefficient: return "coefficient";
        case ExperimentKind::mse: return "mse";
    }
    throw std::invalid_argument("experiment_name: unknown experiment kind");
}

inline ExperimentKind parse_experiment(const std::string& name) {
    if (name == "ratio") return ExperimentKind::ratio;
    if (name == "coefficient") return ExperimentKind::coefficient;
    if (name == "mse") return ExperimentKind::mse;
    throw std::invalid_argument("unknown experiment '" + name +
                                "' (expected ratio|coefficient|mse)");
}

// How the block length is chosen at each sample size: the n^{1/3} rule of
// thumb, a fixed user value, or the model-true MSE-optimal length.
struct BlockRule {
    enum class Kind { cuberoot, fixed, optimal_oracle };
    Kind kind = Kind::cuberoot;
    double fixed_ell = 0.0;

    static BlockRule cuberoot() { return {}; }
    static BlockRule fixed(double ell) {
        if (!std::isfinite(ell) || !(ell >= 1.0))
            throw std::invalid_argument("BlockRule::fixed: ell must be a finite value >= 1");
        return {Kind::fixed, ell};
    }
    static BlockRule optimal_oracle() { return {Kind::optimal_oracle, 0.0}; }
};

struct ExperimentConfig {
    Ar1Model model{0.0, 1.0};
    std::vector<std::size_t> n_grid{100, 250, 500, 1000, 2500, 5000, 10000};
    std::size_t replications = 5000;
    std::uint64_t master_seed = 0;
    std::vector<Method> methods{Method::sb, Method::nbb, Method::mbb, Method::cbb};
    BlockRule block_rule{};
    ExperimentKind experiment = ExperimentKind::ratio;
};

inline void validate_config(const ExperimentConfig& config) {
    if (config.n_grid.empty())
        throw std::invalid_argument("config: n_grid must be non-empty");
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
        if (config.n_grid[i] < 2)
            throw std::invalid_argument("config: every n must be >= 2");
        if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1])
            throw std::invalid_argument("config: n_grid must be strictly increasing");
    }
    if (config.replications < 100)
        throw std::invalid_argument("config: replications must be >= 100");
    if (config.methods.empty())
        throw std::invalid_argument("config: methods must be non-empty");
    for (std::size_t i = 0; i < config.methods.size(); ++i)
        for (std::size_t j = i + 1; j < config.methods.size(); ++j)
            if (config.methods[i] == config.methods[j])
                throw std::invalid_argument("config: duplicate method '" +
                                            std::string(method_name(config.methods[i])) + "'");
    if (config.block_rule.kind == BlockRule::Kind::fixed &&
        !(config.block_rule.fixed_ell >= 1.0))
        throw std::invalid_argument("config: fixed block length must be >= 1");
    if (config.block_rule.kind == BlockRule::Kind::optimal_oracle &&
        bias_constant(config.model) == 0.0)
        throw std::invalid_argument(
            "config: optimal-oracle block rule is undefined when the bias constant is "
            "zero (phi = 0)");
    if (config.experiment == ExperimentKind::ratio) {
        bool has_nbb = false;
        for (Method m : config.methods)
            has_nbb = has_nbb || m == Method::nbb;
        if (!has_nbb)
            throw std::invalid_argument("config: the ratio experiment needs 'nbb' among methods");
    }
    if (config.experiment == ExperimentKind::mse &&
        config.block_rule.kind != BlockRule::Kind::optimal_oracle)
        throw std::invalid_argument("config: the mse experiment requires the optimal-oracle "
                                    "block rule");
}

// One (n, method) cell of an experiment. Monte Carlo moments are over the
// replications; theory columns are the leading-order formulas at the block
// length actually used, NaN where no closed form applies. true_sigma2 is the
// exact target n Var(sample mean) (kept in memory, not serialized).
struct ReportRow {
    std::size_t n = 0;
    Method method = Method::sb;
    double ell = 0.0;
    double mc_mean = 0.0;
    double mc_variance = 0.0;
    double mc_mse = 0.0;
    double se_variance = 0.0;
    double theory_variance = 0.0;
    double theory_bias = 0.0;
    double ratio_to_nbb = 0.0;
    double true_sigma2 = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* report_csv_header =
    "n,method,ell,mc_mean,mc_variance,mc_mse,se_variance,theory_variance,"
    "theory_bias,ratio_to_nbb";

namespace detail {

inline std::string csv_field(double x) {
    if (std::isnan(x))
        return "nan";
    return format_double(x);
}

inline double parse_csv_double(const std::string& field) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::invalid_argument("report csv: bad numeric field '" + field + "'");
    return v;
}

// Monte Carlo standard error of the (R-1)-divisor sample variance of x, by
// the delete-one jackknife. Working on centered values keeps the O(R)
// update formulas stable:
//   v_(i) = [(S2 - y_i^2) - (S1 - y_i)^2/(R-1)] / (R-2).
inline double jackknife_variance_se(const std::vector<double>& x) {
    const std::size_t r = x.size();
    if (r < 3)
        return std::numeric_limits<double>::quiet_NaN();
    const double rr = static_cast<double>(r);
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= rr;
    std::vector<double> y(r);
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        y[i] = x[i] - mean;
        s1 += y[i];
        s2 += y[i] * y[i];
    }
    std::vector<double> loo(r);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
        const double t1 = s1 - y[i];
        const double t2 = s2 - y[i] * y[i];
        loo[i] = (t2 - t1 * t1 / (rr - 1.0)) / (rr - 2.0);
        loo_mean += loo[i];
    }
    loo_mean /= rr;
    double ss = 0.0;
    for (double v : loo)
        ss += (v - loo_mean) * (v - loo_mean);
    return std::sqrt((rr - 1.0) / rr * ss);
}

struct ReplicationStats {
    double mean;
    double variance;
    double mse;
    double se_variance;
};

inline ReplicationStats summarize(const std::vector<double>& est, double target) {
    const std::size_t r = est.size();
    const double rr = static_cast<double>(r);
    double mean = 0.0;
    for (double v : est)
        mean += v;
    mean /= rr;
    double ss = 0.0;
    double sq = 0.0;
    for (double v : est) {
        ss += (v - mean) * (v - mean);
        sq += (v - target) * (v - target);
    }
    return {mean, ss / (rr - 1.0), sq / rr, jackknife_variance_se(est)};
}

// Work-stealing loop over [0, count): each index runs exactly once, on
// whichever worker pulls it first. The first exception aborts the remaining
// work and is rethrown on the calling thread.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& body) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    if (static_cast<std::size_t>(workers) > count)
        workers = static_cast<unsigned>(count);
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count)
                return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err)
                    err = std::current_exception();
                next.store(count, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(run);
    run();
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

}  // namespace detail

// Worker count: the BLOCKBOOT_WORKERS environment variable (strictly positive
// integer) if set, else the hardware concurrency, else 1.
inline unsigned default_workers() {
    if (const char* env = std::getenv("BLOCKBOOT_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v <= 0)
            throw std::invalid_argument(
                "BLOCKBOOT_WORKERS must be a positive integer, got '" + std::string(env) + "'");
        return static_cast<unsigned>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1u : hc;
}

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReportRow> rows;

    std::string to_csv() const {
        std::string out(report_csv_header);
        out.push_back('\n');
        for (const ReportRow& row : rows) {
            out += std::to_string(row.n);
            out.push_back(',');
            out += method_name(row.method);
            out.push_back(',');
            out += detail::csv_field(row.ell);
            out.push_back(',');
            out += detail::csv_field(row.mc_mean);
            out.push_back(',');
            out += detail::csv_field(row.mc_variance);
            out.push_back(',');
            out += detail::csv_field(row.mc_mse);
            out.push_back(',');
            out += detail::csv_field(row.se_variance);
            out.push_back(',');
            out += detail::csv_field(row.theory_variance);
            out.push_back(',');
            out += detail::csv_field(row.theory_bias);
            out.push_back(',');
            out += detail::csv_field(row.ratio_to_nbb);
            out.push_back('\n');
        }
        return out;
    }

    // Inverse of to_csv for the serialized columns (true_sigma2 is not
    // serialized and comes back NaN).
    static std::vector<ReportRow> rows_from_csv(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line) || line != report_csv_header)
            throw std::invalid_argument("report csv: missing or unexpected header");
        std::vector<ReportRow> rows;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            std::vector<std::string> fields;
            std::string::size_type start = 0;
            for (;;) {
                const auto comma = line.find(',', start);
                if (comma == std::string::npos) {
                    fields.push_back(line.substr(start));
                    break;
                }
                fields.push_back(line.substr(start, comma - start));
                start = comma + 1;
            }
            if (fields.size() != 10)
                throw std::invalid_argument("report csv: expected 10 fields per row");
            ReportRow row;
            row.n = static_cast<std::size_t>(std::stoull(fields[0]));
            row.method = parse_method(fields[1]);
            row.ell = detail::parse_csv_double(fields[2]);
            row.mc_mean = detail::parse_csv_double(fields[3]);
            row.mc_variance = detail::parse_csv_double(fields[4]);
            row.mc_mse = detail::parse_csv_double(fields[5]);
            row.se_variance = detail::parse_csv_double(fields[6]);
            row.theory_variance = detail::parse_csv_double(fields[7]);
            row.theory_bias = detail::parse_csv_double(fields[8]);
            row.ratio_to_nbb = detail::parse_csv_double(fields[9]);
            rows.push_back(row);
        }
        return rows;
    }
};

namespace detail {

inline double resolve_block_length(const ExperimentConfig& config, Method method,
                                   std::size_t n) {
    switch (config.block_rule.kind) {
        case BlockRule::Kind::cuberoot:
            return std::cbrt(static_cast<double>(n));
        case BlockRule::Kind::fixed:
            return config.block_rule.fixed_ell;
        case BlockRule::Kind::optimal_oracle:
            return optimal_block(config.model, method, n);
    }
    throw std::invalid_argument("resolve_block_length: unknown block rule");
}

}  // namespace detail

// Runs the full grid: for each n, `replications` independent model paths are
// simulated and every method's estimate is evaluated on each path. Path r of
// grid cell i draws from Rng(master_seed, i * replications + r), and results
// land in slot r of a pre-sized buffer, so the report is identical for every
// worker count, byte for byte. workers = 0 means default_workers().
inline ExperimentReport run_experiment(const ExperimentConfig& config, unsigned workers = 0) {
    validate_config(config);
    if (workers == 0)
        workers = default_workers();
    const std::size_t reps = config.replications;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    ExperimentReport report;
    report.config = config;

    struct Cell {
        Method method;
        BlockSpec spec;
        std::optional<WeightScheme> scheme;
    };

    for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
        const std::size_t n = config.n_grid[ni];
        const double sigma2 = exact_mean_variance(config.model, n);

        std::vector<Cell> cells;
        cells.reserve(config.methods.size());
        for (Method m : config.methods) {
            const double raw = detail::resolve_block_length(config, m, n);
            // The stationary scheme takes the real recommendation as the mean
            // block length; fixed-block schemes round half up.
            const double used = (m == Method::sb)
                                    ? raw
                                    : static_cast<double>(round_block_length(raw));
            Cell cell{m, BlockSpec{used}, std::nullopt};
            if (m == Method::sb || m == Method::mbb || m == Method::tbb)
                cell.scheme = weights_for(m, n, cell.spec);
            cells.push_back(std::move(cell));
        }

        std::vector<std::vector<double>> est(cells.size(), std::vector<double>(reps));
        detail::parallel_for(reps, workers, [&](std::size_t r) {
            Rng rng(config.master_seed, ni * reps + r);
            const TimeSeries path = simulate_ar1(config.model, n, rng);
            for (std::size_t ci = 0; ci < cells.size(); ++ci) {
                const Cell& cell = cells[ci];
                double value;
                if (cell.scheme)
                    value = lag_weighted_sum(path, *cell.scheme);
                else if (cell.method == Method::nbb)
                    value = nbb_estimate(path, cell.spec);
                else
                    value = cbb_estimate(path, cell.spec);
                est[ci][r] = value;
            }
        });

        std::optional<double> nbb_variance;
        const std::size_t first_row = report.rows.size();
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const Cell& cell = cells[ci];
            const detail::ReplicationStats stats = detail::summarize(est[ci], sigma2);
            ReportRow row;
            row.n = n;
            row.method = cell.method;
            row.ell = cell.spec.ell;
            row.mc_mean = stats.mean;
            row.mc_variance = stats.variance;
            row.mc_mse = stats.mse;
            row.se_variance = stats.se_variance;
            if (cell.method == Method::tbb) {
                // Default taper is non-rectangular: no closed-form columns.
                row.theory_variance = nan;
                row.theory_bias = nan;
            } else {
                row.theory_variance =
                    asymptotic_variance(config.model, cell.method, n, cell.spec.ell);
                row.theory_bias = asymptotic_bias(config.model, cell.spec.ell);
            }
            row.ratio_to_nbb = nan;
            row.true_sigma2 = sigma2;
            if (cell.method == Method::nbb)
                nbb_variance = stats.variance;
            report.rows.push_back(row);
        }
        if (nbb_variance)
            for (std::size_t i = first_row; i < report.rows.size(); ++i)
                report.rows[i].ratio_to_nbb = report.rows[i].mc_variance / *nbb_variance;
    }
    return report;
}

inline ExperimentReport run_ratio_experiment(const ExperimentConfig& config,
                                             unsigned workers = 0) {
    if (config.experiment != ExperimentKind::ratio)
        throw std::invalid_argument("run_ratio_experiment: config.experiment must be 'ratio'");
    return run_experiment(config, workers);
}

inline ExperimentReport run_coefficient_experiment(const ExperimentConfig& config,
                                                   unsigned workers = 0) {
    if (config.experiment != ExperimentKind::coefficient)
        throw std::invalid_argument(
            "run_coefficient_experiment: config.experiment must be 'coefficient'");
    return run_experiment(config, workers);
}

inline ExperimentReport run_mse_experiment(const ExperimentConfig& config,
                                           unsigned workers = 0) {
    if (config.experiment != ExperimentKind::mse)
        throw std::invalid_argument("run_mse_experiment: config.experiment must be 'mse'");
    return run_experiment(config, workers);
}

// (n/ell) * mc_variance / (2 pi f(0))^2: converges to the scheme constant
// (2 or 4/3) as n grows. The coefficient experiment reads its result off
// the report through this.
inline double normalized_variance(const ReportRow& row, const Ar1Model& model) {
    const double v = long_run_variance(model);
    return (static_cast<double>(row.n) / row.ell) * row.mc_variance / (v * v);
}

inline ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("config: top level must be a JSON object");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        if (key != "model" && key != "n_grid" && key != "replications" &&
            key != "master_seed" && key != "methods" && key != "block_rule" &&
            key != "experiment")
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (!j.contains("model"))
        throw std::invalid_argument("config: missing required key 'model'");
    if (!j.contains("experiment"))
        throw std::invalid_argument("config: missing required key 'experiment'");

    const auto& jm = j["model"];
    if (!jm.is_object())
        throw std::invalid_argument("config: 'model' must be an object");
    for (const auto& item : jm.items())
        if (item.key() != "phi" && item.key() != "sigma_z")
            throw std::invalid_argument("config: unknown model key '" + item.key() + "'");
    if (!jm.contains("phi") || !jm["phi"].is_number())
        throw std::invalid_argument("config: model.phi must be a number");
    double phi = jm["phi"].get<double>();
    double sigma_z = 1.0;
    if (jm.contains("sigma_z")) {
        if (!jm["sigma_z"].is_number())
            throw std::invalid_argument("config: model.sigma_z must be a number");
        sigma_z = jm["sigma_z"].get<double>();
    }

    ExperimentConfig config{};
    config.model = Ar1Model(phi, sigma_z);
    config.experiment = parse_experiment(
        j["experiment"].is_string()
            ? j["experiment"].get<std::string>()
            : throw std::invalid_argument("config: 'experiment' must be a string"));

    if (j.contains("n_grid")) {
        if (!j["n_grid"].is_array() || j["n_grid"].empty())
            throw std::invalid_argument("config: 'n_grid' must be a non-empty array");
        config.n_grid.clear();
        for (const auto& v : j["n_grid"]) {
            if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
                throw std::invalid_argument("config: n_grid entries must be positive integers");
            config.n_grid.push_back(static_cast<std::size_t>(v.get<std::uint64_t>()));
        }
    }
    if (j.contains("replications")) {
        if (!j["replications"].is_number_unsigned())
            throw std::invalid_argument("config: 'replications' must be a positive integer");
        config.replications = static_cast<std::size_t>(j["replications"].get<std::uint64_t>());
    }
    if (j.contains("master_seed")) {
        if (!j["master_seed"].is_number_unsigned())
            throw std::invalid_argument("config: 'master_seed' must be a non-negative integer");
        config.master_seed = j["master_seed"].get<std::uint64_t>();
    }
    if (j.contains("methods")) {
        if (!j["methods"].is_array() || j["methods"].empty())
            throw std::invalid_argument("config: 'methods' must be a non-empty array");
        config.methods.clear();
        for (const auto& v : j["methods"]) {
            if (!v.is_string())
                throw std::invalid_argument("config: methods entries must be strings");
            config.methods.push_back(parse_method(v.get<std::string>()));
        }
    }
    if (j.contains("block_rule")) {
        const auto& jr = j["block_rule"];
        if (jr.is_number()) {
            config.block_rule = BlockRule::fixed(jr.get<double>());
        } else if (jr.is_string()) {
            const std::string rule = jr.get<std::string>();
            if (rule == "cuberoot")
                config.block_rule = BlockRule::cuberoot();
            else if (rule == "optimal-oracle")
                config.block_rule = BlockRule::optimal_oracle();
            else
                throw std::invalid_argument("config: unknown block_rule '" + rule +
                                            "' (expected cuberoot|optimal-oracle|number)");
        } else {
            throw std::invalid_argument("config: 'block_rule' must be a string or a number");
        }
    }
    validate_config(config);
    return config;
}

inline std::string config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["model"] = {{"phi", config.model.phi}, {"sigma_z", config.model.sigma_z}};
    j["n_grid"] = config.n_grid;
    j["replications"] = config.replications;
    j["master_seed"] = config.master_seed;
    std::vector<std::string> names;
    names.reserve(config.methods.size());
    for (Method m : config.methods)
        names.emplace_back(method_name(m));
    j["methods"] = names;
    switch (config.block_rule.kind) {
        case BlockRule::Kind::cuberoot:
            j["block_rule"] = "cuberoot";
            break;
        case BlockRule::Kind::fixed:
            j["block_rule"] = config.block_rule.fixed_ell;
            break;
        case BlockRule::Kind::optimal_oracle:
            j["block_rule"] = "optimal-oracle";
            break;
    }
    j["experiment"] = experiment_name(config.experiment);
    return j.dump(2) + "\n";
}

}  // namespace blockboot
