// Command-line front end: single-series estimation, closed-form theory,
// block-length selection, and the Monte Carlo experiment driver.
//
// Exit codes: 0 success, 1 usage/config/data errors, 2 numerical integrity
// failures (disagreeing evaluation routes, degenerate normalizations).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "blockboot/blockboot.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::invalid_argument("cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        throw std::invalid_argument("write to '" + path + "' failed");
}

blockboot::TaperWindow make_taper(const std::string& name, double c) {
    if (name == "rectangular" || name == "rect")
        return blockboot::TaperWindow::rectangular();
    if (name == "trapezoid")
        return blockboot::TaperWindow::trapezoid(c);
    throw std::invalid_argument("unknown taper '" + name + "' (expected rectangular|trapezoid)");
}

void print_value(double v) {
    std::printf("%s\n", blockboot::detail::format_double(v).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    using namespace blockboot;

    CLI::App app{"block-bootstrap variance estimation for stationary time series"};
    app.set_version_flag("--version", std::string("blockboot ") + version);
    app.require_subcommand(1);

    // estimate
    auto* cmd_estimate = app.add_subcommand(
        "estimate", "estimate n*Var(sample mean) from a series file");
    std::string est_series, est_method;
    double est_block = 0.0;
    std::string est_taper = "trapezoid";
    double est_taper_c = 0.43;
    cmd_estimate->add_option("--series", est_series, "series file, one value per line")
        ->required();
    cmd_estimate->add_option("--method", est_method, "sb|nbb|mbb|cbb|tbb")->required();
    cmd_estimate->add_option("--block", est_block,
                             "block length (real >= 1 for sb, integer otherwise)")
        ->required();
    cmd_estimate->add_option("--taper", est_taper, "tbb taper: rectangular|trapezoid");
    cmd_estimate->add_option("--taper-c", est_taper_c, "trapezoid ramp width in (0, 1/2]");
    cmd_estimate->callback([&] {
        const Method m = parse_method(est_method);
        const TimeSeries series = read_series(est_series);
        const BlockSpec spec{est_block};
        double value;
        if (m == Method::tbb) {
            const TaperWindow taper = make_taper(est_taper, est_taper_c);
            value = tbb_estimate(series, spec, taper);
        } else {
            value = estimate(series, m, spec);
        }
        print_value(value);
    });

    // theory
    auto* cmd_theory =
        app.add_subcommand("theory", "closed-form leading-order variance/bias/mse");
    double th_phi = 0.0, th_sigma = 1.0, th_block = 0.0;
    std::size_t th_n = 0;
    std::string th_method, th_taper = "trapezoid";
    double th_taper_c = 0.43;
    cmd_theory->add_option("--phi", th_phi, "AR(1) coefficient, |phi| < 1")->required();
    cmd_theory->add_option("--sigma", th_sigma, "innovation standard deviation");
    cmd_theory->add_option("--n", th_n, "series length")->required();
    cmd_theory->add_option("--block", th_block, "block length")->required();
    cmd_theory->add_option("--method", th_method, "sb|nbb|mbb|cbb|tbb")->required();
    cmd_theory->add_option("--taper", th_taper, "tbb taper: rectangular|trapezoid");
    cmd_theory->add_option("--taper-c", th_taper_c, "trapezoid ramp width in (0, 1/2]");
    cmd_theory->callback([&] {
        const Method m = parse_method(th_method);
        const Ar1Model model(th_phi, th_sigma);
        std::optional<TaperWindow> taper;
        if (m == Method::tbb)
            taper = make_taper(th_taper, th_taper_c);
        const TaperWindow* taper_ptr = taper ? &*taper : nullptr;
        const AsymptoticSummary s =
            asymptotic_summary(model, m, th_n, th_block, taper_ptr);
        std::printf("method %s\n", method_name(s.method));
        std::printf("n %zu\n", th_n);
        std::printf("ell %s\n", detail::format_double(th_block).c_str());
        std::printf("variance_coeff %s\n", detail::format_double(s.variance_coeff).c_str());
        std::printf("bias_coeff %s\n", detail::format_double(s.bias_coeff).c_str());
        std::printf("variance %s\n",
                    detail::format_double(
                        asymptotic_variance(model, m, th_n, th_block, taper_ptr))
                        .c_str());
        std::printf("bias %s\n",
                    detail::format_double(asymptotic_bias(model, th_block)).c_str());
        std::printf("mse %s\n", detail::format_double(s.mse).c_str());
        if (s.ell_opt)
            std::printf("ell_opt %s\n", detail::format_double(*s.ell_opt).c_str());
        else
            std::printf("ell_opt undefined\n");
    });

    // optimal-block
    auto* cmd_opt = app.add_subcommand(
        "optimal-block", "MSE-optimal block length (model-based or plug-in from data)");
    std::string ob_series, ob_method, ob_taper = "trapezoid";
    double ob_phi = 0.0, ob_sigma = 1.0, ob_taper_c = 0.43;
    std::size_t ob_n = 0;
    auto* ob_series_opt =
        cmd_opt->add_option("--series", ob_series, "series file for the plug-in rule");
    auto* ob_phi_opt = cmd_opt->add_option("--phi", ob_phi, "AR(1) coefficient, |phi| < 1");
    cmd_opt->add_option("--sigma", ob_sigma, "innovation standard deviation");
    auto* ob_n_opt = cmd_opt->add_option("--n", ob_n, "series length");
    cmd_opt->add_option("--method", ob_method, "sb|nbb|mbb|cbb|tbb")->required();
    cmd_opt->add_option("--taper", ob_taper, "tbb taper: rectangular|trapezoid");
    cmd_opt->add_option("--taper-c", ob_taper_c, "trapezoid ramp width in (0, 1/2]");
    ob_series_opt->excludes(ob_phi_opt);
    ob_series_opt->excludes(ob_n_opt);
    cmd_opt->callback([&] {
        const Method m = parse_method(ob_method);
        std::optional<TaperWindow> taper;
        if (m == Method::tbb)
            taper = make_taper(ob_taper, ob_taper_c);
        const TaperWindow* taper_ptr = taper ? &*taper : nullptr;
        double result;
        if (!ob_series.empty()) {
            result = plugin_optimal_block(read_series(ob_series), m, taper_ptr);
        } else {
            if (ob_phi_opt->count() == 0 || ob_n_opt->count() == 0)
                throw std::invalid_argument(
                    "optimal-block needs either --series or both --phi and --n");
            result = optimal_block(Ar1Model(ob_phi, ob_sigma), m, ob_n, taper_ptr);
        }
        print_value(result);
    });

    // simulate
    auto* cmd_sim = app.add_subcommand(
        "simulate", "run a Monte Carlo experiment from a JSON config");
    std::string sim_config, sim_out;
    unsigned sim_workers = 0;
    cmd_sim->add_option("--config", sim_config, "experiment config (JSON)")->required();
    cmd_sim->add_option("--out", sim_out, "output directory")->required();
    cmd_sim->add_option("--workers", sim_workers,
                        "worker threads (0 = BLOCKBOOT_WORKERS or hardware)");
    cmd_sim->callback([&] {
        const ExperimentConfig config = config_from_json(read_file(sim_config));
        const ExperimentReport report = run_experiment(config, sim_workers);
        std::filesystem::create_directories(sim_out);
        const std::string csv_path =
            (std::filesystem::path(sim_out) / "report.csv").string();
        const std::string cfg_path =
            (std::filesystem::path(sim_out) / "config.json").string();
        write_file(csv_path, report.to_csv());
        write_file(cfg_path, config_to_json(config));
        std::printf("wrote %s (%zu rows)\n", csv_path.c_str(), report.rows.size());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "blockboot: numerical integrity failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "blockboot: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
