// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hrh/config.hpp"
#include "hrh/experiments.hpp"

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<std::string> mode;
    std::optional<unsigned> workers;
    std::string out;
    bool trace = false;
};

hrh::ExperimentConfig load(const Common& o)
{
    hrh::ExperimentConfig c;
    if (o.config.empty()) {
        c = hrh::preset_config("xband-sto2020", true);
    } else if (o.config.size() > 5 && o.config.substr(o.config.size() - 5) == ".json") {
        std::ifstream in(o.config);
        if (!in)
            throw hrh::ConfigError("cannot open config file " + o.config);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw hrh::ConfigError("parse error in " + o.config + ": " + e.what());
        }
        c = hrh::config_from_json(j);
    } else {
        c = hrh::load_config(o.config, true);
    }
    if (o.seed)
        c.run.seed = *o.seed;
    if (o.trials)
        c.run.trials = *o.trials;
    if (o.workers)
        c.run.workers = *o.workers;
    if (o.mode)
        c.run.mode = *o.mode == "waveform" ? hrh::SlotFidelity::waveform : hrh::SlotFidelity::envelope;
    c.validate();
    return c;
}

void emit(const hrh::CsvTable& t, const std::string& path)
{
    if (path.empty() || path == "-") {
        t.write(std::cout);
        return;
    }
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    t.write(f);
}

void add_common(CLI::App* app, Common& o)
{
    app->add_option("--config", o.config, "Config file (INI, or JSON by .json extension); default is the bundled preset");
    app->add_option("--seed", o.seed, "Random seed");
    app->add_option("--trials", o.trials, "Monte Carlo trials");
    app->add_option("--mode", o.mode, "Slot fidelity")->check(CLI::IsMember({"envelope", "waveform"}));
    app->add_option("--workers", o.workers, "Worker threads (0 = all cores)");
    app->add_option("--out", o.out, "Output CSV path (default stdout)");
    app->add_flag("--trace", o.trace, "Per-slot trajectory columns");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Harmonic radar helper-node toolkit"};
    app.require_subcommand(1);
    Common o;

    auto* lb = app.add_subcommand("link-budget", "Link budget at the configured tag range");
    add_common(lb, o);

    auto* sweep = app.add_subcommand("sweep-distance", "Received power versus distance");
    add_common(sweep, o);
    double d_from = 0.5, d_to = 30.0;
    std::size_t d_points = 120;
    std::vector<double> d_list;
    sweep->add_option("--from", d_from, "First distance in m")->check(CLI::PositiveNumber);
    sweep->add_option("--to", d_to, "Last distance in m")->check(CLI::PositiveNumber);
    sweep->add_option("--points", d_points, "Log-spaced points")->check(CLI::Range(2, 100000));
    sweep->add_option("--distances", d_list, "Explicit distance list (overrides the range)")->delimiter(',');

    auto* pdf = app.add_subcommand("pdf-alpha", "Analytic amplitude-ratio densities for slots 2..N");
    add_common(pdf, o);
    int slot = 2;
    std::optional<double> pdf_gamma;
    std::size_t stride = 1;
    pdf->add_option("--slot", slot, "Last slot index")->check(CLI::Range(2, 64));
    pdf->add_option("--gamma2-dB", pdf_gamma, "Input SNR in dB (default from config)");
    pdf->add_option("--stride", stride, "Emit every n-th grid point")->check(CLI::PositiveNumber);

    auto* pct = app.add_subcommand("percentiles", "Percentiles of the normalised amplitude ratio and REF");
    add_common(pct, o);
    std::vector<int> pct_m{2, 4, 6, 8};
    std::vector<double> pct_g{-5.0, 0.0, 5.0};
    std::vector<double> pct_p{0.1, 0.5};
    std::string source = "analytic";
    pct->add_option("--M", pct_m, "Helper counts")->delimiter(',');
    pct->add_option("--gamma2-dB", pct_g, "Input SNRs in dB")->delimiter(',');
    pct->add_option("--p", pct_p, "Probability levels in (0, 1)")->delimiter(',');
    pct->add_option("--source", source, "analytic or montecarlo")->check(CLI::IsMember({"analytic", "montecarlo"}));

    auto* sb = app.add_subcommand("slot-bounds", "Slot duration window per helper count");
    add_common(sb, o);
    std::vector<int> sb_m{2, 3, 4, 5, 6, 7, 8};
    std::optional<double> sb_ppm;
    double sb_p = 0.1;
    int sb_grid = 300;
    sb->add_option("--M", sb_m, "Helper counts")->delimiter(',');
    sb->add_option("--ppm", sb_ppm, "Frequency instability in ppm (default from config)");
    sb->add_option("--p", sb_p, "Probability level of the percentile target")->check(CLI::Range(1e-6, 0.999999));
    sb->add_option("--grid", sb_grid, "Recursion points per unit used in the SNR search")->check(CLI::Range(16, 100000));

    std::optional<int> mc_m;
    std::optional<double> mc_gamma, mc_ppm, mc_ts;
    std::optional<bool> mc_delay;
    std::string summary_path;
    std::string noise;
    auto add_mc = [&](CLI::App* a) {
        add_common(a, o);
        a->add_option("--M", mc_m, "Helper count")->check(CLI::Range(1, 256));
        a->add_option("--gamma2-dB", mc_gamma, "Input SNR in dB (default from config)");
        a->add_option("--ppm", mc_ppm, "Frequency instability in ppm");
        a->add_option("--slot-duration", mc_ts, "Slot duration in s");
        a->add_option("--delay-error", mc_delay, "Include the propagation-delay phase error (true/false)");
        a->add_option("--noise-model", noise, "integrator, phase-law or none")
            ->check(CLI::IsMember({"integrator", "phase-law", "none"}));
    };
    auto* mc = app.add_subcommand("montecarlo", "Monte Carlo adjustment frames");
    add_mc(mc);
    mc->add_option("--summary", summary_path, "Summary CSV path (default OUT.summary.csv, or stderr)");
    auto* rc = app.add_subcommand("ref-cdf", "Empirical CDF of the range extension factor");
    add_mc(rc);
    std::size_t levels = 1000;
    rc->add_option("--levels", levels, "Probability levels in the table")->check(CLI::Range(2, 1000000));

    auto* rs = app.add_subcommand("regime-sweep", "Quadratic versus exact tag percentiles over distance");
    add_mc(rs);
    std::vector<double> rs_d{0.5, 1.0, 2.0, 4.0, 8.0, 15.0};
    rs->add_option("--distances", rs_d, "Distances in m")->delimiter(',');

    auto* cfg = app.add_subcommand("config", "Print the resolved configuration");
    add_common(cfg, o);
    std::string format = "ini";
    cfg->add_option("--format", format, "ini or json")->check(CLI::IsMember({"ini", "json"}));

    CLI11_PARSE(app, argc, argv);

    try {
        hrh::ExperimentConfig c = load(o);
        auto apply_mc = [&] {
            if (mc_m) {
                c.frame.helper_count = *mc_m;
                c.geometry.helper_distances.clear();
                c.geometry.lo_phases.clear();
            }
            if (mc_gamma)
                c.run.gamma2_db = *mc_gamma;
            if (mc_ppm)
                c.impairments.ppm = *mc_ppm;
            if (mc_ts)
                c.frame.slot_duration = *mc_ts;
            if (mc_delay)
                c.impairments.delay_error = *mc_delay;
            if (noise == "integrator")
                c.run.noise_model = hrh::NoiseModel::integrator;
            else if (noise == "phase-law")
                c.run.noise_model = hrh::NoiseModel::phase_law;
            else if (noise == "none")
                c.run.noise_model = hrh::NoiseModel::none;
            c.validate();
        };

        if (*lb) {
            emit(hrh::link_budget_table(hrh::link_budget_report(c)), o.out);
        } else if (*sweep) {
            const auto d = d_list.empty() ? hrh::log_spaced(d_from, d_to, d_points) : d_list;
            emit(hrh::sweep_distance_table(hrh::sweep_distance(c, d)), o.out);
        } else if (*pdf) {
            const double g = pdf_gamma ? *pdf_gamma : hrh::linear_to_db(c.gamma2());
            emit(hrh::pdf_alpha_table(slot, g, hrh::grid_for(c), stride), o.out);
        } else if (*pct) {
            const auto rows = source == "analytic" ? hrh::analytic_percentiles(pct_m, pct_g, pct_p, hrh::grid_for(c))
                                                   : hrh::montecarlo_percentiles(c, pct_m, pct_g, pct_p);
            emit(hrh::percentiles_table(rows), o.out);
        } else if (*sb) {
            if (sb_ppm)
                c.impairments.ppm = *sb_ppm;
            hrh::RecursionGrid g = hrh::grid_for(c);
            g.points_per_unit = sb_grid;
            const auto rows = hrh::slot_bound_rows(c, sb_m, sb_p, g);
            for (const auto& r : rows)
                if (!r.bounds.feasible)
                    std::fprintf(stderr, "warning: no feasible slot duration for M = %d\n", r.helper_count);
            emit(hrh::slot_bounds_table(rows), o.out);
        } else if (*mc) {
            apply_mc();
            const auto records = hrh::run_trials(c.scenario(), c.impairments, c.run.trials, c.run.seed, c.run.workers);
            emit(hrh::montecarlo_table(records, c.frame.helper_count, o.trace), o.out);
            const auto summary = hrh::summary_table(hrh::summarize(records, c));
            if (!summary_path.empty())
                emit(summary, summary_path);
            else if (!o.out.empty() && o.out != "-")
                emit(summary, o.out + ".summary.csv");
            else
                summary.write(std::cerr);
        } else if (*rc) {
            apply_mc();
            emit(hrh::ref_cdf_table(hrh::ref_cdf(c.scenario(), c.impairments, c.run.trials, c.run.seed, c.run.workers),
                                    levels),
                 o.out);
        } else if (*rs) {
            apply_mc();
            const auto rows = hrh::tag_regime_sweep(rs_d, c.scenario(), c.system, c.tag, c.impairments, c.run.trials,
                                                    c.run.seed, c.run.workers);
            emit(hrh::regime_table(rows), o.out);
        } else if (*cfg) {
            const std::string text = format == "ini" ? hrh::emit_config(c) : hrh::config_to_json(c).dump(2) + "\n";
            if (o.out.empty() || o.out == "-") {
                std::cout << text;
            } else {
                std::ofstream f(o.out);
                f << text;
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
