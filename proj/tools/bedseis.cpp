// Command-line front end: run, compare, metrics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bedseis/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bedseis;

namespace {

int fail(std::string_view kind, const std::string& message, const std::string& key = {}) {
    Json err{{"error", {{"kind", kind}, {"message", message}}}};
    if (!key.empty()) err["error"]["key"] = key;
    std::cerr << err.dump() << '\n';
    return 2;
}

int run_command(const std::optional<std::string>& config_path, const std::optional<std::string>& preset,
                const std::optional<std::uint64_t>& seed, const std::string& out_dir) {
    SimulationConfig cfg;
    if (preset) cfg = load_preset(*preset);
    if (config_path) {
        Json j = parse_json_text(read_text_file(*config_path), *config_path);
        if (preset && j.is_object() && !j.contains("preset")) j["preset"] = *preset;
        cfg = config_from_json(j);
    }
    if (seed) cfg.seed = *seed;
    cfg.validate();
    const auto run = run_pipeline(cfg, out_dir);
    std::cout << Json{{"out_dir", out_dir}, {"summary", run.manifest["summary"]}}.dump(2) << '\n';
    return 0;
}

int compare_command(const std::string& synthetic, const std::string& reference, const std::vector<double>& band) {
    const auto s = read_psd_csv(synthetic);
    const auto r = read_psd_csv(reference);
    const auto report = compare_spectra(s, r, band.at(0), band.at(1));
    std::cout << to_json(report).dump(2) << '\n';
    return 0;
}

int metrics_command(const std::string& traj_path, const std::optional<std::string>& bed_path, double solid_density,
                    const std::optional<std::string>& out_dir) {
    const auto traj = read_trajectories(traj_path);
    const fs::path bed_file = bed_path ? fs::path(*bed_path) : fs::path(traj_path).parent_path() / "bed.csv";
    const auto bed_csv = read_csv(bed_file);
    const auto bed = bed_from_nodes(bed_csv.column("x_m"), bed_csv.column("z_m"));

    int max_id = -1;
    for (const auto& s : traj) max_id = std::max(max_id, s.particle_id);
    std::vector<double> masses(static_cast<std::size_t>(max_id + 1), 0.0);
    for (const auto& s : traj) masses[static_cast<std::size_t>(s.particle_id)] = sphere_mass(s.diameter, solid_density);

    const auto m = transport_metrics(traj, masses, {}, bed, trajectory_interval(traj));
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& p : m.particles) ++counts[static_cast<int>(p.mobility)];

    if (out_dir) {
        fs::create_directories(*out_dir);
        CsvWriter ts(fs::path(*out_dir) / "transport_timeseries.csv",
                     {"time_s", "alive", "stuck_fraction", "mean_z_rel", "mean_moving_vx_ms", "bulk_flux_kgms"});
        for (std::size_t k = 0; k < m.time.size(); ++k) {
            ts.row(m.time[k], m.alive[k], m.stuck_fraction[k], m.mean_z_rel[k], m.mean_moving_vx[k], m.bulk_flux[k]);
        }
        ts.close();
        CsvWriter pp(fs::path(*out_dir) / "transport_particles.csv", {"particle_id", "diameter_m", "mass_kg",
                                                                      "lifetime_s", "rest_time_s",
                                                                      "suspension_time_s", "mobility"});
        for (const auto& p : m.particles) {
            pp.row(p.id, p.diameter, p.mass, p.lifetime, p.rest_time, p.suspension_time, to_string(p.mobility));
        }
        pp.close();
    }
    const auto nan_to_null = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
    std::cout << Json{{"particles", m.particles.size()},
                      {"ever_moving", counts[0]},
                      {"ever_stuck", counts[1]},
                      {"intermittent", counts[2]},
                      {"mean_diameter_ever_moving", nan_to_null(mean_diameter(m, Mobility::EverMoving))},
                      {"mean_diameter_ever_stuck", nan_to_null(mean_diameter(m, Mobility::EverStuck))},
                      {"stuck_zrel_correlation", nan_to_null(pearson(m.stuck_fraction, m.mean_z_rel))}}
                     .dump(2)
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic river seismograms from grain-scale bedload dynamics"};
    app.set_version_flag("--version", BEDSEIS_VERSION);
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "simulate, propagate and analyse one configuration");
    std::optional<std::string> config_path, preset;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "run";
    run->add_option("--config", config_path, "JSON configuration file");
    run->add_option("--preset", preset, "named preset (table1, rin4_rising, rin4_falling, rin2)");
    run->add_option("--seed", seed, "master seed, overrides the configuration");
    run->add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    auto* cmp = app.add_subcommand("compare", "compare a synthetic PSD with a reference PSD");
    std::string synthetic, reference;
    std::vector<double> band{0.5, 95.0};
    cmp->add_option("--synthetic", synthetic, "synthetic psd CSV (freq_hz,power)")->required();
    cmp->add_option("--reference", reference, "reference psd CSV (freq_hz,power)")->required();
    cmp->add_option("--band", band, "misfit band: low high (Hz)")->expected(2)->capture_default_str();

    auto* met = app.add_subcommand("metrics", "transport statistics from a trajectories CSV");
    std::string traj_path;
    std::optional<std::string> bed_path, metrics_out;
    double solid_density = 2650.0;
    met->add_option("--trajectories", traj_path, "trajectories.csv")->required();
    met->add_option("--bed", bed_path, "bed.csv (default: next to the trajectories)");
    met->add_option("--solid-density", solid_density, "grain density, kg/m^3")->capture_default_str();
    met->add_option("--out-dir", metrics_out, "write transport CSVs here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what());
    }

    try {
        if (*run) return run_command(config_path, preset, seed, out_dir);
        if (*cmp) return compare_command(synthetic, reference, band);
        if (*met) return metrics_command(traj_path, bed_path, solid_density, metrics_out);
    } catch (const InvalidConfiguration& e) {
        return fail(to_string(e.kind()), e.what(), e.key());
    } catch (const Error& e) {
        return fail(to_string(e.kind()), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
