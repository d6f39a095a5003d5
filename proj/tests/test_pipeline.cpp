#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "bedseis/pipeline.hpp"
#include "support.hpp"

using namespace bedseis;
using bedseis::testing::TempDir;
namespace fs = std::filesystem;

namespace {

SimulationConfig short_config() {
    SimulationConfig c;
    c.name = "short";
    c.domain_length = 5.0;
    c.duration = 20.0;
    c.injection_rate = 2.0;
    c.psd_segment = 1024;
    c.rmsa_window = 5.0;
    return c;
}

const std::vector<std::string> kArtifacts{
    "bed.csv",           "trajectories.csv",   "events.csv",        "forcing_impact.csv",
    "forcing_rolling.csv", "forcing_turb.csv", "forcing_shed.csv",  "seismogram.csv",
    "psd_total.csv",     "psd_impact.csv",     "psd_rolling.csv",   "psd_turb.csv",
    "psd_shed.csv",      "rmsa.csv",           "transport_timeseries.csv", "transport_particles.csv",
    "spectrum_total.csv"};

std::string header_of(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

PsdResult psd(std::vector<double> f, std::vector<double> p) {
    PsdResult r;
    r.frequencies = std::move(f);
    r.power = std::move(p);
    r.fs = 2.0 * r.frequencies.back();
    r.segment_length = 2 * (r.frequencies.size() - 1);
    return r;
}

}  // namespace

class ShortRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new TempDir("pipeline");
        run_ = new PipelineRun(run_pipeline(short_config(), dir_->path()));
    }
    static void TearDownTestSuite() {
        delete run_;
        delete dir_;
    }
    static TempDir* dir_;
    static PipelineRun* run_;
};

TempDir* ShortRun::dir_ = nullptr;
PipelineRun* ShortRun::run_ = nullptr;

TEST_F(ShortRun, EmitsEveryArtifact) {
    for (const auto& f : kArtifacts) {
        EXPECT_TRUE(fs::exists(*dir_ / f)) << f;
        EXPECT_GT(fs::file_size(*dir_ / f), 0u) << f;
    }
    EXPECT_TRUE(fs::exists(*dir_ / "manifest.json"));
}

TEST_F(ShortRun, CsvSchemas) {
    EXPECT_EQ(header_of(*dir_ / "trajectories.csv"), "time_s,particle_id,x_m,z_m,vx_ms,vz_ms,diameter_m");
    EXPECT_EQ(header_of(*dir_ / "events.csv"), "time_s,kind,particle_id,x_m,impulse_Ns,tc_s,pre_vz_ms");
    EXPECT_EQ(header_of(*dir_ / "bed.csv"), "x_m,z_m");
    for (const char* f : {"forcing_impact.csv", "forcing_rolling.csv", "forcing_turb.csv", "forcing_shed.csv"}) {
        EXPECT_EQ(header_of(*dir_ / f), "time_s,force_N") << f;
    }
    EXPECT_EQ(header_of(*dir_ / "seismogram.csv"), "time_s,velocity_ms");
    for (const char* f : {"psd_total.csv", "psd_impact.csv", "psd_rolling.csv", "psd_turb.csv", "psd_shed.csv"}) {
        EXPECT_EQ(header_of(*dir_ / f), "freq_hz,power") << f;
    }
    EXPECT_EQ(header_of(*dir_ / "rmsa.csv"), "time_s,rmsa_ms");
    EXPECT_EQ(header_of(*dir_ / "spectrum_total.csv"), "freq_hz,re,im");
    EXPECT_EQ(header_of(*dir_ / "transport_timeseries.csv"),
              "time_s,alive,stuck_fraction,mean_z_rel,mean_moving_vx_ms,bulk_flux_kgms");
    EXPECT_EQ(header_of(*dir_ / "transport_particles.csv"),
              "particle_id,diameter_m,mass_kg,lifetime_s,rest_time_s,suspension_time_s,mobility");
}

TEST_F(ShortRun, SeriesLengthsAgree) {
    const std::size_t n = 4000;
    EXPECT_EQ(run_->seismogram.size(), n);
    for (const char* f : {"forcing_impact.csv", "forcing_turb.csv", "seismogram.csv", "rmsa.csv"}) {
        EXPECT_EQ(read_csv(*dir_ / f).rows(), n) << f;
    }
    const auto p = read_psd_csv(*dir_ / "psd_total.csv");
    EXPECT_EQ(p.power.size(), 513u);
    EXPECT_DOUBLE_EQ(p.frequencies.back(), 100.0);

    // padded to the next power of two, one-sided
    const auto spec = read_csv(*dir_ / "spectrum_total.csv");
    ASSERT_EQ(spec.rows(), 2049u);
    EXPECT_DOUBLE_EQ(spec.column("freq_hz").back(), 100.0);
    EXPECT_NEAR(spec.column("im").front(), 0.0, 1e-12 * (1.0 + std::abs(spec.column("re").front())));
}

TEST_F(ShortRun, EventsMatchTheLog) {
    const auto t = read_csv(*dir_ / "events.csv");
    EXPECT_EQ(t.rows(), run_->sim.events.size());
    EXPECT_EQ(run_->impacts + run_->rolling, run_->sim.events.size());
    EXPECT_GT(run_->impacts, 0u);
    EXPECT_GT(run_->rolling, 0u);
}

TEST_F(ShortRun, ManifestDescribesTheRun) {
    const auto m = parse_json_text(read_text_file(*dir_ / "manifest.json"), "manifest");
    EXPECT_EQ(m.at("tool"), "bedseis");
    EXPECT_EQ(m.at("config_hash"), config_hash(short_config()));
    EXPECT_EQ(m.at("seed"), 1);
    EXPECT_TRUE(m.contains("start_time_utc"));
    EXPECT_TRUE(m.contains("end_time_utc"));
    std::set<std::string> listed;
    for (const auto& o : m.at("outputs")) {
        const std::string f = o.at("file");
        listed.insert(f);
        EXPECT_EQ(o.at("fnv1a64"), hex64(fnv1a(read_text_file(*dir_ / f))));
        EXPECT_EQ(o.at("bytes"), fs::file_size(*dir_ / f));
    }
    for (const auto& f : kArtifacts) EXPECT_TRUE(listed.count(f)) << f;
    EXPECT_EQ(to_json(config_from_json(m.at("config"))), to_json(short_config()));
}

TEST_F(ShortRun, WeightsRealiseTheMix) {
    // Each weighted component carries its fraction of the summed component variance.
    double total = 0.0;
    for (double v : run_->component_variance) total += v;
    for (std::size_t i = 0; i < 4; ++i) {
        const double a = run_->weights[kMechanisms[i]];
        if (run_->component_variance[i] > 0.0) { EXPECT_NEAR(a * a * run_->component_variance[i] / total, 0.25, 1e-12); }
    }
}

TEST_F(ShortRun, SameSeedSameBytes) {
    TempDir again("pipeline_again");
    run_pipeline(short_config(), again.path());
    for (const auto& f : kArtifacts) EXPECT_EQ(read_text_file(*dir_ / f), read_text_file(again / f)) << f;
}

TEST_F(ShortRun, MetricsFromStoredTrajectories) {
    const auto traj = read_trajectories(*dir_ / "trajectories.csv");
    EXPECT_EQ(traj.size(), run_->sim.trajectories.size());
    EXPECT_NEAR(trajectory_interval(traj), 0.05, 1e-12);
    const auto bed_csv = read_csv(*dir_ / "bed.csv");
    const auto bed = bed_from_nodes(bed_csv.column("x_m"), bed_csv.column("z_m"));
    const auto m = transport_metrics(traj, run_->sim.masses, {}, bed, 0.05);
    ASSERT_EQ(m.particles.size(), run_->transport.particles.size());
    for (std::size_t k = 0; k < m.particles.size(); ++k) {
        EXPECT_EQ(m.particles[k].mobility, run_->transport.particles[k].mobility);
    }
}

TEST(Pipeline, ZeroDurationRunsCleanly) {
    auto c = short_config();
    c.duration = 0.0;
    TempDir dir("pipeline_empty");
    const auto r = run_pipeline(c, dir.path());
    EXPECT_TRUE(r.sim.events.empty());
    EXPECT_TRUE(r.seismogram.empty());
    EXPECT_EQ(read_csv(dir / "events.csv").rows(), 0u);
}

TEST(Pipeline, InvalidConfigWritesNothing) {
    auto c = short_config();
    c.flow_depth = -1.0;
    TempDir dir("pipeline_bad");
    EXPECT_THROW(run_pipeline(c, dir.path()), InvalidConfiguration);
    EXPECT_TRUE(fs::is_empty(dir.path()));
}

TEST(Compare, IdenticalSpectra) {
    const auto a = psd({0, 1, 2, 3, 4}, {0.1, 0.5, 1.0, 0.2, 0.1});
    const auto r = compare_spectra(a, a, 0.0, 4.0);
    EXPECT_EQ(r.misfit, 0.0);
    EXPECT_EQ(r.peak_offset_hz, 0.0);
    EXPECT_FALSE(r.resampled);
}

TEST(Compare, OneBinShift) {
    const auto a = psd({0, 1, 2, 3, 4}, {0.1, 0.5, 1.0, 0.2, 0.1});
    const auto b = psd({0, 1, 2, 3, 4}, {0.1, 1.0, 0.5, 0.2, 0.1});
    EXPECT_EQ(compare_spectra(a, b, 0.0, 4.0).peak_offset_hz, 1.0);
}

TEST(Compare, DifferentGridsAreResampled) {
    const auto a = psd({0, 1, 2, 3, 4}, {0.1, 0.5, 1.0, 0.2, 0.1});
    const auto b = psd({0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4}, {0.1, 0.3, 0.5, 0.75, 1.0, 0.6, 0.2, 0.15, 0.1});
    const auto r = compare_spectra(a, b, 0.0, 4.0);
    EXPECT_TRUE(r.resampled);
    EXPECT_NEAR(r.misfit, 0.0, 1e-12);
    EXPECT_THROW(compare_spectra(a, b, 3.0, 1.0), InvalidConfiguration);
    EXPECT_THROW(read_psd_csv("/nonexistent/psd.csv"), IoError);
}

TEST(Csv, RoundTripIsExact) {
    TempDir dir("csv");
    const double v = 0.1 + 0.2;
    {
        CsvWriter w(dir / "x.csv", {"a", "b"});
        w.row(v, std::numeric_limits<double>::quiet_NaN());
        w.close();
    }
    EXPECT_EQ(read_text_file(dir / "x.csv"), "a,b\n0.30000000000000004,nan\n");
    const auto t = read_csv(dir / "x.csv");
    EXPECT_EQ(t.column("a")[0], v);
    EXPECT_TRUE(std::isnan(t.column("b")[0]));
    EXPECT_THROW(t.column("c"), IoError);
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(const std::string& args, const TempDir& dir) {
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd =
        std::string(BEDSEIS_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), read_text_file(out), read_text_file(err)};
}

}  // namespace

TEST(Cli, ConfigErrorIsMachineReadable) {
    TempDir dir("cli_bad");
    {
        std::ofstream(dir / "bad.json") << R"({"flow_depth": -1})";
    }
    const auto r = cli("run --config " + (dir / "bad.json").string() + " --out-dir " + (dir / "run").string(), dir);
    EXPECT_NE(r.code, 0);
    const auto j = Json::parse(r.err);
    EXPECT_EQ(j.at("error").at("kind"), "invalid_configuration");
    EXPECT_EQ(j.at("error").at("key"), "flow_depth");
}

TEST(Cli, UnknownPreset) {
    TempDir dir("cli_preset");
    const auto r = cli("run --preset atlantis --out-dir " + (dir / "run").string(), dir);
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(Json::parse(r.err).at("error").at("key"), "preset");
}

TEST(Cli, UsageError) {
    TempDir dir("cli_usage");
    const auto r = cli("frobnicate", dir);
    EXPECT_NE(r.code, 0);
    EXPECT_EQ(Json::parse(r.err).at("error").at("kind"), "usage");
}

TEST(Cli, RunCompareMetrics) {
    TempDir dir("cli_run");
    {
        std::ofstream(dir / "cfg.json")
            << R"({"preset": "rin4_falling", "duration": 12, "analysis": {"psd_segment": 512, "rmsa_window": 2}})";
    }
    const auto run_dir = (dir / "run").string();
    const auto r = cli("run --config " + (dir / "cfg.json").string() + " --seed 7 --out-dir " + run_dir, dir);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto summary = Json::parse(r.out);
    EXPECT_EQ(summary.at("out_dir"), run_dir);
    const auto manifest = parse_json_text(read_text_file(fs::path(run_dir) / "manifest.json"), "m");
    EXPECT_EQ(manifest.at("seed"), 7);
    EXPECT_EQ(manifest.at("config").at("flow_velocity"), 1.3);

    const auto psd_path = (fs::path(run_dir) / "psd_total.csv").string();
    const auto c = cli("compare --synthetic " + psd_path + " --reference " + psd_path + " --band 20 90", dir);
    ASSERT_EQ(c.code, 0) << c.err;
    const auto cmp = Json::parse(c.out);
    EXPECT_EQ(cmp.at("misfit"), 0.0);
    EXPECT_EQ(cmp.at("peak_offset_hz"), 0.0);

    const auto m = cli("metrics --trajectories " + (fs::path(run_dir) / "trajectories.csv").string() +
                           " --out-dir " + (dir / "metrics").string(),
                       dir);
    ASSERT_EQ(m.code, 0) << m.err;
    const auto met = Json::parse(m.out);
    EXPECT_EQ(met.at("particles"), 5);
    EXPECT_EQ(read_text_file(dir / "metrics/transport_particles.csv"),
              read_text_file(fs::path(run_dir) / "transport_particles.csv"));

    const auto missing = cli("compare --synthetic /nonexistent.csv --reference " + psd_path, dir);
    EXPECT_NE(missing.code, 0);
    EXPECT_EQ(Json::parse(missing.err).at("error").at("kind"), "io");
}
