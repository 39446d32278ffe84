#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "rydblock/io.hpp"

// End-to-end checks of the installed command surface: exit codes, output
// determinism, manifests, and replay. Each invocation is a fresh process,
// exactly how a user runs the tool.

namespace {

namespace fs = std::filesystem;

struct Invocation {
    int rc = -1;
    std::string output; // stdout and stderr combined
};

Invocation run(const std::string& arguments, const std::string& env_prefix = "") {
    const std::string command =
        env_prefix + std::string(RYDBLOCK_CLI_PATH) + " " + arguments + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    Invocation result;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
    const int status = pclose(pipe);
    result.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "rydblock_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir.string();
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("help prints units and exits cleanly") {
    const Invocation help = run("--help");
    CHECK(help.rc == 0);
    CHECK(contains(help.output, "um"));
    CHECK(contains(help.output, "MHz"));
    CHECK(contains(help.output, "simulate"));

    CHECK(run("simulate --help").rc == 0);
    CHECK(run("").rc == 2);
    CHECK(run("simulate --bogus-flag").rc == 2);
    CHECK(run("no-such-command").rc == 2);
}

TEST_CASE("energy prints the level and validates quantum numbers") {
    const Invocation level = run("energy --n 79 --l 2 --j 2.5");
    CHECK(level.rc == 0);
    CHECK(contains(level.output, "energy_mhz"));
    CHECK(contains(level.output, "-545567.8"));

    const Invocation hydrogenic = run("energy --n 10 --l 0 --j 0.5 --hydrogenic");
    CHECK(hydrogenic.rc == 0);
    CHECK(contains(hydrogenic.output, "defect       0"));

    CHECK(run("energy --n 2 --l 5 --j 5.5").rc == 2);

    const std::string out = scratch() + "/levels.csv";
    const Invocation dump = run("energy --dump-levels --n-min 77 --n-max 81 --out " + out);
    CHECK(dump.rc == 0);
    const rydblock::CsvTable csv = rydblock::read_csv_file(out);
    // five n values, three l values, two j values each
    CHECK(csv.rows.size() == 30);
    CHECK(fs::exists(out + ".manifest.json"));
}

TEST_CASE("simulate writes identical bytes on identical invocations") {
    const std::string out1 = scratch() + "/scan_a.csv";
    const std::string out2 = scratch() + "/scan_b.csv";
    const std::string flags =
        "simulate --sequence fig2 --t-min 0.1 --t-max 2.1 --points 5 --shots 300 --seed 9 --out ";
    CHECK(run(flags + out1).rc == 0);
    CHECK(run(flags + out2).rc == 0);
    CHECK(rydblock::read_text_file(out1) == rydblock::read_text_file(out2));

    // The manifests differ only through wall time and the recorded paths.
    CHECK(fs::exists(out1 + ".manifest.json"));
    CHECK(contains(rydblock::read_text_file(out1 + ".manifest.json"), "\"seed\": 9"));
}

TEST_CASE("replay reruns the manifest and verifies the output hash") {
    const std::string out = scratch() + "/replayed.csv";
    CHECK(run("simulate --sequence fig2 --t-min 0.2 --t-max 1.0 --points 3 --shots 200 "
              "--seed 4 --out " + out).rc == 0);
    const Invocation replay = run("replay --manifest " + out + ".manifest.json");
    CHECK(replay.rc == 0);
    CHECK(contains(replay.output, "bit for bit"));

    CHECK(run("replay --manifest " + scratch() + "/missing.json").rc == 2);
    const std::string junk = scratch() + "/junk.json";
    rydblock::write_text_file(junk, "{\"argv\": [\"replay\"], \"outputs\": {}}\n");
    CHECK(run("replay --manifest " + junk).rc == 2);
}

TEST_CASE("simulate honors a configuration file and rejects a broken one") {
    const std::string cfg = scratch() + "/fixed.cfg";
    rydblock::write_text_file(cfg,
                              "blockade_source fixed\n"
                              "fixed_blockade_mhz 1.3\n"
                              "shots 250\n"
                              "seed 12\n");
    const std::string out = scratch() + "/fig3_fixed.csv";
    const Invocation sim = run("simulate --config " + cfg +
                               " --sequence fig3 --t-min 0.2 --t-max 1.0 --points 3 --out " + out);
    CHECK(sim.rc == 0);
    const rydblock::CsvTable csv = rydblock::read_csv_file(out);
    CHECK(csv.columns.size() == 6);
    CHECK(csv.rows.size() == 6); // both sites at three pulse lengths

    rydblock::write_text_file(cfg, "shots tomorrow\n");
    CHECK(run("simulate --config " + cfg + " --sequence fig3 --out " + out).rc == 2);
}

TEST_CASE("fit recovers the drive frequency from a simulated scan") {
    const std::string out = scratch() + "/fit_input.csv";
    CHECK(run("simulate --sequence fig2 --t-min 0.05 --t-max 4.0 --points 17 --shots 400 "
              "--seed 11 --out " + out).rc == 0);
    const std::string report = scratch() + "/fit.json";
    const Invocation fit = run("fit --in " + out + " --out " + report);
    CHECK(fit.rc == 0);
    CHECK(contains(fit.output, "omega_mhz"));
    CHECK(fs::exists(report));
    CHECK(fs::exists(report + ".manifest.json"));

    const std::string flat = scratch() + "/flat.csv";
    rydblock::write_text_file(flat, "t_us,mean_retention\n1,0.5\n2,0.5\n3,0.5\n4,0.5\n5,0.5\n");
    CHECK(run("fit --in " + flat).rc == 3);
}

TEST_CASE("cache rebuild reports twelve radial integrals and refuses stale tables") {
    const std::string cache_dir = scratch() + "/cache";
    const std::string env = "RYDBLOCK_CACHE_DIR=" + cache_dir + " ";
    const Invocation rebuild = run("cache --rebuild --stats", env);
    CHECK(rebuild.rc == 0);
    CHECK(contains(rebuild.output, "12 "));

    // A modified defect table must hash differently and refuse the cache.
    const std::string data_mod = scratch() + "/data_mod";
    fs::create_directories(data_mod);
    fs::copy_file("data/physical_constants.txt", data_mod + "/physical_constants.txt",
                  fs::copy_options::overwrite_existing);
    std::string defects = rydblock::read_text_file("data/rb87_quantum_defects.txt");
    const auto value = defects.find("3.1311804");
    REQUIRE(value != std::string::npos);
    defects[value + 2] = '2';
    rydblock::write_text_file(data_mod + "/rb87_quantum_defects.txt", defects);
    const Invocation stale = run("--data-dir " + data_mod + " cache --stats", env);
    CHECK(stale.rc == 2);
    CHECK(contains(stale.output, "stale"));

    CHECK(run("cache").rc == 2);
}

TEST_CASE("blockade with zero spread reduces to the on-axis numbers") {
    const std::string out = scratch() + "/blockade.csv";
    const Invocation point =
        run("blockade --sigma-y 0 --field 1.15 --out " + out);
    CHECK(point.rc == 0);
    CHECK(contains(point.output, "P2 = 0.02734"));
    CHECK(fs::exists(out + ".summary.json"));
    CHECK(contains(rydblock::read_text_file(out + ".summary.json"), "\"p2_mean\""));
}
