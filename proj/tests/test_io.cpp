#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "rydblock/errors.hpp"
#include "rydblock/io.hpp"

using namespace rydblock;

namespace {

std::string temp_path(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "rydblock_io_test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

} // namespace

TEST_CASE("fnv1a matches the published 64-bit test vectors") {
    CHECK(fnv1a("") == 14695981039346656037ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("text files round trip bytes and hash consistently") {
    std::string path = temp_path("roundtrip.txt");
    std::string content = "line one\n# not a comment to us\n\x01\x02 binary-ish\n";
    write_text_file(path, content);
    CHECK(read_text_file(path) == content);
    CHECK(fnv1a_file(path) == fnv1a(content));

    CHECK_THROWS_AS(read_text_file(temp_path("missing.txt")), ConfigError);
    CHECK_THROWS_AS(write_text_file(temp_path("no/such/dir/x.txt"), "x"), ConfigError);
}

TEST_CASE("csv format and parse are inverse up to printed precision") {
    CsvTable table;
    table.comments = {"columns: t_us, retention", "scan over pulse length"};
    table.columns = {"t_us", "retention"};
    table.rows = {{0.05, 0.993217371}, {0.25, 0.0123456789012}, {1e-30, -4.5}};

    std::string text = format_csv(table);
    CsvTable back = parse_csv(text);
    CHECK(back.comments == table.comments);
    CHECK(back.columns == table.columns);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            CHECK(back.rows[r][c] == doctest::Approx(table.rows[r][c]).epsilon(1e-11));

    // Printing what was parsed reproduces the bytes, so files are stable
    // under a parse/format cycle.
    CHECK(format_csv(back) == text);
}

TEST_CASE("csv parser rejects malformed input") {
    CHECK_THROWS_AS(parse_csv(""), ConfigError);
    CHECK_THROWS_AS(parse_csv("# only a comment\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,b\n1,oops\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,,b\n1,2,3\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,b\n1,2\n# late comment\n"), ConfigError);

    CsvTable headless;
    headless.rows = {{1.0}};
    CHECK_THROWS_AS(format_csv(headless), ConfigError);
    CsvTable ragged;
    ragged.columns = {"a", "b"};
    ragged.rows = {{1.0}};
    CHECK_THROWS_AS(format_csv(ragged), ConfigError);
}

TEST_CASE("experiment config formats to text and parses back unchanged") {
    ExperimentConfig config;
    config.z_um = 7.25;
    config.copropagating = true;
    config.blockade_source = BlockadeSource::fixed;
    config.fixed_blockade_mhz = 1.32;
    config.shots = 20000;
    config.seed = 987654321;
    config.shards = 4;

    std::string text = format_experiment_config(config);
    ExperimentConfig back = parse_experiment_config(text);
    CHECK(format_experiment_config(back) == text);
    CHECK(back.z_um == config.z_um);
    CHECK(back.copropagating == config.copropagating);
    CHECK(back.blockade_source == BlockadeSource::fixed);
    CHECK(back.fixed_blockade_mhz == config.fixed_blockade_mhz);
    CHECK(back.shots == config.shots);
    CHECK(back.seed == config.seed);
    CHECK(back.shards == config.shards);
}

TEST_CASE("absent keys keep defaults and comments are ignored") {
    ExperimentConfig fallback;
    ExperimentConfig parsed = parse_experiment_config(
        "# comment line\n"
        "\n"
        "omega_mhz 0.7   # trailing comment\n"
        "post_select false\n");
    CHECK(parsed.omega_mhz == 0.7);
    CHECK(parsed.post_select == false);
    CHECK(parsed.z_um == fallback.z_um);
    CHECK(parsed.shots == fallback.shots);
    CHECK(parsed.blockade_source == fallback.blockade_source);

    ExperimentConfig empty = parse_experiment_config("");
    CHECK(format_experiment_config(empty) == format_experiment_config(fallback));
}

TEST_CASE("config parser rejects typos, repeats, and invalid values") {
    CHECK_THROWS_AS(parse_experiment_config("omega_mz 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("omega_mhz 0.5\nomega_mhz 0.6\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("omega_mhz\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("omega_mhz 0.5 extra\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("omega_mhz fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("post_select maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("blockade_source table\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("seed -3\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("shots 1.5\n"), ConfigError);
    // Values land in a full validate pass, so out-of-range settings fail
    // here rather than deep inside a run.
    CHECK_THROWS_AS(parse_experiment_config("shots 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config("prep_error 1.5\n"), ConfigError);
}

TEST_CASE("cache and data directories honor their environment overrides") {
    setenv("RYDBLOCK_CACHE_DIR", "/tmp/rydblock_cache_override", 1);
    CHECK(default_cache_dir() == "/tmp/rydblock_cache_override");
    unsetenv("RYDBLOCK_CACHE_DIR");
    CHECK(default_cache_dir() == "cache");

    setenv("RYDBLOCK_DATA_DIR", "/tmp/rydblock_data_override", 1);
    CHECK(default_data_dir() == "/tmp/rydblock_data_override");
    unsetenv("RYDBLOCK_DATA_DIR");
    // Tests run from the source tree, so the local data directory wins.
    CHECK(default_data_dir() == "data");
}
