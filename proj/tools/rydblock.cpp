// Command line front end: energy levels, pair spectra, blockade averages,
// experiment simulation, fitting, cache maintenance, self test, replay.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 self-test failure.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rydblock/blockade.hpp"
#include "rydblock/constants.hpp"
#include "rydblock/defects.hpp"
#include "rydblock/dipole.hpp"
#include "rydblock/errors.hpp"
#include "rydblock/expsim.hpp"
#include "rydblock/fitting.hpp"
#include "rydblock/interaction.hpp"
#include "rydblock/io.hpp"
#include "rydblock/pair.hpp"
#include "rydblock/selftest.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace rydblock;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string hex_hash(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Shared data tables, loaded from the data directory so the manifest can pin
// their content hashes.
struct Workspace {
    std::string constants_path;
    std::string defects_path;
    PhysicalConstants consts;
    QuantumDefectTable table;
};

Workspace open_workspace(const std::string& data_dir) {
    Workspace w;
    w.constants_path = data_dir + "/physical_constants.txt";
    w.defects_path = data_dir + "/rb87_quantum_defects.txt";
    w.consts = load_constants(w.constants_path);
    w.table = load_defect_table(w.defects_path);
    return w;
}

// Run description written next to every output file. Re-running the stored
// argv must reproduce the recorded output hashes bit for bit; wall time is
// the only field allowed to differ.
class ManifestWriter {
public:
    ManifestWriter(const std::vector<std::string>& argv, const Workspace& w, json config,
                   std::uint64_t seed)
        : start_(std::chrono::steady_clock::now()) {
        doc_["tool_version"] = kToolVersion;
        std::string command = "rydblock";
        for (const auto& arg : argv) command += " " + arg;
        doc_["command"] = command;
        doc_["argv"] = argv;
        doc_["config"] = std::move(config);
        doc_["seed"] = seed;
        doc_["data_files"] = {{w.constants_path, hex_hash(fnv1a_file(w.constants_path))},
                              {w.defects_path, hex_hash(fnv1a_file(w.defects_path))}};
        doc_["outputs"] = json::object();
    }

    void add_output(const std::string& path) {
        doc_["outputs"][path] = hex_hash(fnv1a_file(path));
    }

    // Manifest lands at <anchor>.manifest.json.
    void write(const std::string& anchor) {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        doc_["wall_time_s"] =
            std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
        write_text_file(anchor + ".manifest.json", doc_.dump(2) + "\n");
    }

private:
    json doc_;
    std::chrono::steady_clock::time_point start_;
};

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["z_um"] = c.z_um;
    j["sigma_y_um"] = c.sigma_y_um;
    j["sigma_z_um"] = c.sigma_z_um;
    j["temperature_uk"] = c.temperature_uk;
    j["omega_mhz"] = c.omega_mhz;
    j["field_mt"] = c.field_mt;
    j["wavelength_red_nm"] = c.wavelength_red_nm;
    j["wavelength_blue_nm"] = c.wavelength_blue_nm;
    j["copropagating"] = c.copropagating;
    j["prep_error"] = c.prep_error;
    j["detection_error"] = c.detection_error;
    j["trap_off_loss"] = c.trap_off_loss;
    j["rydberg_loss_prob"] = c.rydberg_loss_prob;
    j["crosstalk_ratio"] = c.crosstalk_ratio;
    j["ac_stark_detuning_mhz"] = c.ac_stark_detuning_mhz;
    j["omega_jitter"] = c.omega_jitter;
    j["principal_n"] = c.principal_n;
    j["blockade_source"] = c.blockade_source == BlockadeSource::spectrum ? "spectrum" : "fixed";
    j["fixed_blockade_mhz"] = c.fixed_blockade_mhz;
    j["full_spectrum_dynamics"] = c.full_spectrum_dynamics;
    j["post_select"] = c.post_select;
    j["shots"] = c.shots;
    j["seed"] = c.seed;
    j["shards"] = c.shards;
    return j;
}

std::vector<double> linspace(double lo, double hi, int points) {
    if (points < 1) throw ConfigError("point count must be at least 1");
    if (points == 1) return {lo};
    if (hi < lo) throw ConfigError("grid end lies below its start");
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    return grid;
}

char l_letter(int l) {
    static const char letters[] = "spdfgh";
    return l < 6 ? letters[l] : '?';
}

// ---------------------------------------------------------------- energy --

struct EnergyArgs {
    int n = 79;
    int l = 2;
    double j = 2.5;
    bool hydrogenic = false;
    bool dump_levels = false;
    int n_min = 77;
    int n_max = 81;
    std::string out;
};

QuantumDefectTable zero_defect_table() {
    QuantumDefectTable t;
    for (auto [l, tj] : {std::pair{0, 1}, {1, 1}, {1, 3}, {2, 3}, {2, 5}, {3, 5}, {3, 7}})
        t.channels[{l, tj}] = QuantumDefectChannel{0.0, 0.0, 1, 10000, "hydrogenic"};
    return t;
}

int cmd_energy(const EnergyArgs& a, const Workspace& w, const std::vector<std::string>& argv) {
    const QuantumDefectTable& table = a.hydrogenic ? zero_defect_table() : w.table;

    if (a.dump_levels) {
        if (a.n_min < 1 || a.n_max < a.n_min)
            throw ConfigError("level range needs 1 <= n-min <= n-max");
        CsvTable csv;
        csv.comments = {"single-atom level energies relative to the ionization limit",
                        "columns: n, l, twice_j, defect, energy_mhz [MHz]"};
        csv.columns = {"n", "l", "twice_j", "defect", "energy_mhz"};
        for (int n = a.n_min; n <= a.n_max; ++n) {
            for (int l : {1, 2, 3}) {
                for (int tj : {2 * l - 1, 2 * l + 1}) {
                    const AtomState s{n, l, tj, 1};
                    csv.rows.push_back({static_cast<double>(n), static_cast<double>(l),
                                        static_cast<double>(tj), table.defect(n, l, tj),
                                        level_energy(s, table, w.consts)});
                }
            }
        }
        if (a.out.empty()) {
            std::cout << format_csv(csv);
        } else {
            ManifestWriter manifest(argv, w, {{"n_min", a.n_min}, {"n_max", a.n_max},
                                              {"hydrogenic", a.hydrogenic}}, 0);
            write_csv_file(a.out, csv);
            manifest.add_output(a.out);
            manifest.write(a.out);
            std::cout << "wrote " << csv.rows.size() << " levels to " << a.out << "\n";
        }
        return 0;
    }

    const int twice_j = static_cast<int>(std::lround(2.0 * a.j));
    const AtomState state{a.n, a.l, twice_j, twice_j};
    state.validate();
    std::cout << "state        " << a.n << l_letter(a.l) << twice_j << "/2\n"
              << "defect       " << fmt(table.defect(a.n, a.l, twice_j)) << "\n"
              << "effective_n  " << fmt(table.effective_n(state)) << "\n"
              << "energy_mhz   " << fmt(level_energy(state, table, w.consts)) << "\n";
    return 0;
}

// --------------------------------------------------------- pair-spectrum --

struct SpectrumArgs {
    double z_um = 11.0;
    double dy_min = 0.0;
    double dy_max = 8.0;
    int points = 81;
    double field_mt = 1.15;
    int n = 79;
    std::string out;
};

int cmd_pair_spectrum(const SpectrumArgs& a, const Workspace& w,
                      const std::vector<std::string>& argv) {
    ManifestWriter manifest(argv, w,
                            {{"z_um", a.z_um}, {"dy_min_um", a.dy_min}, {"dy_max_um", a.dy_max},
                             {"points", a.points}, {"field_mt", a.field_mt}, {"principal_n", a.n}},
                            0);
    const PairOperators& ops = shared_pair_operators(a.n, w.table, w.consts);
    const std::vector<double> grid = linspace(a.dy_min, a.dy_max, a.points);

    CsvTable csv;
    csv.comments = {"molecular pair levels against transverse offset",
                    "columns: dy_um [um], r_um [um], theta_rad [rad], curve (tracked index), "
                    "detuning_mhz [MHz], kappa2 (laser overlap)",
                    "field_mt " + fmt(a.field_mt) + ", z_um " + fmt(a.z_um)};
    csv.columns = {"dy_um", "r_um", "theta_rad", "curve", "detuning_mhz", "kappa2"};

    // Curves are labeled by energy order at the first offset, then followed
    // through crossings by eigenvector overlap: strongest matches claim
    // their predecessor first, so a near-degenerate pair cannot steal an
    // already-assigned label.
    MolecularSpectrum prev;
    std::vector<int> curve_of;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const Geometry geom = Geometry::from_sites(a.z_um, grid[p]);
        MolecularSpectrum spec = molecular_spectrum(ops, geom, a.field_mt, w.table, w.consts);
        const Eigen::Index m = spec.detuning.size();
        std::vector<int> labels(static_cast<std::size_t>(m));
        if (p == 0) {
            for (Eigen::Index k = 0; k < m; ++k) labels[static_cast<std::size_t>(k)] = static_cast<int>(k);
        } else {
            const Eigen::MatrixXd overlap = (prev.states.transpose() * spec.states).cwiseAbs();
            std::vector<std::pair<double, int>> order;
            order.reserve(static_cast<std::size_t>(m));
            for (Eigen::Index jcol = 0; jcol < m; ++jcol)
                order.emplace_back(-overlap.col(jcol).maxCoeff(), static_cast<int>(jcol));
            std::sort(order.begin(), order.end());
            std::vector<char> taken(static_cast<std::size_t>(m), 0);
            for (const auto& [neg, jcol] : order) {
                int best = -1;
                double best_value = -1.0;
                for (Eigen::Index i = 0; i < m; ++i) {
                    if (taken[static_cast<std::size_t>(i)]) continue;
                    const double v = overlap(i, jcol);
                    if (v > best_value) {
                        best_value = v;
                        best = static_cast<int>(i);
                    }
                }
                taken[static_cast<std::size_t>(best)] = 1;
                labels[static_cast<std::size_t>(jcol)] = curve_of[static_cast<std::size_t>(best)];
            }
        }
        for (Eigen::Index k = 0; k < m; ++k)
            csv.rows.push_back({grid[p], geom.r_um, geom.theta,
                                static_cast<double>(labels[static_cast<std::size_t>(k)]),
                                spec.detuning(k), spec.kappa2(k)});
        prev = std::move(spec);
        curve_of = std::move(labels);
    }

    write_csv_file(a.out, csv);
    manifest.add_output(a.out);
    manifest.write(a.out);
    std::cout << "wrote " << csv.rows.size() << " rows (" << prev.detuning.size()
              << " curves x " << grid.size() << " offsets) to " << a.out << "\n";
    return 0;
}

// -------------------------------------------------------------- blockade --

struct BlockadeArgs {
    double z_um = 11.0;
    double sigma_y_um = 2.6;
    double omega_mhz = 0.51;
    std::vector<double> fields_mt;
    int n = 79;
    std::string out;
};

int cmd_blockade(const BlockadeArgs& a, const Workspace& w, const std::vector<std::string>& argv) {
    const std::vector<double> fields = a.fields_mt.empty()
                                           ? std::vector<double>{0.0, 1.15}
                                           : a.fields_mt;
    ManifestWriter manifest(argv, w,
                            {{"z_um", a.z_um}, {"sigma_y_um", a.sigma_y_um},
                             {"omega_mhz", a.omega_mhz}, {"fields_mt", fields},
                             {"principal_n", a.n}},
                            0);
    const PairOperators& ops = shared_pair_operators(a.n, w.table, w.consts);

    CsvTable csv;
    csv.comments = {"thermally weighted blockade samples over the transverse offset",
                    "columns: field_mt [mT], dy_um [um], p2 (double excitation), "
                    "shift_mhz [MHz]",
                    "z_um " + fmt(a.z_um) + ", sigma_y_um " + fmt(a.sigma_y_um) +
                        ", omega_mhz " + fmt(a.omega_mhz)};
    csv.columns = {"field_mt", "dy_um", "p2", "shift_mhz"};

    json summary;
    summary["z_um"] = a.z_um;
    summary["sigma_y_um"] = a.sigma_y_um;
    summary["omega_mhz"] = a.omega_mhz;
    summary["principal_n"] = a.n;
    summary["fields"] = json::array();
    for (const double field : fields) {
        const AveragedBlockade avg =
            averaged_blockade(ops, a.z_um, a.sigma_y_um, field, a.omega_mhz, w.table, w.consts);
        for (const BlockadeSample& s : avg.samples)
            csv.rows.push_back({field, s.dy_um, s.p2, s.shift});
        summary["fields"].push_back({{"field_mt", field},
                                     {"p2_mean", avg.p2},
                                     {"shift_mean_mhz", avg.shift},
                                     {"quadrature_nodes", avg.nodes},
                                     {"doubling_change", avg.doubling_change}});
        std::cout << "field " << fmt(field) << " mT: P2 = " << fmt(avg.p2)
                  << ", shift = " << fmt(avg.shift) << " MHz (" << avg.nodes << " nodes)\n";
    }

    write_csv_file(a.out, csv);
    const std::string summary_path = a.out + ".summary.json";
    write_text_file(summary_path, summary.dump(2) + "\n");
    manifest.add_output(a.out);
    manifest.add_output(summary_path);
    manifest.write(a.out);
    return 0;
}

// -------------------------------------------------------------- simulate --

struct SimulateArgs {
    std::string config_path;
    std::string sequence = "fig3";
    double t_min = 0.0;
    double t_max = 6.0;
    int points = 25;
    long shots = -1;          // negative keeps the config value
    long long seed = -1;      // negative keeps the config value
    std::string out;
};

SequenceKind parse_sequence(const std::string& name) {
    if (name == "fig2") return SequenceKind::fig2;
    if (name == "fig2-crosstalk") return SequenceKind::fig2_crosstalk;
    if (name == "fig3") return SequenceKind::fig3;
    throw ConfigError("unknown sequence '" + name + "' (fig2, fig2-crosstalk, fig3)");
}

int cmd_simulate(const SimulateArgs& a, const Workspace& w, const std::vector<std::string>& argv) {
    ExperimentConfig config;
    if (!a.config_path.empty()) config = load_experiment_config(a.config_path);
    if (a.shots >= 0) config.shots = a.shots;
    if (a.seed >= 0) config.seed = static_cast<std::uint64_t>(a.seed);
    const SequenceKind kind = parse_sequence(a.sequence);

    ManifestWriter manifest(argv, w, config_to_json(config), config.seed);
    const std::vector<double> grid = linspace(a.t_min, a.t_max, a.points);
    const ExperimentResult result = run_experiment(config, kind, grid, w.table, w.consts);

    CsvTable csv;
    csv.comments = {"simulated two-trap retention against target pulse length",
                    "columns: t_us [us], site (0 control, 1 target), mean_retention, "
                    "standard_error, n_shots, n_postselected",
                    "sequence " + a.sequence + ", shots " + std::to_string(config.shots) +
                        ", seed " + std::to_string(config.seed)};
    csv.columns = {"t_us", "site", "mean_retention", "standard_error", "n_shots",
                   "n_postselected"};
    for (const ExperimentPoint& point : result.points) {
        for (int s = 0; s < 2; ++s) {
            if (!result.site_present[static_cast<std::size_t>(s)]) continue;
            csv.rows.push_back({point.t_us, static_cast<double>(s),
                                point.site[static_cast<std::size_t>(s)].mean_retention,
                                point.site[static_cast<std::size_t>(s)].standard_error,
                                static_cast<double>(point.n_shots),
                                static_cast<double>(point.n_postselected)});
        }
    }

    write_csv_file(a.out, csv);
    manifest.add_output(a.out);
    manifest.write(a.out);
    std::cout << "wrote " << csv.rows.size() << " rows (" << grid.size()
              << " pulse lengths, " << config.shots << " shots each) to " << a.out << "\n";
    return 0;
}

// ------------------------------------------------------------------- fit --

struct FitArgs {
    std::string in;
    int site = 1;
    std::string out;
};

int cmd_fit(const FitArgs& a, const Workspace& w, const std::vector<std::string>& argv) {
    const CsvTable csv = read_csv_file(a.in);
    const auto column = [&](const std::string& name) {
        const auto it = std::find(csv.columns.begin(), csv.columns.end(), name);
        return it == csv.columns.end() ? -1
                                       : static_cast<int>(it - csv.columns.begin());
    };
    const int t_col = column("t_us");
    int y_col = column("mean_retention");
    if (y_col < 0) y_col = column("population");
    if (t_col < 0 || y_col < 0)
        throw ConfigError(a.in + ": need columns t_us and mean_retention (or population)");
    const int site_col = column("site");

    std::vector<double> t, y;
    for (const auto& row : csv.rows) {
        if (site_col >= 0 &&
            static_cast<int>(row[static_cast<std::size_t>(site_col)]) != a.site)
            continue;
        t.push_back(row[static_cast<std::size_t>(t_col)]);
        y.push_back(row[static_cast<std::size_t>(y_col)]);
    }
    const Eigen::VectorXd tv = Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    const Eigen::VectorXd yv = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    const DampedRabiFit fit = fit_damped_rabi(tv, yv);

    json report;
    report["samples"] = t.size();
    report["amplitude"] = fit.amplitude;
    report["tau_us"] = fit.tau_us;
    report["omega_mhz"] = fit.omega_mhz;
    report["pi_time_us"] = 1.0 / (2.0 * fit.omega_mhz);
    report["rms_residual"] = fit.rms_residual;
    report["iterations"] = fit.iterations;
    std::cout << report.dump(2) << "\n";

    if (!a.out.empty()) {
        ManifestWriter manifest(argv, w, {{"in", a.in}, {"site", a.site}}, 0);
        write_text_file(a.out, report.dump(2) + "\n");
        manifest.add_output(a.out);
        manifest.write(a.out);
    }
    return 0;
}

// ----------------------------------------------------------------- cache --

struct CacheArgs {
    bool rebuild = false;
    bool stats = false;
    int n = 79;
};

int cmd_cache(const CacheArgs& a, const Workspace& w, const std::vector<std::string>& argv) {
    if (!a.rebuild && !a.stats) throw ConfigError("cache needs --rebuild and/or --stats");
    const std::string dir = default_cache_dir();
    const std::string path = dir + "/radial_n" + std::to_string(a.n) + ".cache";

    if (a.rebuild) {
        MatrixElementCache cache(w.table.content_hash(), RadialGridParams{}.content_hash());
        MatrixElementContext ctx{&w.table, &w.consts, {}, &cache};
        build_pair_operators(build_pair_basis(forster_channels(a.n)), ctx);
        std::filesystem::create_directories(dir);
        cache.save(path);
        ManifestWriter manifest(argv, w, {{"principal_n", a.n}, {"cache_dir", dir}}, 0);
        manifest.add_output(path);
        manifest.write(path);
        std::cout << "rebuilt " << cache.size() << " radial integrals into " << path << "\n";
    }

    if (a.stats) {
        std::error_code ec;
        if (!std::filesystem::exists(path, ec)) {
            std::cout << "0 entries (no cache file at " << path << ")\n";
        } else {
            MatrixElementCache cache(w.table.content_hash(), RadialGridParams{}.content_hash());
            cache.load(path); // refuses a stale table or grid hash
            std::cout << cache.size() << " entries in " << path << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------- replay --

int dispatch(const std::vector<std::string>& args);

int cmd_replay(const std::string& manifest_path) {
    json doc;
    try {
        doc = json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(manifest_path + ": not a manifest: " + err.what());
    }
    std::vector<std::string> argv;
    json outputs;
    try {
        argv = doc.at("argv").get<std::vector<std::string>>();
        outputs = doc.at("outputs");
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(manifest_path + ": missing manifest field: " + err.what());
    }
    if (argv.empty() || argv.front() == "replay")
        throw ConfigError(manifest_path + ": manifest does not describe a replayable command");

    const int rc = dispatch(argv);
    if (rc != 0) return rc;

    int verified = 0;
    for (const auto& [path, recorded] : outputs.items()) {
        const std::string now = hex_hash(fnv1a_file(path));
        if (now != recorded.get<std::string>())
            throw NumericalError("replay drifted: " + path + " hashes " + now +
                                 " but the manifest recorded " + recorded.get<std::string>());
        ++verified;
    }
    std::cout << "replay reproduced " << verified << " output file"
              << (verified == 1 ? "" : "s") << " bit for bit\n";
    return 0;
}

// -------------------------------------------------------------- dispatch --

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Rydberg pair interactions and the two-atom blockade experiment.\n"
                 "Units: lengths um, energies/frequencies MHz, fields mT, times us,\n"
                 "temperatures uK, wavelengths nm."};
    app.name("rydblock");
    app.require_subcommand(1);

    std::string data_dir = default_data_dir();
    app.add_option("--data-dir", data_dir,
                   "directory holding physical_constants.txt and rb87_quantum_defects.txt")
        ->capture_default_str();

    int exit_code = 0;

    EnergyArgs energy;
    auto* cmd_en = app.add_subcommand("energy", "single-atom level energy and quantum defect");
    cmd_en->add_option("--n", energy.n, "principal quantum number")->capture_default_str();
    cmd_en->add_option("--l", energy.l, "orbital angular momentum")->capture_default_str();
    cmd_en->add_option("--j", energy.j, "total angular momentum (half-integer)")
        ->capture_default_str();
    cmd_en->add_flag("--hydrogenic", energy.hydrogenic,
                     "zero every defect; energy becomes -Ry/n^2");
    cmd_en->add_flag("--dump-levels", energy.dump_levels,
                     "tabulate p/d/f levels over an n range instead of one state");
    cmd_en->add_option("--n-min", energy.n_min, "first n of the level dump")
        ->capture_default_str();
    cmd_en->add_option("--n-max", energy.n_max, "last n of the level dump")
        ->capture_default_str();
    cmd_en->add_option("--out", energy.out, "write the level dump CSV here (default stdout)");
    cmd_en->callback([&] { exit_code = cmd_energy(energy, open_workspace(data_dir), args); });

    SpectrumArgs spectrum;
    auto* cmd_sp = app.add_subcommand(
        "pair-spectrum", "molecular pair levels versus transverse trap offset (CSV)");
    cmd_sp->add_option("--z", spectrum.z_um, "trap separation along the field axis, um")
        ->capture_default_str();
    cmd_sp->add_option("--dy-min", spectrum.dy_min, "first transverse offset, um")
        ->capture_default_str();
    cmd_sp->add_option("--dy-max", spectrum.dy_max, "last transverse offset, um")
        ->capture_default_str();
    cmd_sp->add_option("--points", spectrum.points, "offsets in the scan")
        ->capture_default_str();
    cmd_sp->add_option("--field", spectrum.field_mt, "bias field, mT")->capture_default_str();
    cmd_sp->add_option("--n", spectrum.n, "principal quantum number of the driven level")
        ->capture_default_str();
    cmd_sp->add_option("--out", spectrum.out, "output CSV path")->required();
    cmd_sp->callback(
        [&] { exit_code = cmd_pair_spectrum(spectrum, open_workspace(data_dir), args); });

    BlockadeArgs blockade;
    auto* cmd_bl = app.add_subcommand(
        "blockade", "thermally averaged double-excitation probability and blockade shift");
    cmd_bl->add_option("--z", blockade.z_um, "trap separation along the field axis, um")
        ->capture_default_str();
    cmd_bl->add_option("--sigma-y", blockade.sigma_y_um, "transverse position spread, um")
        ->capture_default_str();
    cmd_bl->add_option("--omega", blockade.omega_mhz, "Rabi frequency, MHz")
        ->capture_default_str();
    cmd_bl->add_option("--field", blockade.fields_mt,
                       "bias field, mT (repeatable; default runs 0 and 1.15)");
    cmd_bl->add_option("--n", blockade.n, "principal quantum number of the driven level")
        ->capture_default_str();
    cmd_bl->add_option("--out", blockade.out, "output CSV path; summary JSON lands beside it")
        ->required();
    cmd_bl->callback([&] { exit_code = cmd_blockade(blockade, open_workspace(data_dir), args); });

    SimulateArgs simulate;
    auto* cmd_si = app.add_subcommand(
        "simulate", "Monte Carlo of the two-trap pulse experiment over a pulse-length grid");
    cmd_si->add_option("--config", simulate.config_path,
                       "experiment configuration file (key value lines); defaults otherwise");
    cmd_si->add_option("--sequence", simulate.sequence, "fig2, fig2-crosstalk, or fig3")
        ->capture_default_str();
    cmd_si->add_option("--t-min", simulate.t_min, "first target pulse length, us")
        ->capture_default_str();
    cmd_si->add_option("--t-max", simulate.t_max, "last target pulse length, us")
        ->capture_default_str();
    cmd_si->add_option("--points", simulate.points, "pulse lengths in the scan")
        ->capture_default_str();
    cmd_si->add_option("--shots", simulate.shots, "override the configured shot count");
    cmd_si->add_option("--seed", simulate.seed, "override the configured seed");
    cmd_si->add_option("--out", simulate.out, "output CSV path")->required();
    cmd_si->callback([&] { exit_code = cmd_simulate(simulate, open_workspace(data_dir), args); });

    FitArgs fit;
    auto* cmd_fi = app.add_subcommand(
        "fit", "damped Rabi fit of a retention scan: y = (1-a) + a exp(-t/tau) cos(2 pi f t)");
    cmd_fi->add_option("--in", fit.in, "input CSV with t_us and mean_retention columns")
        ->required();
    cmd_fi->add_option("--site", fit.site, "site column filter (0 control, 1 target)")
        ->capture_default_str();
    cmd_fi->add_option("--out", fit.out, "also write the fit report JSON here");
    cmd_fi->callback([&] { exit_code = cmd_fit(fit, open_workspace(data_dir), args); });

    CacheArgs cache;
    auto* cmd_ca = app.add_subcommand("cache", "radial matrix-element cache maintenance");
    cmd_ca->add_flag("--rebuild", cache.rebuild, "recompute the cache for --n and save it");
    cmd_ca->add_flag("--stats", cache.stats, "report the entry count of the saved cache");
    cmd_ca->add_option("--n", cache.n, "principal quantum number of the channel set")
        ->capture_default_str();
    cmd_ca->callback([&] { exit_code = cmd_cache(cache, open_workspace(data_dir), args); });

    auto* cmd_se = app.add_subcommand("selftest", "run the release checklist (exit 4 on failure)");
    cmd_se->callback([&] { exit_code = run_selftest(std::cout) == 0 ? 0 : 4; });

    std::string manifest_path;
    auto* cmd_re = app.add_subcommand(
        "replay", "re-run a recorded command and verify its outputs reproduce bit for bit");
    cmd_re->add_option("--manifest", manifest_path, "path to a .manifest.json file")->required();
    cmd_re->callback([&] { exit_code = cmd_replay(manifest_path); });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return exit_code;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return dispatch(args);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const NumericalError& err) {
        std::cerr << "numerical error: " << err.what() << "\n";
        return 3;
    }
}
