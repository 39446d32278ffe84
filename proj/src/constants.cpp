#include "rydblock/constants.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rydblock/errors.hpp"

namespace rydblock {

void PhysicalConstants::validate() const {
    const std::map<std::string, double> positives = {
        {"rydberg_frequency", rydberg_frequency},
        {"bohr_radius", bohr_radius},
        {"bohr_magneton_over_h", bohr_magneton_over_h},
        {"electron_g_factor", electron_g_factor},
        {"orbital_g_factor", orbital_g_factor},
        {"hartree_frequency", hartree_frequency},
        {"atom_mass", atom_mass},
        {"boltzmann_over_h", boltzmann_over_h},
        {"planck_h", planck_h},
    };
    for (const auto& [name, v] : positives) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError("constants: " + name + " must be strictly positive");
    }
    // The reduced-mass correction shifts Ry below Eh/2 by under 1e-4 relative.
    if (rydberg_frequency >= 0.5 * hartree_frequency * (1.0 + 1e-12))
        throw ConfigError("constants: rydberg_frequency exceeds hartree_frequency/2");
    if (rydberg_frequency < 0.5 * hartree_frequency * (1.0 - 1e-4))
        throw ConfigError("constants: rydberg_frequency implausibly far below hartree_frequency/2");
}

PhysicalConstants codata2018_rb87() {
    PhysicalConstants c;
    c.rydberg_frequency = 3289821194.5527034; // R_inf*c / (1 + m_e/M), MHz
    c.bohr_radius = 5.29177210903e-5;         // um
    c.bohr_magneton_over_h = 13.996244936072705;
    c.electron_g_factor = 2.00231930436256;
    c.orbital_g_factor = 1.0;
    c.hartree_frequency = 6579683920.501761;  // 2 * R_inf*c, MHz
    c.atom_mass = 1.4431608951791763e-25;     // 86.909180531 u
    c.boltzmann_over_h = 20836.619123327575;  // MHz/K
    c.planck_h = 6.62607015e-34;              // J*s
    c.codata_version = "2018";
    c.validate();
    return c;
}

PhysicalConstants load_constants(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open constants file: " + path);

    PhysicalConstants c{};
    std::map<std::string, bool> seen;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "codata_version") {
            if (!(ls >> c.codata_version))
                throw ConfigError("constants file: codata_version needs a value");
            seen[key] = true;
            continue;
        }
        double value = 0.0;
        if (!(ls >> value))
            throw ConfigError("constants file: key '" + key + "' needs a numeric value");
        if (key == "rydberg_frequency_mhz") c.rydberg_frequency = value;
        else if (key == "bohr_radius_um") c.bohr_radius = value;
        else if (key == "bohr_magneton_over_h_mhz_per_mt") c.bohr_magneton_over_h = value;
        else if (key == "electron_g_factor") c.electron_g_factor = value;
        else if (key == "orbital_g_factor") c.orbital_g_factor = value;
        else if (key == "hartree_frequency_mhz") c.hartree_frequency = value;
        else if (key == "atom_mass_kg") c.atom_mass = value;
        else if (key == "boltzmann_over_h_mhz_per_k") c.boltzmann_over_h = value;
        else if (key == "planck_h_js") c.planck_h = value;
        else throw ConfigError("constants file: unknown key '" + key + "'");
        seen[key] = true;
    }
    const char* required[] = {
        "rydberg_frequency_mhz", "bohr_radius_um", "bohr_magneton_over_h_mhz_per_mt",
        "electron_g_factor", "orbital_g_factor", "hartree_frequency_mhz",
        "atom_mass_kg", "boltzmann_over_h_mhz_per_k", "planck_h_js", "codata_version"};
    for (const char* key : required)
        if (!seen.count(key)) throw ConfigError(std::string("constants file: missing key '") + key + "'");
    c.validate();
    return c;
}

} // namespace rydblock
