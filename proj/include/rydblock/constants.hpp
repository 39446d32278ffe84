#pragma once

#include <string>

namespace rydblock {

// Frequency-unit constants (E/h) so that every public energy is in MHz,
// fields in mT, lengths in um. The only SI-unit members are atom_mass and
// planck_h, needed to turn thermal energies into velocities.
struct PhysicalConstants {
    double rydberg_frequency;    // MHz, reduced-mass corrected for the atom
    double bohr_radius;          // um
    double bohr_magneton_over_h; // MHz/mT
    double electron_g_factor;    // dimensionless, spin g_S
    double orbital_g_factor;     // dimensionless, g_L
    double hartree_frequency;    // MHz (infinite-mass, for electrostatic conversions)
    double atom_mass;            // kg
    double boltzmann_over_h;     // MHz/K
    double planck_h;             // J*s
    std::string codata_version;  // provenance pin, e.g. "2018"

    // Throws ConfigError if any invariant fails (positivity, reduced-mass bound).
    void validate() const;
};

// Built-in CODATA 2018 values for 87Rb; identical to data/physical_constants.txt.
PhysicalConstants codata2018_rb87();

// Parses the shipped constants file (key value lines, '#' comments).
// Unknown keys are errors so typos cannot silently fall back to defaults.
PhysicalConstants load_constants(const std::string& path);

} // namespace rydblock
