#pragma once

#include <map>
#include <string>
#include <utility>

#include "rydblock/constants.hpp"

namespace rydblock {

// Single-atom fine-structure Rydberg state. j and m_j are half-integers,
// stored doubled so all quantum-number arithmetic stays exact.
struct AtomState {
    int n;       // principal quantum number
    int l;       // orbital angular momentum
    int twice_j; // 2j
    int twice_m; // 2m_j

    double j() const { return 0.5 * twice_j; }
    double m() const { return 0.5 * twice_m; }

    // Throws ConfigError on invalid quantum numbers (n < 1, l >= n, j not l +- 1/2, |m| > j).
    void validate() const;

    friend bool operator==(const AtomState&, const AtomState&) = default;
    friend auto operator<=>(const AtomState&, const AtomState&) = default;
};

std::string to_string(const AtomState& s);

// One Rydberg-Ritz channel: delta(n) = delta0 + delta2 / (n - delta0)^2.
struct QuantumDefectChannel {
    double delta0 = 0.0;
    double delta2 = 0.0;
    int n_min = 0;
    int n_max = 0;
    std::string citation;
};

class QuantumDefectTable {
public:
    // Channels keyed by (l, 2j).
    std::map<std::pair<int, int>, QuantumDefectChannel> channels;

    // delta := 0 for l >= 4; throws ConfigError naming the channel when a
    // required (l <= 3) channel is absent or n falls outside its fitted range.
    double defect(int n, int l, int twice_j) const;
    double effective_n(const AtomState& s) const { return s.n - defect(s.n, s.l, s.twice_j); }

    bool has_channel(int l, int twice_j) const;

    // FNV-1a hash over the numeric content; keys the matrix-element cache.
    unsigned long long content_hash() const;

    void validate() const;
};

// Built-in rubidium table, identical to data/rb87_quantum_defects.txt.
QuantumDefectTable builtin_rb87_defects();

// Parses the defect data file (columns: label l 2j delta0 delta2 n_min n_max citation).
QuantumDefectTable load_defect_table(const std::string& path);

// E = -Ry/(n - delta)^2 in MHz, negative, relative to the ionization limit.
double level_energy(const AtomState& state, const QuantumDefectTable& table,
                    const PhysicalConstants& consts);

} // namespace rydblock
