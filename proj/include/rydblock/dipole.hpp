#pragma once

#include <map>
#include <shared_mutex>
#include <string>

#include "rydblock/constants.hpp"
#include "rydblock/defects.hpp"
#include "rydblock/radial.hpp"

namespace rydblock {

// Radial integrals keyed by the (n, l, j) pair, independent of m. Entries
// are bound to the defect table and grid that produced them; loading a file
// written under different parameters is refused.
class MatrixElementCache {
public:
    struct Key {
        int n1, l1, tj1, n2, l2, tj2;
        auto operator<=>(const Key&) const = default;
    };

    MatrixElementCache() = default;
    MatrixElementCache(unsigned long long defect_hash, unsigned long long grid_hash)
        : defect_hash_(defect_hash), grid_hash_(grid_hash) {}

    bool lookup(const AtomState& a, const AtomState& b, double* value) const;
    void insert(const AtomState& a, const AtomState& b, double value);

    std::size_t size() const;
    void clear();

    unsigned long long defect_hash() const { return defect_hash_; }
    unsigned long long grid_hash() const { return grid_hash_; }

    // Text round-trip. Values are stored as hex floats so reload is exact.
    void save(const std::string& path) const;
    // Throws ConfigError when the file's hashes do not match this cache's.
    void load(const std::string& path);

private:
    static Key canonical(const AtomState& a, const AtomState& b);

    mutable std::shared_mutex mutex_;
    std::map<Key, double> entries_;
    unsigned long long defect_hash_ = 0;
    unsigned long long grid_hash_ = 0;
};

// Bundles everything dipole evaluations need. The pointers are borrowed;
// the cache is optional.
struct MatrixElementContext {
    const QuantumDefectTable* table = nullptr;
    const PhysicalConstants* consts = nullptr;
    RadialGridParams grid{};
    MatrixElementCache* cache = nullptr;
};

// integral u_b u_a r dr in bohr. Zero when |l_a - l_b| != 1 (electric dipole
// selection rule); the integral is symmetric in its arguments.
double radial_dipole(const AtomState& a, const AtomState& b, const MatrixElementContext& ctx);

// <b| d_q |a> in atomic units (e a0), spherical component q in {-1, 0, +1}.
// Zero whenever a selection rule (|dl| = 1, |dj| <= 1, m_b = m_a + q) fails.
double dipole_matrix_element(const AtomState& b, const AtomState& a, int q,
                             const MatrixElementContext& ctx);

} // namespace rydblock
