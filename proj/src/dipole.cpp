#include "rydblock/dipole.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <tuple>

#include "rydblock/errors.hpp"
#include "rydblock/wigner.hpp"

namespace rydblock {

namespace {

// (-1)^(twice_exponent/2); twice_exponent must be even.
double phase2(int twice_exponent) {
    int e = twice_exponent / 2;
    return (e % 2 + 2) % 2 == 0 ? 1.0 : -1.0;
}

} // namespace

MatrixElementCache::Key MatrixElementCache::canonical(const AtomState& a, const AtomState& b) {
    auto ta = std::make_tuple(a.n, a.l, a.twice_j);
    auto tb = std::make_tuple(b.n, b.l, b.twice_j);
    if (tb < ta) std::swap(ta, tb);
    return Key{std::get<0>(ta), std::get<1>(ta), std::get<2>(ta),
               std::get<0>(tb), std::get<1>(tb), std::get<2>(tb)};
}

bool MatrixElementCache::lookup(const AtomState& a, const AtomState& b, double* value) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(canonical(a, b));
    if (it == entries_.end()) return false;
    if (value) *value = it->second;
    return true;
}

void MatrixElementCache::insert(const AtomState& a, const AtomState& b, double value) {
    std::unique_lock lock(mutex_);
    entries_[canonical(a, b)] = value;
}

std::size_t MatrixElementCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void MatrixElementCache::clear() {
    std::unique_lock lock(mutex_);
    entries_.clear();
}

void MatrixElementCache::save(const std::string& path) const {
    std::shared_lock lock(mutex_);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write cache file: " + path);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "defects %016llx\ngrid %016llx\n", defect_hash_, grid_hash_);
    out << "# radial dipole integral cache v1\n" << buf;
    for (const auto& [key, value] : entries_) {
        std::snprintf(buf, sizeof(buf), "entry %d %d %d %d %d %d %a\n", key.n1, key.l1, key.tj1,
                      key.n2, key.l2, key.tj2, value);
        out << buf;
    }
    if (!out) throw ConfigError("failed writing cache file: " + path);
}

void MatrixElementCache::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read cache file: " + path);

    std::map<Key, double> loaded;
    unsigned long long file_defects = 0, file_grid = 0;
    bool saw_defects = false, saw_grid = false;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "defects") {
            ls >> std::hex >> file_defects;
            saw_defects = true;
        } else if (tag == "grid") {
            ls >> std::hex >> file_grid;
            saw_grid = true;
        } else if (tag == "entry") {
            Key k{};
            std::string hexval;
            ls >> k.n1 >> k.l1 >> k.tj1 >> k.n2 >> k.l2 >> k.tj2 >> hexval;
            if (!ls) throw ConfigError("malformed cache entry: " + line);
            loaded[k] = std::strtod(hexval.c_str(), nullptr);
        } else {
            throw ConfigError("unknown cache line: " + line);
        }
        if (ls.fail()) throw ConfigError("malformed cache line: " + line);
    }
    if (!saw_defects || !saw_grid) throw ConfigError("cache file missing hash headers: " + path);
    if (file_defects != defect_hash_ || file_grid != grid_hash_) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "stale cache: file hashes %016llx/%016llx, current %016llx/%016llx",
                      file_defects, file_grid, defect_hash_, grid_hash_);
        throw ConfigError(std::string(buf) + " (" + path + ")");
    }

    std::unique_lock lock(mutex_);
    entries_ = std::move(loaded);
}

double radial_dipole(const AtomState& a, const AtomState& b, const MatrixElementContext& ctx) {
    if (!ctx.table || !ctx.consts) throw ConfigError("matrix element context not initialized");
    if (std::abs(a.l - b.l) != 1) return 0.0;

    if (ctx.cache) {
        double cached = 0.0;
        if (ctx.cache->lookup(a, b, &cached)) return cached;
    }

    const RadialWavefunction wa = radial_wavefunction(a, *ctx.table, *ctx.consts, ctx.grid);
    const RadialWavefunction wb = radial_wavefunction(b, *ctx.table, *ctx.consts, ctx.grid);
    const double value = radial_overlap_r(wa, wb);

    if (ctx.cache) ctx.cache->insert(a, b, value);
    return value;
}

double dipole_matrix_element(const AtomState& b, const AtomState& a, int q,
                             const MatrixElementContext& ctx) {
    if (q < -1 || q > 1) throw ConfigError("dipole component q must be -1, 0, or +1");
    a.validate();
    b.validate();

    if (b.twice_m != a.twice_m + 2 * q) return 0.0;
    if (std::abs(b.twice_j - a.twice_j) > 2) return 0.0;
    if (std::abs(b.l - a.l) != 1) return 0.0;

    const double radial = radial_dipole(a, b, ctx);
    if (radial == 0.0) return 0.0;

    const double w3m = wigner_3j_2(b.twice_j, 2, a.twice_j, -b.twice_m, 2 * q, a.twice_m);
    const double w6 = wigner_6j_2(2 * b.l, b.twice_j, 1, a.twice_j, 2 * a.l, 2);
    const double w3l = wigner_3j_2(2 * b.l, 2, 2 * a.l, 0, 0, 0);

    const double angular = phase2(b.twice_j - b.twice_m) * w3m *
                           phase2(2 * b.l + 1 + a.twice_j + 2) *
                           std::sqrt(double(b.twice_j + 1) * double(a.twice_j + 1)) * w6 *
                           phase2(2 * b.l) *
                           std::sqrt(double(2 * b.l + 1) * double(2 * a.l + 1)) * w3l;
    return angular * radial;
}

} // namespace rydblock
