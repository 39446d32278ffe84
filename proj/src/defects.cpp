#include "rydblock/defects.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rydblock/errors.hpp"

namespace rydblock {

void AtomState::validate() const {
    if (n < 1) throw ConfigError("AtomState: n must be >= 1, got " + std::to_string(n));
    if (l < 0 || l >= n)
        throw ConfigError("AtomState: need 0 <= l < n, got l=" + std::to_string(l) +
                          " n=" + std::to_string(n));
    const bool j_ok = (l == 0) ? (twice_j == 1)
                               : (twice_j == 2 * l - 1 || twice_j == 2 * l + 1);
    if (!j_ok)
        throw ConfigError("AtomState: j must be l +- 1/2, got 2j=" + std::to_string(twice_j) +
                          " for l=" + std::to_string(l));
    if (std::abs(twice_m) > twice_j || ((twice_m - twice_j) % 2) != 0)
        throw ConfigError("AtomState: invalid m_j (2m=" + std::to_string(twice_m) +
                          ", 2j=" + std::to_string(twice_j) + ")");
}

std::string to_string(const AtomState& s) {
    static const char* lnames = "spdfghik";
    std::ostringstream os;
    os << s.n;
    if (s.l < 8) os << lnames[s.l];
    else os << "(l=" << s.l << ")";
    os << s.twice_j << "/2";
    os << ",m=" << s.twice_m << "/2";
    return os.str();
}

bool QuantumDefectTable::has_channel(int l, int twice_j) const {
    return channels.count({l, twice_j}) > 0;
}

double QuantumDefectTable::defect(int n, int l, int twice_j) const {
    if (l >= 4) return 0.0;
    const auto it = channels.find({l, twice_j});
    if (it == channels.end()) {
        std::ostringstream os;
        os << "quantum defect channel missing: l=" << l << " 2j=" << twice_j;
        throw ConfigError(os.str());
    }
    const auto& ch = it->second;
    if (n < ch.n_min || n > ch.n_max) {
        std::ostringstream os;
        os << "quantum defect channel l=" << l << " 2j=" << twice_j << " only fitted for n in ["
           << ch.n_min << ", " << ch.n_max << "], got n=" << n;
        throw ConfigError(os.str());
    }
    return ch.delta0 + ch.delta2 / ((n - ch.delta0) * (n - ch.delta0));
}

unsigned long long QuantumDefectTable::content_hash() const {
    // FNV-1a over the binary layout of (l, 2j, delta0, delta2) per channel.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& [key, ch] : channels) {
        mix(&key.first, sizeof key.first);
        mix(&key.second, sizeof key.second);
        mix(&ch.delta0, sizeof ch.delta0);
        mix(&ch.delta2, sizeof ch.delta2);
    }
    return h;
}

void QuantumDefectTable::validate() const {
    const std::pair<int, int> required[] = {{0, 1}, {1, 1}, {1, 3}, {2, 3}, {2, 5}, {3, 5}, {3, 7}};
    for (const auto& key : required) {
        if (!channels.count(key)) {
            std::ostringstream os;
            os << "defect table: required channel missing: l=" << key.first << " 2j=" << key.second;
            throw ConfigError(os.str());
        }
    }
    // delta0 decreases with l and the f defects are tiny; catches swapped columns.
    const double d_s = channels.at({0, 1}).delta0;
    const double d_p = channels.at({1, 1}).delta0;
    const double d_d = channels.at({2, 5}).delta0;
    const double d_f = channels.at({3, 5}).delta0;
    if (!(d_s > d_p && d_p > d_d && d_d > d_f))
        throw ConfigError("defect table: delta0 must decrease with l");
    if (!(d_f < 0.1) || !(channels.at({3, 7}).delta0 < 0.1))
        throw ConfigError("defect table: f-channel delta0 must be below 0.1");
}

QuantumDefectTable builtin_rb87_defects() {
    QuantumDefectTable t;
    auto add = [&t](int l, int tj, double d0, double d2, int lo, int hi, const char* cite) {
        t.channels[{l, tj}] = QuantumDefectChannel{d0, d2, lo, hi, cite};
    };
    add(0, 1, 3.1311804, 0.1784, 14, 120, "Li, Mourachko, Noel, Gallagher, PRA 67, 052502 (2003)");
    add(1, 1, 2.6548849, 0.2900, 14, 120, "Li, Mourachko, Noel, Gallagher, PRA 67, 052502 (2003)");
    add(1, 3, 2.6416737, 0.2950, 14, 120, "Li, Mourachko, Noel, Gallagher, PRA 67, 052502 (2003)");
    add(2, 3, 1.34809171, -0.60286, 14, 120, "Li, Mourachko, Noel, Gallagher, PRA 67, 052502 (2003)");
    add(2, 5, 1.34646572, -0.59600, 14, 120, "Li, Mourachko, Noel, Gallagher, PRA 67, 052502 (2003)");
    add(3, 5, 0.0165192, -0.085, 14, 120, "Han, Jamil, Norum, Tanner, Gallagher, PRA 74, 054502 (2006)");
    add(3, 7, 0.0165437, -0.086, 14, 120, "Han, Jamil, Norum, Tanner, Gallagher, PRA 74, 054502 (2006)");
    t.validate();
    return t;
}

QuantumDefectTable load_defect_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open defect table: " + path);

    QuantumDefectTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string label;
        if (!(ls >> label)) continue;
        if (label == "version") continue;
        int l, tj, lo, hi;
        QuantumDefectChannel ch;
        if (!(ls >> l >> tj >> ch.delta0 >> ch.delta2 >> lo >> hi))
            throw ConfigError("defect table " + path + ": malformed line " + std::to_string(lineno));
        ch.n_min = lo;
        ch.n_max = hi;
        std::getline(ls, ch.citation);
        const auto first = ch.citation.find_first_not_of(" \t\"");
        const auto last = ch.citation.find_last_not_of(" \t\"");
        ch.citation = (first == std::string::npos) ? "" : ch.citation.substr(first, last - first + 1);
        if (t.channels.count({l, tj}))
            throw ConfigError("defect table " + path + ": duplicate channel at line " + std::to_string(lineno));
        t.channels[{l, tj}] = ch;
    }
    t.validate();
    return t;
}

double level_energy(const AtomState& state, const QuantumDefectTable& table,
                    const PhysicalConstants& consts) {
    state.validate();
    const double nstar = state.n - table.defect(state.n, state.l, state.twice_j);
    return -consts.rydberg_frequency / (nstar * nstar);
}

} // namespace rydblock
