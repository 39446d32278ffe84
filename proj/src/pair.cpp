#include "rydblock/pair.hpp"

#include <algorithm>

#include "rydblock/errors.hpp"

namespace rydblock {

namespace {

std::vector<AtomState> shell_sublevels(const Shell& s) {
    if (s.n < 1 || s.l < 0 || s.l >= s.n) {
        throw ConfigError("invalid shell n=" + std::to_string(s.n) +
                          " l=" + std::to_string(s.l));
    }
    std::vector<AtomState> out;
    const int tj_lo = (s.l == 0) ? 1 : 2 * s.l - 1;
    for (int tj = tj_lo; tj <= 2 * s.l + 1; tj += 2) {
        for (int tm = -tj; tm <= tj; tm += 2) {
            out.push_back(AtomState{s.n, s.l, tj, tm});
        }
    }
    return out;
}

}  // namespace

PairState PairBasis::state(Eigen::Index i) const {
    return PairState{singles[static_cast<std::size_t>(a_index(i))],
                     singles[static_cast<std::size_t>(b_index(i))]};
}

Eigen::Index PairBasis::single_index(const AtomState& s) const {
    for (std::size_t k = 0; k < singles.size(); ++k) {
        if (singles[k].n == s.n && singles[k].l == s.l &&
            singles[k].twice_j == s.twice_j && singles[k].twice_m == s.twice_m) {
            return static_cast<Eigen::Index>(k);
        }
    }
    return -1;
}

Eigen::Index PairBasis::index_of(const AtomState& a, const AtomState& b) const {
    const Eigen::Index ia = single_index(a);
    const Eigen::Index ib = single_index(b);
    if (ia < 0 || ib < 0) return -1;
    for (Eigen::Index i = 0; i < size(); ++i) {
        if (a_index(i) == ia && b_index(i) == ib) return i;
    }
    return -1;
}

PairBasis build_pair_basis(const std::vector<PairChannel>& channels) {
    for (std::size_t i = 0; i < channels.size(); ++i) {
        for (std::size_t j = i + 1; j < channels.size(); ++j) {
            if (channels[i] == channels[j]) {
                throw ConfigError("duplicate pair channel (" +
                                  std::to_string(channels[i].a.n) + "," +
                                  std::to_string(channels[i].a.l) + ")x(" +
                                  std::to_string(channels[i].b.n) + "," +
                                  std::to_string(channels[i].b.l) + ")");
            }
        }
    }

    PairBasis basis;
    basis.channels = channels;

    std::vector<Shell> shells;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> span;  // into singles
    auto shell_span = [&](const Shell& s) {
        for (std::size_t k = 0; k < shells.size(); ++k) {
            if (shells[k] == s) return span[k];
        }
        const Eigen::Index lo = static_cast<Eigen::Index>(basis.singles.size());
        for (const AtomState& st : shell_sublevels(s)) basis.singles.push_back(st);
        const Eigen::Index hi = static_cast<Eigen::Index>(basis.singles.size());
        shells.push_back(s);
        span.emplace_back(lo, hi);
        return span.back();
    };

    std::vector<int> ia, ib;
    basis.channel_offset.push_back(0);
    for (const PairChannel& ch : channels) {
        const auto [a_lo, a_hi] = shell_span(ch.a);
        const auto [b_lo, b_hi] = shell_span(ch.b);
        for (Eigen::Index i = a_lo; i < a_hi; ++i) {
            for (Eigen::Index j = b_lo; j < b_hi; ++j) {
                ia.push_back(static_cast<int>(i));
                ib.push_back(static_cast<int>(j));
            }
        }
        basis.channel_offset.push_back(static_cast<Eigen::Index>(ia.size()));
    }

    basis.a_index = Eigen::Map<const Eigen::VectorXi>(ia.data(), static_cast<Eigen::Index>(ia.size()));
    basis.b_index = Eigen::Map<const Eigen::VectorXi>(ib.data(), static_cast<Eigen::Index>(ib.size()));
    return basis;
}

std::vector<PairChannel> forster_channels(int n) {
    if (n < 5) throw ConfigError("forster_channels requires n >= 5, got " + std::to_string(n));
    const Shell d{n, 2};
    const Shell p1{n + 1, 1}, f1{n - 1, 3};
    const Shell p2{n + 2, 1}, f2{n - 2, 3};
    return {{d, d}, {p1, f1}, {f1, p1}, {p2, f2}, {f2, p2}};
}

}  // namespace rydblock
