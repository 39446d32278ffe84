#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "rydblock/atom.hpp"

namespace rydblock {

// A fine-structure shell (n, l): the set of all |n l j m> sublevels with
// j = l -/+ 1/2. Shells are the unit from which pair channels are built.
struct Shell {
    int n = 0;
    int l = 0;

    friend bool operator==(const Shell&, const Shell&) = default;
};

// An ordered pair of shells. (a, b) and (b, a) are distinct channels: the
// first shell is atom 1, the second atom 2.
struct PairChannel {
    Shell a;
    Shell b;

    friend bool operator==(const PairChannel&, const PairChannel&) = default;
};

// One two-atom product state |a> (x) |b>.
struct PairState {
    AtomState a;
    AtomState b;

    int total_twice_m() const { return a.twice_m + b.twice_m; }
};

// Product basis of fine-structure sublevels, grouped by channel. Pair states
// are ordered channel by channel; within a channel the atom-1 sublevel is the
// outer loop, so the order is lexicographic in (j1, m1, j2, m2) with j
// ascending and m ascending. `singles` holds each distinct shell's sublevels
// once, in first-appearance order, and a_index/b_index map every pair state
// to its two factors there.
struct PairBasis {
    std::vector<PairChannel> channels;
    std::vector<AtomState> singles;
    Eigen::VectorXi a_index;
    Eigen::VectorXi b_index;
    // First pair-state row of each channel block, plus a trailing total size,
    // so channel c spans [offset[c], offset[c + 1]).
    std::vector<Eigen::Index> channel_offset;

    Eigen::Index size() const { return a_index.size(); }
    PairState state(Eigen::Index i) const;
    // Index of |a>|b> in the basis, or -1 when the product is not present.
    Eigen::Index index_of(const AtomState& a, const AtomState& b) const;
    // Index of a sublevel in `singles`, or -1 when its shell is not present.
    Eigen::Index single_index(const AtomState& s) const;
};

// Builds the product basis for the given channel list. Channels must be
// distinct; an empty list yields an empty basis.
PairBasis build_pair_basis(const std::vector<PairChannel>& channels);

// The five channels coupled to |nd5/2, nd5/2> by a single dipole-dipole
// step through the two nearest pair resonances:
//   (nd, nd), ((n+1)p, (n-1)f), ((n-1)f, (n+1)p),
//   ((n+2)p, (n-2)f), ((n-2)f, (n+2)p).
std::vector<PairChannel> forster_channels(int n);

}  // namespace rydblock
