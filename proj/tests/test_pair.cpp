#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rydblock/errors.hpp"
#include "rydblock/pair.hpp"

using namespace rydblock;

TEST_CASE("empty channel list gives an empty basis") {
    const PairBasis basis = build_pair_basis({});
    CHECK(basis.size() == 0);
    CHECK(basis.singles.empty());
    CHECK(basis.channel_offset.size() == 1);
}

TEST_CASE("standard channel set spans 436 product states over 50 sublevels") {
    const PairBasis basis = build_pair_basis(forster_channels(79));
    CHECK(basis.size() == 436);
    CHECK(basis.singles.size() == 50);
    CHECK(basis.channels.size() == 5);

    // d x d block of 10 x 10, then four p x f / f x p blocks of 6 x 14.
    REQUIRE(basis.channel_offset.size() == 6);
    CHECK(basis.channel_offset[0] == 0);
    CHECK(basis.channel_offset[1] == 100);
    CHECK(basis.channel_offset[2] == 184);
    CHECK(basis.channel_offset[3] == 268);
    CHECK(basis.channel_offset[4] == 352);
    CHECK(basis.channel_offset[5] == 436);

    CHECK(basis.channels[0].a == Shell{79, 2});
    CHECK(basis.channels[0].b == Shell{79, 2});
    CHECK(basis.channels[1].a == Shell{80, 1});
    CHECK(basis.channels[1].b == Shell{78, 3});
    CHECK(basis.channels[2].a == Shell{78, 3});
    CHECK(basis.channels[2].b == Shell{80, 1});
    CHECK(basis.channels[3].a == Shell{81, 1});
    CHECK(basis.channels[3].b == Shell{77, 3});
    CHECK(basis.channels[4].a == Shell{77, 3});
    CHECK(basis.channels[4].b == Shell{81, 1});
}

TEST_CASE("pair states are ordered lexicographically in (j1, m1, j2, m2)") {
    const PairBasis basis = build_pair_basis(forster_channels(79));

    const PairState first = basis.state(0);
    CHECK(first.a.n == 79);
    CHECK(first.a.l == 2);
    CHECK(first.a.twice_j == 3);
    CHECK(first.a.twice_m == -3);
    CHECK(first.b.twice_j == 3);
    CHECK(first.b.twice_m == -3);

    // Atom 2 is the fast index: the second state advances m2 only.
    const PairState second = basis.state(1);
    CHECK(second.a.twice_j == 3);
    CHECK(second.a.twice_m == -3);
    CHECK(second.b.twice_j == 3);
    CHECK(second.b.twice_m == -1);

    // Last state of the d x d block is stretched on both atoms.
    const PairState last_dd = basis.state(99);
    CHECK(last_dd.a.twice_j == 5);
    CHECK(last_dd.a.twice_m == 5);
    CHECK(last_dd.b.twice_j == 5);
    CHECK(last_dd.b.twice_m == 5);

    // First state of the second channel pairs 80p with 78f.
    const PairState pf = basis.state(100);
    CHECK(pf.a.n == 80);
    CHECK(pf.a.l == 1);
    CHECK(pf.a.twice_j == 1);
    CHECK(pf.a.twice_m == -1);
    CHECK(pf.b.n == 78);
    CHECK(pf.b.l == 3);
    CHECK(pf.b.twice_j == 5);
    CHECK(pf.b.twice_m == -5);

    for (Eigen::Index i = 0; i < basis.size(); ++i) {
        const PairState s = basis.state(i);
        CHECK(basis.index_of(s.a, s.b) == i);
        CHECK(s.total_twice_m() == s.a.twice_m + s.b.twice_m);
    }
}

TEST_CASE("single sublevels appear once, in channel order") {
    const PairBasis basis = build_pair_basis(forster_channels(79));
    // 79d (10), 80p (6), 78f (14), 81p (6), 77f (14).
    CHECK(basis.singles[0].n == 79);
    CHECK(basis.singles[0].l == 2);
    CHECK(basis.singles[10].n == 80);
    CHECK(basis.singles[10].l == 1);
    CHECK(basis.singles[16].n == 78);
    CHECK(basis.singles[16].l == 3);
    CHECK(basis.singles[30].n == 81);
    CHECK(basis.singles[36].n == 77);

    CHECK(basis.single_index(AtomState{79, 2, 5, 1}) == 7);
    CHECK(basis.single_index(AtomState{99, 2, 5, 1}) == -1);
    CHECK(basis.index_of(AtomState{80, 1, 1, -1}, AtomState{78, 3, 5, -5}) == 100);
    // (78f, 80p) exists only in the mirrored channel's slot order.
    CHECK(basis.index_of(AtomState{78, 3, 5, -5}, AtomState{80, 1, 1, -1}) == 184);
}

TEST_CASE("invalid channel specs are refused") {
    CHECK_THROWS_AS((build_pair_basis({{Shell{79, 2}, Shell{79, 2}},
                                       {Shell{79, 2}, Shell{79, 2}}})),
                    ConfigError);
    CHECK_THROWS_AS((build_pair_basis({{Shell{79, 2}, Shell{2, 3}}})), ConfigError);
    CHECK_THROWS_AS((build_pair_basis({{Shell{0, 0}, Shell{79, 2}}})), ConfigError);
    CHECK_THROWS_AS(forster_channels(4), ConfigError);
}
