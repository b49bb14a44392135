#include <doctest.h>

#include <cmath>

#include "dosn/model_lkh.hpp"

using namespace dosn;

namespace {
const UserId owner{1};

SharedBytes content(std::size_t n, std::uint8_t fill = 0x42) {
    return make_shared_bytes(Bytes(n, fill));
}

UserId uid(int i) { return UserId{100 + static_cast<std::uint64_t>(i)}; }

// independent height oracle: smallest h with d^h >= n
std::size_t ceil_log(std::size_t d, std::size_t n) {
    std::size_t h = 0, cap = 1;
    while (cap < n) {
        cap *= d;
        ++h;
    }
    return h;
}
} // namespace

TEST_CASE("create: root-only tree, root key is the group key") {
    World w;
    LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 4);
    CHECK(g.tree().height() == 0);
    CHECK(g.root_history().size() == 1);
    CHECK(g.root_history()[0].key_id == g.tree().root().key.key_id);
    CHECK_THROWS_WITH(LkhGroup(w, GroupId{2}, owner, GroupType::G4, 1), "degree must be at least 2");
}

TEST_CASE("publish matches the encryption model contract") {
    World w;
    LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 4);
    w.reset_ledgers();
    ContentId c = g.publish(owner, content(102400));
    CHECK(w.ops(owner).sym_enc_count == 2);
    CHECK(w.ops(owner).keygen_count == 1);
    CHECK(w.modeled_time(owner) == doctest::Approx(0.225e-3).epsilon(0.05));
    REQUIRE(g.access(owner, c));
    CHECK_THROWS_WITH(g.publish(uid(99), content(8)), "not a member");
}

TEST_CASE("tree shape: heights stay logarithmic, arity bounded, slots reused") {
    for (int n : {10, 50, 100, 1000}) {
        World w;
        LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 4);
        for (int i = 0; i < n; ++i) g.join(uid(i));
        CHECK(g.tree().member_count() == static_cast<std::size_t>(n));
        CHECK(g.tree().max_arity() <= 4);
        CHECK(g.tree().height() <= ceil_log(4, n) + 1);
    }

    SUBCASE("n=10000 d=4 gives a 7-level path") {
        World w;
        LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 4);
        for (int i = 0; i < 10000; ++i) g.join(uid(i));
        CHECK(ceil_log(4, 10000) == 7);
        CHECK(g.tree().height() == 7);
    }

    SUBCASE("vacated slots are reused before the tree deepens") {
        World w;
        LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 3);
        for (int i = 0; i < 9; ++i) g.join(uid(i));
        std::size_t h = g.tree().height();
        g.leave(uid(4));
        CHECK(g.tree().has_vacant_slot());
        g.join(uid(100));
        CHECK_FALSE(g.tree().has_vacant_slot());
        CHECK(g.tree().height() == h);
    }
}

TEST_CASE("join without backward secrecy: one asym, path under the leaf key") {
    World w;
    LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 4);
    for (int i = 0; i < 20; ++i) g.join(uid(i));
    std::uint32_t root_version = g.tree().root().key.version;
    w.reset_ledgers();

    g.join(uid(500));
    std::size_t h = g.tree().height();
    CHECK(w.ops(owner).asym_enc_count == 1);
    CHECK(w.ops(owner).sym_enc_count <= 2 * h);
    CHECK(g.tree().root().key.version == root_version); // no key changes
    CHECK(w.modeled_time(owner) == doctest::Approx(0.16e-3).epsilon(0.05));

    g.sync(uid(500));
    CHECK(w.ops(uid(500)).asym_dec_count == 1);
    CHECK(w.ops(uid(500)).sym_dec_count <= h + 1);
    // the joiner now holds the current root key
    CHECK(g.access(uid(500), g.publish(owner, content(64))));
}

TEST_CASE("join with backward secrecy refreshes the path for everyone") {
    World w;
    LkhGroup g(w, GroupId{1}, owner, GroupType::G2, 4);
    for (int i = 0; i < 20; ++i) g.join(uid(i));
    for (int i = 0; i < 20; ++i) g.sync(uid(i));
    ContentId old_c = g.publish(owner, content(64, 0x01));
    std::uint32_t old_root = g.tree().root().key.version;
    w.reset_ledgers();

    g.join(uid(500));
    std::size_t h = g.tree().height();
    CHECK(g.tree().root().key.version > old_root);
    CHECK(w.ops(owner).asym_enc_count == 1);
    CHECK(w.ops(owner).sym_enc_count <= 2 * h); // joiner bundle + previous-version seals

    g.sync(uid(500));
    CHECK_FALSE(g.access(uid(500), old_c)); // pre-join content stays sealed

    // an existing member follows the rotation with symmetric work only
    w.reset_ledgers();
    g.sync(uid(3));
    CHECK(w.ops(uid(3)).asym_dec_count == 0);
    CHECK(w.ops(uid(3)).sym_dec_count <= h);
    ContentId new_c = g.publish(owner, content(64, 0x02));
    g.sync(uid(3));
    g.sync(uid(500));
    CHECK(g.access(uid(3), new_c));
    CHECK(g.access(uid(500), new_c));
}

TEST_CASE("leave refreshes the path and seals under child keys") {
    World w;
    LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 4);
    for (int i = 0; i < 64; ++i) g.join(uid(i));
    for (int i = 0; i < 64; ++i) g.sync(uid(i));
    std::size_t h = g.tree().height();
    w.reset_ledgers();

    g.leave(uid(0));
    CHECK(w.ops(owner).asym_enc_count == 0); // no asymmetric work at all
    CHECK(w.ops(owner).sym_enc_count <= 4 * h);
    CHECK(w.ops(owner).keygen_count <= h + 1);

    // remaining members reach the new root; the leaver cannot
    g.sync(uid(1));
    g.sync(uid(63));
    g.sync(uid(0));
    ContentId c = g.publish(owner, content(64));
    CHECK(g.access(uid(1), c));
    CHECK(g.access(uid(63), c));
    CHECK_FALSE(g.access(uid(0), c));

    CHECK_THROWS_WITH(g.leave(owner), "owner cannot leave");
    CHECK_THROWS_WITH(g.leave(uid(0)), "not a member");
}

TEST_CASE("leave with backward secrecy re-keys contents like the encryption model") {
    World w;
    LkhGroup g(w, GroupId{1}, owner, GroupType::G3, 4);
    for (int i = 0; i < 6; ++i) g.join(uid(i));
    std::vector<ContentId> cs;
    for (int i = 0; i < 4; ++i) cs.push_back(g.publish(owner, content(512)));
    for (int i = 0; i < 6; ++i) g.sync(uid(i));
    for (ContentId c : cs) REQUIRE(g.access(uid(2), c));
    w.reset_ledgers();

    g.leave(uid(2));
    CHECK(w.ops(owner).sym_dec_count == 2 * 4);
    CHECK(w.ops(owner).keygen_count >= 4); // content keys plus path refreshes

    g.sync(uid(2));
    for (ContentId c : cs) CHECK_FALSE(g.access(uid(2), c));
    g.sync(uid(3));
    for (ContentId c : cs) CHECK(g.access(uid(3), c));
}

TEST_CASE("member processing with no new entries is a no-op") {
    World w;
    LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 4);
    g.join(uid(1));
    g.sync(uid(1));
    w.reset_ledgers();
    g.sync(uid(1));
    CHECK(w.ops(uid(1)).sym_dec_count == 0);
    CHECK(w.traffic(uid(1)).bytes_received == 0);
}

TEST_CASE("path bounds hold for every join and leave across sizes") {
    for (int n : {10, 50, 100, 1000}) {
        World w;
        LkhGroup g(w, GroupId{1}, owner, GroupType::G2, 4);
        for (int i = 0; i < n; ++i) {
            w.reset_ledgers();
            g.join(uid(i));
            std::size_t h = std::max<std::size_t>(g.tree().height(), 1);
            CHECK(w.ops(owner).sym_enc_count + w.ops(owner).asym_enc_count <= 2 * h + 1);
        }
        for (int i = 0; i < n; i += 7) {
            w.reset_ledgers();
            g.leave(uid(i));
            std::size_t h = std::max<std::size_t>(g.tree().height(), 1);
            CHECK(w.ops(owner).sym_enc_count <= 4 * h);
        }
    }
}

TEST_CASE("G4 joiner after a rotation can open old contents") {
    World w;
    LkhGroup g(w, GroupId{1}, owner, GroupType::G4, 4);
    g.join(uid(1));
    ContentId c1 = g.publish(owner, content(64, 0x01));
    g.leave(uid(1)); // rotates the root
    ContentId c2 = g.publish(owner, content(64, 0x02));

    g.join(uid(2));
    g.sync(uid(2));
    CHECK(g.access(uid(2), c1));
    CHECK(g.access(uid(2), c2));

    g.sync(uid(1));
    CHECK(g.access(uid(1), c1));      // G4 leaver keeps old contents
    CHECK_FALSE(g.access(uid(1), c2)); // but not post-leave ones
}
