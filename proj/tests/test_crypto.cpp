#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "dosn/crypto.hpp"
#include "dosn/rng.hpp"

using namespace dosn;

namespace {

SharedBytes bytes_of(std::initializer_list<std::uint8_t> xs) {
    return make_shared_bytes(Bytes(xs));
}

SharedBytes random_payload(SplitMix64& rng, std::size_t n) {
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.next());
    return make_shared_bytes(std::move(b));
}

} // namespace

TEST_CASE("default cost profile matches the benchmark tables") {
    auto p = CryptoCostParams::aes_cbc_rsa2048();
    CHECK(p.sym_throughput_bytes_s == 447e6);
    CHECK(p.sym_key_setup_s == 0.216e-6);
    CHECK(p.asym_encrypt_s == 0.16e-3);
    CHECK(p.asym_decrypt_s == 6.08e-3);

    auto ctr = CryptoCostParams::aes_ctr_rsa2048();
    CHECK(ctr.sym_throughput_bytes_s == 2496e6);
    CHECK(ctr.sym_key_setup_s == 0.278e-6);
}

TEST_CASE("key generation is unique and costed as one setup") {
    CryptoService crypto(CryptoBackendKind::Model);
    OpLedger led;
    CHECK(led.modeled_time(crypto.cost()) == 0.0);

    SymKey k1 = crypto.gen_sym(led);
    CHECK(led.keygen_count == 1);
    CHECK(led.modeled_time(crypto.cost()) == doctest::Approx(0.216e-6).epsilon(1e-12));

    SymKey k2 = crypto.gen_sym(led);
    CHECK(k1.key_id != k2.key_id);
    CHECK(k1.version == 1);

    SymKey k1b = crypto.rotate_sym(k1, led);
    CHECK(k1b.key_id == k1.key_id);
    CHECK(k1b.version == 2);
    CHECK(led.keygen_count == 3);
}

TEST_CASE("symmetric sealing: sizes and modeled time") {
    CryptoService crypto(CryptoBackendKind::Model);
    OpLedger led;
    SymKey k = crypto.gen_sym(led);
    SplitMix64 rng(1);

    SUBCASE("100KB payload") {
        Bytes big(102400, 0xab);
        led = OpLedger{};
        Sealed s = crypto.seal_sym(k, make_shared_bytes(std::move(big)), led);
        CHECK(s.canonical_size == 102400);
        CHECK(led.sym_enc_count == 1);
        CHECK(led.sym_bytes_processed == 102400);
        // direct division against the table row
        double expected = 102400.0 / 447e6;
        CHECK(led.modeled_time(crypto.cost()) == expected);
        CHECK(expected == doctest::Approx(0.229e-3).epsilon(0.01));
    }
    SUBCASE("no ciphertext expansion for key-sized payloads") {
        led = OpLedger{};
        Sealed s = crypto.seal_sym(k, random_payload(rng, 32), led);
        CHECK(s.canonical_size == 32);
    }
    SUBCASE("two seals count twice") {
        led = OpLedger{};
        auto p = bytes_of({1, 2, 3});
        crypto.seal_sym(k, p, led);
        crypto.seal_sym(k, p, led);
        CHECK(led.sym_enc_count == 2);
    }
}

TEST_CASE("open succeeds only with the sealing key identity and version") {
    for (auto kind : {CryptoBackendKind::Model, CryptoBackendKind::Real}) {
        CAPTURE(static_cast<int>(kind));
        CryptoService crypto(kind);
        OpLedger led;
        SymKey k = crypto.gen_sym(led);
        auto payload = bytes_of({9, 8, 7, 6});
        Sealed s = crypto.seal_sym(k, payload, led);

        auto ok = crypto.open_sym(k, s, led);
        REQUIRE(ok);
        CHECK(**ok == *payload);

        SymKey rotated = crypto.rotate_sym(k, led);
        CHECK_FALSE(crypto.open_sym(rotated, s, led)); // same id, newer version
        SymKey other = crypto.gen_sym(led);
        CHECK_FALSE(crypto.open_sym(other, s, led));
        CHECK(led.sym_dec_count == 3);
    }
}

TEST_CASE("asymmetric sealing: packet size, costs, errors") {
    for (auto kind : {CryptoBackendKind::Model, CryptoBackendKind::Real}) {
        CAPTURE(static_cast<int>(kind));
        CryptoService crypto(kind);
        OpLedger led;
        SplitMix64 rng(7);
        const UserId alice{10}, bob{11};

        auto payload = random_payload(rng, 32);
        Sealed s = crypto.seal_asym(alice, payload, led);
        CHECK(s.canonical_size == 256);
        CHECK(led.asym_enc_count == 1);
        CHECK(led.modeled_time(crypto.cost()) == doctest::Approx(0.16e-3).epsilon(1e-9));

        led = OpLedger{};
        auto back = crypto.open_asym(alice, s, led);
        REQUIRE(back);
        CHECK(**back == *payload);
        CHECK(led.asym_dec_count == 1);
        CHECK(led.modeled_time(crypto.cost()) == doctest::Approx(6.08e-3).epsilon(1e-9));

        CHECK_FALSE(crypto.open_asym(bob, s, led));

        Bytes oversize(257, 0);
        CHECK_THROWS_WITH(crypto.seal_asym(alice, make_shared_bytes(std::move(oversize)), led),
                          "payload too large");
    }
}

TEST_CASE("ledger closed form matches an independent sum over a mixed sequence") {
    CryptoService crypto(CryptoBackendKind::Model);
    OpLedger led;
    SplitMix64 rng(42);
    double expected = 0;
    const auto& cost = crypto.cost();
    SymKey k = crypto.gen_sym(led);
    expected += cost.sym_key_setup_s;
    const UserId u{5};
    std::vector<Sealed> sealed;
    for (int i = 0; i < 200; ++i) {
        switch (rng.bounded(4)) {
        case 0: {
            std::size_t n = 1 + rng.bounded(4096);
            sealed.push_back(crypto.seal_sym(k, random_payload(rng, n), led));
            expected += static_cast<double>(n) / cost.sym_throughput_bytes_s;
            break;
        }
        case 1:
            if (!sealed.empty()) {
                const Sealed& s = sealed[rng.bounded(sealed.size())];
                (void)crypto.open_sym(k, s, led);
                expected += static_cast<double>(s.canonical_size) / cost.sym_throughput_bytes_s;
            }
            break;
        case 2:
            crypto.seal_asym(u, random_payload(rng, 32), led);
            expected += cost.asym_encrypt_s;
            break;
        default:
            k = crypto.rotate_sym(k, led);
            expected += cost.sym_key_setup_s;
        }
    }
    CHECK(led.modeled_time(cost) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("model and real providers produce identical ledgers") {
    auto run = [](CryptoBackendKind kind) {
        CryptoService crypto(kind);
        OpLedger led;
        const UserId u{3};
        SymKey k = crypto.gen_sym(led);
        Sealed a = crypto.seal_sym(k, bytes_of({1, 2, 3, 4, 5}), led);
        (void)crypto.open_sym(k, a, led);
        SymKey k2 = crypto.rotate_sym(k, led);
        (void)crypto.open_sym(k2, a, led); // failed opens are charged too
        Sealed b = crypto.seal_asym(u, bytes_of({1}), led);
        (void)crypto.open_asym(u, b, led);
        return led;
    };
    OpLedger model = run(CryptoBackendKind::Model);
    OpLedger real = run(CryptoBackendKind::Real);
    CHECK(model.sym_enc_count == real.sym_enc_count);
    CHECK(model.sym_dec_count == real.sym_dec_count);
    CHECK(model.asym_enc_count == real.asym_enc_count);
    CHECK(model.asym_dec_count == real.asym_dec_count);
    CHECK(model.keygen_count == real.keygen_count);
    CHECK(model.sym_bytes_processed == real.sym_bytes_processed);
}

TEST_CASE("real provider rejects every non-sealing key (fuzz)") {
    CryptoService crypto(CryptoBackendKind::Real);
    OpLedger led;
    SplitMix64 rng(77);
    std::vector<SymKey> keys;
    for (int i = 0; i < 8; ++i) keys.push_back(crypto.gen_sym(led));
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t sealer = rng.bounded(keys.size());
        Sealed s = crypto.seal_sym(keys[sealer], random_payload(rng, 1 + rng.bounded(128)), led);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            auto r = crypto.open_sym(keys[i], s, led);
            if (i == sealer)
                CHECK(r);
            else
                CHECK_FALSE(r);
        }
    }
}

TEST_CASE("cost profile files override the default") {
    std::string path = "test_profile.tmp";
    {
        std::ofstream f(path);
        f << "# CTR-style profile\n";
        f << "base=ctr\n";
        f << "asym_encrypt_ms=0.2\n";
        f << "asym_decrypt_ms=7.0\n";
    }
    auto p = CryptoCostParams::from_file(path);
    CHECK(p.sym_throughput_bytes_s == 2496e6);
    CHECK(p.sym_key_setup_s == doctest::Approx(0.278e-6));
    CHECK(p.asym_encrypt_s == doctest::Approx(0.2e-3));
    CHECK(p.asym_decrypt_s == doctest::Approx(7.0e-3));

    {
        std::ofstream f(path);
        f << "sym_throughput_mb_s=0\n";
    }
    CHECK_THROWS_WITH((void)CryptoCostParams::from_file(path),
                      "cost parameters must be strictly positive");
    {
        std::ofstream f(path);
        f << "nonsense=1\n";
    }
    CHECK_THROWS((void)CryptoCostParams::from_file(path));
    std::remove(path.c_str());
}
