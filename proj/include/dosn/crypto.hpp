#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>

#include "dosn/ids.hpp"

namespace dosn {

// Benchmark-derived cost parameters. The default profile pairs the AES/CBC
// 256-bit row (447 MB/s throughput, 0.216 us key setup) with the RSA-2048
// encrypt/decrypt costs; the published end-to-end timings are only consistent
// with the CBC throughput, so that is the default even though a CTR profile
// is also provided.
struct CryptoCostParams {
    double sym_throughput_bytes_s = 0; // bytes/second
    double sym_key_setup_s = 0;        // seconds per fresh symmetric key
    double asym_encrypt_s = 0;         // seconds per asymmetric seal
    double asym_decrypt_s = 0;         // seconds per asymmetric open

    static CryptoCostParams aes_cbc_rsa2048();
    static CryptoCostParams aes_ctr_rsa2048();

    // key=value overrides on top of the default profile, e.g.
    //   sym_throughput_mb_s=447
    //   sym_key_setup_us=0.216
    //   asym_encrypt_ms=0.16
    //   asym_decrypt_ms=6.08
    static CryptoCostParams from_file(const std::filesystem::path& path);

    void validate() const; // all fields strictly positive
};

inline constexpr std::size_t kSymKeyBytes = 32;   // 256-bit keys
inline constexpr std::size_t kAsymPacketBytes = 256; // 2048-bit modulus output

struct SymKey {
    std::uint64_t key_id = 0;
    std::uint32_t version = 0;
    std::array<std::uint8_t, kSymKeyBytes> secret{}; // all-zero under the cost model
};

struct KeyRef {
    std::uint64_t key_id = 0;
    std::uint32_t version = 0;
    auto operator<=>(const KeyRef&) const = default;
};

inline KeyRef ref_of(const SymKey& k) { return {k.key_id, k.version}; }

// A sealed payload. canonical_size drives all byte accounting: symmetric
// sealing does not expand the payload, asymmetric sealing always produces a
// 256-byte packet. The real provider's ciphertext length may differ from
// canonical_size; accounting never looks at it.
struct Sealed {
    enum class Scheme { Sym, Asym };
    Scheme scheme = Scheme::Sym;
    KeyRef sym_ref;       // sealing key identity (Sym)
    UserId recipient;     // public-key owner (Asym)
    std::size_t canonical_size = 0;
    SharedBytes body;     // model: the payload itself; real: ciphertext
};

// Per-principal crypto operation counters. modeled_time is a pure function of
// the counters and the cost profile, so a run's total time is reproducible
// bit-exactly from its ledger.
struct OpLedger {
    std::uint64_t sym_enc_count = 0;
    std::uint64_t sym_dec_count = 0;
    std::uint64_t asym_enc_count = 0;
    std::uint64_t asym_dec_count = 0;
    std::uint64_t keygen_count = 0;
    std::uint64_t sym_bytes_processed = 0;

    double modeled_time(const CryptoCostParams& p) const {
        return static_cast<double>(sym_bytes_processed) / p.sym_throughput_bytes_s +
               static_cast<double>(keygen_count) * p.sym_key_setup_s +
               static_cast<double>(asym_enc_count) * p.asym_encrypt_s +
               static_cast<double>(asym_dec_count) * p.asym_decrypt_s;
    }

    OpLedger& operator+=(const OpLedger& o) {
        sym_enc_count += o.sym_enc_count;
        sym_dec_count += o.sym_dec_count;
        asym_enc_count += o.asym_enc_count;
        asym_dec_count += o.asym_dec_count;
        keygen_count += o.keygen_count;
        sym_bytes_processed += o.sym_bytes_processed;
        return *this;
    }
};

enum class CryptoBackendKind {
    Model, // perfect crypto: open succeeds iff key identity+version match
    Real   // AES-256-GCM / RSA-2048-OAEP, for the secrecy suites
};

class SealBackend;

// Accounting-uniform crypto front end. Both backends are charged through the
// same code path, so identical operation sequences produce identical ledgers
// regardless of the provider.
class CryptoService {
public:
    explicit CryptoService(CryptoBackendKind kind,
                           CryptoCostParams params = CryptoCostParams::aes_cbc_rsa2048());
    ~CryptoService();
    CryptoService(CryptoService&&) noexcept;
    CryptoService& operator=(CryptoService&&) noexcept;

    const CryptoCostParams& cost() const { return params_; }
    CryptoBackendKind backend_kind() const { return kind_; }

    SymKey gen_sym(OpLedger& led);                          // fresh key_id, version 1
    SymKey rotate_sym(const SymKey& k, OpLedger& led);      // same key_id, version+1, fresh material

    Sealed seal_sym(const SymKey& k, SharedBytes payload, OpLedger& led);
    Sealed seal_sym(const SymKey& k, std::span<const std::uint8_t> payload, OpLedger& led);
    std::optional<SharedBytes> open_sym(const SymKey& k, const Sealed& s, OpLedger& led);

    // Asymmetric sealing is used only to protect symmetric keys; payloads
    // above 256 bytes are rejected ("payload too large").
    Sealed seal_asym(UserId recipient, SharedBytes payload, OpLedger& led);
    Sealed seal_asym(UserId recipient, std::span<const std::uint8_t> payload, OpLedger& led);
    std::optional<SharedBytes> open_asym(UserId owner, const Sealed& s, OpLedger& led);

private:
    CryptoBackendKind kind_;
    CryptoCostParams params_;
    std::uint64_t next_key_id_ = 1;
    std::unique_ptr<SealBackend> backend_;
};

} // namespace dosn
