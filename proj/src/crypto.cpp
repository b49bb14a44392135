#include "dosn/crypto.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/rsa.h>

namespace dosn {

CryptoCostParams CryptoCostParams::aes_cbc_rsa2048() {
    return {447e6, 0.216e-6, 0.16e-3, 6.08e-3};
}

CryptoCostParams CryptoCostParams::aes_ctr_rsa2048() {
    return {2496e6, 0.278e-6, 0.16e-3, 6.08e-3};
}

void CryptoCostParams::validate() const {
    if (sym_throughput_bytes_s <= 0 || sym_key_setup_s <= 0 ||
        asym_encrypt_s <= 0 || asym_decrypt_s <= 0)
        throw SimError("cost parameters must be strictly positive");
}

CryptoCostParams CryptoCostParams::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open cost profile: " + path.string());
    CryptoCostParams p = aes_cbc_rsa2048();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SimError("cost profile line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string val = line.substr(eq + 1);
        if (key == "base") {
            if (val == "cbc") { auto base = aes_cbc_rsa2048(); p.sym_throughput_bytes_s = base.sym_throughput_bytes_s; p.sym_key_setup_s = base.sym_key_setup_s; }
            else if (val == "ctr") { auto base = aes_ctr_rsa2048(); p.sym_throughput_bytes_s = base.sym_throughput_bytes_s; p.sym_key_setup_s = base.sym_key_setup_s; }
            else throw SimError("cost profile line " + std::to_string(lineno) + ": base must be cbc or ctr");
            continue;
        }
        double num = 0;
        try {
            num = std::stod(val);
        } catch (...) {
            throw SimError("cost profile line " + std::to_string(lineno) + ": bad number");
        }
        if (key == "sym_throughput_mb_s") p.sym_throughput_bytes_s = num * 1e6;
        else if (key == "sym_key_setup_us") p.sym_key_setup_s = num * 1e-6;
        else if (key == "asym_encrypt_ms") p.asym_encrypt_s = num * 1e-3;
        else if (key == "asym_decrypt_ms") p.asym_decrypt_s = num * 1e-3;
        else throw SimError("cost profile line " + std::to_string(lineno) + ": unknown key " + key);
    }
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------

class SealBackend {
public:
    virtual ~SealBackend() = default;
    virtual void fill_secret(SymKey& k) = 0;
    virtual SharedBytes seal_sym(const SymKey& k, const SharedBytes& payload) = 0;
    virtual std::optional<SharedBytes> open_sym(const SymKey& k, const Sealed& s) = 0;
    virtual SharedBytes seal_asym(UserId recipient, const SharedBytes& payload) = 0;
    virtual std::optional<SharedBytes> open_asym(UserId owner, const Sealed& s) = 0;
};

namespace {

// Perfect crypto: the envelope carries the payload, opening succeeds exactly
// when the presented key matches the sealing (key_id, version). Secrecy
// properties are then testable at n=10000 scale with zero cipher work.
class ModelBackend final : public SealBackend {
public:
    void fill_secret(SymKey&) override {}

    SharedBytes seal_sym(const SymKey&, const SharedBytes& payload) override {
        return payload;
    }

    std::optional<SharedBytes> open_sym(const SymKey& k, const Sealed& s) override {
        if (ref_of(k) != s.sym_ref) return std::nullopt;
        return s.body;
    }

    SharedBytes seal_asym(UserId, const SharedBytes& payload) override {
        return payload;
    }

    std::optional<SharedBytes> open_asym(UserId owner, const Sealed& s) override {
        if (owner != s.recipient) return std::nullopt;
        return s.body;
    }
};

struct EvpPkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using EvpPkey = std::unique_ptr<EVP_PKEY, EvpPkeyDeleter>;

struct EvpPkeyCtxDeleter {
    void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
using EvpPkeyCtx = std::unique_ptr<EVP_PKEY_CTX, EvpPkeyCtxDeleter>;

struct EvpCipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using EvpCipherCtx = std::unique_ptr<EVP_CIPHER_CTX, EvpCipherCtxDeleter>;

constexpr std::size_t kGcmIvBytes = 12;
constexpr std::size_t kGcmTagBytes = 16;

// AES-256-GCM + RSA-2048-OAEP. Wrong or stale keys fail authentication, which
// is exactly the signal the secrecy suites assert on.
class RealBackend final : public SealBackend {
public:
    void fill_secret(SymKey& k) override {
        if (RAND_bytes(k.secret.data(), static_cast<int>(k.secret.size())) != 1)
            throw SimError("RAND_bytes failed");
    }

    SharedBytes seal_sym(const SymKey& k, const SharedBytes& payload) override {
        Bytes out(kGcmIvBytes + payload->size() + kGcmTagBytes);
        if (RAND_bytes(out.data(), kGcmIvBytes) != 1) throw SimError("RAND_bytes failed");

        EvpCipherCtx ctx(EVP_CIPHER_CTX_new());
        if (!ctx) throw SimError("EVP_CIPHER_CTX_new failed");
        if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, k.secret.data(), out.data()) != 1)
            throw SimError("EncryptInit failed");
        int len = 0;
        if (EVP_EncryptUpdate(ctx.get(), out.data() + kGcmIvBytes, &len,
                              payload->data(), static_cast<int>(payload->size())) != 1)
            throw SimError("EncryptUpdate failed");
        int fin = 0;
        if (EVP_EncryptFinal_ex(ctx.get(), out.data() + kGcmIvBytes + len, &fin) != 1)
            throw SimError("EncryptFinal failed");
        if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kGcmTagBytes,
                                out.data() + kGcmIvBytes + payload->size()) != 1)
            throw SimError("GCM get tag failed");
        return make_shared_bytes(std::move(out));
    }

    std::optional<SharedBytes> open_sym(const SymKey& k, const Sealed& s) override {
        const Bytes& ct = *s.body;
        if (ct.size() < kGcmIvBytes + kGcmTagBytes) return std::nullopt;
        const std::size_t pt_len = ct.size() - kGcmIvBytes - kGcmTagBytes;

        EvpCipherCtx ctx(EVP_CIPHER_CTX_new());
        if (!ctx) throw SimError("EVP_CIPHER_CTX_new failed");
        if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, k.secret.data(), ct.data()) != 1)
            return std::nullopt;
        Bytes out(pt_len);
        int len = 0;
        if (pt_len > 0 &&
            EVP_DecryptUpdate(ctx.get(), out.data(), &len,
                              ct.data() + kGcmIvBytes, static_cast<int>(pt_len)) != 1)
            return std::nullopt;
        Bytes tag(ct.end() - kGcmTagBytes, ct.end());
        if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kGcmTagBytes, tag.data()) != 1)
            return std::nullopt;
        int fin = 0;
        if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1)
            return std::nullopt; // tag mismatch: wrong key
        return make_shared_bytes(std::move(out));
    }

    SharedBytes seal_asym(UserId recipient, const SharedBytes& payload) override {
        EVP_PKEY* key = keypair(recipient);
        EvpPkeyCtx ctx(EVP_PKEY_CTX_new(key, nullptr));
        if (!ctx || EVP_PKEY_encrypt_init(ctx.get()) != 1 ||
            EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING) != 1)
            throw SimError("RSA encrypt init failed");
        std::size_t out_len = 0;
        if (EVP_PKEY_encrypt(ctx.get(), nullptr, &out_len, payload->data(), payload->size()) != 1)
            throw SimError("RSA encrypt sizing failed");
        Bytes out(out_len);
        if (EVP_PKEY_encrypt(ctx.get(), out.data(), &out_len, payload->data(), payload->size()) != 1)
            throw SimError("RSA encrypt failed");
        out.resize(out_len);
        return make_shared_bytes(std::move(out));
    }

    std::optional<SharedBytes> open_asym(UserId owner, const Sealed& s) override {
        EVP_PKEY* key = keypair(owner);
        EvpPkeyCtx ctx(EVP_PKEY_CTX_new(key, nullptr));
        if (!ctx || EVP_PKEY_decrypt_init(ctx.get()) != 1 ||
            EVP_PKEY_CTX_set_rsa_padding(ctx.get(), RSA_PKCS1_OAEP_PADDING) != 1)
            throw SimError("RSA decrypt init failed");
        std::size_t out_len = 0;
        if (EVP_PKEY_decrypt(ctx.get(), nullptr, &out_len, s.body->data(), s.body->size()) != 1)
            return std::nullopt;
        Bytes out(out_len);
        if (EVP_PKEY_decrypt(ctx.get(), out.data(), &out_len, s.body->data(), s.body->size()) != 1)
            return std::nullopt;
        out.resize(out_len);
        return make_shared_bytes(std::move(out));
    }

private:
    EVP_PKEY* keypair(UserId u) {
        auto it = keys_.find(u);
        if (it == keys_.end()) {
            EVP_PKEY* k = EVP_RSA_gen(2048);
            if (!k) throw SimError("RSA keygen failed");
            it = keys_.emplace(u, EvpPkey(k)).first;
        }
        return it->second.get();
    }

    std::map<UserId, EvpPkey> keys_;
};

} // namespace

// ---------------------------------------------------------------------------

CryptoService::CryptoService(CryptoBackendKind kind, CryptoCostParams params)
    : kind_(kind), params_(params) {
    params_.validate();
    if (kind == CryptoBackendKind::Model)
        backend_ = std::make_unique<ModelBackend>();
    else
        backend_ = std::make_unique<RealBackend>();
}

CryptoService::~CryptoService() = default;
CryptoService::CryptoService(CryptoService&&) noexcept = default;
CryptoService& CryptoService::operator=(CryptoService&&) noexcept = default;

SymKey CryptoService::gen_sym(OpLedger& led) {
    SymKey k;
    k.key_id = next_key_id_++;
    k.version = 1;
    backend_->fill_secret(k);
    led.keygen_count += 1;
    return k;
}

SymKey CryptoService::rotate_sym(const SymKey& k, OpLedger& led) {
    SymKey next;
    next.key_id = k.key_id;
    next.version = k.version + 1;
    backend_->fill_secret(next);
    led.keygen_count += 1;
    return next;
}

Sealed CryptoService::seal_sym(const SymKey& k, SharedBytes payload, OpLedger& led) {
    Sealed s;
    s.scheme = Sealed::Scheme::Sym;
    s.sym_ref = ref_of(k);
    s.canonical_size = payload->size(); // symmetric sealing does not expand
    s.body = backend_->seal_sym(k, payload);
    led.sym_enc_count += 1;
    led.sym_bytes_processed += payload->size();
    return s;
}

Sealed CryptoService::seal_sym(const SymKey& k, std::span<const std::uint8_t> payload, OpLedger& led) {
    return seal_sym(k, make_shared_bytes(Bytes(payload.begin(), payload.end())), led);
}

std::optional<SharedBytes> CryptoService::open_sym(const SymKey& k, const Sealed& s, OpLedger& led) {
    led.sym_dec_count += 1;
    led.sym_bytes_processed += s.canonical_size;
    if (s.scheme != Sealed::Scheme::Sym) return std::nullopt;
    return backend_->open_sym(k, s);
}

Sealed CryptoService::seal_asym(UserId recipient, SharedBytes payload, OpLedger& led) {
    if (payload->size() > kAsymPacketBytes) throw SimError("payload too large");
    Sealed s;
    s.scheme = Sealed::Scheme::Asym;
    s.recipient = recipient;
    s.canonical_size = kAsymPacketBytes; // 2048-bit packet regardless of input size
    s.body = backend_->seal_asym(recipient, payload);
    led.asym_enc_count += 1;
    return s;
}

Sealed CryptoService::seal_asym(UserId recipient, std::span<const std::uint8_t> payload, OpLedger& led) {
    return seal_asym(recipient, make_shared_bytes(Bytes(payload.begin(), payload.end())), led);
}

std::optional<SharedBytes> CryptoService::open_asym(UserId owner, const Sealed& s, OpLedger& led) {
    led.asym_dec_count += 1;
    if (s.scheme != Sealed::Scheme::Asym) return std::nullopt;
    return backend_->open_asym(owner, s);
}

} // namespace dosn
