#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace robin {

/// Exact rational in lowest terms (gmp keeps mpq_class canonical as long
/// as construction goes through canonicalize()).
using ExactRatio = mpq_class;

inline ExactRatio make_ratio(const mpz_class& num, const mpz_class& den) {
    if (den == 0) throw std::invalid_argument("ratio with zero denominator");
    ExactRatio q(num, den);
    q.canonicalize();
    return q;
}

inline ExactRatio make_ratio(long num, long den) {
    return make_ratio(mpz_class(num), mpz_class(den));
}

inline mpz_class pow_z(const mpz_class& base, unsigned long e) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

inline mpz_class pow_z(unsigned long base, unsigned long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, e);
    return r;
}

/// Truncated decimal expansion of a rational: "i.ffff" with exactly
/// `frac_digits` digits after the point (no rounding, digits as printed
/// by long division).
inline std::string decimal_prefix(const ExactRatio& q, int frac_digits) {
    if (q < 0) throw std::invalid_argument("decimal_prefix expects a non-negative rational");
    mpz_class ip = q.get_num() / q.get_den();
    mpz_class scaled = (q.get_num() * pow_z(mpz_class(10), frac_digits)) / q.get_den();
    mpz_class frac = scaled - ip * pow_z(mpz_class(10), frac_digits);
    std::string fs = frac.get_str();
    if (static_cast<int>(fs.size()) < frac_digits)
        fs.insert(fs.begin(), frac_digits - fs.size(), '0');
    return ip.get_str() + "." + fs;
}

/// Round-to-nearest decimal rendering with `frac_digits` digits after the
/// point (what numerical environments print).
inline std::string decimal_rounded(const ExactRatio& q, int frac_digits) {
    if (q < 0) throw std::invalid_argument("decimal_rounded expects a non-negative rational");
    mpz_class scale = pow_z(mpz_class(10), frac_digits);
    mpz_class scaled_twice = (q.get_num() * scale * 2 + q.get_den()) / (q.get_den() * 2);
    mpz_class ip = scaled_twice / scale;
    mpz_class frac = scaled_twice - ip * scale;
    std::string fs = frac.get_str();
    if (static_cast<int>(fs.size()) < frac_digits)
        fs.insert(fs.begin(), frac_digits - fs.size(), '0');
    return ip.get_str() + "." + fs;
}

/// FNV-1a 64-bit digest, rendered as fixed-width hex; used to stamp
/// artifacts with a deterministic input/content fingerprint.
class Fnv1a64 {
public:
    void update(std::string_view s) {
        for (unsigned char c : s) {
            h_ ^= c;
            h_ *= 0x100000001b3ULL;
        }
    }
    std::string hex() const {
        static const char* k = "0123456789abcdef";
        std::string out(16, '0');
        uint64_t v = h_;
        for (int i = 15; i >= 0; --i) {
            out[i] = k[v & 0xf];
            v >>= 4;
        }
        return out;
    }
    uint64_t value() const { return h_; }

private:
    uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string fnv1a64_hex(std::string_view s) {
    Fnv1a64 f;
    f.update(s);
    return f.hex();
}

} // namespace robin
