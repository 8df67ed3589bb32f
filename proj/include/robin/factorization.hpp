#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "robin/errors.hpp"
#include "robin/exact.hpp"

namespace robin {

struct PrimePower {
    mpz_class prime;
    unsigned exponent = 1;

    bool operator==(const PrimePower& o) const {
        return prime == o.prime && exponent == o.exponent;
    }
};

namespace detail {

// Deterministic Miller-Rabin witness set, proven complete below this bound
// (Sorenson & Webster): first 13 primes decide primality for all smaller n.
inline const mpz_class& deterministic_mr_bound() {
    static const mpz_class b("3317044064679887385961981");
    return b;
}

inline bool miller_rabin_witness(const mpz_class& n, const mpz_class& a,
                                 const mpz_class& d, unsigned long s) {
    mpz_class x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n - 1) return false;
    for (unsigned long i = 1; i < s; ++i) {
        x = (x * x) % n;
        if (x == n - 1) return false;
    }
    return true; // composite witness
}

} // namespace detail

/// Deterministic primality for n below ~3.3e24; larger inputs are outside
/// the toolkit's certification ceiling and are rejected.
inline bool is_prime(const mpz_class& n) {
    if (n < 2) return false;
    static const unsigned long small[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37};
    for (unsigned long p : small) {
        if (n == p) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
    }
    if (n >= detail::deterministic_mr_bound())
        throw CapacityError("primality certification ceiling (3.3e24) exceeded: " +
                            n.get_str().substr(0, 24) + "...");
    mpz_class d = n - 1;
    unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
    mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
    for (unsigned long a : small) {
        if (detail::miller_rabin_witness(n, mpz_class(a), d, s)) return false;
    }
    return true;
}

/// Exact prime-power decomposition, primes strictly increasing.
class Factorization {
public:
    Factorization() = default;

    /// Validating constructor: primes strictly increasing, certified prime,
    /// exponents >= 1.
    static Factorization from_factors(std::vector<PrimePower> f) {
        for (size_t i = 0; i < f.size(); ++i) {
            if (f[i].exponent < 1)
                throw std::invalid_argument("factor exponent must be >= 1");
            if (i > 0 && f[i].prime <= f[i - 1].prime)
                throw std::invalid_argument("factor primes must be strictly increasing");
            if (!is_prime(f[i].prime))
                throw std::invalid_argument("not a prime: " + f[i].prime.get_str());
        }
        Factorization r;
        r.factors_ = std::move(f);
        return r;
    }

    /// Fast path for factors that are prime by construction (sieve output).
    static Factorization unchecked(std::vector<PrimePower> f) {
        Factorization r;
        r.factors_ = std::move(f);
        return r;
    }

    const std::vector<PrimePower>& factors() const { return factors_; }
    bool empty() const { return factors_.empty(); }

    /// omega(n): number of distinct prime divisors.
    size_t omega() const { return factors_.size(); }

    mpz_class value() const {
        mpz_class v = 1;
        for (const auto& f : factors_) v *= pow_z(f.prime, f.exponent);
        return v;
    }

    /// nu_p(n): exponent of p, 0 if absent; p must be prime.
    unsigned p_adic_order(const mpz_class& p) const {
        if (!is_prime(p))
            throw std::invalid_argument("p_adic_order: " + p.get_str() + " is not prime");
        for (const auto& f : factors_) {
            if (f.prime == p) return f.exponent;
            if (f.prime > p) break;
        }
        return 0;
    }

    /// "2^4*3^2*5*7"; "1" for the empty product.
    std::string to_string() const {
        if (factors_.empty()) return "1";
        std::string s;
        for (size_t i = 0; i < factors_.size(); ++i) {
            if (i) s += "*";
            s += factors_[i].prime.get_str();
            if (factors_[i].exponent != 1) s += "^" + std::to_string(factors_[i].exponent);
        }
        return s;
    }

    /// Parses the to_string() syntax; validates primality and ordering.
    static Factorization parse(const std::string& text) {
        if (text == "1") return Factorization();
        std::vector<PrimePower> fs;
        size_t pos = 0;
        while (pos <= text.size()) {
            size_t star = text.find('*', pos);
            std::string tok = text.substr(pos, star == std::string::npos ? star : star - pos);
            if (tok.empty()) throw std::invalid_argument("empty factor in: " + text);
            size_t caret = tok.find('^');
            PrimePower pp;
            try {
                pp.prime = mpz_class(caret == std::string::npos ? tok : tok.substr(0, caret));
                pp.exponent = caret == std::string::npos
                                  ? 1
                                  : static_cast<unsigned>(std::stoul(tok.substr(caret + 1)));
            } catch (const std::exception&) {
                throw std::invalid_argument("bad factor token: " + tok);
            }
            fs.push_back(std::move(pp));
            if (star == std::string::npos) break;
            pos = star + 1;
        }
        return from_factors(std::move(fs));
    }

    bool operator==(const Factorization& o) const { return factors_ == o.factors_; }

private:
    std::vector<PrimePower> factors_;
};

namespace detail {

inline const std::vector<unsigned long>& trial_primes() {
    // Primes below 10^4: the deterministic trial-division stage.
    static const std::vector<unsigned long> ps = [] {
        std::vector<unsigned long> v;
        std::vector<bool> mark(10000, true);
        for (unsigned long i = 2; i < 10000; ++i) {
            if (!mark[i]) continue;
            v.push_back(i);
            for (unsigned long j = i * i; j < 10000; j += i) mark[j] = false;
        }
        return v;
    }();
    return ps;
}

/// Brent-cycle Pollard rho; returns a nontrivial factor of composite n.
inline mpz_class pollard_brent(const mpz_class& n, gmp_randclass& rng) {
    if (mpz_even_p(n.get_mpz_t())) return 2;
    const unsigned long budget = 1UL << 24; // covers prime factors up to ~10^13
    for (int attempt = 0; attempt < 4; ++attempt) {
        mpz_class y = rng.get_z_range(n - 3) + 2;
        mpz_class c = rng.get_z_range(n - 2) + 1;
        mpz_class x, ys, q = 1, g = 1;
        unsigned long r = 1, total = 0;
        const unsigned long m = 128;
        while (g == 1 && total < budget) {
            x = y;
            for (unsigned long i = 0; i < r; ++i) y = (y * y + c) % n;
            for (unsigned long k = 0; k < r && g == 1; k += m) {
                ys = y;
                unsigned long lim = std::min(m, r - k);
                for (unsigned long i = 0; i < lim; ++i) {
                    y = (y * y + c) % n;
                    q = q * (x > y ? x - y : y - x) % n;
                }
                mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
                total += lim;
            }
            r *= 2;
        }
        if (g == n) {
            // The batched gcd overshot; replay the last batch one step at a time.
            g = 1;
            for (unsigned long i = 0; i < m && g == 1; ++i) {
                ys = (ys * ys + c) % n;
                mpz_class d = x > ys ? x - ys : ys - x;
                mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
            }
        }
        if (g != 1 && g != n) return g;
    }
    throw CapacityError("factorization budget exhausted for composite cofactor");
}

inline void factor_rec(const mpz_class& n, std::vector<mpz_class>& out, gmp_randclass& rng) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    // Perfect powers first: cheap and keeps rho away from p^k.
    if (mpz_perfect_power_p(n.get_mpz_t())) {
        for (unsigned long k = 2; k <= mpz_sizeinbase(n.get_mpz_t(), 2); ++k) {
            mpz_class root;
            if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0) {
                for (unsigned long i = 0; i < k; ++i) factor_rec(root, out, rng);
                return;
            }
        }
    }
    mpz_class d = pollard_brent(n, rng);
    factor_rec(d, out, rng);
    factor_rec(n / d, out, rng);
}

} // namespace detail

/// Exact factorization of n >= 1 (n = 1 yields the empty sequence).
/// Deterministic trial division below 10^4, then deterministic-Miller-Rabin
/// primality with Pollard-Brent splitting; cofactors beyond the
/// certification ceiling raise CapacityError instead of running forever.
inline Factorization factorize(const mpz_class& n) {
    if (n < 1) throw std::invalid_argument("factorize requires n >= 1");
    std::vector<PrimePower> fs;
    mpz_class rest = n;
    for (unsigned long p : detail::trial_primes()) {
        if (rest == 1) break;
        if (mpz_class(p) * p > rest) break;
        if (!mpz_divisible_ui_p(rest.get_mpz_t(), p)) continue;
        unsigned e = 0;
        while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
            rest /= p;
            ++e;
        }
        fs.push_back({mpz_class(p), e});
    }
    if (rest > 1) {
        static thread_local gmp_randclass rng(gmp_randinit_mt);
        std::vector<mpz_class> primes;
        detail::factor_rec(rest, primes, rng);
        std::sort(primes.begin(), primes.end());
        for (size_t i = 0; i < primes.size();) {
            size_t j = i;
            while (j < primes.size() && primes[j] == primes[i]) ++j;
            fs.push_back({primes[i], static_cast<unsigned>(j - i)});
            i = j;
        }
        std::sort(fs.begin(), fs.end(),
                  [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
    }
    return Factorization::unchecked(std::move(fs));
}

inline Factorization factorize(unsigned long n) { return factorize(mpz_class(n)); }

} // namespace robin
