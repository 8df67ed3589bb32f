#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "robin/divisors.hpp"
#include "robin/errors.hpp"
#include "robin/exact.hpp"
#include "robin/interval.hpp"
#include "robin/parallel.hpp"
#include "robin/sieve.hpp"

namespace robin {

struct ScanOptions {
    uint64_t block_size = 1ULL << 22;
    int thread_count = default_thread_count();
    uint64_t cap = 1'000'000'000; // largest allowed hi
    /// Half-width of the log-domain band inside which the floating fast
    /// path is not trusted and the verdict is re-derived with intervals.
    double guard_band = 1e-8;
    int digits = kDefaultDigits;
};

struct RangeReport {
    uint64_t lo = 0, hi = 0;
    uint64_t checked = 0;
    std::vector<uint64_t> violators;
    /// Certified enclosure of the minimum margin RHS - sigma(n)/n over the
    /// range (negative when violators exist).
    Interval min_margin;
    uint64_t min_margin_n = 0;
    uint64_t escalations = 0; // guard-band interval re-checks
    uint64_t undecided = 0;   // escalations that stayed undecided (expected 0)
};

namespace detail {

/// Exact sigma values for [lo, lo+len): blockwise smallest-prime-factor
/// decomposition against the base primes (which must cover sqrt(hi)).
inline void sigma_block(uint64_t lo, uint64_t len, const std::vector<uint32_t>& base,
                        std::vector<uint64_t>& rem, std::vector<uint64_t>& sig) {
    rem.resize(len);
    sig.assign(len, 1);
    for (uint64_t i = 0; i < len; ++i) rem[i] = lo + i;
    uint64_t hi = lo + len;
    for (uint32_t p : base) {
        uint64_t pp = uint64_t(p) * p;
        if (pp >= hi && uint64_t(p) >= hi) break;
        uint64_t start = ((lo + p - 1) / p) * uint64_t(p);
        for (uint64_t m = start; m < hi; m += p) {
            uint64_t idx = m - lo;
            uint64_t q = rem[idx], pk = 1;
            while (q % p == 0) {
                q /= p;
                pk *= p;
            }
            rem[idx] = q;
            sig[idx] *= (pk * p - 1) / (p - 1);
        }
    }
    for (uint64_t i = 0; i < len; ++i) {
        if (rem[i] > 1) sig[i] *= rem[i] + 1;
    }
}

} // namespace detail

/// Streams (n, sigma(n)) for n in [lo, hi], in order.
inline void sigma_sieve(uint64_t lo, uint64_t hi, uint64_t block_size,
                        const std::function<void(uint64_t, uint64_t)>& emit,
                        uint64_t cap = 1'000'000'000) {
    if (lo < 2 || hi < lo) throw std::invalid_argument("sigma_sieve requires 2 <= lo <= hi");
    if (hi > cap)
        throw CapacityError("sigma_sieve range exceeds cap " + std::to_string(cap));
    if (block_size < 1024) block_size = 1024;
    auto base = small_primes(static_cast<uint32_t>(isqrt_u64(hi)));
    std::vector<uint64_t> rem, sig;
    for (uint64_t blo = lo; blo <= hi; blo += block_size) {
        uint64_t len = std::min(block_size, hi - blo + 1);
        detail::sigma_block(blo, len, base, rem, sig);
        for (uint64_t i = 0; i < len; ++i) emit(blo + i, sig[i]);
    }
}

namespace detail {

/// Scan mode: the inequality sigma(n)/n < K * e^gamma * log log (M * n),
/// restricted to odd n when odd_only (Corollary-1 style scans use
/// M = 2^19 and K = 524288/1048575).
struct ScanMode {
    ExactRatio k_factor{1};
    unsigned long m_shift = 0; // log log (2^m_shift * n)
    bool odd_only = false;
};

struct BlockScanResult {
    uint64_t checked = 0;
    std::vector<uint64_t> violators;
    std::vector<uint64_t> band; // guard-band escalations
    uint64_t min_n = 0;
    double min_margin = std::numeric_limits<double>::infinity();
};

/// Certified verdict for one n: sigma/n < K e^gamma loglog(M n)?
/// Returns the margin enclosure as well.
inline std::pair<Order, Interval> certified_point_check(uint64_t n, uint64_t sigma_n,
                                                        const ScanMode& mode, int digits) {
    int d = std::min(digits, 40);
    while (true) {
        Interval logn = Interval::from_uint(n, d).log();
        if (mode.m_shift)
            logn += Interval::from_uint(2, d).log() * Interval::from_uint(mode.m_shift, d);
        Interval lhs = Interval::from_ratio(make_ratio(mpz_class(sigma_n), mpz_class(n)), d);
        Interval rhs = Interval::from_ratio(mode.k_factor, d) * Interval::exp_euler_gamma(d) *
                       logn.log();
        Interval margin = rhs - lhs;
        Order o;
        if (margin.strictly_positive()) o = Order::Less;        // inequality holds
        else if (margin.strictly_negative()) o = Order::Greater; // violated
        else o = Order::Undecided;
        if (o != Order::Undecided || d >= digits) return {o, margin};
        d = std::min(2 * d, digits);
    }
}

} // namespace detail

namespace detail {

inline RangeReport generic_scan(uint64_t lo, uint64_t hi, const ScanMode& mode,
                                const ScanOptions& opt) {
    if (lo < 2 || hi < lo) throw std::invalid_argument("scan requires 2 <= lo <= hi");
    if (hi > opt.cap)
        throw CapacityError("scan range exceeds cap " + std::to_string(opt.cap));
    auto base = small_primes(static_cast<uint32_t>(isqrt_u64(hi)));
    const double exp_gamma_d = 1.7810724179901979852; // fast path only
    const double k_d = mpq_get_d(mode.k_factor.get_mpq_t());
    const double shift_log = mode.m_shift * 0.6931471805599453;

    uint64_t n_blocks = (hi - lo) / opt.block_size + 1;
    auto blocks = indexed_parallel_map(n_blocks, opt.thread_count, [&](uint64_t bi) {
        BlockScanResult r;
        uint64_t blo = lo + bi * opt.block_size;
        uint64_t len = std::min(opt.block_size, hi - blo + 1);
        std::vector<uint64_t> rem, sig;
        sigma_block(blo, len, base, rem, sig);
        for (uint64_t i = 0; i < len; ++i) {
            uint64_t n = blo + i;
            if (mode.odd_only && (n & 1) == 0) continue;
            ++r.checked;
            double logn = std::log(static_cast<double>(n)) + shift_log;
            double loglog = std::log(logn);
            double rhs_log = std::log(k_d) + std::log(exp_gamma_d * loglog);
            double lhs_log = std::log(static_cast<double>(sig[i])) -
                             std::log(static_cast<double>(n));
            bool bad_domain = !(loglog > 0) || std::isnan(rhs_log);
            double L = lhs_log - rhs_log;
            double margin = std::isnan(rhs_log)
                                ? -std::numeric_limits<double>::infinity()
                                : k_d * exp_gamma_d * loglog -
                                      static_cast<double>(sig[i]) / static_cast<double>(n);
            if (margin < r.min_margin) {
                r.min_margin = margin;
                r.min_n = n;
            }
            if (bad_domain || L >= opt.guard_band) {
                r.violators.push_back(n);
            } else if (L > -opt.guard_band) {
                r.band.push_back(n);
            }
        }
        return r;
    });

    RangeReport rep;
    rep.lo = lo;
    rep.hi = hi;
    rep.min_margin = Interval::from_int(0, 30);
    double best = std::numeric_limits<double>::infinity();
    uint64_t best_n = 0;
    std::vector<uint64_t> to_certify_violators, to_certify_band;
    for (auto& b : blocks) {
        rep.checked += b.checked;
        for (uint64_t n : b.violators) to_certify_violators.push_back(n);
        for (uint64_t n : b.band) to_certify_band.push_back(n);
        if (b.min_margin < best) {
            best = b.min_margin;
            best_n = b.min_n;
        }
    }

    // Violators and guard-band cases get certified interval verdicts.
    auto sigma_of = [&](uint64_t n) {
        uint64_t s = 0;
        sigma_sieve(n, n, 1024, [&](uint64_t, uint64_t v) { s = v; }, opt.cap);
        return s;
    };
    for (uint64_t n : to_certify_violators) {
        auto [o, margin] = certified_point_check(n, sigma_of(n), mode, opt.digits);
        if (o == Order::Greater) rep.violators.push_back(n);
        else if (o == Order::Undecided) ++rep.undecided;
        // A fast-path violator that certifies as holding is kept out of the
        // list; it can only happen inside the guard band by construction.
    }
    rep.escalations = to_certify_band.size();
    for (uint64_t n : to_certify_band) {
        auto [o, margin] = certified_point_check(n, sigma_of(n), mode, opt.digits);
        if (o == Order::Greater) rep.violators.push_back(n);
        else if (o == Order::Undecided) ++rep.undecided;
    }
    std::sort(rep.violators.begin(), rep.violators.end());
    rep.violators.erase(std::unique(rep.violators.begin(), rep.violators.end()),
                        rep.violators.end());

    // Certified enclosure of the minimum margin: candidates within the
    // double-precision noise floor of the observed minimum.
    if (best_n != 0) {
        std::vector<uint64_t> candidates;
        for (auto& b : blocks) {
            if (b.min_n != 0 && b.min_margin <= best + 1e-9) candidates.push_back(b.min_n);
        }
        bool first = true;
        for (uint64_t n : candidates) {
            auto [o, margin] = certified_point_check(n, sigma_of(n), mode, opt.digits);
            (void)o;
            if (first) {
                rep.min_margin = margin;
                rep.min_margin_n = n;
                first = false;
                continue;
            }
            // Enclosure of min(a, b) is [min(a.lo, b.lo), min(a.hi, b.hi)].
            Interval merged(margin.digits());
            mpfr_min(merged.lo_mut(), rep.min_margin.lo(), margin.lo(), MPFR_RNDD);
            mpfr_min(merged.hi_mut(), rep.min_margin.hi(), margin.hi(), MPFR_RNDU);
            if (mpfr_less_p(margin.hi(), rep.min_margin.hi())) rep.min_margin_n = n;
            rep.min_margin = merged;
        }
    }
    return rep;
}

} // namespace detail

/// Violators of sigma(n)/n < e^gamma log log n over [lo, hi].
inline RangeReport robin_scan(uint64_t lo, uint64_t hi, const ScanOptions& opt = {}) {
    return detail::generic_scan(lo, hi, detail::ScanMode{}, opt);
}

/// Violators of sigma(n)/n < 1.0000005645 e^gamma log log n over [lo, hi].
inline RangeReport theorem4_scan(uint64_t lo, uint64_t hi, const ScanOptions& opt = {}) {
    detail::ScanMode mode;
    mode.k_factor = make_ratio(mpz_class("10000005645"), mpz_class("10000000000"));
    return detail::generic_scan(lo, hi, mode, opt);
}

/// Violators of sigma(c)/c < (524288/1048575) e^gamma log log(2^19 c) over
/// odd c in [lo, hi].
inline RangeReport corollary1_scan(uint64_t lo, uint64_t hi, const ScanOptions& opt = {}) {
    detail::ScanMode mode;
    mode.k_factor = make_ratio(524288, 1048575);
    mode.m_shift = 19;
    mode.odd_only = true;
    if (lo < 2) lo = 2; // c = 1 is checked separately (log log 2^19 is fine but sigma table starts at 2)
    return detail::generic_scan(lo, hi, mode, opt);
}

} // namespace robin
