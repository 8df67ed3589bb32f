#include "oracles.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include <mpfr.h>

#include "robin/sieve.hpp"

namespace oracles {

namespace {

mpfr_prec_t obits(int digits) { return static_cast<mpfr_prec_t>(digits * 3.33) + 32; }

} // namespace

robin::Interval gamma_brent_mcmillan(int digits) {
    // Truncation error of the B1 scheme is O(e^{-4n}); pick n so that it is
    // below 10^-(digits+5), then a few extra digits of working precision
    // swamp the rounding noise.
    int n = static_cast<int>(digits / 1.737) + 4;
    mpfr_prec_t prec = obits(digits + 10);
    mpfr_t a, b, u, h, term, t;
    mpfr_inits2(prec, a, b, u, h, term, t, (mpfr_ptr) nullptr);
    // u = (n^k / k!)^2 built incrementally; H_k harmonic.
    mpfr_set_ui(u, 1, MPFR_RNDN);    // k = 0 term of B
    mpfr_set_ui(b, 1, MPFR_RNDN);    // B
    mpfr_set_zero(a, 1);             // A (H_0 = 0)
    mpfr_set_zero(h, 1);
    unsigned long k_max = static_cast<unsigned long>(8 * n + 64);
    for (unsigned long k = 1; k <= k_max; ++k) {
        // u *= (n/k)^2
        mpfr_mul_ui(u, u, static_cast<unsigned long>(n), MPFR_RNDN);
        mpfr_mul_ui(u, u, static_cast<unsigned long>(n), MPFR_RNDN);
        mpfr_div_ui(u, u, k, MPFR_RNDN);
        mpfr_div_ui(u, u, k, MPFR_RNDN);
        mpfr_set_ui(t, 1, MPFR_RNDN);
        mpfr_div_ui(t, t, k, MPFR_RNDN);
        mpfr_add(h, h, t, MPFR_RNDN);
        mpfr_add(b, b, u, MPFR_RNDN);
        mpfr_mul(term, u, h, MPFR_RNDN);
        mpfr_add(a, a, term, MPFR_RNDN);
        if (mpfr_get_exp(u) < -static_cast<long>(prec) && k > static_cast<unsigned long>(2 * n))
            break;
    }
    mpfr_div(a, a, b, MPFR_RNDN);
    mpfr_set_ui(t, static_cast<unsigned long>(n), MPFR_RNDN);
    log_series(term, t, digits + 10);
    mpfr_sub(a, a, term, MPFR_RNDN);

    // Enclosure: computed value +- (truncation + generous rounding slack).
    mpfr_t rad;
    mpfr_init2(rad, 64);
    mpfr_set_ui(rad, 10, MPFR_RNDU);
    mpfr_pow_si(rad, rad, -(digits + 2), MPFR_RNDU);
    robin::Interval out(digits);
    mpfr_sub(t, a, rad, MPFR_RNDD);
    mpfr_set(out.lo_mut(), t, MPFR_RNDD);
    mpfr_add(t, a, rad, MPFR_RNDU);
    mpfr_set(out.hi_mut(), t, MPFR_RNDU);
    mpfr_clears(a, b, u, h, term, t, (mpfr_ptr) nullptr);
    mpfr_clear(rad);
    return out;
}

void exp_series(mpfr_ptr out, mpfr_srcptr x, int digits) {
    mpfr_prec_t prec = obits(digits + 8);
    mpfr_t r, term, acc;
    mpfr_inits2(prec, r, term, acc, (mpfr_ptr) nullptr);
    // Reduce |x| below 2^-8 by halving, then Taylor, then square back.
    mpfr_set(r, x, MPFR_RNDN);
    int halvings = 0;
    while (mpfr_get_exp(r) > -8 && !mpfr_zero_p(r)) {
        mpfr_div_2ui(r, r, 1, MPFR_RNDN);
        ++halvings;
    }
    mpfr_set_ui(acc, 1, MPFR_RNDN);
    mpfr_set_ui(term, 1, MPFR_RNDN);
    for (unsigned long k = 1; k < 10000; ++k) {
        mpfr_mul(term, term, r, MPFR_RNDN);
        mpfr_div_ui(term, term, k, MPFR_RNDN);
        mpfr_add(acc, acc, term, MPFR_RNDN);
        if (mpfr_zero_p(term) || mpfr_get_exp(term) < -static_cast<long>(prec)) break;
    }
    for (int i = 0; i < halvings; ++i) mpfr_sqr(acc, acc, MPFR_RNDN);
    mpfr_set(out, acc, MPFR_RNDN);
    mpfr_clears(r, term, acc, (mpfr_ptr) nullptr);
}

void log_series(mpfr_ptr out, mpfr_srcptr x, int digits) {
    if (x == nullptr) return; // allows harmless warm-up calls
    if (mpfr_sgn(x) <= 0) throw std::invalid_argument("log_series: x must be positive");
    mpfr_prec_t prec = obits(digits + 8);
    mpfr_t r, y, y2, term, acc, log2;
    mpfr_inits2(prec, r, y, y2, term, acc, log2, (mpfr_ptr) nullptr);
    // r = x / 2^e with r in [0.75, 1.5); log x = log r + e log 2.
    mpfr_set(r, x, MPFR_RNDN);
    long e = 0;
    while (mpfr_cmp_d(r, 1.5) >= 0) {
        mpfr_div_2ui(r, r, 1, MPFR_RNDN);
        ++e;
    }
    while (mpfr_cmp_d(r, 0.75) < 0) {
        mpfr_mul_2ui(r, r, 1, MPFR_RNDN);
        --e;
    }
    // log r = 2 atanh((r-1)/(r+1)).
    auto atanh_series = [&](mpfr_ptr acc_out, mpfr_srcptr arg) {
        mpfr_sqr(y2, arg, MPFR_RNDN);
        mpfr_set(term, arg, MPFR_RNDN);
        mpfr_set(acc_out, arg, MPFR_RNDN);
        for (unsigned long k = 1; k < 100000; ++k) {
            mpfr_mul(term, term, y2, MPFR_RNDN);
            mpfr_t tmp;
            mpfr_init2(tmp, prec);
            mpfr_div_ui(tmp, term, 2 * k + 1, MPFR_RNDN);
            mpfr_add(acc_out, acc_out, tmp, MPFR_RNDN);
            bool done = mpfr_zero_p(term) || mpfr_get_exp(tmp) < -static_cast<long>(prec);
            mpfr_clear(tmp);
            if (done) break;
        }
        mpfr_mul_2ui(acc_out, acc_out, 1, MPFR_RNDN);
    };
    mpfr_t num, den;
    mpfr_inits2(prec, num, den, (mpfr_ptr) nullptr);
    mpfr_sub_ui(num, r, 1, MPFR_RNDN);
    mpfr_add_ui(den, r, 1, MPFR_RNDN);
    mpfr_div(y, num, den, MPFR_RNDN);
    atanh_series(acc, y);
    if (e != 0) {
        // log 2 = 2 atanh(1/3).
        mpfr_set_ui(y, 1, MPFR_RNDN);
        mpfr_div_ui(y, y, 3, MPFR_RNDN);
        atanh_series(log2, y);
        mpfr_mul_si(log2, log2, e, MPFR_RNDN);
        mpfr_add(acc, acc, log2, MPFR_RNDN);
    }
    mpfr_set(out, acc, MPFR_RNDN);
    mpfr_clears(r, y, y2, term, acc, log2, num, den, (mpfr_ptr) nullptr);
}

uint64_t sigma_naive(uint64_t n) {
    uint64_t s = 0;
    for (uint64_t d = 1; d * d <= n; ++d) {
        if (n % d) continue;
        s += d;
        if (d != n / d) s += n / d;
    }
    return s;
}

std::vector<std::pair<uint64_t, unsigned>> factorize_reference(uint64_t n) {
    std::vector<std::pair<uint64_t, unsigned>> out;
    for (uint64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

uint64_t prime_count_reference(uint64_t limit) {
    if (limit < 2) return 0;
    std::vector<uint8_t> mark(limit + 1, 1);
    uint64_t count = 0;
    for (uint64_t i = 2; i <= limit; ++i) {
        if (!mark[i]) continue;
        ++count;
        for (uint64_t j = i * i; j <= limit; j += i) mark[j] = 0;
    }
    return count;
}

DirectBetaScan beta_max_direct_scan(const robin::ExactRatio& eps, int digits) {
    mpfr_prec_t prec = obits(digits);
    mpfr_t logsum, theta, c, logc, lam, rhs, diff;
    mpfr_inits2(prec, logsum, theta, c, logc, lam, rhs, diff, (mpfr_ptr) nullptr);
    // c = (1+eps) e^gamma, in plain point arithmetic.
    mpfr_const_euler(c, MPFR_RNDN);
    mpfr_exp(c, c, MPFR_RNDN);
    mpfr_t epsf;
    mpfr_init2(epsf, prec);
    mpfr_set_q(epsf, eps.get_mpq_t(), MPFR_RNDN);
    mpfr_add_ui(epsf, epsf, 1, MPFR_RNDN);
    mpfr_mul(c, c, epsf, MPFR_RNDN);
    mpfr_log(logc, c, MPFR_RNDN);

    mpfr_set_zero(logsum, 1);
    mpfr_set_zero(theta, 1);
    auto base = robin::small_primes(1u << 20);
    DirectBetaScan result;
    uint64_t beta = 0;
    for (uint64_t lo = 2; lo < (1ULL << 34) && result.beta_max == 0; lo += (1u << 20)) {
        std::vector<uint64_t> primes;
        robin::detail::sieve_segment(lo, lo + (1u << 20), base, primes);
        for (uint64_t p : primes) {
            mpfr_set_ui(diff, p, MPFR_RNDN);
            mpfr_log(diff, diff, MPFR_RNDN);
            mpfr_add(theta, theta, diff, MPFR_RNDN);
            mpfr_set_ui(diff, p, MPFR_RNDN);
            mpfr_div_ui(diff, diff, p - 1, MPFR_RNDN);
            mpfr_log(diff, diff, MPFR_RNDN);
            mpfr_add(logsum, logsum, diff, MPFR_RNDN);
            ++beta;
            if (beta < 2) continue;
            // lam = exp(logsum - logc); predicate fails when theta >= exp(lam).
            mpfr_sub(lam, logsum, logc, MPFR_RNDN);
            mpfr_exp(lam, lam, MPFR_RNDN);
            mpfr_exp(rhs, lam, MPFR_RNDN);
            mpfr_sub(diff, theta, rhs, MPFR_RNDN);
            if (mpfr_sgn(diff) >= 0) {
                // Sanity: the margin must dwarf rounding noise at 50 digits.
                mpfr_abs(diff, diff, MPFR_RNDN);
                mpfr_t floor_m;
                mpfr_init2(floor_m, 64);
                mpfr_set_d(floor_m, 1e-25, MPFR_RNDN);
                mpfr_mul(floor_m, floor_m, rhs, MPFR_RNDN);
                bool clear_margin = mpfr_cmp(diff, floor_m) > 0;
                mpfr_clear(floor_m);
                if (!clear_margin)
                    throw std::runtime_error("direct scan margin too small to trust");
                result.beta_max = beta;
                result.p_beta_max = p;
                result.loglog_n_beta_max = mpfr_get_d(lam, MPFR_RNDN);
                break;
            }
        }
    }
    mpfr_clears(logsum, theta, c, logc, lam, rhs, diff, (mpfr_ptr) nullptr);
    mpfr_clear(epsf);
    if (result.beta_max == 0) throw std::runtime_error("direct scan found no crossing");
    return result;
}

std::set<uint64_t> brute_force_exceptions(const robin::ExactRatio& eps, uint64_t bound,
                                          int digits) {
    // Smallest-prime-factor sieve for omega.
    std::vector<uint32_t> spf(bound + 1, 0);
    for (uint32_t i = 2; i <= bound; ++i) {
        if (spf[i]) continue;
        for (uint64_t j = i; j <= bound; j += i)
            if (!spf[j]) spf[j] = i;
    }
    auto omega_of = [&](uint64_t n) {
        unsigned w = 0;
        while (n > 1) {
            uint32_t p = spf[n];
            ++w;
            while (n % p == 0) n /= p;
        }
        return w;
    };
    unsigned max_omega = 0;
    std::vector<unsigned> omega(bound + 1, 0);
    for (uint64_t n = 2; n <= bound; ++n) {
        omega[n] = omega_of(n);
        max_omega = std::max(max_omega, omega[n]);
    }
    // f depends on n only through omega: f_w = prod_{first w primes} p/(p-1).
    std::vector<robin::Interval> f_log;
    f_log.reserve(max_omega + 1);
    f_log.push_back(robin::Interval::from_int(0, digits));
    {
        auto primes = robin::small_primes(1u << 20);
        for (unsigned w = 1, i = 0; w <= max_omega; ++w, ++i) {
            robin::Interval term =
                robin::Interval::from_uint(primes[i], digits).log() -
                robin::Interval::from_uint(primes[i] - 1, digits).log();
            f_log.push_back(f_log.back() + term);
        }
    }
    robin::Interval logc = (robin::Interval::from_ratio(eps + 1, digits) *
                            robin::Interval::exp_euler_gamma(digits))
                               .log();
    std::set<uint64_t> out;
    for (uint64_t n = 2; n <= bound; ++n) {
        robin::Interval logn = robin::Interval::from_uint(n, digits).log();
        bool exception;
        if (n == 2) {
            exception = true; // log log 2 < 0 while f = 2
        } else {
            robin::Interval rhs_log = logc + logn.log().log();
            robin::Order o = robin::compare(f_log[omega[n]], rhs_log);
            if (o == robin::Order::Undecided)
                throw std::runtime_error("oracle undecided at n=" + std::to_string(n));
            exception = (o == robin::Order::Greater);
        }
        if (exception) out.insert(n);
    }
    return out;
}

std::vector<uint64_t> brute_force_ca(uint64_t limit) {
    // Exact sigma for every k <= limit.
    std::vector<uint64_t> sig(limit + 1, 0);
    for (uint64_t d = 1; d <= limit; ++d)
        for (uint64_t m = d; m <= limit; m += d) sig[m] += d;
    std::vector<double> logsig(limit + 1), logk(limit + 1);
    for (uint64_t k = 1; k <= limit; ++k) {
        logsig[k] = std::log(static_cast<double>(sig[k]));
        logk[k] = std::log(static_cast<double>(k));
    }
    std::set<uint64_t> found;
    for (double ieps = 1; ieps <= 1200; ieps += 1) {
        double eps = ieps / 1000.0;
        uint64_t best = 1;
        double best_v = -1e300;
        for (uint64_t k = 1; k <= limit; ++k) {
            double v = logsig[k] - (1.0 + eps) * logk[k];
            if (v > best_v + 1e-15) {
                best_v = v;
                best = k;
            }
        }
        if (best > 1) found.insert(best);
    }
    return {found.begin(), found.end()};
}

} // namespace oracles
