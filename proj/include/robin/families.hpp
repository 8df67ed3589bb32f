#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "robin/divisors.hpp"
#include "robin/errors.hpp"
#include "robin/exact.hpp"
#include "robin/factorization.hpp"
#include "robin/interval.hpp"

namespace robin {

/// Exponent families with a guaranteed Robin verdict for n > 5040.
struct FamilyVerdict {
    bool guaranteed = false;
    std::vector<std::string> witnesses;
    unsigned nu2 = 0, nu3 = 0, nu5 = 0, nu7 = 0, nu11 = 0;
    /// Smallest k with k log 2 > (log 2^19 c)^(1048576/1048575) - log c,
    /// for c the odd part (the derived real inequality)...
    uint64_t nu2_threshold_real = 0;
    /// ...and the ceiled variant as printed in the source theorem,
    /// k > ceil(RHS / log 2), stricter by one.
    uint64_t nu2_threshold_ceiled = 0;
};

namespace detail {

/// RHS/log2 of the 2-adic threshold condition, from an enclosure of log c.
inline Interval nu2_threshold_rhs_over_log2(const Interval& log_c, int digits) {
    Interval log2 = Interval::from_int(2, digits).log();
    Interval x = log2 * Interval::from_int(19, digits) + log_c; // log(2^19 c)
    Interval exponent = Interval::from_ratio(make_ratio(1048576, 1048575), digits);
    Interval rhs = x.pow(exponent) - log_c;
    return rhs / log2;
}

/// Certified minimal integer k with k > r, refining log c when the
/// enclosure of r straddles an integer.
inline uint64_t minimal_k_above(const std::function<Interval(int)>& log_c_at, int digits,
                                int max_digits) {
    int d = std::min(digits, 50);
    while (true) {
        Interval r = nu2_threshold_rhs_over_log2(log_c_at(d), d);
        mpz_class flo, fhi;
        mpfr_get_z(flo.get_mpz_t(), r.lo(), MPFR_RNDD);
        mpfr_get_z(fhi.get_mpz_t(), r.hi(), MPFR_RNDD);
        if (flo == fhi && flo >= 0) return mpz_get_ui(flo.get_mpz_t()) + 1;
        if (d >= max_digits)
            throw PrecisionError("nu2 threshold boundary undecided at " + std::to_string(d) +
                                 " digits");
        d = std::min(2 * d, max_digits);
    }
}

} // namespace detail

/// Smallest integer k whose 2-adic order makes Robin's inequality certain
/// for n = 2^k c: k log 2 > (log 2^19 c)^(1048576/1048575) - log c.
/// c must be odd and >= 1.
inline uint64_t nu2_threshold(const mpz_class& c, int digits = kDefaultDigits,
                              int max_digits = 1600) {
    if (c < 1 || mpz_even_p(c.get_mpz_t()))
        throw std::invalid_argument("nu2_threshold requires an odd positive c");
    auto log_c_at = [&](int d) {
        return c == 1 ? Interval::from_int(0, d) : Interval::from_bigint(c, d).log();
    };
    return detail::minimal_k_above(log_c_at, digits, max_digits);
}

/// Same threshold from an enclosure of log c (for c too large to hold).
inline uint64_t nu2_threshold_from_log(const std::function<Interval(int)>& log_c_at,
                                       int digits = kDefaultDigits, int max_digits = 1600) {
    return detail::minimal_k_above(log_c_at, digits, max_digits);
}

/// Family classification for factored n > 5040.  The exponent witnesses
/// are exact; the 2-adic threshold witness follows the ceiled (strict)
/// form, with both threshold variants reported.
inline FamilyVerdict classify(const Factorization& f, int digits = kDefaultDigits) {
    // Domain check without materializing n: log n > log 5040.
    Interval logn = log_value(f, std::min(digits, 40));
    Order dom = compare(logn, Interval::from_int(5040, std::min(digits, 40)).log());
    if (dom != Order::Greater)
        throw std::domain_error("classify requires n > 5040");

    FamilyVerdict v;
    v.nu2 = f.p_adic_order(2);
    v.nu3 = f.p_adic_order(3);
    v.nu5 = f.p_adic_order(5);
    v.nu7 = f.p_adic_order(7);
    v.nu11 = f.p_adic_order(11);
    if (v.nu2 <= 19) v.witnesses.push_back("nu2 <= 19");
    if (v.nu3 <= 12) v.witnesses.push_back("nu3 <= 12");
    if (v.nu5 <= 7) v.witnesses.push_back("nu5 <= 7");
    if (v.nu7 <= 6) v.witnesses.push_back("nu7 <= 6");
    if (v.nu11 <= 5) v.witnesses.push_back("nu11 <= 5");

    // 2-adic threshold on the odd part, via log c enclosures.
    auto log_c_at = [&](int d) {
        Interval acc = Interval::from_int(0, d);
        for (const auto& pp : f.factors()) {
            if (pp.prime == 2) continue;
            acc += Interval::from_bigint(pp.prime, d).log() *
                   Interval::from_uint(pp.exponent, d);
        }
        return acc;
    };
    v.nu2_threshold_real = detail::minimal_k_above(log_c_at, digits, 1600);
    v.nu2_threshold_ceiled = v.nu2_threshold_real + 1;
    if (v.nu2 >= v.nu2_threshold_ceiled)
        v.witnesses.push_back("nu2 above threshold (" + std::to_string(v.nu2) + " > " +
                              std::to_string(v.nu2_threshold_real) + ")");
    v.guaranteed = !v.witnesses.empty();
    return v;
}

/// Certified verdict of sigma(c)/c < (524288/1048575) e^gamma log log(2^19 c)
/// for a single odd c (scanning mode lives in corollary1_scan).
inline Verdict corollary1_bound_check(const mpz_class& c, int max_digits = kDefaultDigits) {
    if (c < 1 || mpz_even_p(c.get_mpz_t()))
        throw std::invalid_argument("corollary1_bound_check requires odd positive c");
    Factorization f = factorize(c);
    int d = std::min(max_digits, 40);
    while (true) {
        Interval lhs_log = log_sigma_over_n(f, d); // log(sigma(c)/c), 0 for c = 1
        Interval log2 = Interval::from_int(2, d).log();
        Interval logarg = log2 * Interval::from_int(19, d) +
                          (c == 1 ? Interval::from_int(0, d) : Interval::from_bigint(c, d).log());
        Interval rhs = Interval::from_ratio(make_ratio(524288, 1048575), d) *
                       Interval::exp_euler_gamma(d) * logarg.log();
        // rhs > 0 for every c >= 1 since log log 2^19 > 0.
        Order o = compare(lhs_log, rhs.log());
        if (o == Order::Less) return Verdict::Holds;
        if (o == Order::Greater) return Verdict::Fails;
        if (d >= max_digits) return Verdict::Undecided;
        d = std::min(2 * d, max_digits);
    }
}

/// Certified verdict of sigma(n)/n < 1.0000005645 e^gamma log log n for
/// factored n > 5040.
inline Verdict unconditional_bound_check(const Factorization& f, int max_digits = kDefaultDigits) {
    int dc = std::min(max_digits, 40);
    if (compare(log_value(f, dc), Interval::from_int(5040, dc).log()) != Order::Greater)
        throw std::domain_error("unconditional_bound_check requires n > 5040");
    ExactRatio k = make_ratio(mpz_class("10000005645"), mpz_class("10000000000"));
    int d = dc;
    while (true) {
        Interval lhs_log = log_sigma_over_n(f, d);
        Interval rhs = Interval::from_ratio(k, d) * Interval::exp_euler_gamma(d) *
                       log_value(f, d).log();
        Order o = compare(lhs_log, rhs.log());
        if (o == Order::Less) return Verdict::Holds;
        if (o == Order::Greater) return Verdict::Fails;
        if (d >= max_digits) return Verdict::Undecided;
        d = std::min(2 * d, max_digits);
    }
}

// ---------------------------------------------------------------------------
// Exact verification of the constant chains used in the proofs.

struct ConstantCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ConstantsReport {
    std::vector<ConstantCheck> checks;
    bool all_pass = true;

    void add(std::string name, bool pass, std::string detail) {
        all_pass = all_pass && pass;
        checks.push_back({std::move(name), pass, std::move(detail)});
    }
};

inline ConstantsReport verify_proof_constants(int digits = kDefaultDigits) {
    ConstantsReport rep;

    // (1048575/1048576) * (1771561/1771560) < 1, exactly.
    {
        mpz_class lhs = mpz_class(1048575) * 1771561;
        mpz_class rhs = mpz_class(1048576) * 1771560;
        rep.add("even_times_phi_product_below_one", lhs < rhs,
                "1048575*1771561 = " + lhs.get_str() + " vs 1048576*1771560 = " + rhs.get_str() +
                    " (difference " + mpz_class(rhs - lhs).get_str() + ")");
    }

    // Factor ordering behind the p-adic cases:
    // (1-1/5^8) < (1-1/7^7) < (1-1/3^13) < (1-1/11^6)  <=>  5^8 < 7^7 < 3^13 < 11^6.
    {
        mpz_class a = pow_z(5, 8), b = pow_z(7, 7), c = pow_z(3, 13), d = pow_z(11, 6);
        bool ok = a < b && b < c && c < d;
        rep.add("padic_factor_ordering", ok,
                a.get_str() + " < " + b.get_str() + " < " + c.get_str() + " < " + d.get_str());
    }

    // Monotone chain (1 - 2^-2) < (1 - 2^-3) < ... < (1 - 2^-20).
    {
        bool ok = true;
        ExactRatio prev = make_ratio(mpz_class(pow_z(2, 2) - 1), pow_z(2, 2));
        for (unsigned a = 3; a <= 20; ++a) {
            ExactRatio cur = make_ratio(mpz_class(pow_z(2, a) - 1), pow_z(2, a));
            if (!(prev < cur)) ok = false;
            prev = cur;
        }
        rep.add("dyadic_chain_monotone", ok, "(1 - 2^-a) strictly increasing for a = 2..20");
    }

    // 1771561/1771560 < 1.0000005645, exactly.
    {
        ExactRatio lhs = make_ratio(1771561, 1771560);
        ExactRatio rhs = make_ratio(mpz_class("10000005645"), mpz_class("10000000000"));
        rep.add("unconditional_constant_dominates", lhs < rhs,
                "1771561/1771560 vs 1.0000005645");
    }

    // 18-decimal rendering of 1771561/1771560.  The exact expansion begins
    // 1.000000564474248684775..., so the quoted constant 1.000000564474248685
    // is the round-to-nearest rendering; both forms are checked exactly.
    {
        std::string rounded = decimal_rounded(make_ratio(1771561, 1771560), 18);
        std::string truncated = decimal_prefix(make_ratio(1771561, 1771560), 21);
        bool ok = rounded == "1.000000564474248685" &&
                  truncated == "1.000000564474248684775";
        rep.add("phi_constant_decimal_rendering", ok,
                "rounded " + rounded + ", exact prefix " + truncated);
    }

    // (1771560/1771561) * (1771561/1771560) == 1, exactly.
    {
        ExactRatio prod = make_ratio(1771560, 1771561) * make_ratio(1771561, 1771560);
        prod.canonicalize();
        rep.add("padic_cancellation_exact", prod == 1, prod.get_str());
    }

    // e^(e^23.762143) < 10^(10^10): compare e^23.762143 vs 10^10 * log 10.
    {
        Interval expo = Interval::from_ratio(make_ratio(23762143, 1000000), digits).exp();
        Interval bound = Interval::from_bigint(pow_z(10, 10), digits) *
                         Interval::from_int(10, digits).log();
        Order o = compare(expo, bound);
        rep.add("exception_bound_within_briggs_range", o == Order::Less,
                "e^23.762143 = " + expo.midpoint_string(12) + " vs 10^10 log 10 = " +
                    bound.midpoint_string(12));
    }

    return rep;
}

} // namespace robin
