#pragma once

#include <gmpxx.h>

#include "robin/exact.hpp"
#include "robin/factorization.hpp"
#include "robin/interval.hpp"

namespace robin {

/// sigma(n): sum of all positive divisors.
inline mpz_class sigma(const Factorization& f) {
    mpz_class s = 1;
    for (const auto& pp : f.factors())
        s *= (pow_z(pp.prime, pp.exponent + 1) - 1) / (pp.prime - 1);
    return s;
}

/// phi(n): Euler's totient.
inline mpz_class phi(const Factorization& f) {
    mpz_class t = 1;
    for (const auto& pp : f.factors())
        t *= pow_z(pp.prime, pp.exponent - 1) * (pp.prime - 1);
    return t;
}

/// sigma(n)/n = prod (p^(a+1) - 1) / (p^(a+1) - p^a), in lowest terms.
inline ExactRatio sigma_over_n(const Factorization& f) {
    ExactRatio r(1);
    for (const auto& pp : f.factors()) {
        mpz_class pa1 = pow_z(pp.prime, pp.exponent + 1);
        r *= make_ratio(pa1 - 1, pa1 - pow_z(pp.prime, pp.exponent));
    }
    r.canonicalize();
    return r;
}

/// n/phi(n) = prod p/(p-1), in lowest terms.
inline ExactRatio n_over_phi(const Factorization& f) {
    ExactRatio r(1);
    for (const auto& pp : f.factors()) r *= make_ratio(pp.prime, pp.prime - 1);
    r.canonicalize();
    return r;
}

/// prod (1 - p^-(1+a)): the correction factor relating sigma(n)/n to
/// n/phi(n); sigma_over_n == n_over_phi * lemma1_product exactly.
inline ExactRatio lemma1_product(const Factorization& f) {
    ExactRatio r(1);
    for (const auto& pp : f.factors()) {
        mpz_class pa1 = pow_z(pp.prime, pp.exponent + 1);
        r *= make_ratio(pa1 - 1, pa1);
    }
    r.canonicalize();
    return r;
}

/// log n = sum a_i log p_i, without materializing n.
inline Interval log_value(const Factorization& f, int digits) {
    Interval acc = Interval::from_int(0, digits);
    for (const auto& pp : f.factors()) {
        Interval lp = Interval::from_bigint(pp.prime, digits).log();
        acc += lp * Interval::from_uint(pp.exponent, digits);
    }
    return acc;
}

/// log(sigma(n)/n) as an enclosure, scalable to huge factored inputs.
inline Interval log_sigma_over_n(const Factorization& f, int digits) {
    Interval acc = Interval::from_int(0, digits);
    for (const auto& pp : f.factors()) {
        mpz_class pa1 = pow_z(pp.prime, pp.exponent + 1);
        mpz_class pa = pow_z(pp.prime, pp.exponent);
        acc += Interval::from_bigint(pa1 - 1, digits).log() -
               Interval::from_bigint(pa1 - pa, digits).log();
    }
    return acc;
}

enum class Verdict { Holds, Fails, Undecided };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "Holds";
        case Verdict::Fails: return "Fails";
        default: return "Undecided";
    }
}

struct RobinResult {
    Verdict verdict = Verdict::Undecided;
    /// n = 1, 2 fall outside the theorem's domain (log log n undefined or
    /// negative); they are reported as Fails by convention with this flag
    /// cleared.
    bool in_theorem_domain = true;
    Interval lhs_log;  // log(sigma(n)/n)
    Interval rhs;      // e^gamma * log log n (may be negative for tiny n)
};

/// Certified verdict of sigma(n)/n < e^gamma log log n, decided in log
/// space by disjoint enclosures: starts at a modest precision and doubles
/// digits up to max_digits before reporting Undecided.
inline RobinResult robin_check(const Factorization& f, int max_digits = kDefaultDigits) {
    RobinResult res;
    if (f.empty()) {
        // n = 1: log log n undefined; reported as Fails, out of domain.
        res.verdict = Verdict::Fails;
        res.in_theorem_domain = false;
        res.lhs_log = Interval::from_int(0, 20);
        res.rhs = Interval::from_int(0, 20);
        return res;
    }
    bool is_two = f.factors().size() == 1 && f.factors()[0].prime == 2 && f.factors()[0].exponent == 1;
    if (is_two) {
        // n = 2: log log n < 0, so the RHS is negative and the inequality
        // trivially fails; flagged out of theorem domain.
        res.verdict = Verdict::Fails;
        res.in_theorem_domain = false;
        res.lhs_log = log_sigma_over_n(f, 30);
        res.rhs = Interval::exp_euler_gamma(30) * log_value(f, 30).log();
        return res;
    }
    int d = std::min(max_digits, 30);
    while (true) {
        Interval logn = log_value(f, d);
        Interval lhs_log = log_sigma_over_n(f, d);
        Interval rhs = Interval::exp_euler_gamma(d) * logn.log();
        res.lhs_log = lhs_log;
        res.rhs = rhs;
        if (rhs.strictly_negative() || rhs.contains_zero()) {
            // sigma(n)/n >= 1 > rhs whenever rhs < 1; certified by rhs < 1.
            if (compare(rhs, Interval::from_int(1, d)) == Order::Less) {
                res.verdict = Verdict::Fails;
                return res;
            }
        } else {
            Order o = compare(lhs_log, rhs.log());
            if (o == Order::Less) {
                res.verdict = Verdict::Holds;
                return res;
            }
            if (o == Order::Greater) {
                res.verdict = Verdict::Fails;
                return res;
            }
        }
        if (d >= max_digits) {
            res.verdict = Verdict::Undecided;
            return res;
        }
        d = std::min(2 * d, max_digits);
    }
}

} // namespace robin
