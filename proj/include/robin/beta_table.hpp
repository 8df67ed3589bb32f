#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robin/errors.hpp"
#include "robin/exact.hpp"
#include "robin/interval.hpp"
#include "robin/mertens.hpp"
#include "robin/sieve.hpp"

namespace robin {

struct BetaTableRow {
    uint64_t alpha = 0;
    uint64_t p_alpha = 0;
    Interval logsum_alpha;   // sum_{p <= p_alpha} log(p/(p-1))
    Interval loglog_n_alpha; // exp(logsum_alpha - log((1+eps) e^gamma))
};

/// Per-alpha thresholds n_alpha for 1 <= alpha <= beta_max, where beta_max
/// is the first beta at which primorial(p_beta) < n_beta fails.
struct BetaTable {
    ExactRatio eps;
    int digits = kDefaultDigits;
    std::vector<BetaTableRow> rows;
    uint64_t beta_max = 0;

    const BetaTableRow& row(uint64_t alpha) const { return rows.at(alpha - 1); }

    /// Deterministic fingerprint over the table contents.
    std::string digest() const {
        Fnv1a64 f;
        f.update(eps.get_num().get_str());
        f.update("/");
        f.update(eps.get_den().get_str());
        for (const auto& r : rows) {
            f.update(std::to_string(r.alpha));
            f.update(r.loglog_n_alpha.lo_string(20));
            f.update(r.loglog_n_alpha.hi_string(20));
        }
        return f.hex();
    }
};

/// loglog n_alpha for a single alpha, recomputed from scratch; used to
/// refine a threshold at higher precision without rebuilding a table.
inline Interval loglog_n_alpha_direct(const ExactRatio& eps, uint64_t alpha, int digits) {
    BetaPredicate pred(eps, digits);
    MertensAccumulator acc(digits);
    auto base = small_primes(1u << 20);
    const uint64_t seg = 1ULL << 20;
    for (uint64_t lo = 2; acc.beta < alpha; lo += seg) {
        if (lo > (1ULL << 40)) throw CapacityError("alpha scan exceeded 2^40");
        std::vector<uint64_t> primes;
        detail::sieve_segment(lo, lo + seg, base, primes);
        for (uint64_t p : primes) {
            detail::consume_prime(acc, p, digits);
            if (acc.beta == alpha) break;
        }
    }
    return pred.loglog_n(acc);
}

/// Builds the full table by a per-prime scan; row alpha is recorded for
/// every prime consumed until the beta predicate first fails.  Tables with
/// more than max_rows rows are refused (their thresholds are astronomically
/// beyond enumeration anyway).
inline BetaTable build_beta_table(const ExactRatio& eps, int digits,
                                  uint64_t max_rows = 1'000'000) {
    if (eps <= 0 || eps >= 1) throw std::invalid_argument("epsilon must satisfy 0 < eps < 1");
    BetaPredicate pred(eps, digits);
    BetaTable table;
    table.eps = eps;
    table.digits = digits;

    MertensAccumulator acc(digits);
    auto base = small_primes(1u << 20);
    const uint64_t seg = 1ULL << 20;
    bool done = false;
    for (uint64_t lo = 2; !done; lo += seg) {
        if (lo > (1ULL << 40)) throw CapacityError("beta table scan exceeded 2^40");
        std::vector<uint64_t> primes;
        detail::sieve_segment(lo, lo + seg, base, primes);
        for (uint64_t p : primes) {
            detail::consume_prime(acc, p, digits);
            if (acc.beta > max_rows)
                throw CapacityError("beta table exceeds row cap (" + std::to_string(max_rows) +
                                    ") at alpha=" + std::to_string(acc.beta));
            BetaTableRow row;
            row.alpha = acc.beta;
            row.p_alpha = p;
            row.logsum_alpha = acc.logsum;
            row.loglog_n_alpha = pred.loglog_n(acc);
            table.rows.push_back(std::move(row));
            if (acc.beta < 2) continue;
            Order o = pred.primorial_vs_n(acc);
            if (o == Order::Less) continue;
            if (o == Order::Undecided)
                throw PrecisionError("beta predicate undecided at " + std::to_string(digits) +
                                     " digits near beta=" + std::to_string(acc.beta));
            table.beta_max = acc.beta;
            done = true;
            break;
        }
    }
    return table;
}

} // namespace robin
