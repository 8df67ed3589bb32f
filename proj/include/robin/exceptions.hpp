#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robin/beta_table.hpp"
#include "robin/divisors.hpp"
#include "robin/errors.hpp"
#include "robin/factorization.hpp"
#include "robin/interval.hpp"
#include "robin/parallel.hpp"
#include "robin/sieve.hpp"

namespace robin {

/// An integer certified to violate f(n) < e^gamma (1+eps) log log n.
struct ExceptionRecord {
    mpz_class n;
    Factorization factorization;
    uint64_t omega = 0;
    Interval f_log;                 // log f(n) = logsum_omega
    std::optional<Interval> rhs_log; // log of the RHS; empty when RHS <= 0 (n = 2)
};

struct EnumerationConfig {
    /// Refuse enumeration when any n_alpha exceeds this.
    uint64_t value_cap = 10'000'000;
    /// Abort (with partial flush and a resumption token) past this many records.
    uint64_t max_records = 10'000'000;
    int thread_count = default_thread_count();
};

struct EnumerationSummary {
    uint64_t total = 0;
    std::vector<uint64_t> per_alpha; // index alpha-1
    uint64_t max_n_alpha_floor = 0;
};

namespace detail {

/// Certified integer floor of n_alpha = exp(exp(loglog)); refines by
/// rebuilding the row at doubled digits when the enclosure straddles an
/// integer boundary.
inline uint64_t certified_threshold(const BetaTable& table, uint64_t alpha, uint64_t cap,
                                    int max_digits = 1600) {
    int d = table.digits;
    Interval ll = table.row(alpha).loglog_n_alpha;
    while (true) {
        // loglog n_alpha <= log log 2^40 ~ 3.4 whenever n_alpha is within any
        // realistic cap, so the double exponential stays representable.
        if (mpfr_cmp_ui(ll.lo(), 8) > 0)
            throw CapacityError("n_alpha for alpha=" + std::to_string(alpha) +
                                " exceeds enumeration cap " + std::to_string(cap) +
                                " (log log n_alpha >= " + ll.lo_string(8) + ")");
        Interval n_alpha = ll.exp().exp();
        if (mpfr_cmp_ui(n_alpha.hi(), cap) > 0)
            throw CapacityError("n_alpha for alpha=" + std::to_string(alpha) +
                                " exceeds enumeration cap " + std::to_string(cap) +
                                " (upper bound " + n_alpha.hi_string(8) + ")");
        unsigned long f_lo = mpfr_get_ui(n_alpha.lo(), MPFR_RNDD);
        unsigned long f_hi = mpfr_get_ui(n_alpha.hi(), MPFR_RNDD);
        if (f_lo == f_hi) return f_lo;
        if (d >= max_digits)
            throw PrecisionError("n_alpha boundary for alpha=" + std::to_string(alpha) +
                                 " undecided at " + std::to_string(d) + " digits");
        d = std::min(2 * d, max_digits);
        ll = loglog_n_alpha_direct(table.eps, alpha, d);
    }
}

/// Certifies that a candidate (all of whose prime divisors are the first
/// omega primes or not, irrelevant: f depends only on omega) violates the
/// inequality: f(n) >= e^gamma (1+eps) log log n.
inline bool certify_exception(const BetaTable& table, const mpz_class& n, uint64_t omega,
                              Interval& f_log_out, std::optional<Interval>& rhs_log_out) {
    int d = table.digits;
    const Interval& f_log = table.row(omega).logsum_alpha;
    f_log_out = f_log;
    if (n <= 2) {
        // log log 2 < 0 while f >= 2: trivial exception; RHS log undefined.
        rhs_log_out.reset();
        return true;
    }
    Interval logc = (Interval::from_ratio(table.eps + 1, d) * Interval::exp_euler_gamma(d)).log();
    Interval loglog = Interval::from_bigint(n, d).log().log();
    if (!loglog.strictly_positive()) {
        // n = 3, 4: log log n is positive but tiny; only n=2 can go negative.
        if (mpfr_sgn(loglog.hi()) <= 0) {
            rhs_log_out.reset();
            return true;
        }
        throw PrecisionError("log log n sign undecided for n=" + n.get_str());
    }
    Interval rhs_log = logc + loglog.log();
    rhs_log_out = rhs_log;
    Order o = compare(f_log, rhs_log);
    if (o == Order::Greater) return true;
    if (o == Order::Less) return false;
    throw PrecisionError("exception verification undecided for n=" + n.get_str());
}

struct EnumTask {
    uint64_t alpha;
    size_t first_prime_idx;
};

/// Depth-first expansion with strictly increasing primes, exponents >= 1,
/// pruning on the running product against the integer threshold.
inline void dfs_candidates(const std::vector<uint64_t>& primes, uint64_t bound, uint64_t alpha,
                           size_t prime_idx, unsigned depth, const mpz_class& value,
                           std::vector<PrimePower>& stack,
                           const std::function<void(const mpz_class&, const std::vector<PrimePower>&)>& emit) {
    uint64_t p = primes[prime_idx];
    unsigned a = 1;
    for (mpz_class v = value * p; v <= bound; v *= p, ++a) {
        stack.push_back({mpz_class(p), a});
        if (depth + 1 == alpha) {
            emit(v, stack);
        } else {
            // Completing requires alpha - depth - 1 further distinct primes,
            // cheapest completion being the immediately following primes.
            mpz_class lower = v;
            bool feasible = true;
            for (uint64_t k = 1; k <= alpha - depth - 1; ++k) {
                if (prime_idx + k >= primes.size()) { feasible = false; break; }
                lower *= primes[prime_idx + k];
                if (lower > bound) { feasible = false; break; }
            }
            if (feasible) {
                for (size_t j = prime_idx + 1; j < primes.size(); ++j) {
                    if (v * primes[j] > bound) break; // primes ascending
                    dfs_candidates(primes, bound, alpha, j, depth + 1, v, stack, emit);
                }
            }
        }
        stack.pop_back();
    }
}

} // namespace detail

/// Complete exception enumeration for the table's epsilon: for each
/// alpha <= beta_max, every n with omega(n) = alpha and n <= n_alpha,
/// re-verified against the inequality before emission.  Records are
/// delivered sorted per alpha (ascending n) and deduplicated.
inline EnumerationSummary enumerate_exceptions(const BetaTable& table,
                                               const EnumerationConfig& cfg,
                                               const std::function<void(const ExceptionRecord&)>& sink) {
    EnumerationSummary summary;
    summary.per_alpha.assign(table.beta_max, 0);
    if (table.rows.size() < table.beta_max || table.beta_max == 0)
        throw std::invalid_argument("incomplete beta table");

    // Certified integer thresholds per alpha; refuses oversized tables.
    std::vector<uint64_t> bounds(table.beta_max + 1, 0);
    uint64_t max_bound = 0;
    for (uint64_t a = 1; a <= table.beta_max; ++a) {
        bounds[a] = detail::certified_threshold(table, a, cfg.value_cap);
        max_bound = std::max(max_bound, bounds[a]);
    }
    summary.max_n_alpha_floor = max_bound;

    std::vector<uint64_t> primes64;
    for (uint32_t p : small_primes(static_cast<uint32_t>(std::max<uint64_t>(max_bound, 3))))
        primes64.push_back(p);

    // Top-level work units: (alpha, first prime index).
    std::vector<detail::EnumTask> tasks;
    for (uint64_t a = 1; a <= table.beta_max; ++a) {
        if (bounds[a] < 2) continue;
        for (size_t j = 0; j < primes64.size(); ++j) {
            mpz_class lower = 1;
            bool feasible = true;
            for (uint64_t k = 0; k < a; ++k) {
                if (j + k >= primes64.size()) { feasible = false; break; }
                lower *= primes64[j + k];
                if (lower > bounds[a]) { feasible = false; break; }
            }
            if (!feasible) break;
            tasks.push_back({a, j});
        }
    }

    struct TaskResult {
        std::vector<std::pair<mpz_class, std::vector<PrimePower>>> hits;
    };
    std::atomic<int64_t> budget{static_cast<int64_t>(cfg.max_records)};
    std::atomic<uint64_t> first_aborted{std::numeric_limits<uint64_t>::max()};
    auto results = indexed_parallel_map(tasks.size(), cfg.thread_count, [&](uint64_t ti) {
        TaskResult r;
        const auto& task = tasks[ti];
        mpz_class v = 1;
        std::vector<PrimePower> stack;
        detail::dfs_candidates(primes64, bounds[task.alpha], task.alpha, task.first_prime_idx, 0, v,
                               stack, [&](const mpz_class& n, const std::vector<PrimePower>& fs) {
                                   if (budget.fetch_sub(1) <= 0) {
                                       uint64_t cur = first_aborted.load();
                                       while (ti < cur && !first_aborted.compare_exchange_weak(cur, ti)) {}
                                       return;
                                   }
                                   r.hits.emplace_back(n, fs);
                               });
        std::sort(r.hits.begin(), r.hits.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return r;
    });

    uint64_t aborted_at = first_aborted.load();

    // Ordered merge: per alpha ascending, n ascending, deduplicated.
    std::map<std::pair<uint64_t, mpz_class>, std::vector<PrimePower>> merged;
    for (uint64_t ti = 0; ti < results.size(); ++ti) {
        if (ti >= aborted_at) break;
        for (auto& [n, fs] : results[ti].hits) merged.emplace(std::make_pair(tasks[ti].alpha, n), fs);
    }
    for (auto& [key, fs] : merged) {
        const auto& [alpha, n] = key;
        ExceptionRecord rec;
        rec.n = n;
        rec.factorization = Factorization::unchecked(fs);
        rec.omega = alpha;
        if (!detail::certify_exception(table, n, alpha, rec.f_log, rec.rhs_log))
            throw std::logic_error("candidate n=" + n.get_str() +
                                   " unexpectedly satisfies the inequality");
        sink(rec);
        ++summary.total;
        ++summary.per_alpha[alpha - 1];
    }
    if (aborted_at != std::numeric_limits<uint64_t>::max())
        throw CapacityError("record cap " + std::to_string(cfg.max_records) +
                            " exceeded; partial results flushed; resume token task:" +
                            std::to_string(aborted_at));
    return summary;
}

} // namespace robin
