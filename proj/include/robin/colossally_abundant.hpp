#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "robin/divisors.hpp"
#include "robin/errors.hpp"
#include "robin/exact.hpp"
#include "robin/factorization.hpp"
#include "robin/interval.hpp"
#include "robin/parallel.hpp"
#include "robin/sieve.hpp"
#include "robin/sigma_sieve.hpp"

namespace robin {

/// Consecutive primes sharing an exponent; a colossally abundant number is
/// a stack of such ranges with exponents non-increasing in p.
struct CAGroup {
    uint64_t p_lo = 0, p_hi = 0;
    unsigned exponent = 0;
};

struct CANumber {
    uint64_t index = 0; // 1-based position in the sequence
    uint64_t transition_prime = 0;
    unsigned transition_exponent = 0; // exponent of that prime after the step
    Interval log_n;
    Interval log_sigma_ratio; // log(sigma(n)/n)
    Interval sigma_ratio;     // sigma(n)/n, tracked multiplicatively
};

namespace detail {

inline uint64_t next_prime_after(uint64_t x, const std::vector<uint32_t>& base) {
    uint64_t lo = x + 1;
    for (;;) {
        std::vector<uint64_t> out;
        sieve_segment(lo, lo + 4096, base, out);
        if (!out.empty()) return out.front();
        lo += 4096;
    }
}

/// Critical epsilon for the transition p^a -> p^(a+1):
///   eps_p(a) = log((p^(a+2) - 1)/(p^(a+1) - 1)) / log p - 1.
inline Interval critical_epsilon(uint64_t p, unsigned a, int digits) {
    mpz_class top = pow_z(p, a + 2) - 1;
    mpz_class bot = pow_z(p, a + 1) - 1;
    Interval num = Interval::from_bigint(top, digits).log() -
                   Interval::from_bigint(bot, digits).log();
    return num / Interval::from_uint(p, digits).log() - Interval::from_int(1, digits);
}

} // namespace detail

/// Expands a group factorization into the exact integer; refused when the
/// result would exceed ~2^max_bits.
inline mpz_class ca_value(const std::vector<CAGroup>& groups, uint64_t max_bits = 1u << 20) {
    double bits = 0;
    for (const auto& g : groups) {
        // crude overcount: every number in [p_lo, p_hi] treated as prime
        bits += static_cast<double>(g.p_hi - g.p_lo + 1) * g.exponent *
                std::log2(static_cast<double>(g.p_hi));
    }
    if (bits > static_cast<double>(max_bits) * 8)
        throw CapacityError("CA value materialization beyond bit cap");
    auto base = small_primes(static_cast<uint32_t>(isqrt_u64(
        groups.empty() ? 2 : groups.back().p_hi + 1)));
    mpz_class v = 1;
    for (const auto& g : groups) {
        std::vector<uint64_t> primes;
        detail::sieve_segment(g.p_lo, g.p_hi + 1, base, primes);
        for (uint64_t p : primes) {
            v *= pow_z(p, g.exponent);
            if (mpz_sizeinbase(v.get_mpz_t(), 2) > max_bits)
                throw CapacityError("CA value materialization beyond bit cap");
        }
    }
    return v;
}

inline Factorization ca_factorization(const std::vector<CAGroup>& groups) {
    std::vector<PrimePower> fs;
    auto base = small_primes(static_cast<uint32_t>(isqrt_u64(
        groups.empty() ? 2 : groups.back().p_hi + 1)));
    for (const auto& g : groups) {
        std::vector<uint64_t> primes;
        detail::sieve_segment(g.p_lo, g.p_hi + 1, base, primes);
        for (uint64_t p : primes) fs.push_back({mpz_class(p), g.exponent});
    }
    return Factorization::unchecked(std::move(fs));
}

struct CAOptions {
    /// Maximum precision (decimal digits) for refining critical-epsilon
    /// comparisons before giving up.
    int digits = kDefaultDigits;
    /// Working precision of the incremental log_n / sigma ratio enclosures.
    /// Widths stay below ~10^-40 over tens of millions of steps, far inside
    /// every verdict margin, while keeping the hot loop cheap.
    int track_digits = 48;
    /// Precision of the epsilon priority values before refinement.
    int eps_digits = 40;
    std::function<void(const std::string&)> tie_log; // notified on refinements
};

/// Generates the colossally abundant sequence in increasing order: each
/// element is its predecessor times one prime, chosen by the maximum
/// critical epsilon (certified comparison, smaller prime kept on a
/// challenge that cannot be certified greater).  Stops before the first
/// element whose log log n exceeds max_loglog_n.
class CASequence {
public:
    explicit CASequence(const CAOptions& opt = {}) : opt_(opt) {
        if (opt_.track_digits < 30) throw std::invalid_argument("track_digits must be >= 30");
        if (opt_.eps_digits < 20) throw std::invalid_argument("eps_digits must be >= 20");
    }

    void run(double max_loglog_n,
             const std::function<void(const CANumber&, const std::vector<CAGroup>&)>& emit) {
        if (max_loglog_n < 1.0) throw std::invalid_argument("max_loglog_n must be >= 1");
        const int td = opt_.track_digits;
        base_ = small_primes(1u << 20);

        // Stop bound: log n <= exp(max_loglog_n), compared directly.
        Interval log_n_cap = Interval::from_decimal(format_double(max_loglog_n), td).exp();

        Interval log_n = Interval::from_int(0, td);
        Interval log_sigma = Interval::from_int(0, td);
        Interval sigma_ratio = Interval::from_int(1, td);

        groups_.clear();
        group_eps_.clear();

        // Frontier: the next prime to enter, with an incrementally
        // maintained enclosure of its logarithm.
        uint64_t frontier = 2;
        Interval log_frontier = Interval::from_int(2, td).log();
        Interval eps_frontier = frontier_epsilon(frontier, log_frontier);

        uint64_t index = 0;
        for (;;) {
            int best_group = best_group_candidate();
            bool take_frontier;
            if (best_group < 0) {
                take_frontier = true;
            } else {
                Order o = certified_eps_order(group_eps_[best_group], eps_frontier,
                                              groups_[best_group].p_lo,
                                              groups_[best_group].exponent, frontier, 0);
                take_frontier = (o == Order::Less);
            }

            if (take_frontier) {
                uint64_t p = frontier;
                log_n += log_frontier;
                sigma_ratio = sigma_ratio.mul_ratio_ui(p + 1, p);
                log_sigma += log1p_ratio(1, p, td);
                if (!groups_.empty() && groups_.back().exponent == 1) {
                    groups_.back().p_hi = p;
                } else {
                    groups_.push_back({p, p, 1});
                    group_eps_.push_back(detail::critical_epsilon(p, 1, opt_.eps_digits));
                    best_dirty_ = true;
                }
                // Advance the frontier.
                uint64_t nxt = detail::next_prime_after(p, base_);
                log_frontier += log1p_ratio(nxt - p, p, td);
                frontier = nxt;
                eps_frontier = frontier_epsilon(frontier, log_frontier);
                finish_step(p, 1, ++index, log_n, log_sigma, sigma_ratio, log_n_cap, emit);
            } else {
                CAGroup& g = groups_[best_group];
                uint64_t p = g.p_lo;
                unsigned e = g.exponent;
                log_n += Interval::from_uint(p, td).log();
                mpz_class top = pow_z(p, e + 2) - 1;
                mpz_class bot = mpz_class(p) * (pow_z(p, e + 1) - 1);
                ExactRatio step = make_ratio(top, bot);
                Interval step_i = Interval::from_ratio(step, td);
                sigma_ratio *= step_i;
                log_sigma += step_i.log();
                apply_exponent_bump(best_group);
                finish_step(p, e + 1, ++index, log_n, log_sigma, sigma_ratio, log_n_cap, emit);
            }
            if (stopped_) return;
        }
    }

private:
    static std::string format_double(double v) {
        char buf[64];
        snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    Interval frontier_epsilon(uint64_t p, const Interval& log_p) {
        Interval num = log1p_ratio(1, p, opt_.eps_digits);
        return num / log_p.at_digits(opt_.eps_digits);
    }

    /// Index of the strongest exponent-increment candidate, cached between
    /// group mutations; -1 when there are no groups.
    int best_group_candidate() {
        if (groups_.empty()) return -1;
        if (!best_dirty_) return best_group_;
        best_group_ = 0;
        for (size_t i = 1; i < groups_.size(); ++i) {
            Order o = certified_eps_order(group_eps_[i], group_eps_[best_group_],
                                          groups_[i].p_lo, groups_[i].exponent,
                                          groups_[best_group_].p_lo,
                                          groups_[best_group_].exponent);
            if (o == Order::Greater) best_group_ = static_cast<int>(i);
            // An unresolved challenge keeps the smaller prime in place.
        }
        best_dirty_ = false;
        return best_group_;
    }

    /// Certified order of two critical epsilons, refining both from their
    /// exact integer definitions when the enclosures overlap.
    Order certified_eps_order(const Interval& a, const Interval& b, uint64_t pa, unsigned ea,
                              uint64_t pb, unsigned eb) {
        Order o = compare(a, b);
        if (o != Order::Undecided) return o;
        int d = opt_.eps_digits;
        while (d < opt_.digits) {
            d = std::min(2 * d, opt_.digits);
            if (opt_.tie_log)
                opt_.tie_log("refining epsilon comparison " + std::to_string(pa) + "^" +
                             std::to_string(ea) + " vs " + std::to_string(pb) + "^" +
                             std::to_string(eb) + " at " + std::to_string(d) + " digits");
            Order r = compare(detail::critical_epsilon(pa, ea, d),
                              detail::critical_epsilon(pb, eb, d));
            if (r != Order::Undecided) return r;
        }
        throw PrecisionError("critical epsilon tie between " + std::to_string(pa) + "^" +
                             std::to_string(ea) + " and " + std::to_string(pb) + "^" +
                             std::to_string(eb) + " unresolved at " + std::to_string(opt_.digits) +
                             " digits");
    }

    void apply_exponent_bump(int gi) {
        CAGroup& g = groups_[gi];
        uint64_t p = g.p_lo;
        unsigned new_exp = g.exponent + 1;
        bool joins_prev = gi > 0 && groups_[gi - 1].exponent == new_exp;
        if (g.p_lo == g.p_hi) {
            if (joins_prev) {
                groups_[gi - 1].p_hi = p;
                groups_.erase(groups_.begin() + gi);
                group_eps_.erase(group_eps_.begin() + gi);
            } else {
                g.exponent = new_exp;
                group_eps_[gi] = detail::critical_epsilon(p, new_exp, opt_.eps_digits);
            }
        } else {
            uint64_t successor = detail::next_prime_after(p, base_);
            if (joins_prev) {
                groups_[gi - 1].p_hi = p;
            } else {
                groups_.insert(groups_.begin() + gi, CAGroup{p, p, new_exp});
                group_eps_.insert(group_eps_.begin() + gi,
                                  detail::critical_epsilon(p, new_exp, opt_.eps_digits));
                ++gi;
            }
            groups_[gi].p_lo = successor;
            group_eps_[gi] =
                detail::critical_epsilon(successor, groups_[gi].exponent, opt_.eps_digits);
        }
        best_dirty_ = true;
    }

    void finish_step(uint64_t p, unsigned e, uint64_t index, const Interval& log_n,
                     const Interval& log_sigma, const Interval& sigma_ratio,
                     const Interval& log_n_cap,
                     const std::function<void(const CANumber&, const std::vector<CAGroup>&)>& emit) {
        Order at_cap = compare(log_n, log_n_cap);
        if (at_cap == Order::Greater) {
            stopped_ = true;
            return;
        }
        if (at_cap == Order::Undecided)
            throw PrecisionError("log n indistinguishable from the loglog budget at step " +
                                 std::to_string(index));
        CANumber out;
        out.index = index;
        out.transition_prime = p;
        out.transition_exponent = e;
        out.log_n = log_n;
        out.log_sigma_ratio = log_sigma;
        out.sigma_ratio = sigma_ratio;
        emit(out, groups_);
    }

    CAOptions opt_;
    std::vector<uint32_t> base_;
    std::vector<CAGroup> groups_;
    std::vector<Interval> group_eps_;
    int best_group_ = -1;
    bool best_dirty_ = true;
    bool stopped_ = false;
};

/// Convenience wrapper matching the operation signature.
inline void ca_sequence(double max_loglog_n, const CAOptions& opt,
                        const std::function<void(const CANumber&, const std::vector<CAGroup>&)>& emit) {
    CASequence seq(opt);
    seq.run(max_loglog_n, emit);
}

// ---------------------------------------------------------------------------
// Robin verification over the CA sequence.

struct CAVerifyRow {
    uint64_t index = 0;
    Verdict verdict = Verdict::Undecided;
    bool in_theorem_domain = true; // log log n > 0 and n > 5040
    bool above_5040 = false;
    /// Pre-rendered 20-significant-digit midpoints (deterministic).
    std::string loglog_n, sigma_ratio, rhs, margin;
    /// Certified outward double bounds of the margin, for the summary.
    double margin_lo_d = 0, margin_hi_d = 0;
};

struct CAVerifySummary {
    uint64_t count = 0;
    uint64_t holds = 0;
    uint64_t fails_above_5040 = 0;
    uint64_t fails_at_or_below_5040 = 0;
    uint64_t undecided = 0;
    /// Enclosure of the minimum margin over CA numbers above 5040.
    double min_margin_lo = std::numeric_limits<double>::infinity();
    double min_margin_hi = std::numeric_limits<double>::infinity();
    uint64_t min_margin_index = 0;
    bool min_margin_set = false;
};

namespace detail {

struct CAVerifyJob {
    uint64_t index;
    Interval log_n, sigma_ratio;
};

inline CAVerifyRow verify_ca_element(const CAVerifyJob& job, const Interval& exp_gamma,
                                     const Interval& log_5040) {
    CAVerifyRow row;
    row.index = job.index;
    Order vs5040 = compare(job.log_n, log_5040);
    row.above_5040 = (vs5040 == Order::Greater);
    Interval loglog = job.log_n.log();
    row.loglog_n = loglog.midpoint_string(20);
    row.sigma_ratio = job.sigma_ratio.midpoint_string(20);
    Interval rhs = exp_gamma * loglog;
    Interval margin = rhs - job.sigma_ratio;
    row.rhs = rhs.midpoint_string(20);
    row.margin = margin.midpoint_string(20);
    row.margin_lo_d = mpfr_get_d(margin.lo(), MPFR_RNDD);
    row.margin_hi_d = mpfr_get_d(margin.hi(), MPFR_RNDU);
    row.in_theorem_domain = loglog.strictly_positive() && row.above_5040;
    if (margin.strictly_positive()) row.verdict = Verdict::Holds;
    else if (margin.strictly_negative()) row.verdict = Verdict::Fails;
    else row.verdict = Verdict::Undecided;
    return row;
}

} // namespace detail

struct CAVerifyOptions {
    CAOptions sequence;
    int thread_count = default_thread_count();
    uint64_t batch_size = 2048;
};

/// Certified Robin verdict for every CA number with log log n within the
/// budget.  Generation is sequential; per-element verification fans out to
/// a worker pool and rows are delivered to the sink in sequence order, so
/// output is byte-identical for any thread count.
inline CAVerifySummary verify_robin_on_ca(double max_loglog_n, const CAVerifyOptions& opt,
                                          const std::function<void(const CAVerifyRow&)>& sink) {
    const int td = opt.sequence.track_digits;
    const Interval exp_gamma = Interval::exp_euler_gamma(td);
    const Interval log_5040 = Interval::from_int(5040, td).log();
    CAVerifySummary sum;

    auto account = [&](const CAVerifyRow& row) {
        ++sum.count;
        if (row.verdict == Verdict::Holds) ++sum.holds;
        else if (row.verdict == Verdict::Undecided) ++sum.undecided;
        else if (row.above_5040) ++sum.fails_above_5040;
        else ++sum.fails_at_or_below_5040;
        if (row.above_5040) {
            if (row.margin_lo_d < sum.min_margin_lo) sum.min_margin_lo = row.margin_lo_d;
            if (row.margin_hi_d < sum.min_margin_hi) {
                sum.min_margin_hi = row.margin_hi_d;
                sum.min_margin_index = row.index;
            }
            sum.min_margin_set = true;
        }
        sink(row);
    };

    int workers = opt.thread_count > 1 ? opt.thread_count : 0;
    if (workers == 0) {
        // Inline path; identical ordering and content as the pooled path.
        CASequence seq(opt.sequence);
        seq.run(max_loglog_n, [&](const CANumber& ca, const std::vector<CAGroup>&) {
            detail::CAVerifyJob job{ca.index, ca.log_n, ca.sigma_ratio};
            account(detail::verify_ca_element(job, exp_gamma, log_5040));
        });
        return sum;
    }

    // Bounded batch queue -> worker pool -> ordered drain on this thread.
    struct Shared {
        std::mutex mu;
        std::condition_variable cv_work, cv_done;
        std::deque<std::pair<uint64_t, std::vector<detail::CAVerifyJob>>> pending;
        std::map<uint64_t, std::vector<CAVerifyRow>> done;
        bool closed = false;
        uint64_t in_flight = 0;
    } sh;

    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::pair<uint64_t, std::vector<detail::CAVerifyJob>> batch;
                {
                    std::unique_lock<std::mutex> lk(sh.mu);
                    sh.cv_work.wait(lk, [&] { return sh.closed || !sh.pending.empty(); });
                    if (sh.pending.empty()) return;
                    batch = std::move(sh.pending.front());
                    sh.pending.pop_front();
                }
                std::vector<CAVerifyRow> rows;
                rows.reserve(batch.second.size());
                for (const auto& job : batch.second)
                    rows.push_back(detail::verify_ca_element(job, exp_gamma, log_5040));
                {
                    std::lock_guard<std::mutex> lk(sh.mu);
                    sh.done.emplace(batch.first, std::move(rows));
                    sh.cv_done.notify_all();
                }
            }
        });
    }

    uint64_t next_batch = 0, next_drain = 0;
    std::vector<detail::CAVerifyJob> current;

    auto drain_ready = [&](bool block_until) {
        std::unique_lock<std::mutex> lk(sh.mu);
        for (;;) {
            while (!sh.done.empty() && sh.done.begin()->first == next_drain) {
                auto rows = std::move(sh.done.begin()->second);
                sh.done.erase(sh.done.begin());
                --sh.in_flight;
                lk.unlock();
                for (auto& row : rows) account(row);
                lk.lock();
                ++next_drain;
            }
            if (!block_until || next_drain >= next_batch) break;
            sh.cv_done.wait(lk);
        }
    };

    auto flush_batch = [&] {
        if (current.empty()) return;
        {
            std::lock_guard<std::mutex> lk(sh.mu);
            sh.pending.emplace_back(next_batch, std::move(current));
            ++sh.in_flight;
            sh.cv_work.notify_one();
        }
        ++next_batch;
        current.clear();
        // Drain what is ready; block (and keep draining) while over the cap,
        // since only this thread retires in-flight batches.
        const uint64_t cap = static_cast<uint64_t>(workers) * 4 + 4;
        for (;;) {
            drain_ready(false);
            std::unique_lock<std::mutex> lk(sh.mu);
            if (sh.in_flight < cap) break;
            sh.cv_done.wait(lk);
        }
    };

    CASequence seq(opt.sequence);
    seq.run(max_loglog_n, [&](const CANumber& ca, const std::vector<CAGroup>&) {
        current.push_back(detail::CAVerifyJob{ca.index, ca.log_n, ca.sigma_ratio});
        if (current.size() >= opt.batch_size) flush_batch();
    });
    flush_batch();
    {
        std::lock_guard<std::mutex> lk(sh.mu);
        sh.closed = true;
        sh.cv_work.notify_all();
    }
    drain_ready(true);
    for (auto& t : pool) t.join();
    drain_ready(false);
    return sum;
}

// ---------------------------------------------------------------------------
// Gap verification (Robin's Prop. 1 interval argument, checked empirically).

struct GapReport {
    mpz_class n1, n2;
    uint64_t checked = 0;
    std::vector<uint64_t> violators;            // all violators in (n1, n2]
    std::vector<uint64_t> violators_above_5040; // expected empty
    uint64_t escalations = 0;
    uint64_t undecided = 0;
};

/// Exhaustively verifies Robin's inequality on every integer in (n1, n2]
/// via the bulk sigma sieve.  n1 < n2 must be consecutive CA values; ranges
/// beyond exhaustive_limit are refused.
inline GapReport gap_check(const mpz_class& n1, const mpz_class& n2, uint64_t exhaustive_limit,
                           const ScanOptions& opt = {}) {
    if (n1 >= n2) {
        GapReport empty;
        empty.n1 = n1;
        empty.n2 = n2;
        return empty;
    }
    if (n2 > exhaustive_limit)
        throw CapacityError("gap upper bound " + n2.get_str() + " exceeds exhaustive limit " +
                            std::to_string(exhaustive_limit));
    GapReport rep;
    rep.n1 = n1;
    rep.n2 = n2;
    uint64_t lo = mpz_get_ui(n1.get_mpz_t()) + 1;
    uint64_t hi = mpz_get_ui(n2.get_mpz_t());
    ScanOptions o = opt;
    o.cap = std::max<uint64_t>(o.cap, exhaustive_limit);
    RangeReport rr = robin_scan(lo, hi, o);
    rep.checked = rr.checked;
    rep.violators = rr.violators;
    for (uint64_t v : rr.violators)
        if (v > 5040) rep.violators_above_5040.push_back(v);
    rep.escalations = rr.escalations;
    rep.undecided = rr.undecided;
    return rep;
}

} // namespace robin
