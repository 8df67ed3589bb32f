#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robin/errors.hpp"
#include "robin/exact.hpp"
#include "robin/interval.hpp"
#include "robin/parallel.hpp"
#include "robin/sieve.hpp"

namespace robin {

/// Running state of the prime accumulations: beta primes consumed,
/// logsum = sum log(p/(p-1)) and theta = sum log p as certified enclosures.
struct MertensAccumulator {
    uint64_t beta = 0;
    uint64_t last_prime = 0;
    Interval logsum;
    Interval theta;

    explicit MertensAccumulator(int digits = kDefaultDigits)
        : logsum(Interval::from_int(0, digits)), theta(Interval::from_int(0, digits)) {}

    int digits() const { return logsum.digits(); }
    double error_bound() const { return std::max(logsum.width_ub(), theta.width_ub()); }
};

namespace detail {

inline mpz_class product_tree(const uint64_t* v, size_t n) {
    if (n <= 16) {
        mpz_class p = 1;
        for (size_t i = 0; i < n; ++i) mpz_mul_ui(p.get_mpz_t(), p.get_mpz_t(), v[i]);
        return p;
    }
    size_t h = n / 2;
    return product_tree(v, h) * product_tree(v + h, n - h);
}

/// Exact accumulation over a batch of consecutive primes: products are
/// formed as big integers, so the only rounding is in the two final logs.
inline MertensAccumulator batch_record(std::span<const uint64_t> primes, int digits) {
    MertensAccumulator rec(digits);
    rec.beta = primes.size();
    if (primes.empty()) return rec;
    rec.last_prime = primes.back();
    mpz_class p_prod = product_tree(primes.data(), primes.size());
    std::vector<uint64_t> pm1(primes.begin(), primes.end());
    for (auto& x : pm1) x -= 1;
    mpz_class q_prod = product_tree(pm1.data(), pm1.size());
    rec.theta = Interval::from_bigint(p_prod, digits).log();
    rec.logsum = rec.theta - Interval::from_bigint(q_prod, digits).log();
    return rec;
}

inline MertensAccumulator combine(const MertensAccumulator& a, const MertensAccumulator& b) {
    MertensAccumulator r(std::max(a.digits(), b.digits()));
    r.beta = a.beta + b.beta;
    r.last_prime = b.beta ? b.last_prime : a.last_prime;
    r.logsum = a.logsum + b.logsum;
    r.theta = a.theta + b.theta;
    return r;
}

/// Fixed-shape pairwise combine tree (binary-counter scheme): level i holds
/// the combined record of 2^i consecutive segments.  The shape depends only
/// on how many segments were pushed, so results are bit-identical for any
/// thread count.
class CombineTree {
public:
    explicit CombineTree(int digits) : digits_(digits) {}

    void push(MertensAccumulator rec) {
        size_t lvl = 0;
        while (lvl < levels_.size() && levels_[lvl].has_value()) {
            rec = combine(*levels_[lvl], rec);
            levels_[lvl].reset();
            ++lvl;
        }
        if (lvl == levels_.size()) levels_.emplace_back();
        levels_[lvl] = std::move(rec);
    }

    MertensAccumulator total() const {
        MertensAccumulator t(digits_);
        for (size_t i = levels_.size(); i-- > 0;) {
            if (levels_[i]) t = combine(t, *levels_[i]);
        }
        return t;
    }

    /// Collapses to a single restored node (checkpoint resume).
    void reset(MertensAccumulator state) {
        levels_.clear();
        levels_.emplace_back(std::move(state));
    }

private:
    int digits_;
    std::vector<std::optional<MertensAccumulator>> levels_;
};

/// Exact round-trip serialization of an mpfr value as a precision-tagged
/// decimal string "<bits>:<mantissa>@<exp10>".
inline std::string serialize_mpfr(mpfr_srcptr v) {
    mpfr_prec_t prec = mpfr_get_prec(v);
    if (mpfr_zero_p(v)) return std::to_string(prec) + ":0@0";
    size_t nd = static_cast<size_t>(prec * 0.30102999566398119522) + 3;
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 10, nd, v, MPFR_RNDN);
    std::string out = std::to_string(prec) + ":" + s + "@" + std::to_string(e);
    mpfr_free_str(s);
    return out;
}

inline void deserialize_mpfr(mpfr_ptr out, const std::string& text) {
    size_t colon = text.find(':');
    size_t at = text.rfind('@');
    if (colon == std::string::npos || at == std::string::npos || at < colon)
        throw CheckpointError("malformed real field: " + text);
    mpfr_prec_t prec = static_cast<mpfr_prec_t>(std::stol(text.substr(0, colon)));
    mpfr_set_prec(out, prec);
    std::string mant = text.substr(colon + 1, at - colon - 1);
    long e10 = std::stol(text.substr(at + 1));
    if (mant == "0") {
        mpfr_set_zero(out, 1);
        return;
    }
    // mpfr_get_str mantissa is an implicit fraction: value = 0.mant * 10^e.
    std::string full = (mant[0] == '-' ? "-0." + mant.substr(1) : "0." + mant) + "e" +
                       std::to_string(e10);
    if (mpfr_set_str(out, full.c_str(), 10, MPFR_RNDN) != 0)
        throw CheckpointError("unparsable real field: " + text);
}

} // namespace detail

/// The certified comparison machinery of the beta scan: for a given epsilon
/// the predicate "primorial(p_beta) < n_beta" is decided as
/// log theta(p_beta) vs. loglog n_beta = exp(logsum - log((1+eps) e^gamma)).
class BetaPredicate {
public:
    BetaPredicate(const ExactRatio& eps, int digits)
        : digits_(digits),
          log_c_((Interval::from_ratio(eps + 1, digits) * Interval::exp_euler_gamma(digits)).log()) {
        if (eps <= 0 || eps >= 1) throw std::invalid_argument("epsilon must satisfy 0 < eps < 1");
    }

    int digits() const { return digits_; }

    /// loglog n_beta for the accumulated state.
    Interval loglog_n(const MertensAccumulator& a) const {
        return (a.logsum - log_c_).exp();
    }

    /// Less: primorial < n_beta (the while-loop continues).
    /// Greater: predicate failed (candidate beta_max).
    Order primorial_vs_n(const MertensAccumulator& a) const {
        return compare(a.theta.log(), loglog_n(a));
    }

private:
    int digits_;
    Interval log_c_;
};

struct BetaMaxResult {
    uint64_t beta_max = 0;
    uint64_t p_beta_max = 0;
    Interval loglog_n_beta_max;
    MertensAccumulator state; // accumulator at beta_max
    uint64_t overshoot_checked = 0;
    bool reversal_anomaly = false;
    uint64_t reversal_beta = 0;
    uint64_t segments_scanned = 0;
    bool resumed_from_checkpoint = false;
};

namespace detail {

struct BetaCheckpoint {
    uint64_t segment_size = 0;
    uint64_t next_segment = 0;
    int digits = 0;
    std::string eps_num, eps_den;
    MertensAccumulator state;
};

inline void write_beta_checkpoint(const std::filesystem::path& path, const BetaCheckpoint& c) {
    std::string payload;
    payload += "segment_size=" + std::to_string(c.segment_size) + "\n";
    payload += "next_segment=" + std::to_string(c.next_segment) + "\n";
    payload += "digits=" + std::to_string(c.digits) + "\n";
    payload += "eps_num=" + c.eps_num + "\n";
    payload += "eps_den=" + c.eps_den + "\n";
    payload += "beta=" + std::to_string(c.state.beta) + "\n";
    payload += "p_beta=" + std::to_string(c.state.last_prime) + "\n";
    payload += "logsum_lo=" + serialize_mpfr(c.state.logsum.lo()) + "\n";
    payload += "logsum_hi=" + serialize_mpfr(c.state.logsum.hi()) + "\n";
    payload += "theta_lo=" + serialize_mpfr(c.state.theta.lo()) + "\n";
    payload += "theta_hi=" + serialize_mpfr(c.state.theta.hi()) + "\n";
    payload += "logsum_err=" + std::to_string(c.state.logsum.width_ub()) + "\n";
    payload += "theta_err=" + std::to_string(c.state.theta.width_ub()) + "\n";
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("cannot open checkpoint for writing: " + tmp.string());
        uint32_t version = 1;
        uint64_t len = payload.size();
        Fnv1a64 f;
        f.update(payload);
        uint64_t digest = f.value();
        out.write("RBL1", 4);
        out.write(reinterpret_cast<const char*>(&version), sizeof version);
        out.write(reinterpret_cast<const char*>(&len), sizeof len);
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        out.write(reinterpret_cast<const char*>(&digest), sizeof digest);
        if (!out.flush()) throw CheckpointError("cannot write checkpoint: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw CheckpointError("cannot commit checkpoint: " + ec.message());
}

inline std::optional<BetaCheckpoint> read_beta_checkpoint(const std::filesystem::path& path,
                                                          int digits) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    uint32_t version = 0;
    uint64_t len = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, "RBL1", 4) != 0)
        throw CheckpointError("bad checkpoint magic in " + path.string());
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || version != 1) throw CheckpointError("unsupported checkpoint version");
    std::string payload(len, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(len));
    uint64_t digest = 0;
    in.read(reinterpret_cast<char*>(&digest), sizeof digest);
    if (!in) throw CheckpointError("truncated checkpoint: " + path.string());
    Fnv1a64 f;
    f.update(payload);
    if (f.value() != digest) throw CheckpointError("checkpoint checksum mismatch");

    BetaCheckpoint c;
    c.state = MertensAccumulator(digits);
    size_t pos = 0;
    while (pos < payload.size()) {
        size_t nl = payload.find('\n', pos);
        if (nl == std::string::npos) break;
        std::string line = payload.substr(pos, nl - pos);
        pos = nl + 1;
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string k = line.substr(0, eq), v = line.substr(eq + 1);
        if (k == "segment_size") c.segment_size = std::stoull(v);
        else if (k == "next_segment") c.next_segment = std::stoull(v);
        else if (k == "digits") c.digits = std::stoi(v);
        else if (k == "eps_num") c.eps_num = v;
        else if (k == "eps_den") c.eps_den = v;
        else if (k == "beta") c.state.beta = std::stoull(v);
        else if (k == "p_beta") c.state.last_prime = std::stoull(v);
        else if (k == "logsum_lo") deserialize_mpfr(c.state.logsum.lo_mut(), v);
        else if (k == "logsum_hi") deserialize_mpfr(c.state.logsum.hi_mut(), v);
        else if (k == "theta_lo") deserialize_mpfr(c.state.theta.lo_mut(), v);
        else if (k == "theta_hi") deserialize_mpfr(c.state.theta.hi_mut(), v);
    }
    return c;
}

/// Consumes one prime into a running accumulator, exactly mirroring the
/// batch definition: theta += log p, logsum += log(p/(p-1)).
inline void consume_prime(MertensAccumulator& acc, uint64_t p, int digits) {
    acc.theta += Interval::from_uint(p, digits).log();
    acc.logsum += robin::log1p_ratio(1, p - 1, digits);
    acc.beta += 1;
    acc.last_prime = p;
}

} // namespace detail

struct FindBetaMaxOptions {
    bool resume = false;
    uint64_t overshoot_window = 32768;
    uint64_t walk_leaf = 64; // primes per leaf in the crossing drill
};

/// Algorithm: scan beta = 2, 3, ... while primorial(p_beta) < n_beta; the
/// first failing beta is beta_max.  Segments of primes are accumulated with
/// exact big-integer products; a segment is examined prime-by-prime only
/// when the certified bound "log theta(segment end) < loglog n(segment
/// start)" cannot rule out an interior failure, so the scan stays exact
/// without per-prime transcendental work almost everywhere.
inline BetaMaxResult find_beta_max(const ExactRatio& eps, const SieveConfig& cfg, int digits,
                                   const FindBetaMaxOptions& opt = {}) {
    cfg.validate();
    if (eps <= 0 || eps >= 1) throw std::invalid_argument("epsilon must satisfy 0 < eps < 1");
    if (digits < 30) throw PrecisionError("find_beta_max requires at least 30 digits");

    BetaPredicate pred(eps, digits);
    const uint64_t seg = cfg.segment_size;
    const uint64_t hard_limit = 1ULL << 40; // base primes cover sqrt of this
    auto base = small_primes(1u << 20);

    detail::CombineTree tree(digits);
    uint64_t start_segment = 0;
    BetaMaxResult result;

    if (opt.resume && cfg.checkpoint_path) {
        if (auto c = detail::read_beta_checkpoint(*cfg.checkpoint_path, digits)) {
            if (c->segment_size != seg || c->digits != digits ||
                mpz_class(c->eps_num) != eps.get_num() || mpz_class(c->eps_den) != eps.get_den())
                throw CheckpointError("checkpoint parameters do not match this invocation");
            tree.reset(c->state);
            start_segment = c->next_segment;
            result.resumed_from_checkpoint = true;
        }
    }

    auto segment_range = [&](uint64_t idx) {
        uint64_t lo = 2 + idx * seg;
        return std::pair<uint64_t, uint64_t>{lo, lo + seg};
    };

    OrderedPipeline<MertensAccumulator> pipe(
        cfg.thread_count, static_cast<uint64_t>(cfg.thread_count) * 3,
        [&, start_segment](uint64_t i) {
            auto [lo, hi] = segment_range(start_segment + i);
            std::vector<uint64_t> primes;
            detail::sieve_segment(lo, hi, base, primes);
            return detail::batch_record(primes, digits);
        });

    // Walks `primes` one by one on top of `prefix`; returns true when the
    // first failing beta was found (state left at that beta).
    auto walk_primes = [&](MertensAccumulator& acc, std::span<const uint64_t> primes,
                           uint64_t& fail_beta) -> bool {
        for (uint64_t p : primes) {
            detail::consume_prime(acc, p, digits);
            if (acc.beta < 2) continue;
            Order o = pred.primorial_vs_n(acc);
            if (o == Order::Less) continue;
            if (o == Order::Greater) {
                fail_beta = acc.beta;
                return true;
            }
            throw PrecisionError("beta predicate undecided at " + std::to_string(digits) +
                                 " digits near beta=" + std::to_string(acc.beta) +
                                 "; rerun with more digits");
        }
        return false;
    };

    // Examines one segment at leaf granularity.  Returns true on failure
    // found; `state` then holds the accumulator at beta_max.
    auto drill_segment = [&](MertensAccumulator& state, std::span<const uint64_t> primes,
                             uint64_t& fail_beta) -> bool {
        size_t leaf = static_cast<size_t>(opt.walk_leaf < 8 ? 8 : opt.walk_leaf);
        for (size_t off = 0; off < primes.size(); off += leaf) {
            std::span<const uint64_t> chunk = primes.subspan(off, std::min(leaf, primes.size() - off));
            MertensAccumulator rec = detail::batch_record(chunk, digits);
            MertensAccumulator end = detail::combine(state, rec);
            bool safe = end.beta < 2 ||
                        compare(end.theta.log(), pred.loglog_n(state)) == Order::Less;
            if (safe) {
                state = std::move(end);
                continue;
            }
            if (walk_primes(state, chunk, fail_beta)) return true;
            // Conservative trigger: replace the walked increments by the
            // exact batch record so downstream state is product-derived.
            // (The walk state is equally valid; we keep it to avoid
            // recombining, both are certified enclosures.)
        }
        return false;
    };

    uint64_t segments_done = 0;
    for (uint64_t idx = start_segment;; ++idx) {
        auto [lo, hi] = segment_range(idx);
        if (hi > hard_limit)
            throw CapacityError("beta scan exceeded supported range 2^40 without crossing");
        MertensAccumulator rec = pipe.next();
        MertensAccumulator prev = tree.total();
        if (rec.beta > 0) {
            MertensAccumulator cand = detail::combine(prev, rec);
            bool safe = cand.beta < 2 ||
                        compare(cand.theta.log(), pred.loglog_n(prev)) == Order::Less;
            if (!safe) {
                // Crossing may be inside: re-sieve and examine prime by prime.
                std::vector<uint64_t> primes;
                detail::sieve_segment(lo, hi, base, primes);
                MertensAccumulator state = prev;
                uint64_t fail_beta = 0;
                if (drill_segment(state, primes, fail_beta)) {
                    result.beta_max = fail_beta;
                    result.p_beta_max = state.last_prime;
                    result.loglog_n_beta_max = pred.loglog_n(state);
                    result.state = state;
                    result.segments_scanned = segments_done;
                    // Overshoot verification: the predicate must stay failed.
                    uint64_t checked = 0;
                    uint64_t cursor = state.last_prime + 1;
                    MertensAccumulator overshoot = state;
                    std::vector<uint64_t> extra;
                    while (checked < opt.overshoot_window) {
                        extra.clear();
                        uint64_t chunk_hi = std::min(cursor + seg, hard_limit);
                        detail::sieve_segment(cursor, chunk_hi, base, extra);
                        for (uint64_t p : extra) {
                            detail::consume_prime(overshoot, p, digits);
                            Order o = pred.primorial_vs_n(overshoot);
                            if (o == Order::Less && !result.reversal_anomaly) {
                                result.reversal_anomaly = true;
                                result.reversal_beta = overshoot.beta;
                            }
                            if (++checked >= opt.overshoot_window) break;
                        }
                        cursor = chunk_hi;
                        if (cursor >= hard_limit) break;
                    }
                    result.overshoot_checked = checked;
                    pipe.stop();
                    return result;
                }
            }
        }
        tree.push(std::move(rec));
        ++segments_done;
        if (cfg.checkpoint_path && segments_done % cfg.checkpoint_every_segments == 0) {
            detail::BetaCheckpoint c;
            c.segment_size = seg;
            c.next_segment = idx + 1;
            c.digits = digits;
            c.eps_num = eps.get_num().get_str();
            c.eps_den = eps.get_den().get_str();
            c.state = tree.total();
            detail::write_beta_checkpoint(*cfg.checkpoint_path, c);
        }
    }
}

/// Accumulates logsum/theta over all primes <= limit.
inline MertensAccumulator accumulate_to_limit(uint64_t limit, const SieveConfig& cfg, int digits) {
    cfg.validate();
    if (digits < 30) throw PrecisionError("accumulate requires at least 30 digits");
    if (limit < 2) throw std::invalid_argument("accumulate requires limit >= 2");
    auto base = small_primes(static_cast<uint32_t>(isqrt_u64(limit)));
    uint64_t seg = cfg.segment_size;
    uint64_t n_segments = (limit - 2) / seg + 1;
    detail::CombineTree tree(digits);
    OrderedPipeline<MertensAccumulator> pipe(
        cfg.thread_count, static_cast<uint64_t>(cfg.thread_count) * 3, [&](uint64_t idx) {
            uint64_t lo = 2 + idx * seg;
            uint64_t hi = std::min(limit + 1, lo + seg);
            std::vector<uint64_t> primes;
            if (lo <= limit) detail::sieve_segment(lo, hi, base, primes);
            return detail::batch_record(primes, digits);
        });
    for (uint64_t i = 0; i < n_segments; ++i) tree.push(pipe.next());
    pipe.stop();
    return tree.total();
}

/// Accumulates logsum/theta over exactly the first `count` primes.
inline MertensAccumulator accumulate_count(uint64_t count, const SieveConfig& cfg, int digits) {
    cfg.validate();
    if (digits < 30) throw PrecisionError("accumulate requires at least 30 digits");
    if (count < 1) throw std::invalid_argument("accumulate requires count >= 1");
    auto base = small_primes(1u << 20);
    uint64_t seg = cfg.segment_size;
    detail::CombineTree tree(digits);
    uint64_t consumed = 0;
    for (uint64_t idx = 0;; ++idx) {
        uint64_t lo = 2 + idx * seg;
        std::vector<uint64_t> primes;
        detail::sieve_segment(lo, lo + seg, base, primes);
        if (consumed + primes.size() >= count) {
            std::span<const uint64_t> head(primes.data(), count - consumed);
            tree.push(detail::batch_record(head, digits));
            return tree.total();
        }
        tree.push(detail::batch_record(primes, digits));
        consumed += primes.size();
        if (lo + seg > (1ULL << 40)) throw CapacityError("accumulate_count range exceeded 2^40");
    }
}

} // namespace robin
