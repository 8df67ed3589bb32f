#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robin/errors.hpp"
#include "robin/parallel.hpp"

namespace robin {

struct SieveConfig {
    uint64_t segment_size = 1ULL << 25; // numbers per window
    int thread_count = default_thread_count();
    std::optional<std::filesystem::path> checkpoint_path;
    uint64_t checkpoint_every_segments = 64;

    void validate() const {
        if (segment_size < (1ULL << 16))
            throw std::invalid_argument("segment_size must be >= 2^16");
        if (thread_count < 1) throw std::invalid_argument("thread_count must be >= 1");
        if (checkpoint_every_segments < 1)
            throw std::invalid_argument("checkpoint_every_segments must be >= 1");
    }
};

/// Primes <= limit by a plain sieve; intended for base primes (limit ~ 1e7).
inline std::vector<uint32_t> small_primes(uint32_t limit) {
    std::vector<uint32_t> out;
    if (limit < 2) return out;
    std::vector<uint8_t> mark(limit + 1, 1);
    for (uint32_t i = 2; i <= limit; ++i) {
        if (!mark[i]) continue;
        out.push_back(i);
        for (uint64_t j = uint64_t(i) * i; j <= limit; j += i) mark[j] = 0;
    }
    return out;
}

inline uint64_t isqrt_u64(uint64_t n) {
    uint64_t r = static_cast<uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

namespace detail {

/// Appends the primes in [lo, hi) to out.  base must cover sqrt(hi-1).
/// Odd-only word bitmap; scratchreused across calls when supplied.
inline void sieve_segment(uint64_t lo, uint64_t hi, const std::vector<uint32_t>& base,
                          std::vector<uint64_t>& out, std::vector<uint64_t>* scratch = nullptr) {
    if (hi <= lo) return;
    if (lo < 2) lo = 2;
    if (lo <= 2 && hi > 2) out.push_back(2);
    // Odd numbers in [lo, hi): first odd >= lo.
    uint64_t first = lo | 1;
    if (first >= hi) return;
    uint64_t n_odd = (hi - first + 1) / 2;
    uint64_t words = (n_odd + 63) / 64;
    std::vector<uint64_t> local;
    std::vector<uint64_t>& bits = scratch ? *scratch : local;
    bits.assign(words, ~0ULL);
    // Mask tail entries beyond n_odd.
    if (n_odd % 64) bits[words - 1] = (~0ULL) >> (64 - n_odd % 64);
    if (first == 1) bits[0] &= ~1ULL; // 1 is not prime

    for (uint32_t p : base) {
        if (p == 2) continue;
        uint64_t pp = uint64_t(p) * p;
        if (pp >= hi) break;
        uint64_t start = pp;
        if (start < first) {
            uint64_t q = (first + p - 1) / p;
            start = q * p;
            if ((start & 1) == 0) start += p;
            if (start < pp) start = pp;
        }
        if ((start & 1) == 0) start += p; // odd multiples only
        for (uint64_t j = start; j < hi; j += 2ULL * p) {
            uint64_t idx = (j - first) >> 1;
            bits[idx >> 6] &= ~(1ULL << (idx & 63));
        }
    }
    for (uint64_t w = 0; w < words; ++w) {
        uint64_t word = bits[w];
        while (word) {
            unsigned b = static_cast<unsigned>(__builtin_ctzll(word));
            word &= word - 1;
            out.push_back(first + 2 * ((w << 6) + b));
        }
    }
}

} // namespace detail

struct StreamStatus {
    uint64_t primes_emitted = 0;
    uint64_t last_prime = 0;
    bool checkpoint_ok = true;
    std::string checkpoint_message;
};

namespace detail {

struct StreamCheckpoint {
    uint64_t limit = 0;
    uint64_t segment_size = 0;
    uint64_t next_segment = 0;
};

inline std::optional<StreamCheckpoint> read_stream_checkpoint(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) return std::nullopt;
    std::string magic;
    StreamCheckpoint c;
    in >> magic >> c.limit >> c.segment_size >> c.next_segment;
    if (!in || magic != "RBSP1") return std::nullopt;
    return c;
}

inline bool write_stream_checkpoint(const std::filesystem::path& p, const StreamCheckpoint& c,
                                    std::string& err) {
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            err = "cannot open checkpoint file " + tmp.string();
            return false;
        }
        out << "RBSP1 " << c.limit << " " << c.segment_size << " " << c.next_segment << "\n";
        if (!out.flush()) {
            err = "cannot write checkpoint file " + tmp.string();
            return false;
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    if (ec) {
        err = "cannot commit checkpoint file: " + ec.message();
        return false;
    }
    return true;
}

} // namespace detail

/// Streams exactly the primes <= limit in increasing order.  Segments are
/// sieved in parallel and delivered in order, so output is deterministic
/// for any thread count.  With a checkpoint path the stream resumes after
/// the last completed segment; checkpoint I/O failures degrade to an
/// un-checkpointed run and are reported in the returned status.
inline StreamStatus primes_stream(uint64_t limit, const SieveConfig& cfg,
                                  const std::function<void(uint64_t)>& emit) {
    cfg.validate();
    if (limit < 2) throw std::invalid_argument("primes_stream requires limit >= 2");
    StreamStatus status;
    auto base = small_primes(static_cast<uint32_t>(isqrt_u64(limit)));
    uint64_t seg = cfg.segment_size;
    uint64_t n_segments = (limit - 2) / seg + 1; // covers [2, limit]
    uint64_t start_segment = 0;
    if (cfg.checkpoint_path) {
        if (auto c = detail::read_stream_checkpoint(*cfg.checkpoint_path)) {
            if (c->limit == limit && c->segment_size == seg) start_segment = c->next_segment;
        }
    }
    OrderedPipeline<std::vector<uint64_t>> pipe(
        cfg.thread_count, static_cast<uint64_t>(cfg.thread_count) * 4,
        [&, start_segment](uint64_t i) {
            uint64_t idx = start_segment + i;
            uint64_t lo = 2 + idx * seg;
            uint64_t hi = std::min(limit + 1, lo + seg);
            std::vector<uint64_t> out;
            if (lo <= limit) detail::sieve_segment(lo, hi, base, out);
            return out;
        });
    for (uint64_t idx = start_segment; idx < n_segments; ++idx) {
        std::vector<uint64_t> primes = pipe.next();
        for (uint64_t p : primes) emit(p);
        if (!primes.empty()) status.last_prime = primes.back();
        status.primes_emitted += primes.size();
        if (cfg.checkpoint_path && status.checkpoint_ok &&
            ((idx + 1) % cfg.checkpoint_every_segments == 0 || idx + 1 == n_segments)) {
            std::string err;
            if (!detail::write_stream_checkpoint(*cfg.checkpoint_path,
                                                 {limit, seg, idx + 1}, err)) {
                status.checkpoint_ok = false;
                status.checkpoint_message = err;
            }
        }
    }
    pipe.stop();
    return status;
}

/// pi(limit): number of primes <= limit.
inline uint64_t prime_count(uint64_t limit, const SieveConfig& cfg = {}) {
    if (limit < 2) return 0;
    cfg.validate();
    auto base = small_primes(static_cast<uint32_t>(isqrt_u64(limit)));
    uint64_t seg = cfg.segment_size;
    uint64_t n_segments = (limit - 2) / seg + 1;
    auto counts = indexed_parallel_map(n_segments, cfg.thread_count, [&](uint64_t idx) {
        uint64_t lo = 2 + idx * seg;
        uint64_t hi = std::min(limit + 1, lo + seg);
        std::vector<uint64_t> out;
        detail::sieve_segment(lo, hi, base, out);
        return static_cast<uint64_t>(out.size());
    });
    uint64_t total = 0;
    for (uint64_t c : counts) total += c;
    return total;
}

/// The k-th prime (1-based: nth_prime(1) = 2).
inline uint64_t nth_prime(uint64_t k, const SieveConfig& cfg = {}) {
    if (k < 1) throw std::invalid_argument("nth_prime requires k >= 1");
    cfg.validate();
    // p_k < k (ln k + ln ln k) for k >= 6; rounded up with slack.
    double kk = static_cast<double>(k < 6 ? 6 : k);
    uint64_t bound = static_cast<uint64_t>(kk * (std::log(kk) + std::log(std::log(kk)) + 1.1)) + 16;
    auto base = small_primes(static_cast<uint32_t>(isqrt_u64(bound)));
    uint64_t lo = 2, remaining = k;
    std::vector<uint64_t> out;
    std::vector<uint64_t> scratch;
    while (lo <= bound) {
        uint64_t hi = std::min(bound + 1, lo + cfg.segment_size);
        out.clear();
        detail::sieve_segment(lo, hi, base, out, &scratch);
        if (remaining <= out.size()) return out[remaining - 1];
        remaining -= out.size();
        lo = hi;
    }
    throw std::logic_error("nth_prime bound too small"); // unreachable
}

} // namespace robin
