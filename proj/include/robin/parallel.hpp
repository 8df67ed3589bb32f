#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace robin {

inline int default_thread_count() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

/// Produces results for indices 0,1,2,... on a worker pool and hands them
/// to the caller strictly in index order, independent of completion order.
/// Workers run ahead of the consumer by at most `window` indices, which
/// bounds memory; stop() (or destruction) abandons indices not yet pulled.
template <typename R>
class OrderedPipeline {
public:
    using Producer = std::function<R(uint64_t)>;

    OrderedPipeline(int threads, uint64_t window, Producer produce)
        : produce_(std::move(produce)), window_(window < 1 ? 1 : window) {
        int n = threads < 1 ? 1 : threads;
        for (int i = 0; i < n; ++i)
            workers_.emplace_back([this] { work(); });
    }

    ~OrderedPipeline() { stop(); }

    /// Blocks until the next in-order result is ready.
    R next() {
        std::unique_lock<std::mutex> lk(mu_);
        uint64_t want = next_out_;
        cv_ready_.wait(lk, [&] {
            if (error_) return true;
            return ready_.count(want) > 0;
        });
        if (error_ && ready_.count(want) == 0) std::rethrow_exception(error_);
        R r = std::move(ready_.at(want));
        ready_.erase(want);
        ++next_out_;
        cv_space_.notify_all();
        return r;
    }

    void stop() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stopped_ = true;
        }
        cv_space_.notify_all();
        cv_ready_.notify_all();
        for (auto& t : workers_)
            if (t.joinable()) t.join();
        workers_.clear();
    }

private:
    void work() {
        while (true) {
            uint64_t idx;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_space_.wait(lk, [&] {
                    return stopped_ || next_in_ < next_out_ + window_;
                });
                if (stopped_) return;
                idx = next_in_++;
            }
            try {
                R r = produce_(idx);
                std::lock_guard<std::mutex> lk(mu_);
                ready_.emplace(idx, std::move(r));
                cv_ready_.notify_all();
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu_);
                if (!error_) error_ = std::current_exception();
                stopped_ = true;
                cv_ready_.notify_all();
                cv_space_.notify_all();
                return;
            }
        }
    }

    Producer produce_;
    uint64_t window_;
    std::mutex mu_;
    std::condition_variable cv_ready_, cv_space_;
    std::map<uint64_t, R> ready_;
    uint64_t next_in_ = 0, next_out_ = 0;
    bool stopped_ = false;
    std::exception_ptr error_;
    std::vector<std::thread> workers_;
};

/// Maps fn over [0, count) on a pool and returns the results indexed by
/// input position; deterministic regardless of thread count.
template <typename Fn>
auto indexed_parallel_map(uint64_t count, int threads, Fn fn)
    -> std::vector<decltype(fn(uint64_t{}))> {
    using R = decltype(fn(uint64_t{}));
    std::vector<R> out(count);
    if (count == 0) return out;
    int n = threads < 1 ? 1 : threads;
    if (n == 1) {
        for (uint64_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<uint64_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            while (true) {
                uint64_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    out[i] = fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    next.store(count);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

} // namespace robin
