#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace stylemem {

namespace detail {

inline unsigned& thread_count_storage() {
    static unsigned count = std::max(1u, std::thread::hardware_concurrency());
    return count;
}

inline bool& in_parallel_region() {
    thread_local bool flag = false;
    return flag;
}

// Persistent worker pool. Kernels are invoked thousands of times per batch,
// so per-call thread spawning is far too expensive.
class WorkerPool {
public:
    static WorkerPool& instance() {
        static WorkerPool pool;
        return pool;
    }

    // Run fn(chunk_index) for chunk_index in [1, chunks); chunk 0 belongs to
    // the caller. Blocks until all chunks finish. Concurrent top-level users
    // take turns through the gate.
    void run(unsigned chunks, const std::function<void(unsigned)>& fn) {
        std::unique_lock<std::mutex> gate(run_gate_);
        ensure_workers(chunks - 1);
        {
            std::unique_lock<std::mutex> lock(mu_);
            job_ = &fn;
            job_chunks_ = chunks;
            next_chunk_ = 1;
            pending_ = chunks - 1;
            ++generation_;
        }
        cv_work_.notify_all();
        fn(0);
        std::unique_lock<std::mutex> lock(mu_);
        cv_done_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

    ~WorkerPool() {
        {
            std::unique_lock<std::mutex> lock(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_work_.notify_all();
        for (auto& t : workers_) t.join();
    }

private:
    WorkerPool() = default;

    void ensure_workers(unsigned needed) {
        std::unique_lock<std::mutex> lock(mu_);
        while (workers_.size() < needed) {
            workers_.emplace_back([this] { worker_loop(); });
        }
    }

    void worker_loop() {
        in_parallel_region() = true;
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(unsigned)>* job = nullptr;
            {
                std::unique_lock<std::mutex> lock(mu_);
                cv_work_.wait(lock, [&] { return stop_ || (job_ && generation_ != seen); });
                if (stop_) return;
                seen = generation_;
                job = job_;
            }
            for (;;) {
                unsigned chunk;
                {
                    std::unique_lock<std::mutex> lock(mu_);
                    if (job_ != job || next_chunk_ >= job_chunks_) break;
                    chunk = next_chunk_++;
                }
                (*job)(chunk);
                std::unique_lock<std::mutex> lock(mu_);
                if (--pending_ == 0) cv_done_.notify_all();
            }
        }
    }

    std::mutex run_gate_;
    std::mutex mu_;
    std::condition_variable cv_work_, cv_done_;
    std::vector<std::thread> workers_;
    const std::function<void(unsigned)>* job_ = nullptr;
    unsigned job_chunks_ = 0;
    unsigned next_chunk_ = 0;
    unsigned pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace detail

inline void set_thread_count(unsigned n) { detail::thread_count_storage() = std::max(1u, n); }
inline unsigned thread_count() { return detail::thread_count_storage(); }

// Run fn(begin, end) over disjoint contiguous index ranges. Every output
// element is written by exactly one invocation and each invocation's loop
// order is fixed, so results are bitwise independent of the thread count.
// Nested calls and workloads below `grain` total indices run serially.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn, std::size_t grain = 2) {
    if (end <= begin) return;
    const std::size_t n = end - begin;
    const unsigned workers = thread_count();
    if (workers <= 1 || n < grain || detail::in_parallel_region()) {
        fn(begin, end);
        return;
    }
    const unsigned chunks = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    const std::size_t base = n / chunks, rem = n % chunks;

    // chunk c covers a contiguous range; the mapping depends only on (n, chunks)
    auto chunk_range = [=](unsigned c) {
        std::size_t lo = begin + c * base + std::min<std::size_t>(c, rem);
        std::size_t len = base + (c < rem ? 1 : 0);
        return std::pair<std::size_t, std::size_t>(lo, lo + len);
    };

    std::function<void(unsigned)> job = [&](unsigned c) {
        auto [lo, hi] = chunk_range(c);
        bool saved = detail::in_parallel_region();
        detail::in_parallel_region() = true;
        fn(lo, hi);
        detail::in_parallel_region() = saved;
    };
    detail::WorkerPool::instance().run(chunks, job);
}

}  // namespace stylemem
