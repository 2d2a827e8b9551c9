#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace phasepos::util {

/// Fixed-size pool running contiguous index ranges. Work is partitioned so
/// every output element is written by exactly one worker; results are
/// independent of the worker count.
class ThreadPool {
public:
    explicit ThreadPool(unsigned threads);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    unsigned size() const { return static_cast<unsigned>(workers_.size()) + 1; }

    /// Splits [0, count) into one contiguous chunk per thread and blocks
    /// until all chunks ran. fn(begin, end) must not throw.
    void run_chunks(std::size_t count,
                    const std::function<void(std::size_t, std::size_t)>& fn);

private:
    struct Job {
        const std::function<void(std::size_t, std::size_t)>* fn = nullptr;
        std::size_t count = 0;
        std::size_t nchunks = 0;
        std::size_t next_chunk = 0;
        std::size_t done = 0;
        std::uint64_t generation = 0;
    };

    void worker_loop();
    bool take_chunk(std::size_t& begin, std::size_t& end);

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_work_;
    std::condition_variable cv_done_;
    Job job_;
    bool stop_ = false;
};

}  // namespace phasepos::util
