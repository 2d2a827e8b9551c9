#include "util/thread_pool.hpp"

namespace phasepos::util {

ThreadPool::ThreadPool(unsigned threads) {
    if (threads == 0) threads = 1;
    for (unsigned i = 1; i < threads; ++i)
        workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lk(mu_);
        stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& w : workers_) w.join();
}

bool ThreadPool::take_chunk(std::size_t& begin, std::size_t& end) {
    if (job_.next_chunk >= job_.nchunks) return false;
    std::size_t c = job_.next_chunk++;
    std::size_t per = job_.count / job_.nchunks;
    std::size_t rem = job_.count % job_.nchunks;
    begin = c * per + std::min(c, rem);
    end = begin + per + (c < rem ? 1 : 0);
    return true;
}

void ThreadPool::worker_loop() {
    std::uint64_t seen = 0;
    for (;;) {
        std::unique_lock lk(mu_);
        cv_work_.wait(lk, [&] { return stop_ || job_.generation != seen; });
        if (stop_) return;
        seen = job_.generation;
        std::size_t b, e;
        while (take_chunk(b, e)) {
            lk.unlock();
            (*job_.fn)(b, e);
            lk.lock();
            if (++job_.done == job_.nchunks) cv_done_.notify_all();
        }
    }
}

void ThreadPool::run_chunks(std::size_t count,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
    if (count == 0) return;
    std::size_t nchunks = std::min<std::size_t>(size(), count);
    if (nchunks == 1) {
        fn(0, count);
        return;
    }
    {
        std::lock_guard lk(mu_);
        job_.fn = &fn;
        job_.count = count;
        job_.nchunks = nchunks;
        job_.next_chunk = 0;
        job_.done = 0;
        ++job_.generation;
    }
    cv_work_.notify_all();
    // caller participates
    std::unique_lock lk(mu_);
    std::size_t b, e;
    while (take_chunk(b, e)) {
        lk.unlock();
        fn(b, e);
        lk.lock();
        if (++job_.done == job_.nchunks) cv_done_.notify_all();
    }
    cv_done_.wait(lk, [&] { return job_.done == job_.nchunks; });
}

}  // namespace phasepos::util
