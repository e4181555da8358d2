#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace dcbnb {

/// Fixed set of workers fed index-sharded jobs. One job runs at a time;
/// run() blocks until every index is processed and the calling thread
/// works alongside the pool. With zero extra workers run() degrades to a
/// plain serial loop. Not reentrant.
class ThreadPool {
public:
    explicit ThreadPool(int extra_workers) {
        for (int w = 0; w < extra_workers; ++w)
            threads_.emplace_back([this] { worker_loop(); });
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
        }
        work_ready_.notify_all();
        for (auto& t : threads_) t.join();
    }

    int worker_count() const { return static_cast<int>(threads_.size()) + 1; }

    /// Invoke fn(k) for every k in [0, count).
    void run(int count, const std::function<void(int)>& fn) {
        if (count <= 0) return;
        if (threads_.empty() || count == 1) {
            for (int k = 0; k < count; ++k) fn(k);
            return;
        }
        auto job = std::make_shared<Job>();
        job->fn = &fn;
        job->count = count;
        job->pending = count;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            current_ = job;
            ++generation_;
        }
        work_ready_.notify_all();
        drain(*job);
        std::unique_lock<std::mutex> lock(mutex_);
        job_done_.wait(lock, [&] { return job->pending == 0; });
        current_.reset();
        if (job->error) std::rethrow_exception(job->error);
    }

private:
    struct Job {
        const std::function<void(int)>* fn = nullptr;
        std::atomic<int> next{0};
        int count = 0;
        int pending = 0;          // guarded by the pool mutex
        std::exception_ptr error; // guarded by the pool mutex
    };

    // A late-waking worker sees an exhausted counter and leaves without
    // touching fn, so jobs never leak across generations.
    void drain(Job& job) {
        while (true) {
            const int k = job.next.fetch_add(1);
            if (k >= job.count) break;
            std::exception_ptr err;
            try {
                (*job.fn)(k);
            } catch (...) {
                err = std::current_exception();
            }
            std::lock_guard<std::mutex> lock(mutex_);
            if (err && !job.error) job.error = err;
            if (--job.pending == 0) job_done_.notify_all();
        }
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        std::unique_lock<std::mutex> lock(mutex_);
        while (true) {
            work_ready_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            auto job = current_;
            lock.unlock();
            if (job) drain(*job);
            lock.lock();
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable work_ready_;
    std::condition_variable job_done_;
    std::shared_ptr<Job> current_;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

} // namespace dcbnb
