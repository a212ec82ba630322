#ifndef MBRW_PARALLEL_HPP
#define MBRW_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mbrw {

/// Runs fn(k) for k in [0, count) on up to `threads` workers, each taking a
/// contiguous block. Callers write results into slot k, so any reduction done
/// afterwards in index order is independent of the thread count.
template <class Fn>
void parallel_for_index(std::size_t count, std::size_t threads, Fn&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t k = 0; k < count; ++k) {
            fn(k);
        }
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    const std::size_t block = (count + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = t * block;
        const std::size_t hi = std::min(count, lo + block);
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t k = lo; k < hi; ++k) {
                    fn(k);
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace mbrw

#endif
