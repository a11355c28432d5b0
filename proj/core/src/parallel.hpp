// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace orchestra::detail
{

/// Calls fn(i) for i in [0, n) on at most `concurrency` threads. Indices are
/// claimed in ascending order. The first exception is rethrown after all
/// workers have stopped.
template<typename Fn>
void parallel_for(std::size_t n, int concurrency, Fn&& fn)
{
    auto workers = static_cast<std::size_t>(std::max(1, concurrency));
    workers = std::min(workers, n);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::atomic<std::size_t> next {0};
    std::atomic<bool> failed {false};
    std::exception_ptr first_error;
    std::atomic_flag error_taken = ATOMIC_FLAG_INIT;

    auto worker = [&] {
        for (;;)
        {
            auto i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try
            {
                fn(i);
            }
            catch (...)
            {
                if (!error_taken.test_and_set())
                    first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    auto threads = std::vector<std::thread> {};
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
        threads.emplace_back(worker);
    for (auto& thread: threads)
        thread.join();
    if (first_error)
        std::rethrow_exception(first_error);
}

} // namespace orchestra::detail
