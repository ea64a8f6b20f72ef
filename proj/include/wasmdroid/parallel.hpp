// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wasmdroid
{
/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers write results
/// into slot i so merging stays deterministic. The first exception thrown by
/// any task is rethrown after all workers finish.
template <typename Fn>
void parallel_for(size_t n, unsigned jobs, Fn&& fn)
{
    const size_t workers = std::min<size_t>(std::max(1u, jobs), n);
    if (workers <= 1)
    {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w)
    {
        pool.emplace_back([&] {
            for (size_t i = next++; i < n; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    const std::lock_guard lock{failure_mutex};
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}
}  // namespace wasmdroid
