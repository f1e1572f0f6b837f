#ifndef LAPSOM_PARALLEL_HPP
#define LAPSOM_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace lapsom {

/// Worker count: TOOL_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
inline std::size_t thread_count()
{
    if (const char* env = std::getenv("TOOL_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0)
                return static_cast<std::size_t>(v);
        } catch (...) {
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(block) for every block in [0, blocks). Blocks are distributed over
/// threads; callers keep per-block results and reduce them in block order so
/// the outcome never depends on the schedule.
template <typename Fn>
void parallel_blocks(std::size_t blocks, Fn&& fn)
{
    const std::size_t workers = std::min(thread_count(), blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b)
            fn(b);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t b = w; b < blocks; b += workers)
                    fn(b);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

/// Element-wise parallel loop for independent iterations.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t block_size = 64)
{
    const std::size_t blocks = (n + block_size - 1) / block_size;
    parallel_blocks(blocks, [&](std::size_t b) {
        const std::size_t end = std::min(n, (b + 1) * block_size);
        for (std::size_t i = b * block_size; i < end; ++i)
            fn(i);
    });
}

} // namespace lapsom

#endif // LAPSOM_PARALLEL_HPP
