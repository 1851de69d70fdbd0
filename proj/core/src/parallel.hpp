#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace revox::detail {

// Runs fn(chunk, begin, end) over `threads` contiguous chunks of [0, n).
// Chunk boundaries depend only on (n, threads); callers that merge results
// in chunk order get the same output for every thread count.
template <typename Fn>
std::size_t parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    const std::size_t per = (n + chunks - 1) / std::max<std::size_t>(chunks, 1);
    if (chunks == 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return 1;
    }
    std::vector<std::exception_ptr> errors(chunks);
    {
        std::vector<std::jthread> workers;
        workers.reserve(chunks);
        for (std::size_t c = 0; c < chunks; ++c) {
            const std::size_t begin = std::min(n, c * per);
            const std::size_t end = std::min(n, begin + per);
            workers.emplace_back([&, c, begin, end] {
                try {
                    fn(c, begin, end);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return chunks;
}

}  // namespace revox::detail
