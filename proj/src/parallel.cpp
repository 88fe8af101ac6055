#include "chorate/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace chorate {

namespace {
constexpr std::size_t kBlock = 4096;
}

std::size_t worker_count(std::size_t requested)
{
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("CHORATE_THREADS")) {
        try {
            const long value = std::stol(env);
            if (value > 0) {
                return static_cast<std::size_t>(value);
            }
        } catch (const std::exception&) {
            // fall through to auto
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t threads)
{
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    const std::size_t workers = std::min(worker_count(threads), blocks);
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) {
            body(b * kBlock, std::min(n, (b + 1) * kBlock));
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t b = next++; b < blocks; b = next++) {
                try {
                    body(b * kBlock, std::min(n, (b + 1) * kBlock));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace chorate
