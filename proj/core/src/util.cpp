#include "aphom/util.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>

namespace aphom {

std::string hexHash(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void parallelFor(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    const int nt = std::min<std::size_t>(std::max(1, threads), count);
    if (nt == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::vector<std::exception_ptr> errors(nt);
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= count) break;
                    body(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

int resolveThreads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("APHOM_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

}  // namespace aphom
