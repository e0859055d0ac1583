#include "hddb/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hddb {

size_t parallelism_degree() {
    static size_t degree = [] {
        if (const char* env = std::getenv("HDDB_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return size_t(v);
        }
        size_t hw = std::thread::hardware_concurrency();
        return hw ? hw : size_t{1};
    }();
    return degree;
}

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
    size_t degree = std::min(parallelism_degree(), n);
    if (n == 0) return;
    if (degree <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(degree);
    // Chunks start at multiples of 64 so workers that set bits in shared
    // word-packed outputs (selection masks) never touch the same word.
    size_t chunk = ((n + degree - 1) / degree + 63) & ~size_t{63};
    for (size_t t = 0; t < degree; ++t) {
        size_t begin = t * chunk;
        size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& w : workers) w.join();
}

uint64_t fnv1a(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 0xcbf29ce484222325ULL;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[size_t(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace hddb
