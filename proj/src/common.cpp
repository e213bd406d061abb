#include "da/common.hpp"

#include <cstdlib>
#include <fstream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace da {

namespace {
int g_max_threads = 0;  // 0 = library default (all cores)
}

void set_max_threads(int n) {
    if (n < 0) {
        const char* env = std::getenv("DA_THREADS");
        n = env ? std::atoi(env) : 0;
    }
    g_max_threads = n;
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#endif
}

int max_threads() { return g_max_threads; }

uint64_t fnv1a_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorFamily::data, "cannot open for hashing: " + path);
    uint64_t h = 0xcbf29ce484222325ull;
    std::vector<char> buf(1 << 16);
    while (is) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h = fnv1a(buf.data(), static_cast<size_t>(is.gcount()), h);
    }
    return h;
}

}  // namespace da
