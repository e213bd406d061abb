#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace da {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Error families map 1:1 onto CLI exit codes.
enum class ErrorFamily : int {
    config = 2,
    data = 3,
    format = 4,
    divergence = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, const std::string& what)
        : std::runtime_error(what), family_(family) {}
    ErrorFamily family() const { return family_; }

private:
    ErrorFamily family_;
};

#define DA_DEFINE_ERROR(Name, Family)                         \
    class Name : public Error {                               \
    public:                                                   \
        explicit Name(const std::string& what)                \
            : Error(ErrorFamily::Family, #Name ": " + what) {} \
    }

DA_DEFINE_ERROR(ConfigError, config);
DA_DEFINE_ERROR(RunConfigError, config);
DA_DEFINE_ERROR(ClusterConfigError, config);
DA_DEFINE_ERROR(CapacityExceeded, config);
DA_DEFINE_ERROR(RankOutOfRange, config);
DA_DEFINE_ERROR(InvalidSubset, config);
DA_DEFINE_ERROR(ShiftOutOfRange, config);
DA_DEFINE_ERROR(PatternShapeMismatch, config);
DA_DEFINE_ERROR(DatasetNotFound, data);
DA_DEFINE_ERROR(DatasetFormatError, format);
DA_DEFINE_ERROR(CodebookFormatError, format);
DA_DEFINE_ERROR(CheckpointFormatError, format);
DA_DEFINE_ERROR(ClusterFileError, format);
DA_DEFINE_ERROR(DistanceAssetError, format);
DA_DEFINE_ERROR(DivergenceError, divergence);

#undef DA_DEFINE_ERROR

// Caps internal parallelism (OpenMP). 0 = all cores. Reads DA_THREADS once at
// startup when called with -1.
void set_max_threads(int n);
int max_threads();

// FNV-1a, used for file/config hashes and pattern seen-sets.
inline uint64_t fnv1a(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a_file(const std::string& path);

}  // namespace da
