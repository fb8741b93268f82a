#include "kernels_internal.hpp"

#include <cstdlib>
#include <string>

namespace cellcast::simd {

namespace detail {
#if !defined(CELLCAST_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !defined(CELLCAST_HAVE_NEON)
const KernelTable* neon_table() { return nullptr; }
#endif
}  // namespace detail

namespace {

bool cpu_has(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(CELLCAST_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(CELLCAST_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& select_from_environment() {
    if (const char* forced = std::getenv("CELLCAST_SIMD")) {
        const std::string name(forced);
        if (name == "scalar") return scalar_kernels();
        if (name == "avx2" && kernels_for(Isa::Avx2)) return *kernels_for(Isa::Avx2);
        if (name == "neon" && kernels_for(Isa::Neon)) return *kernels_for(Isa::Neon);
    }
    if (const auto* t = kernels_for(Isa::Avx2)) return *t;
    if (const auto* t = kernels_for(Isa::Neon)) return *t;
    return scalar_kernels();
}

}  // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable* kernels_for(Isa isa) {
    if (!cpu_has(isa)) return nullptr;
    switch (isa) {
        case Isa::Scalar: return &scalar_kernels();
        case Isa::Avx2: return detail::avx2_table();
        case Isa::Neon: return detail::neon_table();
    }
    return nullptr;
}

const KernelTable& active() {
    static const KernelTable& table = select_from_environment();
    return table;
}

}  // namespace cellcast::simd
