#include "locsim/kernels.hpp"

#include "locsim/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace locsim::kern {

namespace {

Lane detect_lane() {
    if (const char *env = std::getenv("LOCSIM_SIMD")) {
        if (std::strcmp(env, "scalar") == 0)
            return Lane::scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2())
            return Lane::avx2;
        return Lane::scalar;
    }
    return cpu_has_avx2() ? Lane::avx2 : Lane::scalar;
}

std::atomic<Lane> g_lane{detect_lane()};

} // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Kernels &kernels(Lane lane) {
#if defined(__x86_64__)
    if (lane == Lane::avx2) {
        if (!cpu_has_avx2())
            throw InvalidInput("AVX2 lane requested but CPU lacks AVX2/FMA");
        return avx2_kernels;
    }
#else
    if (lane == Lane::avx2)
        throw InvalidInput("AVX2 lane unavailable on this architecture");
#endif
    return scalar_kernels;
}

const Kernels &kernels() { return kernels(g_lane.load(std::memory_order_relaxed)); }

Lane active_lane() { return g_lane.load(std::memory_order_relaxed); }

std::string_view lane_name(Lane lane) {
    return lane == Lane::avx2 ? "avx2" : "scalar";
}

void force_lane(Lane lane) {
    kernels(lane); // validates availability
    g_lane.store(lane, std::memory_order_relaxed);
}

} // namespace locsim::kern
