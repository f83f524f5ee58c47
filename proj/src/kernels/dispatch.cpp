#include "graphstage/kernels/repulsion.hpp"

#include <cstdlib>
#include <string>

namespace graphstage::kernels {

std::string_view to_string(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "?";
}

bool isa_available(Isa isa) {
    switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
        return true;
#else
        return false;
#endif
    }
    return false;
}

RepulsionFn repulsion_for(Isa isa) {
    if (!isa_available(isa)) return nullptr;
    switch (isa) {
    case Isa::Scalar: return &repulsion_scalar;
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return &repulsion_avx2;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return &repulsion_neon;
#endif
    default: return nullptr;
    }
}

namespace {

Isa resolve() {
    if (const char* env = std::getenv("GRAPHSTAGE_KERNEL")) {
        const std::string want(env);
        for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon})
            if (want == to_string(isa) && isa_available(isa)) return isa;
    }
    for (Isa isa : {Isa::Avx2, Isa::Neon})
        if (isa_available(isa)) return isa;
    return Isa::Scalar;
}

}  // namespace

Isa active_isa() {
    static const Isa isa = resolve();
    return isa;
}

RepulsionFn repulsion_kernel() {
    static const RepulsionFn fn = repulsion_for(active_isa());
    return fn;
}

}  // namespace graphstage::kernels
