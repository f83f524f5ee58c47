#pragma once

// Pairwise repulsion kernels for the force-directed layout.
//
// Every variant computes, for each node i,
//
//     f_i = sum_{j != i, |p_i - p_j|^2 >= kMinDistance2}  strength * (p_i - p_j) / |p_i - p_j|^2
//
// with an identical floating-point evaluation order, so results agree
// bit-for-bit across ISAs:
//   * j is split into four interleaved lanes (lane l takes j = 4b + l), each
//     with its own accumulator starting at +0.0;
//   * per pair: dx = xi - xj, dy = yi - yj, d2 = dx*dx + dy*dy (no FMA),
//     c = (strength*dx) / d2; excluded pairs contribute exactly 0.0;
//   * f = (lane0 + lane1) + (lane2 + lane3).
// Pairs closer than the cutoff are excluded and counted; the caller resolves them.

#include <cstddef>
#include <string_view>

namespace graphstage::kernels {

inline constexpr double kMinDistance2 = 1e-12;  // (1e-6 layout units)^2
inline constexpr std::size_t kLanes = 4;

/// Inputs xs/ys must be readable up to padded_size(n) entries.
constexpr std::size_t padded_size(std::size_t n) { return (n + kLanes - 1) / kLanes * kLanes; }

/// Returns the number of ordered (i, j) pairs skipped as coincident.
using RepulsionFn = std::size_t (*)(const double* xs, const double* ys, std::size_t n, double strength,
                                    double* fx, double* fy);

std::size_t repulsion_scalar(const double* xs, const double* ys, std::size_t n, double strength, double* fx,
                             double* fy);
#if defined(__x86_64__) || defined(_M_X64)
std::size_t repulsion_avx2(const double* xs, const double* ys, std::size_t n, double strength, double* fx,
                           double* fy);
#endif
#if defined(__aarch64__)
std::size_t repulsion_neon(const double* xs, const double* ys, std::size_t n, double strength, double* fx,
                           double* fy);
#endif

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// Compiled in and supported by the running CPU.
bool isa_available(Isa isa);

/// Kernel for a specific ISA; nullptr when unavailable.
RepulsionFn repulsion_for(Isa isa);

/// Best available kernel. GRAPHSTAGE_KERNEL=scalar|avx2|neon overrides the
/// choice when that ISA is available. Resolved once per process.
RepulsionFn repulsion_kernel();
Isa active_isa();

}  // namespace graphstage::kernels
