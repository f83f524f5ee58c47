#include "graphstage/kernels/repulsion.hpp"

#include <immintrin.h>

#include <cstdint>

namespace graphstage::kernels {

std::size_t repulsion_avx2(const double* xs, const double* ys, std::size_t n, double strength, double* fx,
                           double* fy) {
    std::size_t skipped = 0;
    const std::size_t padded = padded_size(n);
    const __m256d vstrength = _mm256_set1_pd(strength);
    const __m256d vmin = _mm256_set1_pd(kMinDistance2);
    const __m256d zero = _mm256_setzero_pd();
    const __m256i lane_offsets = _mm256_set_epi64x(3, 2, 1, 0);
    const __m256i vn = _mm256_set1_epi64x(static_cast<std::int64_t>(n));

    for (std::size_t i = 0; i < n; ++i) {
        const __m256d xi = _mm256_set1_pd(xs[i]);
        const __m256d yi = _mm256_set1_pd(ys[i]);
        const __m256i vi = _mm256_set1_epi64x(static_cast<std::int64_t>(i));
        __m256d ax = zero;
        __m256d ay = zero;
        for (std::size_t base = 0; base < padded; base += kLanes) {
            const __m256i vj = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<std::int64_t>(base)), lane_offsets);
            const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(xs + base));
            const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(ys + base));
            const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));

            // j < n and j != i
            const __m256i in_range_i = _mm256_andnot_si256(_mm256_cmpeq_epi64(vj, vi), _mm256_cmpgt_epi64(vn, vj));
            const __m256d in_range = _mm256_castsi256_pd(in_range_i);
            const __m256d far = _mm256_cmp_pd(d2, vmin, _CMP_GE_OQ);
            const __m256d valid = _mm256_and_pd(in_range, far);
            skipped += static_cast<std::size_t>(
                __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(_mm256_andnot_pd(far, in_range)))));

            const __m256d cx = _mm256_div_pd(_mm256_mul_pd(vstrength, dx), d2);
            const __m256d cy = _mm256_div_pd(_mm256_mul_pd(vstrength, dy), d2);
            ax = _mm256_add_pd(ax, _mm256_blendv_pd(zero, cx, valid));
            ay = _mm256_add_pd(ay, _mm256_blendv_pd(zero, cy, valid));
        }
        alignas(32) double lx[kLanes];
        alignas(32) double ly[kLanes];
        _mm256_store_pd(lx, ax);
        _mm256_store_pd(ly, ay);
        fx[i] = (lx[0] + lx[1]) + (lx[2] + lx[3]);
        fy[i] = (ly[0] + ly[1]) + (ly[2] + ly[3]);
    }
    return skipped;
}

}  // namespace graphstage::kernels
