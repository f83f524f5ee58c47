#include "graphstage/kernels/repulsion.hpp"

#include <arm_neon.h>

#include <cstdint>

namespace graphstage::kernels {

// Two float64x2 halves emulate the four-lane accumulation of the scalar reference.
std::size_t repulsion_neon(const double* xs, const double* ys, std::size_t n, double strength, double* fx,
                           double* fy) {
    std::size_t skipped = 0;
    const std::size_t padded = padded_size(n);
    const float64x2_t vstrength = vdupq_n_f64(strength);
    const float64x2_t vmin = vdupq_n_f64(kMinDistance2);
    const float64x2_t zero = vdupq_n_f64(0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const float64x2_t xi = vdupq_n_f64(xs[i]);
        const float64x2_t yi = vdupq_n_f64(ys[i]);
        float64x2_t ax[2] = {zero, zero};
        float64x2_t ay[2] = {zero, zero};
        for (std::size_t base = 0; base < padded; base += kLanes) {
            for (std::size_t h = 0; h < 2; ++h) {
                const std::size_t j0 = base + 2 * h;
                const float64x2_t dx = vsubq_f64(xi, vld1q_f64(xs + j0));
                const float64x2_t dy = vsubq_f64(yi, vld1q_f64(ys + j0));
                const float64x2_t d2 = vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy));
                const uint64_t r0 = (j0 < n && j0 != i) ? ~uint64_t{0} : 0;
                const uint64_t r1 = (j0 + 1 < n && j0 + 1 != i) ? ~uint64_t{0} : 0;
                const uint64x2_t in_range = vcombine_u64(vcreate_u64(r0), vcreate_u64(r1));
                const uint64x2_t far = vcgeq_f64(d2, vmin);
                const uint64x2_t valid = vandq_u64(in_range, far);
                const uint64x2_t near = vbicq_u64(in_range, far);
                skipped += (vgetq_lane_u64(near, 0) ? 1 : 0) + (vgetq_lane_u64(near, 1) ? 1 : 0);
                const float64x2_t cx = vdivq_f64(vmulq_f64(vstrength, dx), d2);
                const float64x2_t cy = vdivq_f64(vmulq_f64(vstrength, dy), d2);
                ax[h] = vaddq_f64(ax[h], vbslq_f64(valid, cx, zero));
                ay[h] = vaddq_f64(ay[h], vbslq_f64(valid, cy, zero));
            }
        }
        // lanes: ax[0] = {0, 1}, ax[1] = {2, 3}
        fx[i] = (vgetq_lane_f64(ax[0], 0) + vgetq_lane_f64(ax[0], 1)) +
                (vgetq_lane_f64(ax[1], 0) + vgetq_lane_f64(ax[1], 1));
        fy[i] = (vgetq_lane_f64(ay[0], 0) + vgetq_lane_f64(ay[0], 1)) +
                (vgetq_lane_f64(ay[1], 0) + vgetq_lane_f64(ay[1], 1));
    }
    return skipped;
}

}  // namespace graphstage::kernels
