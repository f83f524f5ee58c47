#include "graphstage/kernels/repulsion.hpp"

namespace graphstage::kernels {

std::size_t repulsion_scalar(const double* xs, const double* ys, std::size_t n, double strength, double* fx,
                             double* fy) {
    std::size_t skipped = 0;
    const std::size_t padded = padded_size(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = xs[i];
        const double yi = ys[i];
        double ax[kLanes] = {0.0, 0.0, 0.0, 0.0};
        double ay[kLanes] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t base = 0; base < padded; base += kLanes) {
            for (std::size_t l = 0; l < kLanes; ++l) {
                const std::size_t j = base + l;
                const double dx = xi - xs[j];
                const double dy = yi - ys[j];
                const double dx2 = dx * dx;
                const double dy2 = dy * dy;
                const double d2 = dx2 + dy2;
                const bool in_range = j < n && j != i;
                const bool valid = in_range && d2 >= kMinDistance2;
                if (in_range && !valid) ++skipped;
                ax[l] += valid ? (strength * dx) / d2 : 0.0;
                ay[l] += valid ? (strength * dy) / d2 : 0.0;
            }
        }
        fx[i] = (ax[0] + ax[1]) + (ax[2] + ax[3]);
        fy[i] = (ay[0] + ay[1]) + (ay[2] + ay[3]);
    }
    return skipped;
}

}  // namespace graphstage::kernels
