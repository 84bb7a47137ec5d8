// NEON (aarch64, float64x2) variants; same contracts as the scalar reference.
#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "msspeech/kernels.hpp"

namespace msspeech::kernels::detail {

namespace {

double neon_dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double neon_sum_sq(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t x = vld1q_f64(a + i);
        acc = vfmaq_f64(acc, x, x);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

void neon_mul(const double* a, const double* b, double* dst, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(dst + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

double neon_abs_diff_sum(const double* x, std::size_t n) {
    if (n < 2) return 0.0;
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 3 <= n; i += 2) {
        acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(x + i + 1), vld1q_f64(x + i)));
    }
    double s = vaddvq_f64(acc);
    for (; i + 1 < n; ++i) s += std::fabs(x[i + 1] - x[i]);
    return s;
}

void neon_magnitude(const double* re, const double* im, double* dst, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t r = vld1q_f64(re + i);
        const float64x2_t m = vld1q_f64(im + i);
        vst1q_f64(dst + i, vsqrtq_f64(vfmaq_f64(vmulq_f64(m, m), r, r)));
    }
    for (; i < n; ++i) dst[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

}  // namespace

const Ops neon_ops = {neon_dot, neon_sum_sq, neon_mul, neon_abs_diff_sum, neon_magnitude};

}  // namespace msspeech::kernels::detail

#endif  // aarch64
