#include <cmath>
#include <cstddef>

#include "msspeech/kernels.hpp"

// Reference kernels. Plain loops, no reordering tricks: these define the
// semantics the SIMD variants are tested against.
namespace msspeech::kernels::detail {

namespace {

double scalar_dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double scalar_sum_sq(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

void scalar_mul(const double* a, const double* b, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

double scalar_abs_diff_sum(const double* x, std::size_t n) {
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) acc += std::fabs(x[i + 1] - x[i]);
    return acc;
}

void scalar_magnitude(const double* re, const double* im, double* dst, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

}  // namespace

const Ops scalar_ops = {scalar_dot, scalar_sum_sq, scalar_mul, scalar_abs_diff_sum,
                        scalar_magnitude};

}  // namespace msspeech::kernels::detail
