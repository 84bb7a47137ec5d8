#pragma once

#include <cstddef>
#include <span>
#include <string>

// Data-parallel inner loops shared by the signal-processing code. Every kernel
// has a scalar reference implementation plus SIMD variants (AVX2 on x86-64,
// NEON on aarch64) selected once at runtime. Backends are equivalence-tested
// against the scalar reference; results may differ in the last bits because
// vector lanes change the summation order.
namespace msspeech::kernels {

enum class Backend { Scalar, Avx2, Neon };

// Highest backend usable on this CPU (detected once).
Backend detect_backend();

// Backend used by the kernel entry points below. Defaults to detect_backend();
// the MSSPEECH_KERNELS environment variable ("scalar", "avx2", "neon") or
// set_backend() overrides it.
Backend active_backend();
void set_backend(Backend b);  // throws ConfigError when unavailable on this CPU
std::string backend_name(Backend b);

// sum_i a[i] * b[i], over min(len(a), len(b)) elements
double dot(std::span<const double> a, std::span<const double> b);

// sum_i a[i]^2
double sum_sq(std::span<const double> a);

// dst[i] = a[i] * b[i]
void mul(std::span<const double> a, std::span<const double> b, std::span<double> dst);

// sum_i |x[i+1] - x[i]|; 0 when fewer than two elements
double abs_diff_sum(std::span<const double> x);

// dst[i] = sqrt(re[i]^2 + im[i]^2)
void magnitude(std::span<const double> re, std::span<const double> im, std::span<double> dst);

namespace detail {
struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum_sq)(const double*, std::size_t);
    void (*mul)(const double*, const double*, double*, std::size_t);
    double (*abs_diff_sum)(const double*, std::size_t);
    void (*magnitude)(const double*, const double*, double*, std::size_t);
};
extern const Ops scalar_ops;
#if defined(__x86_64__) || defined(_M_X64)
extern const Ops avx2_ops;
#endif
#if defined(__aarch64__)
extern const Ops neon_ops;
#endif
}  // namespace detail

}  // namespace msspeech::kernels
