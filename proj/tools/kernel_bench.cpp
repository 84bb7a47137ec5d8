// Throughput comparison of the kernel backends on this machine.
// Usage: kernel_bench [n_elements] (default 4096)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "msspeech/kernels.hpp"
#include "msspeech/rng.hpp"

using namespace msspeech;

namespace {

double time_loop(const std::function<void()>& fn, int reps) {
    using clock = std::chrono::steady_clock;
    fn();  // warm up
    const auto t0 = clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double>(clock::now() - t0).count() /
           static_cast<double>(reps);
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? static_cast<std::size_t>(std::atoll(argv[1])) : 4096;
    const int reps = static_cast<int>(std::max<std::size_t>(64, (1u << 24) / n));

    Rng rng(1);
    std::vector<double> a(n), b(n), dst(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.uniform(-1.0, 1.0);
        b[i] = rng.uniform(-1.0, 1.0);
    }

    std::vector<kernels::Backend> backends = {kernels::Backend::Scalar};
    if (kernels::detect_backend() != kernels::Backend::Scalar) {
        backends.push_back(kernels::detect_backend());
    }

    std::printf("n = %zu, %d reps per measurement\n", n, reps);
    std::printf("%-14s %12s %12s %12s %12s %12s\n", "backend", "dot", "sum_sq", "mul",
                "abs_diff", "magnitude");
    double volatile sink = 0.0;
    for (const auto backend : backends) {
        kernels::set_backend(backend);
        const double t_dot = time_loop([&] { sink = kernels::dot(a, b); }, reps);
        const double t_ssq = time_loop([&] { sink = kernels::sum_sq(a); }, reps);
        const double t_mul = time_loop([&] { kernels::mul(a, b, dst); }, reps);
        const double t_ads = time_loop([&] { sink = kernels::abs_diff_sum(a); }, reps);
        const double t_mag = time_loop([&] { kernels::magnitude(a, b, dst); }, reps);
        auto rate = [n](double seconds) {
            return static_cast<double>(n) / seconds / 1e9;  // Gelem/s
        };
        std::printf("%-14s %9.2f Ge/s %9.2f Ge/s %9.2f Ge/s %9.2f Ge/s %9.2f Ge/s\n",
                    kernels::backend_name(backend).c_str(), rate(t_dot), rate(t_ssq),
                    rate(t_mul), rate(t_ads), rate(t_mag));
    }
    (void)sink;
    kernels::set_backend(kernels::detect_backend());
    return 0;
}
