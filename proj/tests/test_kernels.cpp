#include <doctest.h>

#include <cmath>
#include <vector>

#include "msspeech/error.hpp"
#include "msspeech/kernels.hpp"
#include "msspeech/rng.hpp"

using namespace msspeech;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

// reference results computed with the scalar backend
struct BackendGuard {
    kernels::Backend saved;
    explicit BackendGuard(kernels::Backend b) : saved(kernels::active_backend()) {
        kernels::set_backend(b);
    }
    ~BackendGuard() { kernels::set_backend(saved); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference values") {
    BackendGuard guard(kernels::Backend::Scalar);
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const std::vector<double> b = {4.0, 5.0, 6.0};
    CHECK(kernels::dot(a, b) == doctest::Approx(32.0));
    CHECK(kernels::sum_sq(a) == doctest::Approx(14.0));

    std::vector<double> dst(3);
    kernels::mul(a, b, dst);
    CHECK(dst[0] == 4.0);
    CHECK(dst[2] == 18.0);

    const std::vector<double> x = {1.0, 3.0, 2.0};
    CHECK(kernels::abs_diff_sum(x) == doctest::Approx(3.0));

    std::vector<double> mag(2);
    const std::vector<double> re = {3.0, 0.0};
    const std::vector<double> im = {4.0, 2.0};
    kernels::magnitude(re, im, mag);
    CHECK(mag[0] == doctest::Approx(5.0));
    CHECK(mag[1] == doctest::Approx(2.0));
}

TEST_CASE("edge sizes") {
    const std::vector<double> empty;
    const std::vector<double> one = {2.5};
    CHECK(kernels::dot(empty, empty) == 0.0);
    CHECK(kernels::sum_sq(empty) == 0.0);
    CHECK(kernels::abs_diff_sum(empty) == 0.0);
    CHECK(kernels::abs_diff_sum(one) == 0.0);
    CHECK(kernels::sum_sq(one) == doctest::Approx(6.25));
}

TEST_CASE("active backend equals scalar reference on random inputs") {
    const kernels::Backend active = kernels::detect_backend();
    INFO("active backend: ", kernels::backend_name(active));

    Rng rng(20240511);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.below(513));
        const auto a = random_vec(rng, n, -3.0, 3.0);
        const auto b = random_vec(rng, n, -3.0, 3.0);

        double dot_ref, ssq_ref, ads_ref;
        std::vector<double> mul_ref(n), mag_ref(n);
        {
            BackendGuard guard(kernels::Backend::Scalar);
            dot_ref = kernels::dot(a, b);
            ssq_ref = kernels::sum_sq(a);
            ads_ref = kernels::abs_diff_sum(a);
            kernels::mul(a, b, mul_ref);
            kernels::magnitude(a, b, mag_ref);
        }
        double dot_v, ssq_v, ads_v;
        std::vector<double> mul_v(n), mag_v(n);
        {
            BackendGuard guard(active);
            dot_v = kernels::dot(a, b);
            ssq_v = kernels::sum_sq(a);
            ads_v = kernels::abs_diff_sum(a);
            kernels::mul(a, b, mul_v);
            kernels::magnitude(a, b, mag_v);
        }

        // tolerance scaled by the absolute mass of the sum, since lane order
        // differs between backends
        double dot_mass = 0.0, ads_mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot_mass += std::fabs(a[i] * b[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) ads_mass += std::fabs(a[i + 1] - a[i]);
        CHECK(std::fabs(dot_v - dot_ref) <= 1e-12 * (1.0 + dot_mass));
        CHECK(std::fabs(ssq_v - ssq_ref) <= 1e-12 * (1.0 + ssq_ref));
        CHECK(std::fabs(ads_v - ads_ref) <= 1e-12 * (1.0 + ads_mass));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(mul_v[i] == mul_ref[i]);  // elementwise ops are order-free
            CHECK(mag_v[i] == doctest::Approx(mag_ref[i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("set_backend rejects unavailable targets") {
#if !defined(__aarch64__)
    CHECK_THROWS_AS(kernels::set_backend(kernels::Backend::Neon), ConfigError);
#endif
#if !(defined(__x86_64__) || defined(_M_X64))
    CHECK_THROWS_AS(kernels::set_backend(kernels::Backend::Avx2), ConfigError);
#endif
    CHECK_NOTHROW(kernels::set_backend(kernels::Backend::Scalar));
    kernels::set_backend(kernels::detect_backend());
}

}  // TEST_SUITE
