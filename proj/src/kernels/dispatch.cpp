#include <cstdlib>
#include <string>

#include "msspeech/error.hpp"
#include "msspeech/kernels.hpp"

namespace msspeech::kernels {

namespace {

bool backend_available(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const detail::Ops& ops_for(Backend b) {
    switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::Avx2:
            return detail::avx2_ops;
#endif
#if defined(__aarch64__)
        case Backend::Neon:
            return detail::neon_ops;
#endif
        default:
            return detail::scalar_ops;
    }
}

struct State {
    Backend backend;
    const detail::Ops* ops;

    State() {
        backend = detect_backend();
        if (const char* env = std::getenv("MSSPEECH_KERNELS")) {
            const std::string v(env);
            if (v == "scalar") backend = Backend::Scalar;
            else if (v == "avx2" && backend_available(Backend::Avx2)) backend = Backend::Avx2;
            else if (v == "neon" && backend_available(Backend::Neon)) backend = Backend::Neon;
        }
        ops = &ops_for(backend);
    }
};

State& state() {
    static State s;
    return s;
}

}  // namespace

Backend detect_backend() {
    if (backend_available(Backend::Avx2)) return Backend::Avx2;
    if (backend_available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

Backend active_backend() { return state().backend; }

void set_backend(Backend b) {
    if (!backend_available(b)) {
        throw ConfigError("kernel backend unavailable on this CPU: " + backend_name(b));
    }
    state().backend = b;
    state().ops = &ops_for(b);
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size() < b.size() ? a.size() : b.size();
    return state().ops->dot(a.data(), b.data(), n);
}

double sum_sq(std::span<const double> a) { return state().ops->sum_sq(a.data(), a.size()); }

void mul(std::span<const double> a, std::span<const double> b, std::span<double> dst) {
    std::size_t n = a.size() < b.size() ? a.size() : b.size();
    if (dst.size() < n) n = dst.size();
    state().ops->mul(a.data(), b.data(), dst.data(), n);
}

double abs_diff_sum(std::span<const double> x) {
    return state().ops->abs_diff_sum(x.data(), x.size());
}

void magnitude(std::span<const double> re, std::span<const double> im, std::span<double> dst) {
    std::size_t n = re.size() < im.size() ? re.size() : im.size();
    if (dst.size() < n) n = dst.size();
    state().ops->magnitude(re.data(), im.data(), dst.data(), n);
}

}  // namespace msspeech::kernels
