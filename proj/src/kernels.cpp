#include "wsnrl/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace wsnrl::kernels {
namespace {

std::atomic<const Ops*> g_ops{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

Backend pick_default() {
    const char* env = std::getenv("WSNRL_KERNELS");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::avx2;
        // "auto" or anything unrecognized falls through to detection
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

const Ops* table_for(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::avx2) return &avx2_ops();
#endif
    return &scalar_ops();
}

const Ops& active() {
    const Ops* t = g_ops.load(std::memory_order_acquire);
    if (t == nullptr) {
        Backend b = pick_default();
        g_backend.store(b, std::memory_order_relaxed);
        t = table_for(b);
        g_ops.store(t, std::memory_order_release);
    }
    return *t;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() {
    active();
    return g_backend.load(std::memory_order_relaxed);
}

void set_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_supported()) b = Backend::scalar;
    g_backend.store(b, std::memory_order_relaxed);
    g_ops.store(table_for(b), std::memory_order_release);
}

const char* backend_name(Backend b) {
    return b == Backend::avx2 ? "avx2" : "scalar";
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    active().gemm_nn(m, n, k, a, b, c);
}
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    active().gemm_nt(m, n, k, a, b, c);
}
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    active().gemm_tn(m, n, k, a, b, c);
}
double dot(std::size_t n, const double* x, const double* y) { return active().dot(n, x, y); }
void axpy(std::size_t n, double a, const double* x, double* y) { active().axpy(n, a, x, y); }
double sum(std::size_t n, const double* x) { return active().sum(n, x); }
void leaky_relu(std::size_t n, double slope, const double* x, double* y) {
    active().leaky_relu(n, slope, x, y);
}
void leaky_relu_grad(std::size_t n, double slope, const double* x,
                     const double* dy, double* dx) {
    active().leaky_relu_grad(n, slope, x, dy, dx);
}

}  // namespace wsnrl::kernels
