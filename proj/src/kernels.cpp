#include "trajkit/kernels.hpp"

#include <atomic>
#include <cstdint>

namespace trajkit::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Minimum multiply count before the fork/join cost pays off.
constexpr std::int64_t kParallelGrain = 1 << 16;

bool go_parallel(std::int64_t work) {
    return g_parallel.load(std::memory_order_relaxed) && work >= kParallelGrain;
}

std::int64_t conv_work(const Conv2dShape& s) {
    return static_cast<std::int64_t>(s.c_out) * s.out_h() * s.out_w() *
           s.c_in * s.kh * s.kw;
}

}  // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled, std::memory_order_relaxed); }
bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
    if (go_parallel(static_cast<std::int64_t>(m) * k * n))
        omp::matmul_nn(a, b, c, m, k, n);
    else
        serial::matmul_nn(a, b, c, m, k, n);
}

void matmul_nt(const double* a, const double* b, double* c, int m, int n, int k) {
    if (go_parallel(static_cast<std::int64_t>(m) * n * k))
        omp::matmul_nt(a, b, c, m, n, k);
    else
        serial::matmul_nt(a, b, c, m, n, k);
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n) {
    if (go_parallel(static_cast<std::int64_t>(m) * k * n))
        omp::matmul_tn(a, b, c, m, k, n);
    else
        serial::matmul_tn(a, b, c, m, k, n);
}

void conv2d_forward(const double* in, const double* kernel, const double* bias,
                    double* out, const Conv2dShape& s) {
    if (go_parallel(conv_work(s)))
        omp::conv2d_forward(in, kernel, bias, out, s);
    else
        serial::conv2d_forward(in, kernel, bias, out, s);
}

void conv2d_dinput(const double* dout, const double* kernel, double* din,
                   const Conv2dShape& s) {
    if (go_parallel(conv_work(s)))
        omp::conv2d_dinput(dout, kernel, din, s);
    else
        serial::conv2d_dinput(dout, kernel, din, s);
}

void conv2d_dkernel(const double* dout, const double* in, double* dkernel,
                    const Conv2dShape& s) {
    if (go_parallel(conv_work(s)))
        omp::conv2d_dkernel(dout, in, dkernel, s);
    else
        serial::conv2d_dkernel(dout, in, dkernel, s);
}

void conv2d_dbias(const double* dout, double* dbias, const Conv2dShape& s) {
    if (go_parallel(static_cast<std::int64_t>(s.c_out) * s.out_h() * s.out_w()))
        omp::conv2d_dbias(dout, dbias, s);
    else
        serial::conv2d_dbias(dout, dbias, s);
}

}  // namespace trajkit::kernels
