#include "spde/fft.hpp"

#include <fftw3.h>

#include <cassert>
#include <map>
#include <memory>
#include <mutex>

namespace spde::fft {

int next_fast_size(int lo) {
    if (lo < 2) return 2;
    for (int n = lo;; ++n) {
        int m = n;
        for (int p : {2, 3, 5})
            while (m % p == 0) m /= p;
        if (m == 1) return n;
    }
}

namespace {

// The FFTW planner is not thread-safe; execution of a finished plan is.
std::mutex planner_mutex;

struct TransformPair {
    int n = 0;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    explicit TransformPair(int size) : n(size) {
        real = fftw_alloc_real(static_cast<size_t>(n));
        cplx = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
        std::lock_guard<std::mutex> lock(planner_mutex);
        r2c = fftw_plan_dft_r2c_1d(n, real, cplx, FFTW_ESTIMATE);
        c2r = fftw_plan_dft_c2r_1d(n, cplx, real, FFTW_ESTIMATE);
    }
    ~TransformPair() {
        std::lock_guard<std::mutex> lock(planner_mutex);
        fftw_destroy_plan(r2c);
        fftw_destroy_plan(c2r);
        fftw_free(real);
        fftw_free(cplx);
    }
    TransformPair(const TransformPair&) = delete;
    TransformPair& operator=(const TransformPair&) = delete;
};

// Plans are bound to their scratch buffers, so the cache is per-thread.
TransformPair& plans_for(int n) {
    thread_local std::map<int, std::unique_ptr<TransformPair>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<TransformPair>(n);
    return *slot;
}

} // namespace

void forward_real(std::span<const double> in, std::span<std::complex<double>> out) {
    const int n = static_cast<int>(in.size());
    assert(static_cast<int>(out.size()) == n / 2 + 1);
    auto& tp = plans_for(n);
    for (int j = 0; j < n; ++j) tp.real[j] = in[j];
    fftw_execute(tp.r2c);
    const double inv_n = 1.0 / n;
    for (int k = 0; k <= n / 2; ++k)
        out[k] = std::complex<double>(tp.cplx[k][0] * inv_n, tp.cplx[k][1] * inv_n);
    out[0].imag(0.0); // real input, exact by construction
}

void inverse_real(std::span<const std::complex<double>> half, std::span<double> out) {
    const int n = static_cast<int>(out.size());
    assert(static_cast<int>(half.size()) == n / 2 + 1);
    auto& tp = plans_for(n);
    for (int k = 0; k <= n / 2; ++k) {
        tp.cplx[k][0] = half[k].real();
        tp.cplx[k][1] = half[k].imag();
    }
    fftw_execute(tp.c2r);
    for (int j = 0; j < n; ++j) out[j] = tp.real[j];
}

} // namespace spde::fft
