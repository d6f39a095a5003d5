#pragma once

// Thin RAII layer over FFTW's real-to-complex transforms.

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <fftw3.h>

#include "bedseis/error.hpp"

namespace bedseis {

using Complex = std::complex<double>;

/// Real transform of fixed length n. forward() yields the n/2+1 non-negative
/// frequency bins; inverse() is normalised so inverse(forward(x)) == x.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        detail::require_contract(n >= 2, "RealFft: length must be at least 2");
        real_.reset(fftw_alloc_real(n));
        spec_.reset(fftw_alloc_complex(n / 2 + 1));
        fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.get(), spec_.get(), FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_.get(), real_.get(), FFTW_ESTIMATE);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;
    ~RealFft() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t bins() const noexcept { return n_ / 2 + 1; }

    /// Input shorter than n is zero-padded.
    std::vector<Complex> forward(std::span<const double> x) {
        detail::require_contract(x.size() <= n_, "RealFft::forward: input longer than transform");
        for (std::size_t k = 0; k < n_; ++k) real_.get()[k] = k < x.size() ? x[k] : 0.0;
        fftw_execute(fwd_);
        std::vector<Complex> out(bins());
        for (std::size_t k = 0; k < bins(); ++k) out[k] = {spec_.get()[k][0], spec_.get()[k][1]};
        return out;
    }

    std::vector<double> inverse(std::span<const Complex> half) {
        detail::require_contract(half.size() == bins(), "RealFft::inverse: expected n/2+1 bins");
        for (std::size_t k = 0; k < bins(); ++k) {
            spec_.get()[k][0] = half[k].real();
            spec_.get()[k][1] = half[k].imag();
        }
        fftw_execute(inv_);
        std::vector<double> out(n_);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_; ++k) out[k] = real_.get()[k] * scale;
        return out;
    }

private:
    struct FftwFree {
        void operator()(void* p) const noexcept { fftw_free(p); }
    };

    std::size_t n_;
    std::unique_ptr<double, FftwFree> real_;
    std::unique_ptr<fftw_complex, FftwFree> spec_;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

inline std::size_t next_pow2(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace bedseis
