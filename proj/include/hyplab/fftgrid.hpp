#pragma once

// Periodic spectral grid on [-L/2, L/2)^n backed by FFTW (complex to
// complex). Conventions: f_hat(xi_k) = h^n * DFT(f)_k with the grid origin
// at index 0 mapped to x = -L/2; Plancherel then reads
// sum |f|^2 h^n = sum |f_hat|^2 / L^n.

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "hyplab/errors.hpp"

namespace hyplab::cauchy {

using Cd = std::complex<double>;

class SpectralGrid {
public:
    SpectralGrid(int n, int points_per_axis, double box)
        : n_(n), pts_(points_per_axis), box_(box) {
        if (n < 1 || n > 3) throw ConfigError("grid dimension must be 1..3");
        if (pts_ < 4 || (pts_ & (pts_ - 1)) != 0)
            throw ConfigError("points per axis must be a power of two >= 4");
        if (!(box_ > 0)) throw ConfigError("box size must be positive");
        size_ = 1;
        for (int d = 0; d < n_; ++d) size_ *= static_cast<std::size_t>(pts_);
        buf_ = fftw_alloc_complex(size_);
        if (!buf_) throw std::bad_alloc();
        int dims[3] = {pts_, pts_, pts_};
        // FFTW planning is not thread-safe; solver threads only execute.
        static std::mutex plan_mutex;
        std::scoped_lock lk(plan_mutex);
        // FFTW_UNALIGNED: plans execute on caller-owned std::vector storage.
        fwd_ = fftw_plan_dft(n_, dims, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft(n_, dims, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!fwd_ || !bwd_) throw std::runtime_error("FFTW plan creation failed");
    }

    SpectralGrid(const SpectralGrid&) = delete;
    SpectralGrid& operator=(const SpectralGrid&) = delete;

    ~SpectralGrid() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    int n() const { return n_; }
    int points_per_axis() const { return pts_; }
    double box() const { return box_; }
    std::size_t size() const { return size_; }
    double h() const { return box_ / pts_; }
    double dxi() const { return 2.0 * M_PI / box_; }
    double nyquist() const { return M_PI / h(); }

    // index <-> coordinates
    double x_of(int j) const { return -0.5 * box_ + h() * j; }
    int freq_index(int k) const { return k <= pts_ / 2 ? k : k - pts_; }
    double xi_of(int k) const { return dxi() * freq_index(k); }

    void decompose(std::size_t flat, int* idx) const {
        for (int d = n_ - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(flat % static_cast<std::size_t>(pts_));
            flat /= static_cast<std::size_t>(pts_);
        }
    }

    std::size_t flatten(const int* idx) const {
        std::size_t f = 0;
        for (int d = 0; d < n_; ++d) f = f * static_cast<std::size_t>(pts_) + static_cast<std::size_t>(idx[d]);
        return f;
    }

    // conjugate lattice partner (-k mod N per axis)
    std::size_t conjugate_index(std::size_t flat) const {
        int idx[3];
        decompose(flat, idx);
        for (int d = 0; d < n_; ++d) idx[d] = (pts_ - idx[d]) % pts_;
        return flatten(idx);
    }

    void forward(std::vector<Cd>& field) const {
        run(field, fwd_);
        const double scale = std::pow(h(), n_);
        for (auto& v : field) v *= scale;
    }

    void backward(std::vector<Cd>& spec) const {
        run(spec, bwd_);
        const double scale = 1.0 / std::pow(box_, n_);
        for (auto& v : spec) v *= scale;
    }

private:
    void run(std::vector<Cd>& data, fftw_plan plan) const {
        if (data.size() != size_) throw ConfigError("field size does not match the grid");
        auto* raw = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(plan, raw, raw);
    }

    int n_, pts_;
    double box_;
    std::size_t size_ = 0;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
};

}  // namespace hyplab::cauchy
