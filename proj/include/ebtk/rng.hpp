// rng.hpp — seeded RNG with engine-level determinism
//
// Only the raw mt19937_64 stream is standardized, so the variate transforms
// live here instead of <random> distributions; a fixed seed yields the same
// bytes on every platform.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ebtk/linalg.hpp"

namespace ebtk {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform on [0, 1) with 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    Complex cgaussian() {
        const double re = gaussian();
        return Complex(re, gaussian());
    }

    CMat cmatrix(Index rows, Index cols) {
        CMat m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = cgaussian();
        return m;
    }

    CVec unit_vector(Index d) {
        CVec v(d);
        for (Index i = 0; i < d; ++i) v(i) = cgaussian();
        return v / v.norm();
    }

    // Gaussian-Wishart density matrix, full rank a.s.
    CMat density(Index d) {
        CMat a = cmatrix(d, d);
        CMat w = a * a.adjoint();
        return w / w.trace().real();
    }

    // flat Dirichlet weights via normalized exponentials
    RVec dirichlet(Index k) {
        RVec w(k);
        double s = 0.0;
        for (Index i = 0; i < k; ++i) {
            double u = uniform();
            while (u <= 1e-300) u = uniform();
            w(i) = -std::log(u);
            s += w(i);
        }
        return w / s;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ebtk
