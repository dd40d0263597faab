// linalg.hpp — dense complex linear algebra: Hermitian eigendecomposition,
// Kronecker products, partial trace/transpose, tensor-factor permutations.
//
// Conventions fixed repo-wide: row-major vectorization and big-endian factor
// ordering (first tensor factor owns the most significant index block).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "ebtk/errors.hpp"
#include "ebtk/tolerances.hpp"

namespace ebtk {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------- shapes ---

// Ordered factor dimensions of a tensor-product space.
struct TensorShape {
    std::vector<Index> factors;

    TensorShape() = default;
    TensorShape(std::initializer_list<Index> f) : factors(f) {}
    explicit TensorShape(std::vector<Index> f) : factors(std::move(f)) {}

    Index total() const {
        Index p = 1;
        for (Index d : factors) p *= d;
        return p;
    }
    std::size_t count() const { return factors.size(); }

    // Stride of factor f under big-endian ordering.
    Index stride(std::size_t f) const {
        Index s = 1;
        for (std::size_t g = f + 1; g < factors.size(); ++g) s *= factors[g];
        return s;
    }

    void check_against(Index dim) const {
        if (factors.empty() || total() != dim)
            throw BadShape("TensorShape does not multiply out to matrix dimension");
        for (Index d : factors)
            if (d < 1) throw BadShape("TensorShape factor must be >= 1");
    }
};

// ------------------------------------------------------------ small utils ---

inline CMat identity(Index d) { return CMat::Identity(d, d); }

// |i><j| in d dimensions
inline CMat basis_op(Index d, Index i, Index j) {
    CMat m = CMat::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

inline CVec ket(Index d, Index i) {
    CVec v = CVec::Zero(d);
    v(i) = 1.0;
    return v;
}

inline double frob(const CMat& m) { return m.norm(); }

// Hilbert-Schmidt pairing Tr(a† b)
inline Complex hs_inner(const CMat& a, const CMat& b) {
    return (a.adjoint() * b).trace();
}

inline bool is_hermitian(const CMat& m, double eps = tol.herm) {
    if (m.rows() != m.cols()) return false;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = i; j < m.cols(); ++j)
            if (std::abs(m(i, j) - std::conj(m(j, i))) > eps) return false;
    return true;
}

inline void require_hermitian(const CMat& m, double eps = tol.herm,
                              const char* what = "matrix") {
    if (!is_hermitian(m, eps))
        throw NonHermitianInput(std::string(what) + " is not Hermitian within tolerance");
}

// Exactly Hermitian part (m + m†)/2.
inline CMat hermitize(const CMat& m) { return 0.5 * (m + m.adjoint()); }

// --------------------------------------------------- eigendecomposition ---

struct EigH {
    RVec eigenvalues;   // ascending
    CMat eigenvectors;  // columns, unitary
};

inline EigH eig_hermitian(const CMat& m, double eps = tol.herm) {
    require_hermitian(m, eps);
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m));
    if (es.info() != Eigen::Success)
        throw NoConvergence("Hermitian eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue(const CMat& m) {
    require_hermitian(m, 1e-8, "min_eigenvalue input");
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(m));
    if (es.info() != Eigen::Success)
        throw NoConvergence("Hermitian eigensolver did not converge");
    return es.eigenvalues()(0);
}

inline bool is_psd(const CMat& m, double eps = tol.psd) {
    return min_eigenvalue(m) >= -eps;
}

// -------------------------------------------------------------- kron ---

// (a ⊗ b)[(i·rb + k), (j·cb + l)] = a(i,j)·b(k,l)
inline CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// --------------------------------------------------------- partial trace ---

namespace detail {

// Flat offsets of every multi-index ranging over the given factor positions.
inline std::vector<Index> subindex_offsets(const TensorShape& shape,
                                           const std::vector<std::size_t>& pos) {
    Index n = 1;
    for (std::size_t p : pos) n *= shape.factors[p];
    std::vector<Index> off(static_cast<std::size_t>(n), 0);
    Index reps = 1;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
        const Index d = shape.factors[*it];
        const Index s = shape.stride(*it);
        const Index block = reps * d;
        for (Index v = 0; v < n; ++v)
            off[static_cast<std::size_t>(v)] += ((v / reps) % d) * s;
        reps = block;
    }
    return off;
}

inline std::vector<std::size_t> complement(std::size_t count,
                                           const std::vector<std::size_t>& keep) {
    std::vector<std::size_t> rest;
    for (std::size_t f = 0; f < count; ++f)
        if (std::find(keep.begin(), keep.end(), f) == keep.end()) rest.push_back(f);
    return rest;
}

}  // namespace detail

// Trace out every factor not listed in `keep` (indices ascending).
inline CMat partial_trace(const CMat& m, const TensorShape& shape,
                          const std::vector<std::size_t>& keep) {
    shape.check_against(m.rows());
    if (m.rows() != m.cols()) throw BadShape("partial_trace needs a square matrix");
    for (std::size_t f : keep)
        if (f >= shape.count()) throw BadShape("partial_trace keep index out of range");
    if (!std::is_sorted(keep.begin(), keep.end()) ||
        std::adjacent_find(keep.begin(), keep.end()) != keep.end())
        throw BadShape("partial_trace keep indices must be ascending and unique");

    const auto rest = detail::complement(shape.count(), keep);
    const auto koff = detail::subindex_offsets(shape, keep);
    const auto toff = detail::subindex_offsets(shape, rest);
    const Index nk = static_cast<Index>(koff.size());

    CMat out = CMat::Zero(nk, nk);
    for (Index a = 0; a < nk; ++a)
        for (Index b = 0; b < nk; ++b) {
            Complex s = 0.0;
            for (Index t = 0; t < static_cast<Index>(toff.size()); ++t)
                s += m(koff[a] + toff[t], koff[b] + toff[t]);
            out(a, b) = s;
        }
    return out;
}

// Adjoint of partial_trace under the HS pairing: place y on `keep`, identity on
// the remaining factors.
inline CMat embed_with_identity(const CMat& y, const TensorShape& shape,
                                const std::vector<std::size_t>& keep) {
    shape.check_against(shape.total());
    const auto rest = detail::complement(shape.count(), keep);
    const auto koff = detail::subindex_offsets(shape, keep);
    const auto toff = detail::subindex_offsets(shape, rest);
    if (y.rows() != static_cast<Index>(koff.size()))
        throw BadShape("embed_with_identity operand does not match kept factors");

    CMat out = CMat::Zero(shape.total(), shape.total());
    for (Index a = 0; a < y.rows(); ++a)
        for (Index b = 0; b < y.cols(); ++b) {
            const Complex v = y(a, b);
            if (v == Complex(0.0)) continue;
            for (std::size_t t = 0; t < toff.size(); ++t)
                out(koff[a] + toff[t], koff[b] + toff[t]) = v;
        }
    return out;
}

// ----------------------------------------------------- partial transpose ---

inline CMat partial_transpose(const CMat& m, const TensorShape& shape,
                              std::size_t factor) {
    shape.check_against(m.rows());
    if (m.rows() != m.cols()) throw BadShape("partial_transpose needs a square matrix");
    if (factor >= shape.count()) throw BadShape("partial_transpose factor out of range");

    const Index d = shape.factors[factor];
    const Index s = shape.stride(factor);
    const Index n = m.rows();

    std::vector<Index> fidx(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r) fidx[static_cast<std::size_t>(r)] = (r / s) % d;

    CMat out(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) {
            const Index fr = fidx[static_cast<std::size_t>(r)];
            const Index fc = fidx[static_cast<std::size_t>(c)];
            out(r - fr * s + fc * s, c - fc * s + fr * s) = m(r, c);
        }
    return out;
}

// -------------------------------------------------------- factor permute ---

// Result factor p is input factor sigma[p]; on product operators this is
// A_0 ⊗ ... ⊗ A_{k-1}  ↦  A_{σ(0)} ⊗ ... ⊗ A_{σ(k-1)}.
inline CMat permute_factors(const CMat& m, const TensorShape& shape,
                            const std::vector<std::size_t>& sigma) {
    shape.check_against(m.rows());
    if (m.rows() != m.cols()) throw BadShape("permute_factors needs a square matrix");
    if (sigma.size() != shape.count())
        throw BadPermutation("permutation length does not match factor count");
    std::vector<bool> seen(sigma.size(), false);
    for (std::size_t v : sigma) {
        if (v >= sigma.size() || seen[v]) throw BadPermutation("not a permutation");
        seen[v] = true;
    }

    TensorShape out_shape;
    for (std::size_t p = 0; p < sigma.size(); ++p)
        out_shape.factors.push_back(shape.factors[sigma[p]]);

    const Index n = m.rows();
    std::vector<Index> src(static_cast<std::size_t>(n));
    for (Index r = 0; r < n; ++r) {
        Index rem = r, flat = 0;
        for (std::size_t p = 0; p < sigma.size(); ++p) {
            const Index s_out = out_shape.stride(p);
            const Index i = rem / s_out;
            rem %= s_out;
            flat += i * shape.stride(sigma[p]);
        }
        src[static_cast<std::size_t>(r)] = flat;
    }

    CMat out(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c)
            out(r, c) = m(src[static_cast<std::size_t>(r)], src[static_cast<std::size_t>(c)]);
    return out;
}

// ------------------------------------------- real Hermitian parametrization ---

// Isometry between d×d Hermitian matrices and R^{d²}: diagonal entries first,
// then √2·Re / √2·Im of the upper triangle in row-major order.  Frobenius
// inner products map to Euclidean dot products exactly.

inline Index herm_param_size(Index d) { return d * d; }

inline RVec herm_to_rvec(const CMat& h) {
    const Index d = h.rows();
    RVec v(d * d);
    Index k = 0;
    for (Index i = 0; i < d; ++i) v(k++) = h(i, i).real();
    const double r2 = std::sqrt(2.0);
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            v(k++) = r2 * h(i, j).real();
            v(k++) = r2 * h(i, j).imag();
        }
    return v;
}

inline CMat rvec_to_herm(const RVec& v, Index d) {
    CMat h(d, d);
    Index k = 0;
    for (Index i = 0; i < d; ++i) h(i, i) = v(k++);
    const double ir2 = 1.0 / std::sqrt(2.0);
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            const double re = v(k++) * ir2;
            const double im = v(k++) * ir2;
            h(i, j) = Complex(re, im);
            h(j, i) = Complex(re, -im);
        }
    return h;
}

// Orthonormal Hermitian basis element matching the parametrization order.
inline CMat hermitian_basis_element(Index d, Index idx) {
    RVec v = RVec::Zero(d * d);
    v(idx) = 1.0;
    return rvec_to_herm(v, d);
}

}  // namespace ebtk
