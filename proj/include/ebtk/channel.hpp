// channel.hpp — finite-dimensional channels in the Schrödinger picture:
// Choi/Kraus/measurement-prepare representations, conversions, composition,
// tensoring, and seeded generators.
//
// A channel is stored as its Choi state on in ⊗ out, normalized to trace one:
//
//     choi = (1/dim_in) Σ_ij |i><j|_in ⊗ Λ(|i><j|)
//
// so trace preservation of Λ reads Tr_out(choi) = I/dim_in and the action is
// Λ(ρ) = dim_in · Σ_ij ρ_ij · choi.block(i·dim_out, j·dim_out).
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ebtk/linalg.hpp"
#include "ebtk/rng.hpp"

namespace ebtk {

inline constexpr double kChannelTol = 1e-9;  // trace-preservation / POVM-sum slack

// ----------------------------------------------------------------- types ---

class Channel {
public:
    Channel() = default;

    static Channel from_choi(Index dim_in, Index dim_out, CMat choi) {
        if (choi.rows() != dim_in * dim_out || choi.cols() != dim_in * dim_out)
            throw DimensionMismatch("Choi matrix does not match dim_in*dim_out");
        require_hermitian(choi, 1e-10, "Choi matrix");
        choi = hermitize(choi);
        if (min_eigenvalue(choi) < -tol.psd)
            throw Error("Choi matrix is not positive semidefinite");
        if (std::abs(choi.trace().real() - 1.0) > kChannelTol)
            throw NotTracePreserving("Choi matrix is not normalized to trace one");
        CMat marg = partial_trace(choi, TensorShape{dim_in, dim_out}, {0});
        if ((marg - identity(dim_in) / static_cast<double>(dim_in)).norm() > kChannelTol)
            throw NotTracePreserving("Tr_out(choi) deviates from I/dim_in");
        Channel c;
        c.din_ = dim_in;
        c.dout_ = dim_out;
        c.choi_ = std::move(choi);
        return c;
    }

    Index dim_in() const { return din_; }
    Index dim_out() const { return dout_; }
    const CMat& choi() const { return choi_; }
    TensorShape choi_shape() const { return TensorShape{din_, dout_}; }

    // Λ(|i><j|)
    CMat basis_action(Index i, Index j) const {
        return static_cast<double>(din_) * choi_.block(i * dout_, j * dout_, dout_, dout_);
    }

    // linear extension of the channel action to arbitrary operators
    CMat apply(const CMat& x) const {
        if (x.rows() != din_ || x.cols() != din_)
            throw DimensionMismatch("channel input has wrong dimension");
        CMat out = CMat::Zero(dout_, dout_);
        for (Index i = 0; i < din_; ++i)
            for (Index j = 0; j < din_; ++j) {
                const Complex v = x(i, j);
                if (v != Complex(0.0))
                    out.noalias() += v * static_cast<double>(din_) *
                                     choi_.block(i * dout_, j * dout_, dout_, dout_);
            }
        return out;
    }

private:
    Index din_ = 0, dout_ = 0;
    CMat choi_;
};

struct KrausForm {
    std::vector<CMat> operators;  // each dim_out × dim_in

    KrausForm() = default;
    explicit KrausForm(std::vector<CMat> ops) : operators(std::move(ops)) {
        if (operators.empty()) throw Error("KrausForm needs at least one operator");
        const Index r = operators.front().rows(), c = operators.front().cols();
        CMat s = CMat::Zero(c, c);
        for (const CMat& k : operators) {
            if (k.rows() != r || k.cols() != c)
                throw DimensionMismatch("Kraus operators have inconsistent shapes");
            s.noalias() += k.adjoint() * k;
        }
        if ((s - identity(c)).norm() > kChannelTol)
            throw NotTracePreserving("sum K†K deviates from identity");
    }

    Index dim_in() const { return operators.front().cols(); }
    Index dim_out() const { return operators.front().rows(); }
};

struct Povm {
    std::vector<CMat> effects;

    Povm() = default;
    explicit Povm(std::vector<CMat> eff) : effects(std::move(eff)) {
        if (effects.empty()) throw Error("Povm needs at least one effect");
        const Index d = effects.front().rows();
        CMat s = CMat::Zero(d, d);
        for (const CMat& e : effects) {
            if (e.rows() != d || e.cols() != d)
                throw DimensionMismatch("POVM effects have inconsistent dimensions");
            require_hermitian(e, 1e-10, "POVM effect");
            if (min_eigenvalue(e) < -tol.psd)
                throw Error("POVM effect is not positive semidefinite");
            s += e;
        }
        if ((s - identity(d)).norm() > kChannelTol)
            throw Error("POVM effects do not sum to identity");
    }

    Index dim() const { return effects.front().rows(); }
    Index outcomes() const { return static_cast<Index>(effects.size()); }
};

struct HolevoForm {
    Povm povm;
    std::vector<CMat> preparations;  // one density matrix per effect

    HolevoForm() = default;
    HolevoForm(Povm p, std::vector<CMat> preps)
        : povm(std::move(p)), preparations(std::move(preps)) {
        if (preparations.size() != povm.effects.size())
            throw InvalidHolevoForm("one preparation per POVM effect required");
        for (const CMat& t : preparations) {
            if (t.rows() != t.cols()) throw InvalidHolevoForm("preparation not square");
            require_hermitian(t, 1e-10, "preparation");
            if (min_eigenvalue(t) < -tol.psd)
                throw InvalidHolevoForm("preparation not positive semidefinite");
            if (std::abs(t.trace().real() - 1.0) > kChannelTol)
                throw InvalidHolevoForm("preparation not normalized");
        }
    }

    Index dim_in() const { return povm.dim(); }
    Index dim_out() const { return preparations.front().rows(); }
};

// Finite barycentric decomposition: Σ_i w_i σ_i ⊗ τ_i.
struct Ensemble {
    RVec weights;
    std::vector<CMat> left_states;
    std::vector<CMat> right_states;

    Ensemble() = default;
    Ensemble(RVec w, std::vector<CMat> left, std::vector<CMat> right)
        : weights(std::move(w)), left_states(std::move(left)), right_states(std::move(right)) {
        const auto n = static_cast<std::size_t>(weights.size());
        if (left_states.size() != n || right_states.size() != n)
            throw DimensionMismatch("ensemble lists have inconsistent lengths");
        if (n == 0) throw Error("ensemble must not be empty");
        double s = 0.0;
        for (Index i = 0; i < weights.size(); ++i) {
            if (weights(i) < -1e-14) throw Error("ensemble weight is negative");
            s += weights(i);
        }
        if (std::abs(s - 1.0) > 1e-10) throw Error("ensemble weights do not sum to one");
    }

    std::size_t size() const { return static_cast<std::size_t>(weights.size()); }

    CMat reconstruct() const {
        CMat out = CMat::Zero(left_states.front().rows() * right_states.front().rows(),
                              left_states.front().rows() * right_states.front().rows());
        for (std::size_t i = 0; i < size(); ++i)
            out += weights(static_cast<Index>(i)) * kron(left_states[i], right_states[i]);
        return out;
    }
};

// ----------------------------------------------------------- conversions ---

inline Channel channel_from_kraus(const KrausForm& k) {
    const Index din = k.dim_in(), dout = k.dim_out();
    CMat choi = CMat::Zero(din * dout, din * dout);
    for (const CMat& op : k.operators) {
        // Σ_ij |i><j| ⊗ K|i><j|K†  =  |v><v| with v[(i,m)] = K(m,i)
        CVec v(din * dout);
        for (Index i = 0; i < din; ++i)
            for (Index m = 0; m < dout; ++m) v(i * dout + m) = op(m, i);
        choi.noalias() += v * v.adjoint();
    }
    choi /= static_cast<double>(din);
    return Channel::from_choi(din, dout, std::move(choi));
}

inline Channel holevo_to_channel(const HolevoForm& h) {
    const Index din = h.dim_in(), dout = h.dim_out();
    CMat choi = CMat::Zero(din * dout, din * dout);
    for (std::size_t x = 0; x < h.preparations.size(); ++x)
        choi += kron(h.povm.effects[x].transpose() / static_cast<double>(din),
                     h.preparations[x]);
    return Channel::from_choi(din, dout, std::move(choi));
}

// QC channel of a POVM: ρ ↦ Σ_i Tr(M_i ρ) |i><i|, outputs exactly diagonal.
inline Channel qc_channel(const Povm& p) {
    const Index din = p.dim(), k = p.outcomes();
    CMat choi = CMat::Zero(din * k, din * k);
    for (Index i = 0; i < k; ++i)
        choi += kron(p.effects[static_cast<std::size_t>(i)].transpose() /
                         static_cast<double>(din),
                     basis_op(k, i, i));
    return Channel::from_choi(din, k, std::move(choi));
}

inline Channel compose(const Channel& outer, const Channel& inner) {
    if (inner.dim_out() != outer.dim_in())
        throw DimensionMismatch("compose: inner output does not feed outer input");
    const Index din = inner.dim_in(), dout = outer.dim_out();
    CMat choi = CMat::Zero(din * dout, din * dout);
    for (Index a = 0; a < din; ++a)
        for (Index b = 0; b < din; ++b)
            choi.block(a * dout, b * dout, dout, dout) =
                outer.apply(inner.basis_action(a, b)) / static_cast<double>(din);
    return Channel::from_choi(din, dout, std::move(choi));
}

inline Channel tensor(const Channel& a, const Channel& b) {
    // kron(choi_a, choi_b) lives on inA⊗outA⊗inB⊗outB; regroup to
    // (inA⊗inB)⊗(outA⊗outB).
    CMat k = kron(a.choi(), b.choi());
    TensorShape shape{a.dim_in(), a.dim_out(), b.dim_in(), b.dim_out()};
    CMat re = permute_factors(k, shape, {0, 2, 1, 3});
    return Channel::from_choi(a.dim_in() * b.dim_in(), a.dim_out() * b.dim_out(),
                              std::move(re));
}

// Choi decomposition as a product ensemble: Σ_x (Tr M_x/d)·(M_xᵀ/Tr M_x)⊗τ_x.
inline Ensemble ensemble_from_holevo(const HolevoForm& h) {
    const double din = static_cast<double>(h.dim_in());
    std::vector<double> w;
    std::vector<CMat> left, right;
    for (std::size_t x = 0; x < h.preparations.size(); ++x) {
        const double t = h.povm.effects[x].trace().real();
        if (t <= 1e-14) continue;  // zero effect contributes nothing
        w.push_back(t / din);
        left.push_back(CMat(h.povm.effects[x].transpose() / t));
        right.push_back(h.preparations[x]);
    }
    RVec wv = Eigen::Map<RVec>(w.data(), static_cast<Index>(w.size()));
    return Ensemble(std::move(wv), std::move(left), std::move(right));
}

// ------------------------------------------------------------ generators ---

inline Channel identity_channel(Index d) {
    KrausForm k{{identity(d)}};
    return channel_from_kraus(k);
}

// prepares sigma regardless of the input
inline Channel constant_channel(const CMat& sigma, Index dim_in) {
    require_hermitian(sigma, 1e-10, "constant channel output");
    CMat choi = kron(identity(dim_in) / static_cast<double>(dim_in), sigma);
    return Channel::from_choi(dim_in, sigma.rows(), std::move(choi));
}

inline CMat pauli(int which) {
    CMat m(2, 2);
    switch (which) {
        case 0: m << 1, 0, 0, 1; break;
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        default: m << 1, 0, 0, -1; break;
    }
    return m;
}

// Λ(ρ) = (1-p)·ρ + p·I/2
inline Channel depolarizing_channel(double p) {
    std::vector<CMat> ops;
    ops.push_back(std::sqrt(1.0 - 0.75 * p) * pauli(0));
    for (int s = 1; s <= 3; ++s) ops.push_back(std::sqrt(0.25 * p) * pauli(s));
    return channel_from_kraus(KrausForm{std::move(ops)});
}

inline Channel dephasing_channel() {
    return channel_from_kraus(KrausForm{{basis_op(2, 0, 0), basis_op(2, 1, 1)}});
}

inline Povm computational_povm(Index d) {
    std::vector<CMat> eff;
    for (Index i = 0; i < d; ++i) eff.push_back(basis_op(d, i, i));
    return Povm(std::move(eff));
}

// measure and re-prepare in the computational basis
inline Channel classical_copy_channel(Index d) {
    std::vector<CMat> preps;
    for (Index i = 0; i < d; ++i) preps.push_back(basis_op(d, i, i));
    return holevo_to_channel(HolevoForm(computational_povm(d), std::move(preps)));
}

// Stinespring isometry from a QR-orthogonalized Gaussian matrix.
inline Channel random_channel(Index dim_in, Index dim_out, Index rank, std::uint64_t seed) {
    if (rank < 1) throw Error("random_channel: rank must be >= 1");
    if (dim_out * rank < dim_in)
        throw DimensionMismatch("random_channel: dim_out*rank must be >= dim_in");
    Rng rng(seed);
    CMat g = rng.cmatrix(dim_out * rank, dim_in);
    Eigen::HouseholderQR<CMat> qr(g);
    CMat q = qr.householderQ() * CMat::Identity(dim_out * rank, dim_in);
    CMat r = q.adjoint() * g;
    for (Index j = 0; j < dim_in; ++j) {  // fix phases so the factorization is canonical
        const Complex rj = r(j, j);
        if (std::abs(rj) > 0) q.col(j) *= std::conj(rj) / std::abs(rj);
    }
    std::vector<CMat> ops;
    for (Index e = 0; e < rank; ++e) {
        CMat k(dim_out, dim_in);
        for (Index m = 0; m < dim_out; ++m) k.row(m) = q.row(m * rank + e);
        ops.push_back(std::move(k));
    }
    return channel_from_kraus(KrausForm{std::move(ops)});
}

// Dirichlet-weighted POVM from normalized Gaussian-Wishart effects plus
// random preparations.
inline HolevoForm random_holevo(Index dim_in, Index dim_out, Index k, std::uint64_t seed) {
    if (k < 1) throw Error("random_holevo: k must be >= 1");
    Rng rng(seed);
    RVec w = rng.dirichlet(k);
    std::vector<CMat> blocks;
    CMat s = CMat::Zero(dim_in, dim_in);
    for (Index i = 0; i < k; ++i) {
        CMat a = rng.cmatrix(dim_in, dim_in);
        CMat wish = w(i) * (a * a.adjoint());
        s += wish;
        blocks.push_back(std::move(wish));
    }
    auto es = eig_hermitian(s);
    CMat inv_sqrt = es.eigenvectors *
                    es.eigenvalues.cwiseMax(1e-300).cwiseSqrt().cwiseInverse().asDiagonal() *
                    es.eigenvectors.adjoint();
    std::vector<CMat> effects;
    for (CMat& b : blocks) effects.push_back(CMat(hermitize(inv_sqrt * b * inv_sqrt)));
    std::vector<CMat> preps;
    for (Index i = 0; i < k; ++i) preps.push_back(rng.density(dim_out));
    return HolevoForm(Povm(std::move(effects)), std::move(preps));
}

}  // namespace ebtk
