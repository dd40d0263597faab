// feasibility.hpp — PSD ∩ affine feasibility via Dykstra-corrected
// alternating projections.
//
// Hermitian matrices are handled through the real parametrization of
// linalg.hpp, which turns the affine projection into a real least-squares
// step.  Two affine-set backends share one Dykstra loop: a dense one built
// from an explicit constraint list, and a structured one for families of
// partial-trace constraints (the joint/broadcast encodings), which avoids
// materializing huge constraint rows.
#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "ebtk/linalg.hpp"

namespace ebtk {

enum class Verdict { Feasible, LikelyInfeasible, Undecided };

struct SolverConfig {
    double eps_feas = 1e-7;
    long max_iters = 50000;
    long stall_window = 1000;
    double stall_decrease = 1e-12;
    double infeasible_factor = 100.0;  // stall only refutes while residual > factor·eps
};

// <A_i, X> = b_i under the Hilbert-Schmidt pairing, A_i Hermitian.
struct FeasibilityProblem {
    Index dim = 0;
    std::vector<CMat> lhs;
    RVec rhs;

    void validate() const {
        if (static_cast<Index>(lhs.size()) != rhs.size())
            throw DimensionMismatch("constraint matrices and rhs lengths differ");
        for (const CMat& a : lhs) {
            if (a.rows() != dim || a.cols() != dim)
                throw DimensionMismatch("constraint matrix has wrong dimension");
            require_hermitian(a, 1e-10, "constraint matrix");
        }
    }
};

struct FeasibilityOutcome {
    Verdict verdict = Verdict::Undecided;
    std::optional<CMat> witness;
    double residual = std::numeric_limits<double>::infinity();
    long iterations = 0;
};

// ------------------------------------------------------- affine backends ---

class AffineProjector {
public:
    virtual ~AffineProjector() = default;
    virtual Index dim() const = 0;
    virtual CMat project(const CMat& x) const = 0;
    // projection plus the raw constraint-violation norm of x (Frobenius over
    // the residual vector, in the original constraint scaling)
    virtual std::pair<CMat, double> project_with_residual(const CMat& x) const = 0;
};

// Orthonormalized dense constraint rows; dependent rows are dropped after a
// consistency check.
class DenseAffineProjector final : public AffineProjector {
public:
    explicit DenseAffineProjector(const FeasibilityProblem& p, double drop_tol = 1e-10)
        : dim_(p.dim) {
        p.validate();
        const Index n = herm_param_size(p.dim);
        const Index m0 = static_cast<Index>(p.lhs.size());
        a0_.resize(m0, n);
        for (Index i = 0; i < m0; ++i)
            a0_.row(i) = herm_to_rvec(p.lhs[static_cast<std::size_t>(i)]);
        b0_ = p.rhs;
        std::vector<RVec> rows;
        std::vector<double> beta;
        for (std::size_t i = 0; i < p.lhs.size(); ++i) {
            RVec r = herm_to_rvec(p.lhs[i]);
            double b = p.rhs(static_cast<Index>(i));
            const double scale = std::max(1.0, r.norm());
            for (std::size_t j = 0; j < rows.size(); ++j) {
                const double c = rows[j].dot(r);
                r -= c * rows[j];
                b -= c * beta[j];
            }
            // one re-orthogonalization pass keeps Q numerically orthonormal
            for (std::size_t j = 0; j < rows.size(); ++j) {
                const double c = rows[j].dot(r);
                r -= c * rows[j];
                b -= c * beta[j];
            }
            const double nr = r.norm();
            if (nr <= drop_tol * scale) {
                if (std::abs(b) > 1e-8 * scale)
                    throw InconsistentConstraints(
                        "dependent constraint row with conflicting right-hand side");
                continue;
            }
            rows.push_back(r / nr);
            beta.push_back(b / nr);
        }
        q_.resize(static_cast<Index>(rows.size()), n);
        beta_.resize(static_cast<Index>(rows.size()));
        for (std::size_t j = 0; j < rows.size(); ++j) {
            q_.row(static_cast<Index>(j)) = rows[j].transpose();
            beta_(static_cast<Index>(j)) = beta[j];
        }
    }

    Index dim() const override { return dim_; }

    CMat project(const CMat& x) const override {
        RVec v = herm_to_rvec(hermitize(x));
        if (q_.rows() > 0) v += q_.transpose() * (beta_ - q_ * v);
        return rvec_to_herm(v, dim_);
    }

    std::pair<CMat, double> project_with_residual(const CMat& x) const override {
        RVec v = herm_to_rvec(hermitize(x));
        const double raw = a0_.rows() > 0 ? (a0_ * v - b0_).norm() : 0.0;
        if (q_.rows() > 0) v += q_.transpose() * (beta_ - q_ * v);
        return {rvec_to_herm(v, dim_), raw};
    }

private:
    Index dim_;
    Eigen::MatrixXd a0_;  // original constraint rows (residual evaluation)
    RVec b0_;
    Eigen::MatrixXd q_;  // orthonormal rows
    RVec beta_;
};

// Tr over the complement of `keep` equals `target`.
struct PartialTraceConstraint {
    std::vector<std::size_t> keep;
    CMat target;
};

// Projection onto an intersection of partial-trace constraints via the Gram
// pseudoinverse of the constraint family.  All maps are applied structurally.
class MarginalAffineProjector final : public AffineProjector {
public:
    MarginalAffineProjector(TensorShape shape, std::vector<PartialTraceConstraint> cons)
        : shape_(std::move(shape)), cons_(std::move(cons)) {
        dim_ = shape_.total();
        offsets_.push_back(0);
        for (const auto& c : cons_) {
            require_hermitian(c.target, 1e-10, "marginal target");
            offsets_.push_back(offsets_.back() + herm_param_size(c.target.rows()));
        }
        const Index m = offsets_.back();

        // Gram matrix G[(c,a),(c',a')] = <L_c L_c'†> assembled column by column.
        Eigen::MatrixXd g(m, m);
        for (std::size_t cj = 0; cj < cons_.size(); ++cj) {
            const Index dj = cons_[cj].target.rows();
            for (Index a = 0; a < herm_param_size(dj); ++a) {
                CMat emb = embed_with_identity(hermitian_basis_element(dj, a), shape_,
                                               cons_[cj].keep);
                RVec col(m);
                for (std::size_t ci = 0; ci < cons_.size(); ++ci)
                    col.segment(offsets_[ci], offsets_[ci + 1] - offsets_[ci]) =
                        herm_to_rvec(partial_trace(emb, shape_, cons_[ci].keep));
                g.col(offsets_[cj] + a) = col;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        const RVec& ev = es.eigenvalues();
        const double cut = std::max(ev.cwiseAbs().maxCoeff(), 1.0) * 1e-12;
        RVec inv = RVec::Zero(m);
        for (Index i = 0; i < m; ++i) inv(i) = ev(i) > cut ? 1.0 / ev(i) : 0.0;
        pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();

        b_.resize(m);
        for (std::size_t ci = 0; ci < cons_.size(); ++ci)
            b_.segment(offsets_[ci], offsets_[ci + 1] - offsets_[ci]) =
                herm_to_rvec(cons_[ci].target);
    }

    Index dim() const override { return dim_; }

    CMat project(const CMat& x) const override { return project_with_residual(x).first; }

    std::pair<CMat, double> project_with_residual(const CMat& x) const override {
        RVec r = b_;
        for (std::size_t ci = 0; ci < cons_.size(); ++ci)
            r.segment(offsets_[ci], offsets_[ci + 1] - offsets_[ci]) -=
                herm_to_rvec(partial_trace(x, shape_, cons_[ci].keep));
        RVec z = pinv_ * r;
        CMat out = hermitize(x);
        for (std::size_t ci = 0; ci < cons_.size(); ++ci) {
            const Index di = cons_[ci].target.rows();
            out += embed_with_identity(
                rvec_to_herm(z.segment(offsets_[ci], offsets_[ci + 1] - offsets_[ci]), di),
                shape_, cons_[ci].keep);
        }
        return {std::move(out), r.norm()};
    }

    // Dense scalar-constraint rendering of the same affine set (small dims /
    // cross-checking).
    FeasibilityProblem as_problem() const {
        FeasibilityProblem p;
        p.dim = dim_;
        std::vector<double> rhs;
        for (const auto& c : cons_) {
            const Index d = c.target.rows();
            for (Index a = 0; a < herm_param_size(d); ++a) {
                CMat e = hermitian_basis_element(d, a);
                p.lhs.push_back(embed_with_identity(e, shape_, c.keep));
                rhs.push_back(hs_inner(e, c.target).real());
            }
        }
        p.rhs = Eigen::Map<RVec>(rhs.data(), static_cast<Index>(rhs.size()));
        return p;
    }

private:
    TensorShape shape_;
    std::vector<PartialTraceConstraint> cons_;
    std::vector<Index> offsets_;
    Index dim_ = 0;
    Eigen::MatrixXd pinv_;
    RVec b_;
};

// -------------------------------------------------------------- psd cone ---

// Frobenius-nearest PSD matrix: clip negative eigenvalues at zero.
inline CMat project_psd(const CMat& x) {
    require_hermitian(x, 1e-8, "project_psd input");
    CMat h = hermitize(x);
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    if (es.info() != Eigen::Success) throw NoConvergence("project_psd eigensolver failed");
    const RVec& ev = es.eigenvalues();
    Index nneg = 0;
    while (nneg < ev.size() && ev(nneg) < 0.0) ++nneg;
    if (nneg == 0) return h;
    CMat vneg = es.eigenvectors().leftCols(nneg);
    return h - vneg * ev.head(nneg).asDiagonal() * vneg.adjoint();
}

inline CMat project_affine(const CMat& x, const FeasibilityProblem& p) {
    return DenseAffineProjector(p).project(x);
}

// ------------------------------------------------------------ the solver ---

// Dykstra iteration between the PSD cone and an affine set.  Only the cone
// carries a correction term; affine sets need none.  The running candidate is
// the cone-projected iterate a, whose PSD violation vanishes, so the combined
// residual max(PSD violation, constraint violation) reduces to the raw
// constraint-violation norm of a.
inline FeasibilityOutcome dykstra_solve(
    const AffineProjector& aff, const SolverConfig& cfg,
    const CMat* initial = nullptr,
    const std::function<void(long, const CMat&)>& observer = {}) {
    const Index d = aff.dim();
    CMat x = initial ? aff.project(*initial) : aff.project(CMat::Zero(d, d));
    CMat p = CMat::Zero(d, d);

    std::vector<double> best;
    best.reserve(static_cast<std::size_t>(std::min<long>(cfg.max_iters, 1 << 20)) + 1);
    double best_now = std::numeric_limits<double>::infinity();

    for (long it = 1; it <= cfg.max_iters; ++it) {
        CMat y = x + p;
        CMat a = project_psd(y);
        p = y - a;
        auto [xn, residual] = aff.project_with_residual(a);
        x = std::move(xn);
        if (observer) observer(it, x);

        if (residual <= cfg.eps_feas)
            return {Verdict::Feasible, std::move(a), residual, it};

        best_now = std::min(best_now, residual);
        best.push_back(best_now);
        if (it > cfg.stall_window && best_now > cfg.infeasible_factor * cfg.eps_feas) {
            const double before =
                best[static_cast<std::size_t>(it - cfg.stall_window - 1)];
            if (before - best_now < cfg.stall_decrease)
                return {Verdict::LikelyInfeasible, std::nullopt, best_now, it};
        }
    }
    return {Verdict::Undecided, std::nullopt, best_now, cfg.max_iters};
}

inline FeasibilityOutcome solve(const FeasibilityProblem& p, const SolverConfig& cfg,
                                const CMat* initial = nullptr) {
    DenseAffineProjector aff(p);
    return dykstra_solve(aff, cfg, initial);
}

// --------------------------------------------------------------- checking ---

// Witness verification independent of the iteration loop: fresh constraint
// residuals and a fresh eigendecomposition.
struct WitnessCheck {
    bool ok = false;
    double constraint_residual = 0.0;
    double min_eig = 0.0;
};

inline WitnessCheck check_witness(const FeasibilityProblem& p, const CMat& w, double eps) {
    WitnessCheck c;
    double s = 0.0;
    for (std::size_t i = 0; i < p.lhs.size(); ++i) {
        const double r = hs_inner(p.lhs[i], w).real() - p.rhs(static_cast<Index>(i));
        s += r * r;
    }
    c.constraint_residual = std::sqrt(s);
    c.min_eig = min_eigenvalue(w);
    c.ok = c.constraint_residual <= eps && c.min_eig >= -tol.psd;
    return c;
}

inline WitnessCheck check_witness(const TensorShape& shape,
                                  const std::vector<PartialTraceConstraint>& cons,
                                  const CMat& w, double eps) {
    WitnessCheck c;
    double s = 0.0;
    for (const auto& con : cons) {
        const double r = (partial_trace(w, shape, con.keep) - con.target).norm();
        s += r * r;
    }
    c.constraint_residual = std::sqrt(s);
    c.min_eig = min_eigenvalue(w);
    c.ok = c.constraint_residual <= eps && c.min_eig >= -tol.psd;
    return c;
}

}  // namespace ebtk
