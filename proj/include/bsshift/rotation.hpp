// rotation.hpp: spectral calculus on the quadrature X = a + a^dag and the
// rotated-frame decomposition  U^dag H U = H0 + V + W.

#pragma once

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "bsshift/errors.hpp"
#include "bsshift/fockspin.hpp"
#include "bsshift/model.hpp"

namespace bsshift {

/// Eigendecomposition of X = a + a^dag on the truncated Fock space, reused
/// for every scalar function of X built on the same basis.
class QuadratureCalculus {
public:
    explicit QuadratureCalculus(FockSpinBasis basis) : basis_(basis) {
        const Eigen::MatrixXd a = fock_annihilation(basis.n_max);
        x_ = a + a.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x_);
        if (es.info() != Eigen::Success) throw NumericError("quadrature eigensolve failed", 0.0);
        values_ = es.eigenvalues();
        vectors_ = es.eigenvectors();
    }

    [[nodiscard]] const FockSpinBasis& basis() const { return basis_; }
    [[nodiscard]] const Eigen::VectorXd& x_eigenvalues() const { return values_; }
    [[nodiscard]] const Eigen::MatrixXd& x_eigenvectors() const { return vectors_; }
    [[nodiscard]] const Eigen::MatrixXd& quadrature() const { return x_; }

    /// f(X) on the Fock factor alone.
    [[nodiscard]] Eigen::MatrixXd fock_function(const std::function<double(double)>& f) const {
        Eigen::VectorXd fx(values_.size());
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            fx[i] = f(values_[i]);
            if (!std::isfinite(fx[i]))
                throw DomainError("scalar function undefined at X eigenvalue " + std::to_string(values_[i]));
        }
        return vectors_ * fx.asDiagonal() * vectors_.transpose();
    }

    [[nodiscard]] double reconstruction_error() const {
        return (vectors_ * values_.asDiagonal() * vectors_.transpose() - x_).cwiseAbs().maxCoeff();
    }

    /// max_i |x_i + x_{N-1-i}|; the spectrum of X is symmetric about zero.
    [[nodiscard]] double pairing_error() const {
        const Eigen::Index n = values_.size();
        double r = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) r = std::max(r, std::abs(values_[i] + values_[n - 1 - i]));
        return r;
    }

private:
    FockSpinBasis basis_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd values_;
    Eigen::MatrixXd vectors_;
};

/// f(X) (x) 1_spin
[[nodiscard]] inline RealOperator apply_scalar_function(const QuadratureCalculus& calc,
                                                        const std::function<double(double)>& f) {
    return kron_fock_spin(calc.basis(), calc.fock_function(f), pauli::identity());
}

namespace detail {

inline void require_calc_matches(const QuadratureCalculus& calc, const FockSpinBasis& basis) {
    if (!(calc.basis() == basis)) throw ContractError("quadrature calculus built for a different basis");
}

/// Rotation angle theta(x) = arctan(2 U x / dE).
inline std::function<double(double)> rotation_angle(const ModelParams& p) {
    const double r = 2.0 * p.coupling_u / p.delta_e;
    return [r](double x) { return std::atan(r * x); };
}

/// The bracket shared by V and W: (U/dE) / (1 + (2 U x / dE)^2).
inline std::function<double(double)> bracket(const ModelParams& p) {
    const double c = p.coupling_u / p.delta_e;
    const double r = 2.0 * p.coupling_u / p.delta_e;
    return [c, r](double x) { return c / (1.0 + (r * x) * (r * x)); };
}

} // namespace detail

inline constexpr double kUnitarityTolerance = 1e-9;

/// U = cos(theta(X)/2) (x) 1 - i sin(theta(X)/2) (x) sy.
[[nodiscard]] inline ComplexOperator build_unitary(const ModelParams& params, const QuadratureCalculus& calc) {
    const ModelParams p = params.normalized();
    const auto theta = detail::rotation_angle(p);
    const Eigen::MatrixXd c = calc.fock_function([&](double x) { return std::cos(0.5 * theta(x)); });
    const Eigen::MatrixXd s = calc.fock_function([&](double x) { return std::sin(0.5 * theta(x)); });
    const auto& basis = calc.basis();
    return {basis, kron_fock_spin(basis, c, pauli::identity()).entries.cast<Complex>() -
                       Complex(0, 1) * kron_fock_spin(basis, s, pauli::y()).entries};
}

/// Same unitary from exp(-(i/2) G) with G = theta(X) (x) sy diagonalized directly.
[[nodiscard]] inline ComplexOperator build_unitary_exponential(const ModelParams& params,
                                                               const QuadratureCalculus& calc) {
    const ModelParams p = params.normalized();
    const auto& basis = calc.basis();
    const auto gen = kron_fock_spin(basis, calc.fock_function(detail::rotation_angle(p)), pauli::y());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gen.entries);
    if (es.info() != Eigen::Success) throw NumericError("generator eigensolve failed", 0.0);
    Eigen::VectorXcd phase(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phase.size(); ++i) phase[i] = std::exp(Complex(0, -0.5 * es.eigenvalues()[i]));
    return {basis, es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint()};
}

[[nodiscard]] inline double unitarity_residual(const ComplexOperator& u) {
    return (u.entries.adjoint() * u.entries - Eigen::MatrixXcd::Identity(u.dimension(), u.dimension()))
        .cwiseAbs()
        .maxCoeff();
}

/// H' = U^dag H U.
[[nodiscard]] inline ComplexOperator rotate_hamiltonian(const ComplexOperator& h, const ComplexOperator& u) {
    require_same_basis(h, u);
    if (unitarity_residual(u) > kUnitarityTolerance) throw ContractError("rotate_hamiltonian: u is not unitary");
    return {h.basis, u.entries.adjoint() * h.entries * u.entries};
}

[[nodiscard]] inline ComplexOperator rotate_hamiltonian(const RealOperator& h, const ComplexOperator& u) {
    return rotate_hamiltonian(to_complex(h), u);
}

/// H0 = sqrt(dE^2 + 4 U^2 X^2) sz/2 + a^dag a.
[[nodiscard]] inline RealOperator build_h0(const ModelParams& params, const QuadratureCalculus& calc) {
    const ModelParams p = params.normalized();
    const auto& basis = calc.basis();
    const double de2 = p.delta_e * p.delta_e, u2 = p.coupling_u * p.coupling_u;
    const Eigen::MatrixXd dressed = calc.fock_function([&](double x) { return std::sqrt(de2 + 4.0 * u2 * x * x); });
    return kron_fock_spin(basis, dressed, 0.5 * pauli::z()) +
           kron_fock_spin(basis, fock_number(basis.n_max), pauli::identity());
}

/// V = (i/2) { F (a - a^dag) + (a - a^dag) F } sy with F the shared bracket.
[[nodiscard]] inline ComplexOperator build_v(const ModelParams& params, const QuadratureCalculus& calc) {
    const ModelParams p = params.normalized();
    const auto& basis = calc.basis();
    const Eigen::MatrixXd f = calc.fock_function(detail::bracket(p));
    const Eigen::MatrixXd a = fock_annihilation(basis.n_max);
    const Eigen::MatrixXd diff = a - a.transpose();
    const Eigen::MatrixXd sym = f * diff + diff * f;
    return {basis, Complex(0, 0.5) * kron_fock_spin(basis, sym, pauli::y()).entries};
}

/// W = F^2 (x) 1 (units of hbar_omega0).
[[nodiscard]] inline RealOperator build_w(const ModelParams& params, const QuadratureCalculus& calc) {
    const ModelParams p = params.normalized();
    const auto br = detail::bracket(p);
    return apply_scalar_function(calc, [&](double x) { return br(x) * br(x); });
}

/// Number of Fock levels inside the verification interior (the top of the
/// truncated space carries unconverged X eigenpairs).
[[nodiscard]] inline int interior_fock_levels(const FockSpinBasis& basis, double fraction) {
    return std::max(1, static_cast<int>(std::floor(fraction * basis.fock_dimension())));
}

/// max |A_ij| over basis states with Fock index below the interior cutoff.
template <typename Scalar>
[[nodiscard]] double interior_max_abs(const OperatorMatrix<Scalar>& op, double fraction) {
    const int m = 2 * interior_fock_levels(op.basis, fraction);
    return op.entries.topLeftCorner(m, m).cwiseAbs().maxCoeff();
}

/// Diagonalized H0 in the rotated frame. H0 is spin-diagonal, so each spin
/// block is solved on the Fock factor; block eigenvector n is psi_{n,m}.
class RotatedFrameStates {
public:
    RotatedFrameStates(const ModelParams& params, const QuadratureCalculus& calc) : basis_(calc.basis()) {
        const ModelParams p = params.normalized();
        const double de2 = p.delta_e * p.delta_e, u2 = p.coupling_u * p.coupling_u;
        const Eigen::MatrixXd dressed =
            calc.fock_function([&](double x) { return std::sqrt(de2 + 4.0 * u2 * x * x); });
        const Eigen::MatrixXd number = fock_number(basis_.n_max);
        for (Spin s : {Spin::up, Spin::down}) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(number + spin_m(s) * dressed);
            if (es.info() != Eigen::Success) throw NumericError("H0 block eigensolve failed", 0.0);
            auto& blk = blocks_[static_cast<int>(s)];
            blk.values = es.eigenvalues();
            blk.vectors = es.eigenvectors();
        }
    }

    [[nodiscard]] const FockSpinBasis& basis() const { return basis_; }

    [[nodiscard]] double energy(int n, Spin s) const {
        check(n);
        return blocks_[static_cast<int>(s)].values[n];
    }

    /// Fock-space amplitudes of psi_{n,m} (sign fixed so the largest component is positive).
    [[nodiscard]] Eigen::VectorXd fock_vector(int n, Spin s) const {
        check(n);
        Eigen::VectorXd v = blocks_[static_cast<int>(s)].vectors.col(n);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0) v = -v;
        return v;
    }

    /// psi_{n,m} = u_n (x) |m> embedded in the full Fock (x) spin basis.
    [[nodiscard]] Eigen::VectorXd state(int n, Spin s) const {
        const Eigen::VectorXd f = fock_vector(n, s);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(basis_.dimension());
        for (int k = 0; k <= basis_.n_max; ++k) v[basis_.index(k, s)] = f[k];
        return v;
    }

    /// <a^dag a> of psi_{n,m}.
    [[nodiscard]] double mean_photon_number(int n, Spin s) const {
        const Eigen::VectorXd f = fock_vector(n, s);
        double acc = 0.0;
        for (int k = 0; k <= basis_.n_max; ++k) acc += k * f[k] * f[k];
        return acc;
    }

private:
    void check(int n) const {
        if (n < 0 || n > basis_.n_max) throw ContractError("rotated-frame level index out of range");
    }

    struct Block {
        Eigen::VectorXd values;
        Eigen::MatrixXd vectors;
    };
    FockSpinBasis basis_;
    std::array<Block, 2> blocks_;
};

/// Norms behind the rotation identities, all in units of hbar_omega0.
struct RotationReport {
    double unitarity{0};             // ||U^dag U - 1||_max
    double route_agreement{0};       // ||U_block - U_exp||_max
    double spectral_invariance{0};   // max |eig(H') - eig(H)| over the interior 50%
    double decomposition{0};         // ||H' - (H0 + V + W)||_max on the interior block
    double v_hermiticity{0};
    double parity_preservation{0};   // ||U^dag P U - P||_max on the interior block
    double w_norm{0};                // largest eigenvalue of W
    double w_bound{0};               // (U / dE)^2
    double trace_relative{0};        // |tr H' - tr H| / |tr H|
};

/// Runs every rotation identity on one parameter point.
[[nodiscard]] inline RotationReport verify_rotation(const ModelParams& params, const FockSpinBasis& basis,
                                                    double interior_fraction = 0.6) {
    const ModelParams p = params.normalized();
    const QuadratureCalculus calc(basis);
    RotationReport r;

    const ComplexOperator u = build_unitary(p, calc);
    r.unitarity = unitarity_residual(u);
    r.route_agreement = (u.entries - build_unitary_exponential(p, calc).entries).cwiseAbs().maxCoeff();

    const RealOperator h = build_hamiltonian(p, basis);
    const ComplexOperator hp = rotate_hamiltonian(h, u);
    const ComplexOperator v = build_v(p, calc);
    const RealOperator w = build_w(p, calc);
    const ComplexOperator rest = hp - (to_complex(build_h0(p, calc)) + v + to_complex(w));
    r.decomposition = interior_max_abs(rest, interior_fraction);
    r.v_hermiticity = v.hermiticity_residual();

    const RealSpectrum eh = diagonalize(h);
    const ComplexSpectrum ehp = diagonalize(ComplexOperator{basis, 0.5 * (hp.entries + hp.entries.adjoint())});
    const int half = eh.size() / 2;
    r.spectral_invariance = (eh.eigenvalues.head(half) - ehp.eigenvalues.head(half)).cwiseAbs().maxCoeff();

    const ComplexOperator par = to_complex(parity_operator(basis));
    r.parity_preservation = interior_max_abs(ComplexOperator{basis, u.entries.adjoint() * par.entries * u.entries} - par,
                                             interior_fraction);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ws(w.entries, Eigen::EigenvaluesOnly);
    r.w_norm = ws.eigenvalues().cwiseAbs().maxCoeff();
    r.w_bound = (p.coupling_u / p.delta_e) * (p.coupling_u / p.delta_e);

    const double tr = h.entries.trace();
    r.trace_relative = std::abs(hp.entries.trace().real() - tr) / std::max(1.0, std::abs(tr));
    return r;
}

} // namespace bsshift
