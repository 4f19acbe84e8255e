// fockspin.hpp: truncated Fock (x) spin-1/2 basis, operator matrices and the
// spin-boson Hamiltonian  H = (dE/2) sz + hw a^dag a + U (a^dag + a) sx

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "bsshift/errors.hpp"
#include "bsshift/model.hpp"

namespace bsshift {

using Complex = std::complex<double>;

/// Spin projection m = +1/2 (index 0) or m = -1/2 (index 1).
enum class Spin : int { up = 0, down = 1 };

[[nodiscard]] constexpr double spin_m(Spin s) { return s == Spin::up ? 0.5 : -0.5; }
[[nodiscard]] constexpr Spin flip(Spin s) { return s == Spin::up ? Spin::down : Spin::up; }

struct FockSpinState {
    int n_fock;
    Spin spin;

    friend bool operator==(const FockSpinState&, const FockSpinState&) = default;
};

/// Fock states |0>..|n_max> times a spin-1/2; index = 2 n + spin_index.
struct FockSpinBasis {
    int n_max{1};

    explicit FockSpinBasis(int n_max_) : n_max(n_max_) {
        if (n_max < 1) throw ConfigurationError("Fock truncation n_max must be >= 1");
    }

    [[nodiscard]] int fock_dimension() const { return n_max + 1; }
    [[nodiscard]] int dimension() const { return 2 * (n_max + 1); }

    [[nodiscard]] int index(int n, Spin s) const {
        if (n < 0 || n > n_max) throw ContractError("Fock index out of range");
        return 2 * n + static_cast<int>(s);
    }
    [[nodiscard]] int index(FockSpinState st) const { return index(st.n_fock, st.spin); }

    [[nodiscard]] FockSpinState state(int idx) const {
        if (idx < 0 || idx >= dimension()) throw ContractError("basis index out of range");
        return {idx / 2, static_cast<Spin>(idx % 2)};
    }

    /// Eigenvalue of sz (-1)^n for a basis state.
    [[nodiscard]] int parity(int idx) const {
        const auto st = state(idx);
        const int spin_sign = st.spin == Spin::up ? 1 : -1;
        return (st.n_fock % 2 == 0) ? spin_sign : -spin_sign;
    }

    friend bool operator==(const FockSpinBasis&, const FockSpinBasis&) = default;
};

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense operator tagged with the basis it acts on.
template <typename Scalar>
struct OperatorMatrix {
    using scalar_type = Scalar;

    FockSpinBasis basis;
    DenseMatrix<Scalar> entries;

    OperatorMatrix(FockSpinBasis b, DenseMatrix<Scalar> m) : basis(b), entries(std::move(m)) {
        if (entries.rows() != basis.dimension() || entries.cols() != basis.dimension())
            throw ContractError("operator shape does not match its basis");
    }

    static OperatorMatrix zero(FockSpinBasis b) {
        return {b, DenseMatrix<Scalar>::Zero(b.dimension(), b.dimension())};
    }
    static OperatorMatrix identity(FockSpinBasis b) {
        return {b, DenseMatrix<Scalar>::Identity(b.dimension(), b.dimension())};
    }

    [[nodiscard]] int dimension() const { return basis.dimension(); }
    [[nodiscard]] Scalar operator()(int i, int j) const { return entries(i, j); }

    [[nodiscard]] OperatorMatrix adjoint() const { return {basis, entries.adjoint()}; }

    [[nodiscard]] double max_abs() const {
        return entries.size() == 0 ? 0.0 : entries.cwiseAbs().maxCoeff();
    }

    /// max_ij |A_ij - conj(A_ji)|
    [[nodiscard]] double hermiticity_residual() const {
        return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    }

    friend void require_same_basis(const OperatorMatrix& a, const OperatorMatrix& b) {
        if (!(a.basis == b.basis)) throw ContractError("operator bases do not match");
    }

    friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
        require_same_basis(a, b);
        return {a.basis, a.entries + b.entries};
    }
    friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
        require_same_basis(a, b);
        return {a.basis, a.entries - b.entries};
    }
    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
        require_same_basis(a, b);
        return {a.basis, a.entries * b.entries};
    }
    friend OperatorMatrix operator*(Scalar s, const OperatorMatrix& a) { return {a.basis, s * a.entries}; }
};

using RealOperator = OperatorMatrix<double>;
using ComplexOperator = OperatorMatrix<Complex>;

[[nodiscard]] inline ComplexOperator to_complex(const RealOperator& op) {
    return {op.basis, op.entries.cast<Complex>()};
}

/// Real part of an operator whose imaginary part is known to vanish.
[[nodiscard]] inline RealOperator real_part(const ComplexOperator& op) {
    return {op.basis, op.entries.real()};
}

namespace pauli {
inline Eigen::Matrix2d identity() { return Eigen::Matrix2d::Identity(); }
inline Eigen::Matrix2d x() { return (Eigen::Matrix2d() << 0, 1, 1, 0).finished(); }
inline Eigen::Matrix2d z() { return (Eigen::Matrix2d() << 1, 0, 0, -1).finished(); }
inline Eigen::Matrix2cd y() {
    Eigen::Matrix2cd m;
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
} // namespace pauli

/// fock (x) spin with the interleaved (spin-fastest) ordering.
template <typename DerivedF, typename DerivedS>
[[nodiscard]] auto kron_fock_spin(const FockSpinBasis& basis,
                                  const Eigen::MatrixBase<DerivedF>& fock,
                                  const Eigen::MatrixBase<DerivedS>& spin) {
    using Scalar = std::common_type_t<typename DerivedF::Scalar, typename DerivedS::Scalar>;
    const int nf = basis.fock_dimension();
    if (fock.rows() != nf || fock.cols() != nf || spin.rows() != 2 || spin.cols() != 2)
        throw ContractError("kron_fock_spin: factor shapes do not match basis");
    DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(2 * nf, 2 * nf);
    for (int j = 0; j < nf; ++j)
        for (int i = 0; i < nf; ++i) {
            const Scalar f = static_cast<Scalar>(fock(i, j));
            if (f == Scalar(0)) continue;
            for (int b = 0; b < 2; ++b)
                for (int a = 0; a < 2; ++a) out(2 * i + a, 2 * j + b) = f * static_cast<Scalar>(spin(a, b));
        }
    return OperatorMatrix<Scalar>{basis, std::move(out)};
}

/// Fock-space annihilation matrix, <n-1|a|n> = sqrt(n).
[[nodiscard]] inline Eigen::MatrixXd fock_annihilation(int n_max) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

[[nodiscard]] inline Eigen::MatrixXd fock_number(int n_max) {
    return Eigen::VectorXd::LinSpaced(n_max + 1, 0.0, n_max).asDiagonal();
}

/// a (x) 1_spin
[[nodiscard]] inline RealOperator build_ladder(const FockSpinBasis& basis) {
    return kron_fock_spin(basis, fock_annihilation(basis.n_max), pauli::identity());
}

/// The spin-boson Hamiltonian in units of hbar_omega0. Real symmetric, bandwidth 3.
[[nodiscard]] inline RealOperator build_hamiltonian(const ModelParams& params, const FockSpinBasis& basis) {
    const ModelParams p = params.normalized();
    RealOperator h = RealOperator::zero(basis);
    auto& m = h.entries;
    for (int n = 0; n <= basis.n_max; ++n) {
        m(basis.index(n, Spin::up), basis.index(n, Spin::up)) = 0.5 * p.delta_e + n;
        m(basis.index(n, Spin::down), basis.index(n, Spin::down)) = -0.5 * p.delta_e + n;
        if (n == basis.n_max) continue;
        // U (a + a^dag) sx couples (n, m) <-> (n+1, -m)
        const double c = p.coupling_u * std::sqrt(static_cast<double>(n + 1));
        const int i0 = basis.index(n, Spin::up), i1 = basis.index(n + 1, Spin::down);
        const int j0 = basis.index(n, Spin::down), j1 = basis.index(n + 1, Spin::up);
        m(i0, i1) = m(i1, i0) = c;
        m(j0, j1) = m(j1, j0) = c;
    }
    return h;
}

/// P = sz (-1)^(a^dag a), conserved by the spin-boson Hamiltonian.
[[nodiscard]] inline RealOperator parity_operator(const FockSpinBasis& basis) {
    RealOperator p = RealOperator::zero(basis);
    for (int i = 0; i < basis.dimension(); ++i) p.entries(i, i) = basis.parity(i);
    return p;
}

/// Basis indices carrying parity `sign` (+1 or -1), in ascending order.
[[nodiscard]] inline std::vector<int> sector_indices(const FockSpinBasis& basis, int sign) {
    std::vector<int> out;
    out.reserve(basis.fock_dimension());
    for (int i = 0; i < basis.dimension(); ++i)
        if (basis.parity(i) == sign) out.push_back(i);
    return out;
}

/// Eigenpairs sorted by ascending eigenvalue; column k of `eigenvectors` belongs to eigenvalues[k].
template <typename Scalar>
struct Spectrum {
    FockSpinBasis basis;
    Eigen::VectorXd eigenvalues;
    DenseMatrix<Scalar> eigenvectors;
    std::vector<int> parity_labels;  // +1 / -1, or 0 when parity is not a good quantum number

    [[nodiscard]] int size() const { return static_cast<int>(eigenvalues.size()); }
};

using RealSpectrum = Spectrum<double>;
using ComplexSpectrum = Spectrum<Complex>;

inline constexpr double kHermitianTolerance = 1e-12;

namespace detail {

template <typename Scalar>
double commutator_with_parity(const OperatorMatrix<Scalar>& op) {
    // P is diagonal, so [P,H]_ij = (p_i - p_j) H_ij.
    double r = 0.0;
    for (int j = 0; j < op.dimension(); ++j)
        for (int i = 0; i < op.dimension(); ++i)
            if (op.basis.parity(i) != op.basis.parity(j)) r = std::max(r, 2.0 * std::abs(op.entries(i, j)));
    return r;
}

template <typename Scalar>
void sort_spectrum(Spectrum<Scalar>& s) {
    std::vector<int> order(s.eigenvalues.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return s.eigenvalues[a] < s.eigenvalues[b]; });
    Eigen::VectorXd ev(s.eigenvalues.size());
    DenseMatrix<Scalar> vec(s.eigenvectors.rows(), s.eigenvectors.cols());
    std::vector<int> lab(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        ev[k] = s.eigenvalues[order[k]];
        vec.col(k) = s.eigenvectors.col(order[k]);
        lab[k] = s.parity_labels[order[k]];
    }
    s.eigenvalues = std::move(ev);
    s.eigenvectors = std::move(vec);
    s.parity_labels = std::move(lab);
}

} // namespace detail

/// Full eigendecomposition of a Hermitian operator.
///
/// When the operator commutes with parity, each parity sector is solved
/// separately so that every eigenvector carries a definite label even at
/// exact cross-sector degeneracies.
template <typename Scalar>
[[nodiscard]] Spectrum<Scalar> diagonalize(const OperatorMatrix<Scalar>& op) {
    const double scale = std::max(1.0, op.max_abs());
    if (op.hermiticity_residual() > kHermitianTolerance * scale)
        throw ContractError("diagonalize: operator is not Hermitian");

    const int dim = op.dimension();
    Spectrum<Scalar> out{op.basis, Eigen::VectorXd(dim), DenseMatrix<Scalar>::Zero(dim, dim),
                         std::vector<int>(dim, 0)};
    // Hermitian symmetrization removes rounding-level asymmetry before the solve.
    const DenseMatrix<Scalar> herm = 0.5 * (op.entries + op.entries.adjoint());

    if (detail::commutator_with_parity(op) <= kHermitianTolerance * scale) {
        int col = 0;
        for (int sign : {+1, -1}) {
            const auto idx = sector_indices(op.basis, sign);
            const int n = static_cast<int>(idx.size());
            DenseMatrix<Scalar> block(n, n);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) block(i, j) = herm(idx[i], idx[j]);
            Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(block);
            if (es.info() != Eigen::Success) throw NumericError("eigensolver did not converge", 0.0);
            for (int k = 0; k < n; ++k, ++col) {
                out.eigenvalues[col] = es.eigenvalues()[k];
                for (int i = 0; i < n; ++i) out.eigenvectors(idx[i], col) = es.eigenvectors()(i, k);
                out.parity_labels[col] = sign;
            }
        }
        detail::sort_spectrum(out);
        return out;
    }

    Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(herm);
    if (es.info() != Eigen::Success) throw NumericError("eigensolver did not converge", 0.0);
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    return out;
}

/// Eigenpairs of H restricted to one parity sector. Vectors are in sector coordinates.
struct SectorSpectrum {
    int parity{1};
    std::vector<int> indices;  // sector coordinate -> full basis index
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // empty when solved without vectors

    /// Embed sector eigenvector `k` into the full basis.
    [[nodiscard]] Eigen::VectorXd full_vector(int k, int full_dim) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(full_dim);
        for (std::size_t i = 0; i < indices.size(); ++i) v[indices[i]] = eigenvectors(static_cast<Eigen::Index>(i), k);
        return v;
    }

    /// Project a full-basis vector onto this sector's coordinates.
    [[nodiscard]] Eigen::VectorXd restrict(const Eigen::VectorXd& full) const {
        Eigen::VectorXd v(indices.size());
        for (std::size_t i = 0; i < indices.size(); ++i) v[static_cast<Eigen::Index>(i)] = full[indices[i]];
        return v;
    }
};

[[nodiscard]] inline SectorSpectrum diagonalize_sector(const RealOperator& h, int parity, bool with_vectors = true) {
    SectorSpectrum s;
    s.parity = parity;
    s.indices = sector_indices(h.basis, parity);
    const int n = static_cast<int>(s.indices.size());
    Eigen::MatrixXd block(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) block(i, j) = h.entries(s.indices[i], s.indices[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        block, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("sector eigensolver did not converge", 0.0);
    s.eigenvalues = es.eigenvalues();
    if (with_vectors) s.eigenvectors = es.eigenvectors();
    return s;
}

/// max_k ||H v_k - lambda_k v_k||
template <typename Scalar>
[[nodiscard]] double max_eigen_residual(const OperatorMatrix<Scalar>& op, const Spectrum<Scalar>& s) {
    double r = 0.0;
    for (int k = 0; k < s.size(); ++k)
        r = std::max(r, (op.entries * s.eigenvectors.col(k) - s.eigenvalues[k] * s.eigenvectors.col(k)).norm());
    return r;
}

/// Weight of a state on Fock levels n > cutoff_fraction * n_max.
template <typename Derived>
[[nodiscard]] double fock_population_above(const FockSpinBasis& basis, const Eigen::MatrixBase<Derived>& v,
                                           double cutoff_fraction = 0.9) {
    const int n_cut = static_cast<int>(std::floor(cutoff_fraction * basis.n_max));
    double w = 0.0;
    for (int n = n_cut + 1; n <= basis.n_max; ++n)
        for (Spin s : {Spin::up, Spin::down}) w += std::norm(v[basis.index(n, s)]);
    return w;
}

inline constexpr double kTruncationPopulationLimit = 1e-8;

/// Truncation buffer rule: the eigenstate lives well inside the Fock cutoff.
template <typename Derived>
[[nodiscard]] bool truncation_safe(const FockSpinBasis& basis, const Eigen::MatrixBase<Derived>& v) {
    return fock_population_above(basis, v) < kTruncationPopulationLimit;
}

// ---------------------------------------------------------------------------
// Binary spectrum dump:
//   u64 count | count x f64 eigenvalues | count x i8 parity labels
// All multi-byte fields little-endian.

namespace detail {

template <typename T>
void write_le(std::ostream& os, T value) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    os.write(bytes.data(), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
    std::array<char, sizeof(T)> bytes{};
    if (!is.read(bytes.data(), sizeof(T))) throw IoError("truncated spectrum dump");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
}

} // namespace detail

struct SpectrumDump {
    Eigen::VectorXd eigenvalues;
    std::vector<int> parity_labels;
};

inline void write_spectrum_dump(std::ostream& os, const Eigen::VectorXd& eigenvalues,
                                const std::vector<int>& parity_labels) {
    if (parity_labels.size() != static_cast<std::size_t>(eigenvalues.size()))
        throw ContractError("parity label count does not match eigenvalue count");
    detail::write_le<std::uint64_t>(os, static_cast<std::uint64_t>(eigenvalues.size()));
    for (double e : eigenvalues) detail::write_le<double>(os, e);
    for (int p : parity_labels) detail::write_le<std::int8_t>(os, static_cast<std::int8_t>(p));
    if (!os) throw IoError("failed to write spectrum dump");
}

[[nodiscard]] inline SpectrumDump read_spectrum_dump(std::istream& is) {
    const auto count = detail::read_le<std::uint64_t>(is);
    if (count > (1ULL << 32)) throw IoError("implausible spectrum dump length");
    SpectrumDump d;
    d.eigenvalues.resize(static_cast<Eigen::Index>(count));
    for (auto& e : d.eigenvalues) e = detail::read_le<double>(is);
    d.parity_labels.resize(count);
    for (auto& p : d.parity_labels) p = detail::read_le<std::int8_t>(is);
    return d;
}

} // namespace bsshift
