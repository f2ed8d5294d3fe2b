// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear-algebra kernel shared by every other module:
// Hermitian positive-definite solves, ridge least squares, power
// normalization and seeded circularly-symmetric Gaussian sampling.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bidir {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Pseudo-random generator used everywhere. One instance per trial stream.
using Rng = std::mt19937_64;

enum class ErrorCode {
    NotHermitian,
    NotPositiveDefinite,
    Singular,
    ZeroVector,
    TooShort,
    OverheadExceedsBlock,
    DimensionMismatch,
    ConfigInvalid,
};

inline const char* to_string(ErrorCode c)
{
    switch (c) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::OverheadExceedsBlock: return "OverheadExceedsBlock";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline double max_abs(const CMat& a)
{
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

// Cholesky factor of a Hermitian PD matrix; throws on a pivot <= floor.
inline Eigen::LLT<CMat> checked_cholesky(const CMat& a, double pivot_floor, ErrorCode on_fail)
{
    Eigen::LLT<CMat> llt(a);
    if (llt.info() != Eigen::Success)
        throw Error(on_fail, "non-positive pivot in Cholesky factorization");
    const CMat& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        const double pivot = std::norm(l(i, i));
        if (!(pivot > pivot_floor))
            throw Error(on_fail, "pivot " + std::to_string(pivot) + " below floor");
    }
    return llt;
}

} // namespace detail

/// Solves A x = b for Hermitian positive-definite A.
inline CVec hpd_solve(const CMat& a, const CVec& b)
{
    if (a.rows() != a.cols() || a.rows() != b.size())
        throw Error(ErrorCode::DimensionMismatch, "hpd_solve: A must be d x d and b of dim d");
    const double asym = detail::max_abs(a - a.adjoint());
    if (asym > 1e-10 * std::max(1.0, detail::max_abs(a)))
        throw Error(ErrorCode::NotHermitian, "hpd_solve: asymmetry " + std::to_string(asym));
    auto llt = detail::checked_cholesky(a, 0.0, ErrorCode::NotPositiveDefinite);
    return llt.solve(b);
}

/// Ridge least squares: returns w = (Y Y^H + ridge I)^{-1} Y b^H, the minimizer of
/// ||b - w^H Y||^2 + ridge ||w||^2, where b is the row of desired symbols.
inline CVec ls_solve(const CMat& y, const CVec& b, double ridge)
{
    const auto d = y.rows();
    const auto m = y.cols();
    if (m < 1 || b.size() != m)
        throw Error(ErrorCode::DimensionMismatch, "ls_solve: need M >= 1 and dim(b) == cols(Y)");
    if (!(ridge >= 0.0))
        throw Error(ErrorCode::DimensionMismatch, "ls_solve: ridge must be nonnegative");
    if (ridge == 0.0 && m < d)
        throw Error(ErrorCode::Singular, "ls_solve: M < d without regularization");

    CMat gram = y * y.adjoint();
    const double trace = gram.trace().real();
    gram.diagonal().array() += ridge;
    const double floor = ridge == 0.0 ? 1e-12 * trace : 0.0;
    if (ridge == 0.0 && !(trace > 0.0))
        throw Error(ErrorCode::Singular, "ls_solve: zero data matrix");
    auto llt = detail::checked_cholesky(gram, floor, ErrorCode::Singular);
    return llt.solve(y * b.conjugate());
}

/// Rescales x so that ||x||^2 == power.
inline CVec normalize_power(const CVec& x, double power)
{
    const double n = x.norm();
    if (!(n >= 1e-15))
        throw Error(ErrorCode::ZeroVector, "normalize_power: vector norm below 1e-15");
    return x * (std::sqrt(power) / n);
}

/// i.i.d. circularly-symmetric complex Gaussian entries with E|h|^2 = variance.
inline CMat cgauss(Rng& rng, Eigen::Index rows, Eigen::Index cols, double variance)
{
    std::normal_distribution<double> n01(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    CMat out(rows, cols);
    // Fill in row-major order so draws do not depend on storage layout.
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double re = n01(rng);
            const double im = n01(rng);
            out(r, c) = cplx(s * re, s * im);
        }
    return out;
}

inline CVec cgauss_vec(Rng& rng, Eigen::Index dim, double variance)
{
    return cgauss(rng, dim, 1, variance).col(0);
}

/// Minimum-angle distance between the directions of two nonzero vectors:
/// min over unit-modulus c of || a/|a| - c b/|b| ||.
inline double direction_distance(const CVec& a, const CVec& b)
{
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        return na == nb ? 0.0 : std::sqrt(2.0);
    const cplx ip = b.dot(a); // b^H a
    const cplx phase = std::abs(ip) > 0.0 ? ip / std::abs(ip) : cplx(1.0, 0.0);
    return (a / na - phase * b / nb).norm();
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace bidir
