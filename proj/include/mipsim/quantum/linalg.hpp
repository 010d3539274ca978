#pragma once

// Dense complex linear algebra helpers and random instance generators.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mipsim/rng.hpp"

namespace mipsim::quantum {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Structural identities are checked at this tolerance.
inline constexpr double kStructuralTol = 1e-10;
/// Derived inequalities are checked at this tolerance.
inline constexpr double kInequalityTol = 1e-8;

Matrix hermitian_part(const Matrix& a);
bool is_hermitian(const Matrix& a, double tol = kStructuralTol);
/// Eigenvalues of the Hermitian part, ascending.
Eigen::VectorXd eigenvalues(const Matrix& h);
double max_eigenvalue(const Matrix& h);
double min_eigenvalue(const Matrix& h);
bool is_psd(const Matrix& h, double tol = kStructuralTol);
/// Applies f to the eigenvalues of the Hermitian part.
Matrix spectral_map(const Matrix& h, const std::function<double(double)>& f);
/// Square root of the Hermitian part with negative eigenvalues clipped.
Matrix psd_sqrt(const Matrix& h);
double trace_norm(const Matrix& a);
double frobenius_norm(const Matrix& a);

/// Tr(A rho).
Complex trace_rho(const Matrix& a, const Matrix& rho);
/// ||A||_rho = sqrt(Tr(A A^dagger rho)).
double rho_norm(const Matrix& a, const Matrix& rho);

Matrix kron(const Matrix& a, const Matrix& b);
/// Partial trace of a density on registers of dimensions dims, keeping the
/// listed registers in increasing order.
Matrix partial_trace(const Matrix& rho, const std::vector<std::size_t>& dims, const std::vector<std::size_t>& keep);

/// Checks Hermitian, PSD and unit trace; throws DomainError otherwise.
void check_density(const Matrix& rho, double tol = kStructuralTol);

// ---------------------------------------------------------------------------
// Random instances

Matrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng);
Matrix random_unitary(std::size_t d, Rng& rng);
Vector random_state(std::size_t dim, Rng& rng);
/// Random density matrix of the given rank (full rank if 0).
Matrix random_density(std::size_t d, Rng& rng, std::size_t rank = 0);
/// Random Hermitian matrix with Gaussian entries.
Matrix random_hermitian(std::size_t d, Rng& rng);
/// Random X : C^cols -> C^rows with X^dagger X <= I (operator norm <= 1).
Matrix random_contraction(std::size_t rows, std::size_t cols, Rng& rng);
/// Random POVM with `outcomes` elements summing to I.
std::vector<Matrix> random_povm(std::size_t d, std::size_t outcomes, Rng& rng);
/// Random projective measurement: a Haar basis split into `outcomes`
/// blocks of random sizes (blocks may be empty).
std::vector<Matrix> random_projective(std::size_t d, std::size_t outcomes, Rng& rng);
/// Random sub-measurement: a random POVM on outcomes + 1 elements with the
/// last one dropped.
std::vector<Matrix> random_submeasurement(std::size_t d, std::size_t outcomes, Rng& rng);
/// exp(i theta H) for Hermitian H.
Matrix unitary_exp(const Matrix& h, double theta);

}  // namespace mipsim::quantum
