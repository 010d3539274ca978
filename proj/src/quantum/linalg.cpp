#include "mipsim/quantum/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mipsim/errors.hpp"

namespace mipsim::quantum {

Matrix hermitian_part(const Matrix& a) { return (a + a.adjoint()) / 2.0; }

bool is_hermitian(const Matrix& a, double tol) {
  return a.rows() == a.cols() && (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::VectorXd eigenvalues(const Matrix& h) {
  if (h.rows() != h.cols()) throw DomainError("eigenvalues of a non-square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double max_eigenvalue(const Matrix& h) { return eigenvalues(h).maxCoeff(); }
double min_eigenvalue(const Matrix& h) { return eigenvalues(h).minCoeff(); }

bool is_psd(const Matrix& h, double tol) { return is_hermitian(h, tol) && min_eigenvalue(h) >= -tol; }

Matrix spectral_map(const Matrix& h, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  Eigen::VectorXd v = es.eigenvalues();
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f(v[i]);
  return es.eigenvectors() * v.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

Matrix psd_sqrt(const Matrix& h) {
  return spectral_map(h, [](double x) { return x > 0 ? std::sqrt(x) : 0.0; });
}

double trace_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

double frobenius_norm(const Matrix& a) { return a.norm(); }

Complex trace_rho(const Matrix& a, const Matrix& rho) {
  if (a.rows() != rho.rows() || a.cols() != rho.cols()) throw DomainError("trace_rho: dimension mismatch");
  return (a * rho).trace();
}

double rho_norm(const Matrix& a, const Matrix& rho) {
  if (a.rows() != rho.rows()) throw DomainError("rho_norm: dimension mismatch");
  return std::sqrt(std::max(0.0, (a * a.adjoint() * rho).trace().real()));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix partial_trace(const Matrix& rho, const std::vector<std::size_t>& dims, const std::vector<std::size_t>& keep) {
  const std::size_t total = std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  if (static_cast<std::size_t>(rho.rows()) != total || rho.rows() != rho.cols()) {
    throw DomainError("partial_trace: dimension mismatch");
  }
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size()) throw DomainError("partial_trace: register out of range");
    kept[k] = true;
  }
  std::size_t kdim = 1;
  for (std::size_t k : keep) kdim *= dims[k];
  const std::size_t tdim = total / kdim;
  // Split a full index into (kept index, traced index).
  auto split = [&](std::size_t idx) {
    std::size_t kidx = 0, tidx = 0, kmul = 1, tmul = 1;
    for (std::size_t r = dims.size(); r-- > 0;) {
      const std::size_t digit = idx % dims[r];
      idx /= dims[r];
      if (kept[r]) {
        kidx += digit * kmul;
        kmul *= dims[r];
      } else {
        tidx += digit * tmul;
        tmul *= dims[r];
      }
    }
    return std::pair{kidx, tidx};
  };
  std::vector<std::pair<std::size_t, std::size_t>> parts(total);
  for (std::size_t i = 0; i < total; ++i) parts[i] = split(i);
  std::vector<std::vector<std::size_t>> by_trace(tdim);
  for (std::size_t i = 0; i < total; ++i) by_trace[parts[i].second].push_back(i);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(kdim));
  for (const auto& group : by_trace)
    for (std::size_t i : group)
      for (std::size_t j : group) out(parts[i].first, parts[j].first) += rho(i, j);
  return out;
}

void check_density(const Matrix& rho, double tol) {
  if (!is_hermitian(rho, tol)) throw DomainError("density matrix is not Hermitian");
  if (min_eigenvalue(rho) < -tol) throw DomainError("density matrix is not PSD");
  if (std::abs(rho.trace() - Complex(1)) > tol) throw DomainError("density matrix does not have unit trace");
}

Matrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

Matrix random_unitary(std::size_t d, Rng& rng) {
  const Matrix g = random_ginibre(d, d, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Absorb the phases of diag(R) into Q.
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const Complex diag = r(i, i);
    if (std::abs(diag) > 0) q.col(i) *= diag / std::abs(diag);
  }
  return q;
}

Vector random_state(std::size_t dim, Rng& rng) {
  Vector v = random_ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

Matrix random_density(std::size_t d, Rng& rng, std::size_t rank) {
  const Matrix g = random_ginibre(d, rank == 0 ? d : rank, rng);
  Matrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

Matrix random_hermitian(std::size_t d, Rng& rng) { return hermitian_part(random_ginibre(d, d, rng)); }

Matrix random_contraction(std::size_t rows, std::size_t cols, Rng& rng) {
  const Matrix g = random_ginibre(rows, cols, rng);
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix s = Matrix::Zero(rows, cols);
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) s(i, i) = u(rng);
  return svd.matrixU() * s * svd.matrixV().adjoint();
}

std::vector<Matrix> random_povm(std::size_t d, std::size_t outcomes, Rng& rng) {
  std::vector<Matrix> parts;
  Matrix total = Matrix::Zero(d, d);
  for (std::size_t a = 0; a < outcomes; ++a) {
    const Matrix g = random_ginibre(d, d, rng);
    parts.push_back(g * g.adjoint());
    total += parts.back();
  }
  const Matrix inv_sqrt = spectral_map(total, [](double x) { return 1.0 / std::sqrt(x); });
  for (auto& p : parts) p = hermitian_part(inv_sqrt * p * inv_sqrt);
  return parts;
}

std::vector<Matrix> random_projective(std::size_t d, std::size_t outcomes, Rng& rng) {
  const Matrix u = random_unitary(d, rng);
  std::vector<Matrix> out(outcomes, Matrix::Zero(d, d));
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t a = uniform_below(rng, outcomes);
    out[a] += u.col(i) * u.col(i).adjoint();
  }
  return out;
}

std::vector<Matrix> random_submeasurement(std::size_t d, std::size_t outcomes, Rng& rng) {
  auto p = random_povm(d, outcomes + 1, rng);
  p.pop_back();
  return p;
}

Matrix unitary_exp(const Matrix& h, double theta) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
  Vector phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::exp(Complex(0, theta * es.eigenvalues()[i]));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace mipsim::quantum
