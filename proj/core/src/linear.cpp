#include "stefan/linear.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

namespace stefan {

void tridiag_solve(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
                   std::vector<double>& d) {
  const size_t n = b.size();
  for (size_t i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  d[n - 1] /= b[n - 1];
  for (size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

struct BallImplicitSolver::Impl {
  const BallDomain* ball = nullptr;
  double dt = 0.0;
  std::vector<int> compact_of_cell;  // grid cell -> interior index, -1 outside
  std::vector<double> invc;          // per interior index

  // 1D path (interior cells are contiguous): Thomas arrays.
  bool one_d = false;
  std::vector<double> sub, diag, sup;

  // 2D path
  Eigen::SparseMatrix<double> A;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  bool pattern_ready = false;
  bool factored = false;
};

BallImplicitSolver::BallImplicitSolver(const BallDomain& ball, double dt)
    : impl_(std::make_unique<Impl>()) {
  if (dt <= 0) throw std::invalid_argument("BallImplicitSolver: dt must be positive");
  impl_->ball = &ball;
  impl_->dt = dt;
  impl_->one_d = ball.grid.dim == 1;
  impl_->compact_of_cell.assign(static_cast<size_t>(ball.grid.size()), -1);
  for (size_t k = 0; k < ball.interior.size(); ++k)
    impl_->compact_of_cell[static_cast<size_t>(ball.interior[k])] = static_cast<int>(k);
  if (impl_->one_d) {
    // 1D interior must be contiguous for the banded path.
    for (size_t k = 1; k < ball.interior.size(); ++k)
      if (ball.interior[k] != ball.interior[k - 1] + 1)
        throw std::invalid_argument("BallImplicitSolver: non-contiguous 1D interior");
  }
}

BallImplicitSolver::~BallImplicitSolver() = default;
BallImplicitSolver::BallImplicitSolver(BallImplicitSolver&&) noexcept = default;
BallImplicitSolver& BallImplicitSolver::operator=(BallImplicitSolver&&) noexcept = default;

const BallDomain& BallImplicitSolver::ball() const { return *impl_->ball; }
double BallImplicitSolver::dt() const { return impl_->dt; }

void BallImplicitSolver::factor(const std::vector<double>& coef_full) {
  auto& im = *impl_;
  const BallDomain& B = *im.ball;
  const Grid& g = B.grid;
  const int n = static_cast<int>(B.interior.size());
  const double r = im.dt / (g.h * g.h);

  im.invc.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double c = coef_full[static_cast<size_t>(B.interior[static_cast<size_t>(k)])];
    if (!(c > 0)) throw std::invalid_argument("BallImplicitSolver: coefficient must be > 0");
    im.invc[static_cast<size_t>(k)] = 1.0 / c;
  }

  if (im.one_d) {
    im.sub.assign(static_cast<size_t>(n), 0.0);
    im.sup.assign(static_cast<size_t>(n), 0.0);
    im.diag.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
      im.diag[static_cast<size_t>(k)] = im.invc[static_cast<size_t>(k)] + 2.0 * r;
      if (k > 0) im.sub[static_cast<size_t>(k)] = -r;
      if (k + 1 < n) im.sup[static_cast<size_t>(k)] = -r;
    }
    im.factored = true;
    return;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * 5);
  for (int k = 0; k < n; ++k) {
    const int cell = B.interior[static_cast<size_t>(k)];
    const int ix = g.ix_of(cell);
    const int iy = g.iy_of(cell);
    trips.emplace_back(k, k, im.invc[static_cast<size_t>(k)] + 2.0 * g.dim * r);
    auto couple = [&](int jx, int jy) {
      const int j = g.index(jx, jy);
      const int kj = im.compact_of_cell[static_cast<size_t>(j)];
      if (kj >= 0) trips.emplace_back(k, kj, -r);
    };
    couple(ix - 1, iy);
    couple(ix + 1, iy);
    couple(ix, iy - 1);
    couple(ix, iy + 1);
  }
  im.A.resize(n, n);
  im.A.setFromTriplets(trips.begin(), trips.end());
  if (!im.pattern_ready) {
    im.llt.analyzePattern(im.A);
    im.pattern_ready = true;
  }
  im.llt.factorize(im.A);
  if (im.llt.info() != Eigen::Success)
    throw std::runtime_error("BallImplicitSolver: factorization failed");
  im.factored = true;
}

void BallImplicitSolver::factor_uniform(double coef) {
  std::vector<double> c(static_cast<size_t>(impl_->ball->grid.size()), coef);
  factor(c);
}

void BallImplicitSolver::solve(const std::vector<double>& b_full,
                               std::vector<double>& x_full) const {
  const auto& im = *impl_;
  if (!im.factored) throw std::runtime_error("BallImplicitSolver: factor() not called");
  const BallDomain& B = *im.ball;
  const int n = static_cast<int>(B.interior.size());

  if (im.one_d) {
    std::vector<double> a = im.sub, d = im.diag, c = im.sup, rhs(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k)
      rhs[static_cast<size_t>(k)] =
          im.invc[static_cast<size_t>(k)] *
          b_full[static_cast<size_t>(B.interior[static_cast<size_t>(k)])];
    tridiag_solve(a, d, c, rhs);
    x_full.assign(b_full.size(), 0.0);
    for (int k = 0; k < n; ++k)
      x_full[static_cast<size_t>(B.interior[static_cast<size_t>(k)])] =
          rhs[static_cast<size_t>(k)];
    return;
  }

  Eigen::VectorXd rhs(n);
  for (int k = 0; k < n; ++k)
    rhs[k] = im.invc[static_cast<size_t>(k)] *
             b_full[static_cast<size_t>(B.interior[static_cast<size_t>(k)])];
  Eigen::VectorXd x = im.llt.solve(rhs);
  x_full.assign(b_full.size(), 0.0);
  for (int k = 0; k < n; ++k)
    x_full[static_cast<size_t>(B.interior[static_cast<size_t>(k)])] = x[k];
}

void BallImplicitSolver::step(std::vector<double>& phi_full) const {
  std::vector<double> out;
  solve(phi_full, out);
  phi_full.swap(out);
}

std::vector<double> solve_newton_system(const Grid& g, Boundary bc, double dt,
                                        const std::vector<double>& slopes,
                                        const std::vector<double>& rhs) {
  const double r = dt / (g.h * g.h);
  const int n = g.size();

  if (g.dim == 1) {
    std::vector<double> a(static_cast<size_t>(n), 0.0), b(static_cast<size_t>(n), 0.0),
        c(static_cast<size_t>(n), 0.0), d = rhs;
    for (int i = 0; i < n; ++i) {
      int deg = 0;
      if (i > 0) {
        ++deg;
        a[static_cast<size_t>(i)] = -r * slopes[static_cast<size_t>(i - 1)];
      }
      if (i + 1 < n) {
        ++deg;
        c[static_cast<size_t>(i)] = -r * slopes[static_cast<size_t>(i + 1)];
      }
      const int diag_deg = (bc == Boundary::zero_flux) ? deg : 2;
      b[static_cast<size_t>(i)] = 1.0 + r * diag_deg * slopes[static_cast<size_t>(i)];
    }
    tridiag_solve(a, b, c, d);
    return d;
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * 5);
  const int nx = g.cells[0];
  const int ny = g.cells[1];
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int i = g.index(ix, iy);
      int deg = 0;
      auto couple = [&](int jx, int jy) {
        if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) return;
        ++deg;
        const int j = g.index(jx, jy);
        trips.emplace_back(i, j, -r * slopes[static_cast<size_t>(j)]);
      };
      couple(ix - 1, iy);
      couple(ix + 1, iy);
      couple(ix, iy - 1);
      couple(ix, iy + 1);
      const int diag_deg = (bc == Boundary::zero_flux) ? deg : 4;
      trips.emplace_back(i, i, 1.0 + r * diag_deg * slopes[static_cast<size_t>(i)]);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_newton_system: factorization failed");
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = rhs[static_cast<size_t>(i)];
  Eigen::VectorXd x = lu.solve(b);
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = x[i];
  return out;
}

}  // namespace stefan
