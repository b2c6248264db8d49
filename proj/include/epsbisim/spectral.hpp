#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "epsbisim/model.hpp"

namespace epsbisim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

enum class DecompositionKind { Diagonalizable, Jordan };

struct SpectralOptions {
  double residual_tol = 1e-8;
  double cluster_tol = 1e-7;
  double cond_max = 1e8;
  std::size_t jordan_max_n = 50;
};

struct JordanBlock {
  Complex eigenvalue;
  std::size_t size = 1;
  std::size_t offset = 0;  // first column of the block in S
};

// P = S J S^-1. Blocks are ordered by eigenvalue modulus (descending), then
// argument, then size (descending); eigenvalue 1 comes first and 0 last.
struct SpectralData {
  DecompositionKind kind = DecompositionKind::Diagonalizable;
  CMatrix S;
  CMatrix S_inv;
  std::vector<Complex> eigenvalues;  // one per column of S
  std::vector<JordanBlock> blocks;
  std::size_t aP = 0;
  Complex lambda{0.0, 0.0};  // largest modulus among eigenvalues other than 1
  std::size_t z = 0;         // number of blocks for eigenvalue 0
  double residual = 0.0;
  double condition = 0.0;
  std::size_t initial = 0;
  std::size_t goal = 0;
  double cluster_tol = 1e-7;

  std::size_t size() const { return eigenvalues.size(); }
  CMatrix jordan_matrix() const;
  bool is_one(Complex v) const { return std::abs(v - 1.0) <= cluster_tol; }
  bool is_zero(Complex v) const { return std::abs(v) <= cluster_tol; }
};

SpectralData decompose(const Matrix& P, std::size_t initial, std::size_t goal,
                       const SpectralOptions& opts = {});
SpectralData decompose(const Dtmc& d, const SpectralOptions& opts = {});

// The same decomposition viewed as a Jordan form with blocks of size 1.
SpectralData as_jordan(const SpectralData& sd);

// p_{k+1} from an eigendecomposition.
double pn_diag(const SpectralData& sd, std::size_t k);
// p_{N+1} from a Jordan decomposition.
double pn_jordan(const SpectralData& sd, std::size_t N);

struct DiagConstants {
  double C = 0.0;
  double factor = 0.0;  // (n - aP) * C
};
DiagConstants diag_constants(const SpectralData& sd);

struct JordanConstants {
  double C = 0.0;
  std::size_t R = 1;  // largest block
  std::size_t r = 1;  // largest block for an eigenvalue other than 0 and 1
};
JordanConstants jordan_constants(const SpectralData& sd);

// Curves over a time grid; chains must have uniform rates, t is rescaled by
// the common rate.
std::vector<double> diag_bound(const Ctmc& m, double delta, const std::vector<double>& grid,
                               double tol = 1e-9);
std::vector<double> diag_bound(const SpectralData& sd, double rate, double delta,
                               const std::vector<double>& grid, double tol = 1e-9);
std::vector<double> jordan_bound(const Ctmc& m, double delta, const std::vector<double>& grid,
                                 double tol = 1e-9);
std::vector<double> jordan_bound(const Ctmc& m, const SpectralData& sd, double delta,
                                 const std::vector<double>& grid, double tol = 1e-9);

bool is_acyclic(const Ctmc& m);
double acyclic_exact(const Ctmc& m, double delta, double t);

struct CombinedBound {
  std::vector<double> erlang;
  std::vector<double> spectral;  // empty when no spectral branch applies
  std::string spectral_kind;     // "diag", "jordan", "acyclic" or ""
  std::vector<double> combined;
  std::vector<std::string> warnings;
};

CombinedBound combined_bound(const Ctmc& m, double delta, const std::vector<double>& grid,
                             double tol = 1e-9, const SpectralOptions& opts = {});

// Bound on |Pr^M - Pr^N| for M ~(eps, delta) N through the split
// construction: the eps-part via uniformization, the delta-part via the
// combined bound on the slower of the two split chains.
std::vector<double> triangle_bound_eps_delta(const Ctmc& m, const Ctmc& n, double eps, double delta,
                                             const std::vector<double>& grid, double tol = 1e-9);

}  // namespace epsbisim
