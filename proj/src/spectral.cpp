#include "epsbisim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace epsbisim {

namespace {

struct Cluster {
  Complex value;
  std::vector<std::size_t> members;  // indices into the raw eigenvalue list
};

std::vector<Cluster> cluster_eigenvalues(const Eigen::VectorXcd& vals, double tol) {
  const std::size_t n = static_cast<std::size_t>(vals.size());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double scale = std::max(1.0, std::max(std::abs(vals(i)), std::abs(vals(j))));
      if (std::abs(vals(i) - vals(j)) < tol * scale) parent[find(i)] = find(j);
    }
  }
  std::vector<Cluster> out;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(out.size());
      out.push_back({});
    }
    out[slot[root]].members.push_back(i);
  }
  for (auto& c : out) {
    Complex sum = 0.0;
    for (auto i : c.members) sum += vals(i);
    c.value = sum / static_cast<double>(c.members.size());
    if (std::abs(c.value - 1.0) <= tol) c.value = 1.0;
    if (std::abs(c.value) <= tol) c.value = 0.0;
  }
  std::stable_sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    return std::arg(a.value) < std::arg(b.value);
  });
  return out;
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double reconstruction_residual(const CMatrix& S, const CMatrix& J, const CMatrix& S_inv, const Matrix& P) {
  return max_abs(S * J * S_inv - P.cast<Complex>());
}

void check_modulus_one(const Eigen::VectorXcd& vals, double tol) {
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    const Complex v = vals(i);
    if (std::abs(std::abs(v) - 1.0) <= tol && std::abs(v - 1.0) > tol) {
      throw Error(ErrorKind::ModulusOneNotOne, "eigenvalue (" + std::to_string(v.real()) + ", " +
                                                   std::to_string(v.imag()) + ") has modulus 1");
    }
  }
}

void fill_summary(SpectralData& sd) {
  sd.aP = 0;
  sd.z = 0;
  sd.lambda = 0.0;
  bool found = false;
  for (const auto& b : sd.blocks) {
    if (sd.is_one(b.eigenvalue)) {
      sd.aP += b.size;
    } else {
      if (sd.is_zero(b.eigenvalue)) ++sd.z;
      if (!found) {
        sd.lambda = b.eigenvalue;
        found = true;
      }
    }
  }
}

// Orthonormal basis maintained by Gram-Schmidt with one reorthogonalization.
class Span {
 public:
  explicit Span(Eigen::Index n) : n_(n) {}

  Eigen::VectorXcd residual(const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd r = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis_) r -= q * q.dot(r);
    }
    return r;
  }

  bool add(const Eigen::VectorXcd& v, double tol) {
    Eigen::VectorXcd r = residual(v);
    const double nr = r.norm();
    if (nr <= tol * std::max(1.0, v.norm())) return false;
    basis_.push_back(r / nr);
    return true;
  }

 private:
  Eigen::Index n_;
  std::vector<Eigen::VectorXcd> basis_;
};

// Columns spanning ker(A), rank decided relative to the largest singular value.
CMatrix null_space(const CMatrix& A, double tol) {
  Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thr = tol * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > thr) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

struct Chain {
  std::size_t length;
  Eigen::VectorXcd top;
};

bool jordan_chains(const Matrix& P, const Cluster& c, double null_tol, std::vector<Chain>& chains) {
  const Eigen::Index n = P.rows();
  const std::size_t mult = c.members.size();
  const CMatrix A = P.cast<Complex>() - c.value * CMatrix::Identity(n, n);
  std::vector<CMatrix> kernels{CMatrix(n, 0)};
  std::vector<std::size_t> dims{0};
  CMatrix Ak = CMatrix::Identity(n, n);
  while (dims.back() < mult) {
    Ak = Ak * A;
    kernels.push_back(null_space(Ak, null_tol));
    const std::size_t d = static_cast<std::size_t>(kernels.back().cols());
    if (d <= dims.back() || d > mult) return false;
    dims.push_back(d);
  }
  const std::size_t kmax = dims.size() - 1;
  // blocks of size >= k: dims[k] - dims[k-1]
  auto at_least = [&](std::size_t k) { return k > kmax ? 0 : dims[k] - dims[k - 1]; };
  std::vector<Chain> mine;
  for (std::size_t k = kmax; k >= 1; --k) {
    std::size_t need = at_least(k) - at_least(k + 1);
    if (need == 0) continue;
    Span span(n);
    for (Eigen::Index j = 0; j < kernels[k - 1].cols(); ++j) span.add(kernels[k - 1].col(j), 1e-10);
    for (const auto& ch : mine) {
      Eigen::VectorXcd v = ch.top;
      for (std::size_t i = k; i < ch.length; ++i) v = A * v;
      span.add(v, 1e-10);
    }
    const CMatrix& Nk = kernels[k];
    for (Eigen::Index j = 0; j < Nk.cols() && need > 0; ++j) {
      Eigen::VectorXcd r = span.residual(Nk.col(j));
      if (r.norm() <= 1e-6) continue;
      r /= r.norm();
      span.add(r, 1e-10);
      mine.push_back({k, r});
      --need;
    }
    if (need > 0) return false;
  }
  std::stable_sort(mine.begin(), mine.end(), [](const Chain& a, const Chain& b) { return a.length > b.length; });
  for (auto& ch : mine) chains.push_back(std::move(ch));
  return true;
}

bool try_jordan(const Matrix& P, double cluster_tol, double null_tol, double residual_tol,
                SpectralData& sd) {
  const Eigen::Index n = P.rows();
  Eigen::EigenSolver<Matrix> es(P, false);
  if (es.info() != Eigen::Success) return false;
  const auto clusters = cluster_eigenvalues(es.eigenvalues(), cluster_tol);
  CMatrix S(n, n);
  std::vector<JordanBlock> blocks;
  std::vector<Complex> eig;
  Eigen::Index col = 0;
  for (const auto& c : clusters) {
    std::vector<Chain> chains;
    if (!jordan_chains(P, c, null_tol, chains)) return false;
    const CMatrix A = P.cast<Complex>() - c.value * CMatrix::Identity(n, n);
    for (const auto& ch : chains) {
      std::vector<Eigen::VectorXcd> vecs(ch.length);
      vecs[ch.length - 1] = ch.top;
      for (std::size_t i = ch.length - 1; i > 0; --i) vecs[i - 1] = A * vecs[i];
      double scale = 0.0;
      for (const auto& v : vecs) scale = std::max(scale, v.norm());
      if (col + static_cast<Eigen::Index>(ch.length) > n) return false;
      blocks.push_back({c.value, ch.length, static_cast<std::size_t>(col)});
      for (const auto& v : vecs) {
        S.col(col++) = v / scale;
        eig.push_back(c.value);
      }
    }
  }
  if (col != n) return false;
  sd.kind = DecompositionKind::Jordan;
  sd.S = S;
  sd.blocks = blocks;
  sd.eigenvalues = eig;
  Eigen::JacobiSVD<CMatrix> svd(S);
  const auto& sv = svd.singularValues();
  sd.condition = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  sd.S_inv = S.inverse();
  sd.cluster_tol = cluster_tol;
  sd.residual = reconstruction_residual(sd.S, sd.jordan_matrix(), sd.S_inv, P);
  return std::isfinite(sd.residual) && sd.residual <= residual_tol;
}

double binomial(std::size_t N, std::size_t d) {
  if (d > N) return 0.0;
  double b = 1.0;
  for (std::size_t i = 1; i <= d; ++i) b = b * static_cast<double>(N - d + i) / static_cast<double>(i);
  return b;
}

Complex ipow(Complex x, std::size_t k) {
  Complex r = 1.0;
  Complex b = x;
  while (k) {
    if (k & 1U) r *= b;
    b *= b;
    k >>= 1U;
  }
  return r;
}

// Entry (i, i + d) of J^N for a Jordan block with eigenvalue lam.
Complex block_power(Complex lam, std::size_t N, std::size_t d) {
  if (d > N) return 0.0;
  return binomial(N, d) * ipow(lam, N - d);
}

}  // namespace

CMatrix SpectralData::jordan_matrix() const {
  const Eigen::Index n = static_cast<Eigen::Index>(size());
  CMatrix J = CMatrix::Zero(n, n);
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.size; ++i) {
      const Eigen::Index c = static_cast<Eigen::Index>(b.offset + i);
      J(c, c) = b.eigenvalue;
      if (i + 1 < b.size) J(c, c + 1) = 1.0;
    }
  }
  return J;
}

SpectralData decompose(const Matrix& P, std::size_t initial, std::size_t goal, const SpectralOptions& opts) {
  const Eigen::Index n = P.rows();
  if (n == 0 || P.cols() != n) throw Error(ErrorKind::InvalidArgument, "matrix must be square and nonempty");
  if (initial >= static_cast<std::size_t>(n) || goal >= static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::InvalidState, "initial or goal index out of range");
  }
  Eigen::EigenSolver<Matrix> es(P, true);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::DecompositionUnstable, "eigenvalue iteration failed");
  const Eigen::VectorXcd vals = es.eigenvalues();
  check_modulus_one(vals, opts.cluster_tol);

  SpectralData sd;
  sd.initial = initial;
  sd.goal = goal;
  sd.cluster_tol = opts.cluster_tol;

  const auto clusters = cluster_eigenvalues(vals, opts.cluster_tol);
  const CMatrix V = es.eigenvectors();
  CMatrix S(n, n);
  Eigen::Index col = 0;
  for (const auto& c : clusters) {
    for (auto i : c.members) {
      S.col(col) = V.col(static_cast<Eigen::Index>(i));
      sd.eigenvalues.push_back(vals(static_cast<Eigen::Index>(i)));
      sd.blocks.push_back({vals(static_cast<Eigen::Index>(i)), 1, static_cast<std::size_t>(col)});
      ++col;
    }
  }
  Eigen::JacobiSVD<CMatrix> svd(S);
  const auto& sv = svd.singularValues();
  sd.condition = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  if (sd.condition <= opts.cond_max) {
    sd.kind = DecompositionKind::Diagonalizable;
    sd.S = S;
    sd.S_inv = S.inverse();
    sd.residual = reconstruction_residual(sd.S, sd.jordan_matrix(), sd.S_inv, P);
    if (sd.residual <= opts.residual_tol) {
      fill_summary(sd);
      return sd;
    }
  }
  if (static_cast<std::size_t>(n) > opts.jordan_max_n) {
    throw Error(ErrorKind::DecompositionUnstable,
                "eigenvector basis is ill-conditioned and the chain is too large for a Jordan form");
  }
  // Defective eigenvalues split into clusters of width ~ eps^(1/k); widen the
  // clustering if the first attempt does not reconstruct P.
  for (double ctol : {opts.cluster_tol, opts.cluster_tol * 1e2, opts.cluster_tol * 1e4}) {
    SpectralData jd;
    jd.initial = initial;
    jd.goal = goal;
    if (try_jordan(P, ctol, 1e-8, opts.residual_tol, jd)) {
      fill_summary(jd);
      return jd;
    }
  }
  throw Error(ErrorKind::DecompositionUnstable, "no decomposition reconstructs the matrix within tolerance");
}

SpectralData decompose(const Dtmc& d, const SpectralOptions& opts) {
  if (!d.goal) throw Error(ErrorKind::NoGoalState, "chain has no goal state");
  return decompose(d.P, d.initial, *d.goal, opts);
}

SpectralData as_jordan(const SpectralData& sd) {
  SpectralData out = sd;
  out.kind = DecompositionKind::Jordan;
  return out;
}

double pn_diag(const SpectralData& sd, std::size_t k) {
  if (sd.kind != DecompositionKind::Diagonalizable) {
    throw Error(ErrorKind::WrongKind, "decomposition is not diagonal");
  }
  Complex sum = 0.0;
  const auto i = static_cast<Eigen::Index>(sd.initial);
  const auto g = static_cast<Eigen::Index>(sd.goal);
  for (std::size_t j = sd.aP; j < sd.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    const Complex lam = sd.eigenvalues[j];
    sum += sd.S(i, c) * sd.S_inv(c, g) * (lam - 1.0) * ipow(lam, k);
  }
  return sum.real();
}

double pn_jordan(const SpectralData& sd, std::size_t N) {
  if (sd.kind != DecompositionKind::Jordan) throw Error(ErrorKind::WrongKind, "decomposition is not a Jordan form");
  Complex sum = 0.0;
  const auto i = static_cast<Eigen::Index>(sd.initial);
  const auto g = static_cast<Eigen::Index>(sd.goal);
  // Eigenvalue-0 blocks contribute only while N is below their size; they are
  // handled by the same entrywise formula since 0^0 = 1 here.
  for (const auto& b : sd.blocks) {
    if (sd.is_one(b.eigenvalue)) continue;
    for (std::size_t j = 0; j < b.size; ++j) {
      for (std::size_t k = 0; k <= j; ++k) {
        const Complex w = block_power(b.eigenvalue, N + 1, j - k) - block_power(b.eigenvalue, N, j - k);
        if (w == Complex(0.0)) continue;
        sum += sd.S(i, static_cast<Eigen::Index>(b.offset + k)) * sd.S_inv(static_cast<Eigen::Index>(b.offset + j), g) * w;
      }
    }
  }
  return sum.real();
}

DiagConstants diag_constants(const SpectralData& sd) {
  if (sd.kind != DecompositionKind::Diagonalizable) {
    throw Error(ErrorKind::WrongKind, "decomposition is not diagonal");
  }
  DiagConstants dc;
  const auto i = static_cast<Eigen::Index>(sd.initial);
  const auto g = static_cast<Eigen::Index>(sd.goal);
  for (std::size_t j = sd.aP; j < sd.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    dc.C = std::max(dc.C, std::abs(sd.S(i, c) * sd.S_inv(c, g) * (sd.eigenvalues[j] - 1.0)));
  }
  dc.factor = static_cast<double>(sd.size() - sd.aP) * dc.C;
  return dc;
}

JordanConstants jordan_constants(const SpectralData& sd) {
  JordanConstants jc;
  const auto i = static_cast<Eigen::Index>(sd.initial);
  const auto g = static_cast<Eigen::Index>(sd.goal);
  std::size_t r = 0;
  for (const auto& b : sd.blocks) {
    jc.R = std::max(jc.R, b.size);
    if (sd.is_one(b.eigenvalue) || sd.is_zero(b.eigenvalue)) continue;
    r = std::max(r, b.size);
    const double star = std::max(std::abs(b.eigenvalue), std::abs(1.0 - b.eigenvalue));
    for (std::size_t j = 0; j < b.size; ++j) {
      for (std::size_t k = 0; k <= j; ++k) {
        jc.C += std::abs(sd.S(i, static_cast<Eigen::Index>(b.offset + k)) *
                         sd.S_inv(static_cast<Eigen::Index>(b.offset + j), g)) *
                star;
      }
    }
  }
  jc.r = std::max<std::size_t>(r, 1);
  return jc;
}

}  // namespace epsbisim
