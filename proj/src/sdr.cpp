#include "irsbf/sdr.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>
#include <stdexcept>

namespace irsbf::sdr {

MatrixXcd Problem::xi(int k) const { return alpha_bar.at(k) * alpha_bar.at(k).adjoint(); }

double Problem::value(const MatrixXcd& psi) const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& a : alpha_bar) v = std::min(v, a.dot(psi * a).real());
  return v;
}

double Problem::min_snr(const VectorXcd& phi) const {
  const int n = dimension();
  if (phi.size() != n - 1) throw std::invalid_argument("min_snr: phi length mismatch");
  VectorXcd phi_bar(n);
  phi_bar.head(n - 1) = phi;
  phi_bar[n - 1] = 1.0;
  double v = std::numeric_limits<double>::infinity();
  for (const auto& a : alpha_bar) v = std::min(v, std::norm(a.dot(phi_bar)));
  return v;
}

Problem build(const multicast::Affine& aff) {
  const int N = aff.elements();
  Problem p;
  p.alpha_bar.reserve(aff.users());
  for (int k = 0; k < aff.users(); ++k) {
    VectorXcd a(N + 1);
    a.head(N) = aff.alpha.col(k);
    a[N] = std::conj(aff.beta[k]);
    p.alpha_bar.push_back(std::move(a));
  }
  return p;
}

MatrixXcd psd_project(const MatrixXcd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("psd_project: matrix must be square");
  const MatrixXcd sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sym);
  const VectorXd d = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// Diagonal rescaling of a PSD matrix into the feasible set. Returns false if
// a required diagonal entry is not positive.
bool rescale_feasible(const MatrixXcd& psd, Diagonal diagonal, MatrixXcd& out) {
  const auto n = psd.rows();
  VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = psd(i, i).real();
    const bool exact = i == n - 1 || diagonal == Diagonal::equal_one;
    if (exact) {
      if (!(d > 0.0)) return false;
      s[i] = 1.0 / std::sqrt(d);
    } else {
      s[i] = d > 1.0 ? 1.0 / std::sqrt(d) : 1.0;
    }
  }
  out = s.asDiagonal() * psd * s.asDiagonal();
  out = 0.5 * (out + out.adjoint()).eval();
  for (Eigen::Index i = 0; i < n; ++i) out(i, i) = out(i, i).real();
  return true;
}

// Standard form  min <C, X>  s.t.  A(X) = b,  X in cone, with
//   X = (Psi, t, s, r),  cone = Hermitian PSD x R_+ x R_+^K x R_+^R,
//   row k:      w_k (Tr(Xi_k Psi) - t) - s_k = 0,  w_k = 1 / |alpha_bar_k|^2
//   row K + i:  Psi_ii + r_i = 1   (r_i present for inequality rows only)
//   C = -e_t.
struct Block {
  MatrixXcd psi;
  double t = 0.0;
  VectorXd s, r;
};

class StandardForm {
 public:
  StandardForm(const std::vector<VectorXcd>& alpha_bar, Diagonal diagonal)
      : K_(static_cast<int>(alpha_bar.size())), n_(static_cast<int>(alpha_bar.front().size())),
        R_(diagonal == Diagonal::at_most_one ? n_ - 1 : 0), m_(K_ + n_), w_(K_) {
    for (int k = 0; k < K_; ++k) {
      w_[k] = 1.0 / alpha_bar[k].squaredNorm();
      a_.push_back(alpha_bar[k] * std::sqrt(w_[k]));
    }
    MatrixXd gram = MatrixXd::Zero(m_, m_);
    for (int k = 0; k < K_; ++k) {
      for (int j = 0; j < K_; ++j) gram(k, j) = std::norm(a_[k].dot(a_[j])) + w_[k] * w_[j];
      gram(k, k) += 1.0;
      for (int i = 0; i < n_; ++i) {
        gram(k, K_ + i) = std::norm(a_[k][i]);
        gram(K_ + i, k) = gram(k, K_ + i);
      }
    }
    for (int i = 0; i < n_; ++i) gram(K_ + i, K_ + i) = i < R_ ? 2.0 : 1.0;
    gram_.compute(gram);
    b_ = VectorXd::Zero(m_);
    b_.tail(n_).setOnes();
  }

  int rows() const { return m_; }
  const VectorXd& b() const { return b_; }
  Block zero() const { return {MatrixXcd::Zero(n_, n_), 0.0, VectorXd::Zero(K_), VectorXd::Zero(R_)}; }

  VectorXd apply(const Block& x) const {
    VectorXd out(m_);
    for (int k = 0; k < K_; ++k) out[k] = a_[k].dot(x.psi * a_[k]).real() - w_[k] * x.t - x.s[k];
    for (int i = 0; i < n_; ++i) out[K_ + i] = x.psi(i, i).real() + (i < R_ ? x.r[i] : 0.0);
    return out;
  }

  Block adjoint(const VectorXd& y) const {
    Block out = zero();
    for (int k = 0; k < K_; ++k)
      out.psi.selfadjointView<Eigen::Lower>().rankUpdate(a_[k], y[k]);
    out.psi = out.psi.selfadjointView<Eigen::Lower>();
    for (int i = 0; i < n_; ++i) out.psi(i, i) += y[K_ + i];
    out.t = -w_.dot(y.head(K_));
    out.s = -y.head(K_);
    out.r = y.segment(K_, R_);
    return out;
  }

  VectorXd solve_gram(const VectorXd& rhs) const { return gram_.solve(rhs); }

  /// Upper bound on t from multipliers y, after shifting them into dual feasibility.
  double dual_bound(const VectorXd& y) const {
    const VectorXd lambda = y.head(K_).cwiseMax(0.0);
    const double lambda_sum = w_.dot(lambda);
    if (!(lambda_sum > 0.0)) return std::numeric_limits<double>::infinity();
    VectorXd nu = -y.tail(n_);
    for (int i = 0; i < R_; ++i) nu[i] = std::max(nu[i], 0.0);
    MatrixXcd A = MatrixXcd::Zero(n_, n_);
    for (int k = 0; k < K_; ++k)
      if (lambda[k] > 0.0) A.selfadjointView<Eigen::Lower>().rankUpdate(a_[k], lambda[k]);
    A = A.selfadjointView<Eigen::Lower>();
    for (int i = 0; i < n_; ++i) A(i, i) -= nu[i];
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(A, Eigen::EigenvaluesOnly);
    const double shift = std::max(0.0, es.eigenvalues()[n_ - 1]);
    return (nu.sum() + n_ * shift) / lambda_sum;
  }

 private:
  std::vector<VectorXcd> a_;
  int K_, n_, R_, m_;
  VectorXd w_;
  Eigen::LLT<MatrixXd> gram_;
  VectorXd b_;
};

double block_norm2(const Block& x) {
  return x.psi.squaredNorm() + x.t * x.t + x.s.squaredNorm() + x.r.squaredNorm();
}

}  // namespace

Solution solve(const Problem& prob, const Options& opts) {
  if (prob.users() < 1) throw std::invalid_argument("sdr: needs at least one user");
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("sdr: tolerance must be positive");
  if (opts.max_iterations < 1) throw std::invalid_argument("sdr: max_iterations must be >= 1");
  if (opts.check_every < 1) throw std::invalid_argument("sdr: check_every must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const int n = prob.dimension();
  const int K = prob.users();

  Solution sol;
  double scale = 0.0;
  for (const auto& a : prob.alpha_bar) {
    if (a.squaredNorm() == 0.0) {
      // Tr(Psi Xi_k) == 0 for every Psi.
      sol.psi = MatrixXcd::Zero(n, n);
      sol.psi(n - 1, n - 1) = 1.0;
      sol.converged = true;
      sol.rank_one = true;
      return sol;
    }
    scale = std::max(scale, a.squaredNorm());
  }
  if (n == 1) {
    sol.psi = MatrixXcd::Ones(1, 1);
    sol.gamma = sol.upper_bound = prob.value(sol.psi);
    sol.converged = true;
    sol.rank_one = true;
    return sol;
  }

  std::vector<VectorXcd> a;
  a.reserve(K);
  for (const auto& ab : prob.alpha_bar) a.push_back(ab / std::sqrt(scale));
  const StandardForm form(a, opts.diagonal);

  // Identity is feasible in both diagonal modes.
  sol.psi = MatrixXcd::Identity(n, n);
  double lo = prob.value(sol.psi);
  double hi = std::numeric_limits<double>::infinity();

  Block X = form.zero();
  Block S = form.zero();
  VectorXd y = VectorXd::Zero(form.rows());
  double mu = 1.0;
  int last_vote = 0, streak = 0;
  MatrixXcd candidate;
  const double b_norm = 1.0 + form.b().norm();

  for (int it = 1; it <= opts.max_iterations; ++it) {
    sol.iterations = it;
    Block sc = S;
    sc.t += 1.0;  // S - C
    y = -form.solve_gram(mu * (form.apply(X) - form.b()) + form.apply(sc));

    Block V = form.adjoint(y);
    V.psi = -V.psi - mu * X.psi;
    V.t = -1.0 - V.t - mu * X.t;
    V.s = -V.s - mu * X.s;
    V.r = -V.r - mu * X.r;

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (V.psi + V.psi.adjoint()));
    const auto& Q = es.eigenvectors();
    const VectorXd& d = es.eigenvalues();
    S.psi = Q * d.cwiseMax(0.0).asDiagonal() * Q.adjoint();
    X.psi = Q * ((-d).cwiseMax(0.0) / mu).asDiagonal() * Q.adjoint();
    S.t = std::max(V.t, 0.0);
    X.t = std::max(-V.t, 0.0) / mu;
    S.s = V.s.cwiseMax(0.0);
    X.s = (-V.s).cwiseMax(0.0) / mu;
    S.r = V.r.cwiseMax(0.0);
    X.r = (-V.r).cwiseMax(0.0) / mu;

    const bool check = it % opts.check_every == 0 || it == opts.max_iterations;
    if (check || it % 20 == 0) {
      const double pinf = (form.apply(X) - form.b()).norm() / b_norm;
      Block dres = form.adjoint(y);
      dres.psi += S.psi;
      dres.t += S.t + 1.0;
      dres.s += S.s;
      dres.r += S.r;
      const double dinf = std::sqrt(block_norm2(dres)) / 2.0;
      if (it % 20 == 0) {
        const int vote = pinf > 10.0 * dinf ? 1 : dinf > 10.0 * pinf ? -1 : 0;
        streak = vote != 0 && vote == last_vote ? streak + 1 : 1;
        last_vote = vote;
        if (vote != 0 && streak >= 5) {
          mu = std::clamp(vote > 0 ? mu * 2.0 : mu * 0.5, 1e-6, 1e6);
          streak = 0;
        }
      }
    }
    if (check) {
      if (rescale_feasible(X.psi, opts.diagonal, candidate)) {
        const double v = prob.value(candidate);
        if (v > lo) {
          lo = v;
          sol.psi = candidate;
        }
      }
      hi = std::min(hi, scale * form.dual_bound(y));
      if (hi - lo <= opts.tolerance * hi) {
        sol.converged = true;
        break;
      }
    }
  }

  sol.gamma = lo;
  sol.upper_bound = hi;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(sol.psi, Eigen::EigenvaluesOnly);
  const VectorXd ev = es.eigenvalues();
  sol.rank_one = ev[n - 2] <= 1e-6 * ev[n - 1];
  sol.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

ReflectCoeffs recover_scheme1(const MatrixXcd& psi, const Problem& prob, int trials,
                              std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("scheme1: trials must be >= 1");
  const auto n = psi.rows();
  if (n != prob.dimension()) throw std::invalid_argument("scheme1: dimension mismatch");
  const auto N = n - 1;
  if (!(psi(N, N).real() > 0.0))
    throw std::domain_error("scheme1: last diagonal entry of psi must be positive");

  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (psi + psi.adjoint()));
  const double floor = 1e-12 * std::max(es.eigenvalues().maxCoeff(), 0.0);
  const VectorXd ev = (es.eigenvalues().array() > floor).select(es.eigenvalues(), 0.0);
  const MatrixXcd L = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  VectorXcd w(n);
  VectorXcd best;
  double best_value = -1.0;
  for (int t = 0; t < trials; ++t) {
    VectorXcd xi;
    do {
      for (auto& e : w) {
        const double re = normal(rng);
        const double im = normal(rng);
        e = Complex(re, im);
      }
      xi = L * w;
    } while (xi[N] == Complex{});
    const VectorXcd phi = project_unit_modulus(VectorXcd(xi.head(N) / xi[N]));
    const double v = prob.min_snr(phi);
    if (v > best_value) {
      best_value = v;
      best = phi;
    }
  }
  return ReflectCoeffs(best, Regime::circle);
}

ReflectCoeffs recover_scheme2(const MatrixXcd& psi) {
  const auto n = psi.rows();
  if (n < 1 || psi.cols() != n) throw std::invalid_argument("scheme2: matrix must be square");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (psi + psi.adjoint()));
  const VectorXd& ev = es.eigenvalues();
  const double top = ev[n - 1];
  if (!(top > 0.0)) throw std::domain_error("scheme2: matrix must be nonzero PSD");

  VectorXcd v = VectorXcd::Zero(n);
  for (Eigen::Index i = n - 1; i >= 0 && ev[i] >= top * (1.0 - 1e-12); --i) {
    const auto col = es.eigenvectors().col(i);
    v += col * std::conj(col[n - 1]);  // projection of e_{N+1} onto the top eigenspace
  }
  if (!(std::abs(v[n - 1]) > 1e-14 * v.norm())) throw std::domain_error("degenerate principal eigenvector");
  v *= std::abs(v[n - 1]) / v[n - 1];
  return ReflectCoeffs(project_unit_modulus(VectorXcd(v.head(n - 1) / v[n - 1].real())),
                       Regime::circle);
}

}  // namespace irsbf::sdr
