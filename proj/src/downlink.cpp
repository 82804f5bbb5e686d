#include "irsbf/downlink.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace irsbf::downlink {

Complex Affine::signal_amplitude(int k, const VectorXcd& phi) const {
  Complex a = beta(k, k);
  if (elements() > 0) a += alpha[k].col(k).dot(phi);
  return a;
}

double Affine::interference(int k, const VectorXcd& phi) const {
  if (beta_hat[k].size() == 0) return 0.0;
  VectorXcd r = beta_hat[k];
  if (elements() > 0) r.noalias() += lambda[k].adjoint() * phi;
  return r.squaredNorm();
}

double Affine::sinr(int k, const VectorXcd& phi) const {
  return std::norm(signal_amplitude(k, phi)) / (1.0 + interference(k, phi));
}

VectorXd Affine::sinr(const VectorXcd& phi) const {
  if (phi.size() != elements()) throw std::invalid_argument("affine: phi length mismatch");
  VectorXd out(users());
  for (int k = 0; k < users(); ++k) out[k] = sinr(k, phi);
  return out;
}

double Affine::min_sinr(const VectorXcd& phi) const { return sinr(phi).minCoeff(); }

double Affine::quad_over_lin(int k, const VectorXcd& phi, double gamma) const {
  return std::norm(signal_amplitude(k, phi)) / gamma;
}

Affine precompute_affine(const ChannelSet& cs, const TransmitBeams& beams) {
  cs.validate();
  const int N = cs.elements();
  const int K = cs.users();
  const int M = cs.antennas();
  if (beams.mode != BeamMode::downlink || beams.vectors.size() != static_cast<size_t>(K))
    throw std::invalid_argument("affine: expected one downlink beam per user");
  for (const auto& b : beams.vectors)
    if (b.size() != M) throw std::invalid_argument("affine: beam length mismatch");

  MatrixXcd B(M, K);
  for (int j = 0; j < K; ++j) B.col(j) = beams.vectors[j];
  const MatrixXcd GB = N > 0 ? MatrixXcd(cs.G * B) : MatrixXcd(0, K);

  Affine aff;
  aff.alpha.resize(K);
  aff.beta.resize(K, K);
  aff.lambda.resize(K);
  aff.beta_hat.resize(K);
  for (int k = 0; k < K; ++k) {
    const double inv_sigma = 1.0 / std::sqrt(cs.noise[k]);
    aff.alpha[k] = (cs.h[k].conjugate().asDiagonal() * GB) * inv_sigma;
    for (int j = 0; j < K; ++j) aff.beta(k, j) = B.col(j).dot(cs.f[k]) * inv_sigma;

    aff.lambda[k].resize(N, K - 1);
    aff.beta_hat[k].resize(K - 1);
    for (int j = 0, col = 0; j < K; ++j) {
      if (j == k) continue;
      aff.lambda[k].col(col) = aff.alpha[k].col(j);
      aff.beta_hat[k][col] = aff.beta(k, j);
      ++col;
    }
  }
  return aff;
}

double Linearization::constraint(int k, const VectorXcd& phi, double gamma) const {
  const VectorXcd proj = T[k].adjoint() * phi;
  const double interference =
      beta_hat[k].size() > 0 ? (proj.tail(beta_hat[k].size()) + beta_hat[k]).squaredNorm() : 0.0;
  return 2.0 * proj[0].real() + s_hat[k] - q[k] * gamma - interference;
}

double Linearization::max_gamma(const VectorXcd& phi) const {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < users(); ++k) {
    const double slack = constraint(k, phi, 0.0);
    double g;
    if (q[k] > 0.0)
      g = slack / q[k];
    else
      g = slack >= 0.0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
    best = std::min(best, g);
  }
  return best;
}

Linearization linearize_dl(const Affine& aff, const VectorXcd& phi_e, double gamma_e) {
  if (!(gamma_e > 0.0)) throw std::domain_error("infeasible expansion point");
  const int N = aff.elements();
  const int K = aff.users();
  if (phi_e.size() != N) throw std::invalid_argument("linearize: expansion point length mismatch");

  Linearization lin;
  lin.t_hat.resize(N, K);
  lin.s_hat.resize(K);
  lin.q.resize(K);
  lin.T.resize(K);
  lin.beta_hat = aff.beta_hat;
  lin.expansion = phi_e;
  lin.expansion_gamma = gamma_e;

  for (int k = 0; k < K; ++k) {
    const auto a_kk = aff.alpha[k].col(k);
    const Complex p = N > 0 ? a_kk.dot(phi_e) : Complex{};  // alpha_kk^H phi_e
    const Complex amp = p + aff.beta(k, k);
    lin.t_hat.col(k) = (amp / gamma_e) * a_kk;
    // (phi_e^H alpha_kk + beta_kk^*) alpha_kk^H phi_e = conj(amp) p
    lin.s_hat[k] = 2.0 * std::norm(amp) / gamma_e - 2.0 * (std::conj(amp) * p).real() / gamma_e - 1.0;
    lin.q[k] = std::norm(amp) / (gamma_e * gamma_e);

    lin.T[k].resize(N, K);
    lin.T[k].col(0) = lin.t_hat.col(k);
    if (K > 1) lin.T[k].rightCols(K - 1) = aff.lambda[k];
  }
  return lin;
}

double g_hat(const CubicData& d, double mu) {
  const double onep = 1.0 + mu;
  return 2.0 * (d.re_tau11 + mu) + d.s_hat - d.q * (d.tau2 - 0.5 * mu * d.q) - d.c / (onep * onep);
}

double g_hat_derivative(const CubicData& d, double mu) {
  const double onep = 1.0 + mu;
  return 2.0 + 0.5 * d.q * d.q + 2.0 * d.c / (onep * onep * onep);
}

double cubic_root(const CubicData& d) {
  constexpr double kResidual = 1e-12;
  constexpr int kMaxIter = 200;
  if (!(g_hat(d, 0.0) < 0.0)) throw std::invalid_argument("cubic_root: requires g_hat(0) < 0");

  double lo = 0.0;
  double hi = 1.0;
  for (int doublings = 0; g_hat(d, hi) <= 0.0; ++doublings) {
    if (doublings > 1100) throw std::runtime_error("cubic_root: no upper bracket");
    lo = hi;
    hi *= 2.0;
  }

  // g_hat is increasing and concave, so Newton from the left never overshoots;
  // the bracket still guards against rounding.
  double mu = lo;
  double best_mu = lo;
  double best_abs = std::abs(g_hat(d, lo));
  for (int it = 0; it < kMaxIter; ++it) {
    const double g = g_hat(d, mu);
    if (std::abs(g) < best_abs) {
      best_abs = std::abs(g);
      best_mu = mu;
    }
    if (std::abs(g) <= kResidual && mu > 0.0) return mu;
    if (g < 0.0)
      lo = std::max(lo, mu);
    else
      hi = std::min(hi, mu);
    double next = mu - g / g_hat_derivative(d, mu);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == mu || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      // Bracket collapsed to adjacent doubles: nothing closer is representable.
      const double g_hi = std::abs(g_hat(d, hi));
      if (g_hi < best_abs) return hi;
      if (best_mu > 0.0) return best_mu;
      return hi;
    }
    mu = next;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "cubic_root: no convergence (re_tau11=%.17g s_hat=%.17g q=%.17g tau2=%.17g "
                "c=%.17g bracket=[%.17g, %.17g])",
                d.re_tau11, d.s_hat, d.q, d.tau2, d.c, lo, hi);
  throw std::runtime_error(buf);
}

XzPoint update_xz_dl(const VectorXcd& tau1, double tau2, double s_hat, double q,
                     const VectorXcd& beta_hat) {
  if (tau1.size() != beta_hat.size() + 1)
    throw std::invalid_argument("update_xz_dl: tau1 must have one more entry than beta_hat");
  if (q < 0.0) throw std::invalid_argument("update_xz_dl: q must be >= 0");
  const Eigen::Index rest = beta_hat.size();
  const double c = rest > 0 ? (tau1.tail(rest) + beta_hat).squaredNorm() : 0.0;
  const CubicData d{tau1[0].real(), s_hat, q, tau2, c};
  if (g_hat(d, 0.0) >= 0.0) return {tau1, tau2, 0.0};

  const double mu = cubic_root(d);
  XzPoint p{VectorXcd(tau1.size()), tau2 - 0.5 * mu * q, mu};
  p.x[0] = tau1[0] + mu;
  if (rest > 0) p.x.tail(rest) = (tau1.tail(rest) - mu * beta_hat) / (1.0 + mu);
  return p;
}

namespace {

class PhiSolver {
 public:
  explicit PhiSolver(const std::vector<MatrixXcd>& T) : T_(T) {
    const auto N = T.empty() ? 0 : T.front().rows();
    MatrixXcd A = MatrixXcd::Identity(N, N);
    for (const auto& Tk : T) A.selfadjointView<Eigen::Lower>().rankUpdate(Tk);
    llt_.compute(A);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("phi update: factorization failed");
  }

  VectorXcd solve(const std::vector<VectorXcd>& tau4, const VectorXcd& tau5) const {
    VectorXcd rhs = tau5;
    for (size_t k = 0; k < T_.size(); ++k) rhs.noalias() += T_[k] * tau4[k];
    return llt_.solve(rhs);
  }

 private:
  const std::vector<MatrixXcd>& T_;
  Eigen::LLT<MatrixXcd> llt_;
};

}  // namespace

VectorXcd update_phi_dl(const std::vector<MatrixXcd>& T, const std::vector<VectorXcd>& tau4,
                        const VectorXcd& tau5) {
  if (T.size() != tau4.size()) throw std::invalid_argument("update_phi_dl: block count mismatch");
  return PhiSolver(T).solve(tau4, tau5);
}

InnerResult solve_inner_dl(const Linearization& lin, const SolverConfig& cfg,
                           const IterationObserver& observer) {
  cfg.validate();
  const int N = lin.elements();
  const int K = lin.users();
  const double rho = cfg.rho;

  InnerResult result;
  result.phi = project_disk(lin.expansion);
  result.gamma = lin.max_gamma(result.phi);
  if (N == 0) {
    result.converged = true;
    return result;
  }

  AdmmState st;
  st.phi = lin.expansion;
  st.gamma = std::isfinite(result.gamma) ? result.gamma : lin.expansion_gamma;
  st.x.resize(K);
  st.u.assign(K, VectorXcd::Zero(K));
  for (int k = 0; k < K; ++k) st.x[k] = lin.T[k].adjoint() * st.phi;
  st.y = st.phi;
  st.z = VectorXd::Constant(K, st.gamma);
  st.v = VectorXcd::Zero(N);
  st.w = VectorXd::Zero(K);

  const PhiSolver solver(lin.T);
  result.factorizations = 1;

  std::vector<VectorXcd> Tphi = st.x;
  std::vector<VectorXcd> tau4(K);
  for (int it = 1; it <= cfg.inner_max_iters; ++it) {
    for (int k = 0; k < K; ++k) {
      const auto p = update_xz_dl(Tphi[k] - st.u[k], st.gamma - st.w[k], lin.s_hat[k], lin.q[k],
                                  lin.beta_hat[k]);
      st.x[k] = p.x;
      st.z[k] = p.z;
    }
    st.y = update_y(st.phi - st.v);

    const VectorXcd phi_prev = st.phi;
    const double gamma_prev = st.gamma;
    for (int k = 0; k < K; ++k) tau4[k] = st.x[k] + st.u[k];
    st.phi = solver.solve(tau4, st.y + st.v);
    st.gamma = update_gamma(st.z + st.w, rho);

    double primal_sq = 0.0;
    double dual_sq = 0.0;
    for (int k = 0; k < K; ++k) {
      VectorXcd Tphi_new = lin.T[k].adjoint() * st.phi;
      const VectorXcd rx = st.x[k] - Tphi_new;
      st.u[k] += rx;
      primal_sq += rx.squaredNorm();
      dual_sq += (Tphi_new - Tphi[k]).squaredNorm();
      Tphi[k] = std::move(Tphi_new);
    }
    const VectorXcd ry = st.y - st.phi;
    const VectorXd rz = st.z.array() - st.gamma;
    st.v += ry;
    st.w += rz;
    primal_sq += ry.squaredNorm() + rz.squaredNorm();
    dual_sq += (st.phi - phi_prev).squaredNorm() + K * (st.gamma - gamma_prev) * (st.gamma - gamma_prev);

    const Residuals r{std::sqrt(primal_sq), rho * std::sqrt(dual_sq)};
    result.residual_history.push_back(r);
    result.final_residuals = r;
    result.iterations = it;

    const VectorXcd candidate = project_disk(st.phi);
    const double value = lin.max_gamma(candidate);
    if (value > result.gamma) {
      result.gamma = value;
      result.phi = candidate;
    }
    if (observer) observer(it, st.phi, st.gamma, r);
    if (r.combined() <= cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

SolveReport solve_dl(const ChannelSet& cs, const TransmitBeams& beams, const SolverConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Affine aff = precompute_affine(cs, beams);

  SolveReport report;
  report.mode = BeamMode::downlink;
  VectorXcd phi = initial_phi(cs.elements(), cfg);
  report.initial_min_metric = aff.min_sinr(phi);
  report.converged = true;

  for (int round = 0; round < cfg.outer_iters; ++round) {
    const double gamma_e = std::max(aff.min_sinr(phi), kGammaFloor);
    const Linearization lin = linearize_dl(aff, phi, gamma_e);
    IterationObserver observer;
    if (cfg.record_trace) {
      observer = [&](int it, const VectorXcd& p, double gamma, const Residuals& r) {
        report.trace.push_back(
            {round, it, gamma, aff.min_sinr(project_disk(p)), r.primal, r.dual});
      };
    }
    const InnerResult inner = solve_inner_dl(lin, cfg, observer);
    phi = inner.phi;
    report.rounds.push_back(
        {round, inner.gamma, aff.min_sinr(phi), inner.iterations, inner.converged});
    report.total_inner_iterations += inner.iterations;
    report.converged = report.converged && inner.converged;
  }

  report.phi_disk = phi;
  report.phi_circle = project_unit_modulus(phi);
  report.user_metric_disk = user_metrics(cs, report.phi_disk, beams);
  report.user_metric_circle = user_metrics(cs, report.phi_circle, beams);
  report.min_metric_disk =
      *std::min_element(report.user_metric_disk.begin(), report.user_metric_disk.end());
  report.min_metric_circle =
      *std::min_element(report.user_metric_circle.begin(), report.user_metric_circle.end());
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace irsbf::downlink
