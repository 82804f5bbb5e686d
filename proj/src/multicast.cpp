#include "irsbf/multicast.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>

namespace irsbf::multicast {

VectorXcd Affine::amplitudes(const VectorXcd& phi) const {
  if (phi.size() != alpha.rows()) throw std::invalid_argument("affine: phi length mismatch");
  VectorXcd a = beta;
  if (alpha.rows() > 0) a.noalias() += alpha.adjoint() * phi;
  return a;
}

VectorXd Affine::snr(const VectorXcd& phi) const { return amplitudes(phi).cwiseAbs2(); }

double Affine::min_snr(const VectorXcd& phi) const { return snr(phi).minCoeff(); }

Affine precompute_affine(const ChannelSet& cs, const VectorXcd& b) {
  cs.validate();
  if (b.size() != cs.antennas()) throw std::invalid_argument("affine: beam length mismatch");
  const int N = cs.elements();
  const int K = cs.users();
  Affine aff{MatrixXcd(N, K), VectorXcd(K)};
  const VectorXcd Gb = N > 0 ? VectorXcd(cs.G * b) : VectorXcd(0);
  for (int k = 0; k < K; ++k) {
    const double inv_sigma = 1.0 / std::sqrt(cs.noise[k]);
    if (N > 0) aff.alpha.col(k) = cs.h[k].conjugate().cwiseProduct(Gb) * inv_sigma;
    aff.beta[k] = b.dot(cs.f[k]) * inv_sigma;  // b^H f_k
  }
  return aff;
}

VectorXd Linearization::surrogate(const VectorXcd& phi) const {
  VectorXd out = s;
  if (T.rows() > 0) out.noalias() += 2.0 * (T.adjoint() * phi).real();
  return out;
}

double Linearization::min_surrogate(const VectorXcd& phi) const {
  return surrogate(phi).minCoeff();
}

Linearization linearize(const Affine& aff, const VectorXcd& phi_e) {
  if (phi_e.size() != aff.elements())
    throw std::invalid_argument("linearize: expansion point length mismatch");
  const int K = aff.users();
  Linearization lin{MatrixXcd(aff.elements(), K), VectorXd(K), phi_e};
  for (int k = 0; k < K; ++k) {
    const Complex p = aff.alpha.rows() > 0 ? aff.alpha.col(k).dot(phi_e) : Complex{};
    lin.T.col(k) = (p + aff.beta[k]) * aff.alpha.col(k);
    lin.s[k] = std::norm(aff.beta[k]) - std::norm(p);
  }
  return lin;
}

XzPoint update_xz(Complex tau1, double tau2, double s) {
  const double g = tau2 - 2.0 * tau1.real() - s;
  if (g <= 0.0) return {tau1, tau2};
  const double mu = 0.4 * g;
  return {tau1 + mu, tau2 - 0.5 * mu};
}

namespace {

// (I + T T^H) factored once per linearization.
class PhiSolver {
 public:
  explicit PhiSolver(const MatrixXcd& T) : T_(T) {
    const auto N = T.rows();
    MatrixXcd A = MatrixXcd::Identity(N, N);
    A.selfadjointView<Eigen::Lower>().rankUpdate(T);
    llt_.compute(A);
    if (llt_.info() != Eigen::Success) throw std::runtime_error("phi update: factorization failed");
  }

  VectorXcd solve(const VectorXcd& tau4, const VectorXcd& tau5) const {
    VectorXcd rhs = tau5;
    rhs.noalias() += T_ * tau4;
    return llt_.solve(rhs);
  }

 private:
  const MatrixXcd& T_;
  Eigen::LLT<MatrixXcd> llt_;
};

}  // namespace

PhiGamma update_phi_gamma(const Linearization& lin, const VectorXcd& tau4, const VectorXcd& tau5,
                          const VectorXd& tau6, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho: must be positive");
  PhiSolver solver(lin.T);
  return {solver.solve(tau4, tau5), update_gamma(tau6, rho)};
}

InnerResult solve_inner(const Linearization& lin, const SolverConfig& cfg,
                        const IterationObserver& observer) {
  cfg.validate();
  const int N = lin.elements();
  const int K = lin.users();
  const double rho = cfg.rho;

  InnerResult result;
  result.phi = project_disk(lin.expansion);
  result.gamma = lin.min_surrogate(result.phi);
  if (N == 0) {
    result.converged = true;
    return result;
  }

  AdmmState st;
  st.phi = lin.expansion;
  st.gamma = result.gamma;
  st.x = lin.T.adjoint() * st.phi;
  st.y = st.phi;
  st.z = VectorXd::Constant(K, st.gamma);
  st.u = VectorXcd::Zero(K);
  st.v = VectorXcd::Zero(N);
  st.w = VectorXd::Zero(K);

  const PhiSolver solver(lin.T);
  result.factorizations = 1;

  VectorXcd Tphi = st.x;
  for (int it = 1; it <= cfg.inner_max_iters; ++it) {
    // X1 block: (x, z) per user, y per element.
    const VectorXcd tau1 = Tphi - st.u;
    const VectorXd tau2 = VectorXd::Constant(K, st.gamma) - st.w;
    for (int k = 0; k < K; ++k) {
      const auto p = update_xz(tau1[k], tau2[k], lin.s[k]);
      st.x[k] = p.x;
      st.z[k] = p.z;
    }
    st.y = update_y(st.phi - st.v);

    // X2 block: (phi, gamma).
    const VectorXcd phi_prev = st.phi;
    const double gamma_prev = st.gamma;
    st.phi = solver.solve(st.x + st.u, st.y + st.v);
    st.gamma = update_gamma(st.z + st.w, rho);

    const VectorXcd Tphi_new = lin.T.adjoint() * st.phi;
    const VectorXcd rx = st.x - Tphi_new;
    const VectorXcd ry = st.y - st.phi;
    const VectorXd rz = st.z.array() - st.gamma;
    st.u += rx;
    st.v += ry;
    st.w += rz;

    Residuals r;
    r.primal = std::sqrt(rx.squaredNorm() + ry.squaredNorm() + rz.squaredNorm());
    r.dual = rho * std::sqrt((Tphi_new - Tphi).squaredNorm() + (st.phi - phi_prev).squaredNorm() +
                             K * (st.gamma - gamma_prev) * (st.gamma - gamma_prev));
    Tphi = Tphi_new;
    result.residual_history.push_back(r);
    result.final_residuals = r;
    result.iterations = it;

    const VectorXcd candidate = project_disk(st.phi);
    const double value = lin.min_surrogate(candidate);
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

SolveReport solve(const ChannelSet& cs, const VectorXcd& b, const SolverConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Affine aff = precompute_affine(cs, b);

  SolveReport report;
  report.mode = BeamMode::multicast;
  VectorXcd phi = initial_phi(cs.elements(), cfg);
  report.initial_min_metric = aff.min_snr(phi);
  report.converged = true;

  for (int round = 0; round < cfg.outer_iters; ++round) {
    const Linearization lin = linearize(aff, phi);
    IterationObserver observer;
    if (cfg.record_trace) {
      observer = [&](int it, const VectorXcd& p, double gamma, const Residuals& r) {
        report.trace.push_back(
            {round, it, gamma, aff.min_snr(project_disk(p)), r.primal, r.dual});
      };
    }
    const InnerResult inner = solve_inner(lin, cfg, observer);
    phi = inner.phi;
    report.rounds.push_back(
        {round, inner.gamma, aff.min_snr(phi), inner.iterations, inner.converged});
    report.total_inner_iterations += inner.iterations;
    report.converged = report.converged && inner.converged;
  }

  const TransmitBeams beams{BeamMode::multicast, {b}};
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

}  // namespace irsbf::multicast
