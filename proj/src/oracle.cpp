#include "irsbf/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace irsbf::oracle {

std::uint64_t GridSpec::points(int elements) const {
  const std::uint64_t base =
      static_cast<std::uint64_t>(phases) * (regime == Regime::disk ? radius_levels : 1);
  std::uint64_t total = 1;
  for (int n = 0; n < elements; ++n) {
    if (total > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    total *= base;
  }
  return total;
}

void GridSpec::check(int elements) const {
  if (phases < 2) throw std::invalid_argument("grid: phases must be >= 2");
  if (regime == Regime::disk && radius_levels < 1)
    throw std::invalid_argument("grid: radius_levels must be >= 1");
  const auto p = points(elements);
  if (static_cast<double>(p) > budget) {
    std::ostringstream os;
    os << "grid budget exceeded: " << elements << " elements x " << phases
       << " phases needs more than " << budget << " points";
    throw std::length_error(os.str());
  }
}

namespace {

// Per-user, per-beam expansion of the received amplitude
//   row_k(phi) b_j = f_k^H b_j + sum_n conj(phi_n) conj(h_kn) (G b_j)_n
struct AmplitudeTable {
  int K = 0, J = 0, N = 0;
  std::vector<Complex> direct;  // [k * J + j]
  std::vector<Complex> coef;    // [(k * J + j) * N + n]
  std::vector<double> noise;
  bool downlink = false;

  AmplitudeTable(const ChannelSet& cs, const TransmitBeams& beams)
      : K(cs.users()), J(static_cast<int>(beams.vectors.size())), N(cs.elements()),
        noise(cs.noise), downlink(beams.mode == BeamMode::downlink) {
    if (downlink && J != K) throw std::invalid_argument("grid: expected one beam per user");
    if (!downlink && J != 1) throw std::invalid_argument("grid: expected one multicast beam");
    direct.resize(K * J);
    coef.resize(static_cast<size_t>(K) * J * N);
    for (int j = 0; j < J; ++j) {
      const VectorXcd Gb = N > 0 ? VectorXcd(cs.G * beams.vectors[j]) : VectorXcd(0);
      for (int k = 0; k < K; ++k) {
        direct[k * J + j] = cs.f[k].dot(beams.vectors[j]);
        for (int n = 0; n < N; ++n) coef[(k * J + j) * N + n] = std::conj(cs.h[k][n]) * Gb[n];
      }
    }
  }

  Complex amplitude(int k, int j, const Complex* phi) const {
    Complex a = direct[k * J + j];
    const Complex* c = &coef[static_cast<size_t>(k * J + j) * N];
    for (int n = 0; n < N; ++n) a += std::conj(phi[n]) * c[n];
    return a;
  }

  double min_metric(const Complex* phi) const {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      double m;
      if (!downlink) {
        m = std::norm(amplitude(k, 0, phi)) / noise[k];
      } else {
        double interference = 0.0;
        for (int j = 0; j < J; ++j)
          if (j != k) interference += std::norm(amplitude(k, j, phi));
        m = std::norm(amplitude(k, k, phi)) / (noise[k] + interference);
      }
      worst = std::min(worst, m);
    }
    return worst;
  }
};

}  // namespace

GridResult grid_search(const ChannelSet& cs, const TransmitBeams& beams, const GridSpec& spec) {
  cs.validate();
  const int N = cs.elements();
  spec.check(N);
  const AmplitudeTable table(cs, beams);

  std::vector<Complex> levels;
  const int radii = spec.regime == Regime::disk ? spec.radius_levels : 1;
  for (int r = 1; r <= radii; ++r)
    for (int p = 0; p < spec.phases; ++p)
      levels.push_back(std::polar(static_cast<double>(r) / radii,
                                  2.0 * std::numbers::pi * p / spec.phases));
  const int base = static_cast<int>(levels.size());

  std::vector<int> digit(N, 0);
  std::vector<Complex> phi(N, levels[0]);
  GridResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<Complex> best_phi = phi;
  std::uint64_t count = 0;
  while (true) {
    ++count;
    const double v = table.min_metric(phi.data());
    if (v > best.value) {
      best.value = v;
      best_phi = phi;
    }
    int n = 0;
    while (n < N && ++digit[n] == base) {
      digit[n] = 0;
      phi[n] = levels[0];
      ++n;
    }
    if (n == N) break;
    phi[n] = levels[digit[n]];
  }
  best.points = count;
  best.phi = Eigen::Map<const VectorXcd>(best_phi.data(), N);
  return best;
}

GridResult grid_search_cached(const ChannelSet& cs, const TransmitBeams& beams,
                              const GridSpec& spec, const std::filesystem::path& cache_dir,
                              const std::string& key) {
  const auto path = cache_dir / (key + ".grid");
  if (std::ifstream in{path}) {
    GridResult r;
    std::string tag;
    int n = 0;
    if (in >> tag >> r.value && tag == "value" && in >> tag >> r.points && tag == "points" &&
        in >> tag >> n && tag == "elements" && n == cs.elements()) {
      r.phi.resize(n);
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        double re, im;
        ok = static_cast<bool>(in >> re >> im);
        r.phi[i] = {re, im};
      }
      if (ok) return r;
    }
  }
  GridResult r = grid_search(cs, beams, spec);
  std::filesystem::create_directories(cache_dir);
  std::ofstream out(path);
  char buf[96];
  std::snprintf(buf, sizeof buf, "value %.17g\n", r.value);
  out << buf << "points " << r.points << "\nelements " << r.phi.size() << "\n";
  for (const auto& p : r.phi) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.real(), p.imag());
    out << buf;
  }
  return r;
}

namespace {

// Restarted projected subgradient ascent of a concave piecewise function on the disk.
// `evaluate` returns the objective and writes an ascent supergradient.
template <class Evaluate>
ReferenceResult subgradient_ascent(const VectorXcd& start, int iters, Evaluate evaluate) {
  const auto N = start.size();
  ReferenceResult res;
  res.phi = project_disk(start);
  VectorXcd g(N);
  res.gamma = evaluate(res.phi, g);
  if (N == 0) return res;

  const int epoch = std::max(1, iters / 20);
  double c = std::sqrt(static_cast<double>(N));
  VectorXcd phi = res.phi;
  int t = 0;
  for (int it = 0; it < iters; ++it) {
    evaluate(phi, g);
    const double gn = g.norm();
    if (!(gn > 0.0)) break;  // active piece is flat: phi is optimal
    ++t;
    phi = project_disk(phi + (c / std::sqrt(static_cast<double>(t)) / gn) * g);
    const double v = evaluate(phi, g);
    res.iterations = it + 1;
    if (v > res.gamma) {
      res.gamma = v;
      res.phi = phi;
    }
    if (t == epoch) {
      phi = res.phi;
      c *= 0.5;
      t = 0;
    }
  }
  return res;
}

}  // namespace

ReferenceResult subgradient_reference(const multicast::Linearization& lin, int iters) {
  return subgradient_ascent(lin.expansion, iters, [&](const VectorXcd& phi, VectorXcd& g) {
    double worst = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int k = 0; k < lin.users(); ++k) {
      const double v = 2.0 * lin.T.col(k).dot(phi).real() + lin.s[k];
      if (v < worst) {
        worst = v;
        arg = k;
      }
    }
    g = 2.0 * lin.T.col(arg);
    return worst;
  });
}

ReferenceResult subgradient_reference(const downlink::Linearization& lin, int iters) {
  return subgradient_ascent(lin.expansion, iters, [&](const VectorXcd& phi, VectorXcd& g) {
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < lin.users(); ++k) {
      const auto& Tk = lin.T[k];
      const Complex lin_part = Tk.col(0).dot(phi);
      VectorXcd r = lin.beta_hat[k];
      if (r.size() > 0) r.noalias() += Tk.rightCols(r.size()).adjoint() * phi;
      const double num = 2.0 * lin_part.real() + lin.s_hat[k] - r.squaredNorm();
      const double q = lin.q[k];
      double v;
      if (q > 0.0)
        v = num / q;
      else
        v = num >= 0.0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      if (v < worst) {
        worst = v;
        g = 2.0 * Tk.col(0);
        if (r.size() > 0) g.noalias() -= 2.0 * (Tk.rightCols(r.size()) * r);
        if (q > 0.0) g /= q;
      }
    }
    return worst;
  });
}

LinearizationReport linearization_check(const LinearizedModel& model, int samples,
                                        std::uint64_t seed, const CheckTolerances& tol) {
  LinearizationReport rep;
  rep.samples = samples;
  std::ostringstream msg;
  const VectorXd& xe = model.expansion;

  const double fe = model.exact(xe);
  rep.tangency_error = std::abs(fe - model.surrogate(xe)) / std::max(1.0, std::abs(fe));
  if (rep.tangency_error > tol.tangency) {
    rep.ok = false;
    msg << "tangency error " << rep.tangency_error << " at expansion point; ";
  }

  const auto d = xe.size();
  VectorXd gf(d), gs(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    VectorXd xp = xe, xm = xe;
    xp[i] += tol.fd_step;
    xm[i] -= tol.fd_step;
    gf[i] = (model.exact(xp) - model.exact(xm)) / (2.0 * tol.fd_step);
    gs[i] = (model.surrogate(xp) - model.surrogate(xm)) / (2.0 * tol.fd_step);
  }
  const double denom = std::max(gf.norm(), gs.norm());
  rep.gradient_error = denom > 0.0 ? (gf - gs).norm() / denom : 0.0;
  if (rep.gradient_error > tol.gradient) {
    rep.ok = false;
    msg << "gradient mismatch " << rep.gradient_error << " (|fd|=" << gf.norm()
        << ", |surrogate|=" << gs.norm() << "); ";
  }

  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    const VectorXd x = model.sample(rng);
    const double f = model.exact(x);
    const double v = (model.surrogate(x) - f) / std::max(1.0, std::abs(f));
    if (v > rep.max_violation) rep.max_violation = v;
  }
  if (rep.max_violation > tol.minorization) {
    rep.ok = false;
    msg << "minorization violated by " << rep.max_violation << "; ";
  }
  rep.details = msg.str();
  return rep;
}

namespace {

VectorXcd to_complex(const VectorXd& x, Eigen::Index N) {
  VectorXcd phi(N);
  for (Eigen::Index n = 0; n < N; ++n) phi[n] = {x[n], x[N + n]};
  return phi;
}

VectorXd to_real(const VectorXcd& phi, Eigen::Index extra) {
  const auto N = phi.size();
  VectorXd x = VectorXd::Zero(2 * N + extra);
  x.head(N) = phi.real();
  x.segment(N, N) = phi.imag();
  return x;
}

void sample_disk(std::mt19937_64& rng, VectorXd& x, Eigen::Index N) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index n = 0; n < N; ++n) {
    const double r = std::sqrt(u(rng));
    const double a = 2.0 * std::numbers::pi * u(rng);
    x[n] = r * std::cos(a);
    x[N + n] = r * std::sin(a);
  }
}

}  // namespace

LinearizedModel multicast_model(const multicast::Affine& aff, const multicast::Linearization& lin,
                                int k) {
  const Eigen::Index N = aff.elements();
  LinearizedModel m;
  m.expansion = to_real(lin.expansion, 0);
  m.exact = [&aff, k, N](const VectorXd& x) { return aff.snr(to_complex(x, N))[k]; };
  m.surrogate = [&lin, k, N](const VectorXd& x) {
    return 2.0 * lin.T.col(k).dot(to_complex(x, N)).real() + lin.s[k];
  };
  m.sample = [N](std::mt19937_64& rng) {
    VectorXd x(2 * N);
    sample_disk(rng, x, N);
    return x;
  };
  return m;
}

LinearizedModel downlink_model(const downlink::Affine& aff, const downlink::Linearization& lin,
                               int k) {
  const Eigen::Index N = aff.elements();
  LinearizedModel m;
  m.expansion = to_real(lin.expansion, 1);
  m.expansion[2 * N] = lin.expansion_gamma;
  m.exact = [&aff, k, N](const VectorXd& x) {
    return aff.quad_over_lin(k, to_complex(x, N), x[2 * N]);
  };
  m.surrogate = [&lin, k, N](const VectorXd& x) {
    return 2.0 * lin.t_hat.col(k).dot(to_complex(x, N)).real() + lin.s_hat[k] + 1.0 -
           lin.q[k] * x[2 * N];
  };
  const double gamma_hi = 4.0 * lin.expansion_gamma;
  m.sample = [N, gamma_hi](std::mt19937_64& rng) {
    VectorXd x(2 * N + 1);
    sample_disk(rng, x, N);
    std::uniform_real_distribution<double> u(1e-3, 1.0);
    x[2 * N] = gamma_hi * u(rng);
    return x;
  };
  return m;
}

}  // namespace irsbf::oracle
