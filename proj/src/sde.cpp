#include "spinfb/sde.hpp"

#include <cmath>
#include <random>

#include "spinfb/control.hpp"

namespace spinfb {

WienerPath generate_wiener(std::uint64_t seed, double dt, double T) {
  if (!(dt > 0) || !(T > 0) || T < dt) {
    throw InvalidParameterError("generate_wiener needs dt > 0 and T >= dt");
  }
  const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  WienerPath path{seed, dt, {}};
  path.increments.resize(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  for (auto& x : path.increments) x = normal(rng);
  return path;
}

WienerPath coarsen(const WienerPath& path, std::size_t factor) {
  if (factor == 0 || path.increments.size() % factor != 0) {
    throw InvalidParameterError("coarsening factor must divide the path length");
  }
  WienerPath out{path.seed, path.dt * double(factor), {}};
  out.increments.resize(path.increments.size() / factor);
  for (std::size_t i = 0; i < out.increments.size(); ++i) {
    double sum = 0;
    for (std::size_t k = 0; k < factor; ++k) sum += path.increments[i * factor + k];
    out.increments[i] = sum;
  }
  return out;
}

DensityMatrix<double> project_to_physical(const Matrix<double>& m,
                                          double divergence_threshold) {
  if (m.rows() != m.cols()) throw DimensionError("projection needs a square matrix");
  if (!m.allFinite()) throw DivergedError("state has non-finite entries");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-6) {
    throw InvalidStateError("projection input is not Hermitian within 1e-6");
  }
  const Matrix<double> h = (m + m.adjoint()) / 2.0;
  const double trace = h.trace().real();

  if (trace > 0) {
    Matrix<double> normalized = h / trace;
    Eigen::LLT<Matrix<double>> llt(normalized);
    if (llt.info() == Eigen::Success) {
      return DensityMatrix<double>::unchecked(std::move(normalized));
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(h);
  RealVector<double> lambda = es.eigenvalues();
  if (lambda.minCoeff() < divergence_threshold) {
    throw DivergedError("eigenvalue " + std::to_string(lambda.minCoeff()) +
                        " below the divergence threshold");
  }
  lambda = lambda.cwiseMax(0.0);
  const double sum = lambda.sum();
  if (!(sum > 0)) throw DivergedError("state collapsed to zero trace");
  lambda /= sum;
  Matrix<double> out = es.eigenvectors() *
                       lambda.cast<std::complex<double>>().asDiagonal() *
                       es.eigenvectors().adjoint();
  out = (out + out.adjoint()).eval() / 2.0;
  return DensityMatrix<double>::unchecked(std::move(out));
}

namespace {

DensityMatrix<double> physical(Matrix<double> m, const IntegratorConfig& cfg) {
  if (cfg.projection == Projection::Clip) return project_to_physical(m);
  return DensityMatrix<double>::unchecked(std::move(m));
}

CoupledState<double> euler_maruyama_step(const CoupledState<double>& s, double u,
                                         double dW, const IntegratorConfig& cfg,
                                         const PhysicalParams<double>& p,
                                         const SmeOperators<double>& ops) {
  const double dt = cfg.dt;
  const auto actual = sme_terms(s.rho.matrix(), u, p, ops);
  const auto estimate = sme_terms(s.rho_hat.matrix(), u, p, ops);
  const double gain =
      2 * p.measurement_rate() * (actual.expectation - estimate.expectation);
  Matrix<double> rho = s.rho.matrix() + actual.drift * dt + actual.diffusion * dW;
  Matrix<double> rho_hat = s.rho_hat.matrix() +
                           (estimate.drift + gain * estimate.diffusion) * dt +
                           estimate.diffusion * dW;
  return {physical(std::move(rho), cfg), physical(std::move(rho_hat), cfg)};
}

CoupledState<double> kraus_step(const CoupledState<double>& s, double u,
                                double dW, const IntegratorConfig& cfg,
                                const PhysicalParams<double>& p,
                                const SmeOperators<double>& ops) {
  using C = std::complex<double>;
  const double dt = cfg.dt;
  const double rate = p.measurement_rate();
  const double dY = observation_increment(s.rho.matrix(), dW, dt, p, ops);
  const Index n = ops.dim();
  const auto& a = ops.measurement;

  Matrix<double> k = C(0, -u * dt) * ops.drive;
  for (Index j = 0; j < n; ++j) {
    k(j, j) += C(1.0 - 0.5 * p.M * a(j) * a(j) * dt + rate * a(j) * dY,
                 -p.omega * a(j) * dt);
  }
  const double unobserved = (1 - p.eta) * p.M * dt;
  const auto update = [&](const Matrix<double>& r) {
    Matrix<double> out = k * r * k.adjoint();
    for (Index c = 0; c < n; ++c)
      for (Index j = 0; j < n; ++j) out(j, c) += unobserved * a(j) * a(c) * r(j, c);
    const double tr = out.trace().real();
    return Matrix<double>(out / tr);
  };
  return {physical(update(s.rho.matrix()), cfg),
          physical(update(s.rho_hat.matrix()), cfg)};
}

}  // namespace

CoupledState<double> step(const CoupledState<double>& s, double u, double dW,
                          const IntegratorConfig& cfg,
                          const PhysicalParams<double>& p,
                          const SmeOperators<double>& ops) {
  if (s.rho.dim() != ops.dim() || s.rho_hat.dim() != ops.dim()) {
    throw DimensionError("state dimension does not match the operators");
  }
  if (!std::isfinite(dW)) throw InvalidParameterError("non-finite Wiener increment");
  if (cfg.scheme == Scheme::Kraus) return kraus_step(s, u, dW, cfg, p, ops);
  return euler_maruyama_step(s, u, dW, cfg, p, ops);
}

Trajectory simulate(const SimConfig& config) {
  config.validate();
  return simulate(config, generate_wiener(config.seed, config.integrator.dt,
                                          config.integrator.T));
}

Trajectory simulate(const SimConfig& config, const WienerPath& noise) {
  config.validate();
  const auto& integ = config.integrator;
  const std::size_t steps = integ.steps();
  if (std::abs(noise.dt - integ.dt) > 1e-12 * integ.dt ||
      noise.increments.size() < steps) {
    throw InvalidParameterError("noise path does not match the integrator grid");
  }
  const auto ops = make_sme_operators<double>(config.dim, config.convention());
  const Index target = config.resolved_metric_target();
  CoupledState<double> state{config.initial_rho.build(config.dim),
                             config.initial_rho_hat.build(config.dim)};

  Trajectory traj;
  const std::size_t n_records = steps / integ.record_stride + 1;
  traj.times.reserve(n_records);
  traj.states.reserve(n_records);
  traj.controls.reserve(n_records);
  traj.wiener.reserve(n_records);
  traj.observation.reserve(n_records);
  traj.metrics.reserve(n_records);

  double w = 0;
  double y = 0;
  for (std::size_t k = 0;; ++k) {
    const double t = double(k) * integ.dt;
    const double u = evaluate(config.controller, state.rho_hat.matrix(), ops.spin);
    if (k % integ.record_stride == 0) {
      traj.times.push_back(t);
      traj.states.push_back(state);
      traj.controls.push_back(u);
      traj.wiener.push_back(w);
      traj.observation.push_back(y);
      traj.metrics.push_back(
          sample_metrics(t, state.rho, state.rho_hat, u, ops.spin, target));
    }
    if (k == steps) break;
    const double dW = noise.increments[k];
    y += observation_increment(state.rho.matrix(), dW, integ.dt, config.params, ops);
    w += dW;
    try {
      state = step(state, u, dW, integ, config.params, ops);
    } catch (const DivergedError& e) {
      throw DivergedError(std::string("integration diverged at step ") +
                              std::to_string(k) + ": " + e.what(),
                          k, t, u, purity_deficit(state.rho));
    }
  }
  return traj;
}

BlochTrajectory simulate_bloch(const SimConfig& config, const WienerPath& noise) {
  config.validate();
  if (config.model != ModelKind::SpinJ || config.dim != 2) {
    throw InvalidParameterError(
        "the Bloch form uses the J_z = sigma_z/2 normalization: configure "
        "model spin_j with dim 2");
  }
  const auto& integ = config.integrator;
  const std::size_t steps = integ.steps();
  if (std::abs(noise.dt - integ.dt) > 1e-12 * integ.dt ||
      noise.increments.size() < steps) {
    throw InvalidParameterError("noise path does not match the integrator grid");
  }
  const auto spin = make_spin_operators<double>(2);
  Vector3<double> v = density_to_bloch(config.initial_rho.build(2)).vec();
  Vector3<double> vh = density_to_bloch(config.initial_rho_hat.build(2)).vec();
  const auto into_ball = [](Vector3<double>& x) {
    const double r = x.norm();
    if (r > 1) x /= r;
  };

  BlochTrajectory out;
  for (std::size_t k = 0;; ++k) {
    if (k % integ.record_stride == 0) {
      out.times.push_back(double(k) * integ.dt);
      out.actual.push_back(BlochVector<double>::from(v));
      out.estimate.push_back(BlochVector<double>::from(vh));
    }
    if (k == steps) break;
    const auto bv = BlochVector<double>::from(v);
    const auto bvh = BlochVector<double>::from(vh);
    const double u =
        evaluate(config.controller, bloch_to_density(bvh).matrix(), spin);
    const auto drift = bloch_drift(bv, bvh, u, config.params);
    const auto diff = bloch_diffusion(bv, bvh, config.params);
    const double dW = noise.increments[k];
    v += drift.actual * integ.dt + diff.actual * dW;
    vh += drift.estimate * integ.dt + diff.estimate * dW;
    if (integ.projection == Projection::Clip) {
      into_ball(v);
      into_ball(vh);
    }
  }
  return out;
}

}  // namespace spinfb
