#include "rcon/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "rcon/errors.hpp"
#include "rcon/linalg.hpp"

namespace rcon {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMinStep = 1e-8;
constexpr double kMaxStep = 1e3;
constexpr double kMaxRelStep = 2.0;  // diagonal proposals: chi-square df >= 0.5
constexpr double kCacheTol = 1e-9;
constexpr long kCacheCheckEvery = 1000;
constexpr double kTargetAccept = 0.3;
// An independence kernel accepting at least half its proposals mixes
// faster than a random walk tuned to kTargetAccept.
constexpr double kIndependentAccept = 0.5;

void adapt(ChainState& s, int coord, bool accepted, double max_step, long count) {
  if (!s.adapting) return;
  const double gain = 1.0 / std::pow(static_cast<double>(count), 0.6);
  double log_step = std::log(s.step_sizes(coord)) + gain * ((accepted ? 1.0 : 0.0) - kTargetAccept);
  s.step_sizes(coord) = std::clamp(std::exp(log_step), kMinStep, max_step);
}

// log density of the proposal to = sqrt(from^2 * chi2_m / m), as a density in `to`.
double log_scaled_chi(double from, double to, double m) {
  const double k = 0.5 * m;
  const double x = from * from;
  const double y = to * to;
  const double scale = 2.0 * x / m;
  return (k - 1.0) * std::log(y) - y / scale - k * std::log(scale) - std::lgamma(k) +
         std::log(2.0 * to);
}

void validate_params(const CgwParams& params, int p) {
  if (!(params.delta > 0.0)) throw InvalidArgument("delta must be positive");
  if (params.d_mat.rows() != p || params.d_mat.cols() != p) {
    throw InvalidArgument("D must be " + std::to_string(p) + "x" + std::to_string(p));
  }
  if (!linalg::cholesky(params.d_mat)) throw NotPositiveDefinite("D is not positive definite");
}

Eigen::VectorXd initial_theta(const RconSpec& spec) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(spec.num_params());
  theta.head(spec.num_vertex_classes()).setOnes();
  return theta;
}

}  // namespace

void ChainState::reset_counters() {
  std::fill(accepts.begin(), accepts.end(), 0);
  std::fill(proposals.begin(), proposals.end(), 0);
  std::fill(indep_trials.begin(), indep_trials.end(), 0);
  std::fill(indep_accepts.begin(), indep_accepts.end(), 0);
}

CgwParams identity_prior(int p, double delta) {
  return CgwParams{delta, Eigen::MatrixXd::Identity(p, p)};
}

double log_density(const RconSpec& spec, const Eigen::VectorXd& theta, const CgwParams& params) {
  const Eigen::MatrixXd k = k_of_theta(spec, theta);
  auto llt = linalg::cholesky(k);
  if (!llt) return kNegInf;
  return 0.5 * (params.delta - 2.0) * linalg::log_det(*llt) -
         0.5 * (k.cwiseProduct(params.d_mat.transpose())).sum();
}

CgwParams posterior_params(const CgwParams& prior, const SampleStats& stats) {
  if (stats.n == 0) return prior;
  return CgwParams{prior.delta + stats.n, prior.d_mat + stats.scatter};
}

const char* to_string(SamplerMode mode) {
  return mode == SamplerMode::Psi ? "psi" : "rw";
}

SamplerMode sampler_mode_from_string(const std::string& name) {
  if (name == "psi") return SamplerMode::Psi;
  if (name == "rw") return SamplerMode::RandomWalk;
  throw InvalidArgument("unknown sampler mode '" + name + "' (expected rw or psi)");
}

// ---------------------------------------------------------------------------
// Random walk on theta

RwSampler::RwSampler(const RconSpec& spec, CgwParams params)
    : spec_(spec), params_(std::move(params)) {
  validate_params(params_, spec_.dim());
}

ChainState RwSampler::init(std::uint64_t seed) const { return init(initial_theta(spec_), seed); }

ChainState RwSampler::init(const Eigen::VectorXd& theta, std::uint64_t seed) const {
  ChainState s;
  s.theta = theta;
  s.log_target = log_density(spec_, theta, params_);
  if (!std::isfinite(s.log_target)) throw NotPositiveDefinite("initial theta outside the cone");
  s.step_sizes = (0.1 * (1.0 + theta.array().abs())).matrix();
  s.accepts.assign(spec_.num_params(), 0);
  s.proposals.assign(spec_.num_params(), 0);
  s.rng.seed(seed);
  return s;
}

void RwSampler::step(ChainState& s) const {
  const int m = spec_.num_params();
  if (m == 0) return;
  const int r = s.next_coord;
  s.next_coord = (r + 1) % m;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double old_value = s.theta(r);
  s.theta(r) = old_value + s.step_sizes(r) * normal(s.rng);
  const double proposed = log_density(spec_, s.theta, params_);
  const double u = unif(s.rng);
  ++s.proposals[r];
  const bool accepted = std::isfinite(proposed) && std::log(u) < proposed - s.log_target;
  if (accepted) {
    s.log_target = proposed;
    ++s.accepts[r];
  } else {
    s.theta(r) = old_value;
  }
  adapt(s, r, accepted, kMaxStep, s.proposals[r]);
}

void RwSampler::end_adaptation(ChainState& s) const {
  s.adapting = false;
  s.reset_counters();
}

double RwSampler::fresh_log_target(const ChainState& s) const {
  return log_density(spec_, s.theta, params_);
}

// ---------------------------------------------------------------------------
// Psi sampler

PsiSampler::PsiSampler(const RconSpec& spec, CgwParams params)
    : spec_(spec), params_(std::move(params)) {
  const int p = spec_.dim();
  validate_params(params_, p);

  // D^{-1} = Q^T Q with Q upper triangular.
  auto d_llt = linalg::cholesky(params_.d_mat);
  auto dinv_llt = linalg::cholesky(linalg::inverse(*d_llt));
  if (!dinv_llt) throw NotPositiveDefinite("D^{-1} is not positive definite");
  q_ = dinv_llt->matrixU();

  // Row-major sweep over the upper triangle. The first entry of a class is
  // free; later entries of that class copy its K value.
  std::vector<char> seen(spec_.num_params(), 0);
  std::vector<int> free_in_row(p, 0);
  std::vector<char> diag_free(p, 0);
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      const int cls = spec_.class_at(a, b);
      Position pos{a, b, Kind::Zero, cls};
      if (cls >= 0) {
        const bool first = !seen[cls];
        seen[cls] = 1;
        if (a == b) {
          pos.kind = first ? Kind::FreeDiag : Kind::TiedDiag;
          if (first) diag_free[a] = 1;
        } else {
          pos.kind = first ? Kind::FreeOff : Kind::TiedOff;
          if (first) ++free_in_row[a];
        }
        if (first) free_positions_.push_back(positions_.size());
      } else if (a == b) {
        throw InvalidArgument("diagonal entry without a vertex class");
      }
      positions_.push_back(pos);
    }
  }
  // The Jacobian of free Psi entries -> theta is triangular in sweep order:
  // a free diagonal contributes phi_aa, a free off-diagonal in row a
  // contributes phi_aa (both up to constants), and phi_aa = q_aa psi_aa.
  diag_exponent_.resize(p);
  for (int a = 0; a < p; ++a) {
    diag_exponent_(a) = params_.delta - 2.0 + diag_free[a] + free_in_row[a];
  }
}

bool PsiSampler::is_free_diagonal(int coord) const {
  return positions_[free_positions_.at(coord)].kind == Kind::FreeDiag;
}

template <class PsiMat>
bool PsiSampler::complete_from(std::size_t start, PsiMat& psi, Eigen::MatrixXd& phi,
                               Eigen::VectorXd& theta) const {
  for (std::size_t idx = start; idx < positions_.size(); ++idx) {
    const Position& pos = positions_[idx];
    const int a = pos.a;
    const int b = pos.b;
    if (a == b) {
      double s = 0.0;
      for (int k = 0; k < a; ++k) s += phi(k, a) * phi(k, a);
      if (pos.kind == Kind::FreeDiag) {
        phi(a, a) = psi(a, a) * q_(a, a);
        theta(pos.cls) = s + phi(a, a) * phi(a, a);
      } else {
        const double rest = theta(pos.cls) - s;
        if (!(rest > 0.0)) return false;
        phi(a, a) = std::sqrt(rest);
        psi(a, a) = phi(a, a) / q_(a, a);
      }
      continue;
    }
    double c = 0.0;
    for (int k = 0; k < a; ++k) c += phi(k, a) * phi(k, b);
    double t = 0.0;
    for (int m = a; m < b; ++m) t += psi(a, m) * q_(m, b);
    if (pos.kind == Kind::FreeOff) {
      phi(a, b) = t + psi(a, b) * q_(b, b);
      theta(pos.cls) = phi(a, a) * phi(a, b) + c;
    } else {
      const double target = pos.kind == Kind::Zero ? 0.0 : theta(pos.cls);
      phi(a, b) = (target - c) / phi(a, a);
      psi(a, b) = (phi(a, b) - t) / q_(b, b);
    }
  }
  return true;
}

template <class PsiMat>
double PsiSampler::log_target_of(const PsiMat& psi) const {
  const int p = spec_.dim();
  double lt = 0.0;
  for (int a = 0; a < p; ++a) {
    lt += diag_exponent_(a) * std::log(psi(a, a));
    for (int b = a; b < p; ++b) lt -= 0.5 * psi(a, b) * psi(a, b);
  }
  return lt;
}

ChainState PsiSampler::init(std::uint64_t seed) const { return init(initial_theta(spec_), seed); }

ChainState PsiSampler::init(const Eigen::VectorXd& theta, std::uint64_t seed) const {
  const int p = spec_.dim();
  const Eigen::MatrixXd k = k_of_theta(spec_, theta);
  auto llt = linalg::cholesky(k);
  if (!llt) throw NotPositiveDefinite("initial theta outside the cone");
  const Eigen::MatrixXd phi = llt->matrixU();
  Eigen::MatrixXd psi = q_.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(phi);

  ChainState s;
  s.psi = psi.triangularView<Eigen::Upper>();
  s.phi = Eigen::MatrixXd::Zero(p, p);
  s.theta = theta;
  if (!complete_from(0, s.psi, s.phi, s.theta)) {
    throw NumericalError("psi sampler: could not complete the initial state");
  }
  s.log_target = log_target_of(s.psi);
  s.psi_work = s.psi;
  s.phi_work = s.phi;
  s.theta_work = s.theta;
  const int m = num_coordinates();
  s.step_sizes.resize(m);
  for (int c = 0; c < m; ++c) s.step_sizes(c) = is_free_diagonal(c) ? 0.3 : 1.0;
  s.accepts.assign(m, 0);
  s.proposals.assign(m, 0);
  s.indep_trials.assign(m, 0);
  s.indep_accepts.assign(m, 0);
  s.independent.assign(m, 0);
  s.rng.seed(seed);
  return s;
}

void PsiSampler::step(ChainState& s) const {
  const int m = num_coordinates();
  if (m == 0) return;
  const int c = s.next_coord;
  s.next_coord = (c + 1) % m;
  const std::size_t idx = free_positions_[c];
  const Position& pos = positions_[idx];

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double current = s.psi(pos.a, pos.b);
  double proposed = 0.0;
  double log_hastings = 0.0;
  const bool diagonal = pos.kind == Kind::FreeDiag;
  // During burn-in the two kernels alternate; afterwards each coordinate
  // keeps the one chosen by end_adaptation().
  const bool independent = s.adapting ? (s.indep_trials[c] < s.proposals[c] - s.indep_trials[c])
                                      : s.independent[c] != 0;
  if (independent) {
    // Draw from the free factor psi^e exp(-psi^2/2) of the target, so only
    // the completed entries enter the acceptance ratio.
    const double e = diag_exponent_(pos.a);
    if (diagonal) {
      std::chi_squared_distribution<double> chi2(e + 1.0);
      proposed = std::sqrt(chi2(s.rng));
      log_hastings = e * (std::log(current) - std::log(proposed));
    } else {
      std::normal_distribution<double> normal(0.0, 1.0);
      proposed = normal(s.rng);
    }
    log_hastings += 0.5 * (proposed * proposed - current * current);
  } else if (diagonal) {
    // Scaled chi proposal: psi'^2 = psi^2 * chi2_df / df, relative sd of
    // psi^2 equal to the step size.
    const double rel = s.step_sizes(c);
    const double df = 2.0 / (rel * rel);
    std::chi_squared_distribution<double> chi2(df);
    proposed = current * std::sqrt(chi2(s.rng) / df);
    if (proposed > 0.0 && std::isfinite(proposed)) {
      log_hastings = log_scaled_chi(proposed, current, df) - log_scaled_chi(current, proposed, df);
    }
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    proposed = current + s.step_sizes(c) * normal(s.rng);
  }
  const double u = unif(s.rng);
  ++s.proposals[c];
  if (independent && s.adapting) ++s.indep_trials[c];

  bool accepted = false;
  if (std::isfinite(proposed) && (!diagonal || proposed > 0.0)) {
    s.psi_work = s.psi;
    s.phi_work = s.phi;
    s.theta_work = s.theta;
    s.psi_work(pos.a, pos.b) = proposed;
    if (complete_from(idx, s.psi_work, s.phi_work, s.theta_work)) {
      const double lt = log_target_of(s.psi_work);
      if (std::isfinite(lt) && std::isfinite(log_hastings) &&
          std::log(u) < lt - s.log_target + log_hastings) {
        accepted = true;
        s.psi.swap(s.psi_work);
        s.phi.swap(s.phi_work);
        s.theta.swap(s.theta_work);
        s.log_target = lt;
        ++s.accepts[c];
      }
    } else {
      ++s.completion_failures;
    }
  }
  if (independent) {
    if (s.adapting && accepted) ++s.indep_accepts[c];
  } else {
    adapt(s, c, accepted, diagonal ? kMaxRelStep : kMaxStep, s.proposals[c] - s.indep_trials[c]);
  }
}

void PsiSampler::end_adaptation(ChainState& s) const {
  for (int c = 0; c < num_coordinates(); ++c) {
    const double rate = s.indep_trials[c] > 0 ? static_cast<double>(s.indep_accepts[c]) / s.indep_trials[c] : 0.0;
    s.independent[c] = rate >= kIndependentAccept ? 1 : 0;
  }
  s.adapting = false;
  s.reset_counters();
}

bool PsiSampler::complete(ChainState& s) const {
  return complete_from(0, s.psi, s.phi, s.theta);
}

double PsiSampler::fresh_log_target(const ChainState& s) const {
  auto psi = s.psi;
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(spec_.dim(), spec_.dim());
  Eigen::VectorXd theta = s.theta;
  if (!complete_from(0, psi, phi, theta)) return kNegInf;
  return log_target_of(psi);
}

Eigen::MatrixXd PsiSampler::k_of_psi(const ChainState& s) const {
  const Eigen::MatrixXd phi = s.phi.triangularView<Eigen::Upper>();
  return phi.transpose() * phi;
}

// ---------------------------------------------------------------------------

namespace {

template <class Sampler>
DrawSummary run_chain(const Sampler& sampler, const RconSpec& spec, const SamplerConfig& cfg,
                      std::uint64_t seed) {
  ChainState state = sampler.init(seed);
  const int coords = sampler.num_coordinates();
  const int m = spec.num_params();
  const int retained_target = (cfg.iters + cfg.thin - 1) / cfg.thin;
  const int batches = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(retained_target))));
  const int batch_size = std::max(1, retained_target / batches);

  DrawSummary out;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd batch_sum = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::VectorXd> batch_means;
  int in_batch = 0;
  long steps = 0;

  state.adapting = cfg.burn_in > 0;
  const int total = cfg.burn_in + cfg.iters;
  for (int it = 0; it < total; ++it) {
    if (it == cfg.burn_in) sampler.end_adaptation(state);
    for (int c = 0; c < coords; ++c) {
      sampler.step(state);
      if (++steps % kCacheCheckEvery == 0) {
        const double fresh = sampler.fresh_log_target(state);
        const double err = std::abs(fresh - state.log_target) / std::max(1.0, std::abs(fresh));
        out.max_cache_error = std::max(out.max_cache_error, err);
        if (!(err <= kCacheTol)) {
          throw NumericalError("sampler log-target cache drifted (relative error " +
                               std::to_string(err) + ")");
        }
      }
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      sum += state.theta;
      ++out.retained;
      if (cfg.keep_draws) out.draws.push_back(state.theta);
      batch_sum += state.theta;
      if (++in_batch == batch_size) {
        batch_means.push_back(batch_sum / batch_size);
        batch_sum.setZero();
        in_batch = 0;
      }
    }
  }

  out.theta_mean = sum / out.retained;
  out.k_mean = k_of_theta(spec, out.theta_mean);
  out.theta_mc_se = Eigen::VectorXd::Zero(m);
  const auto nb = static_cast<double>(batch_means.size());
  if (batch_means.size() >= 2) {
    Eigen::VectorXd bm_mean = Eigen::VectorXd::Zero(m);
    for (const auto& b : batch_means) bm_mean += b;
    bm_mean /= nb;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
    for (const auto& b : batch_means) var += (b - bm_mean).cwiseAbs2();
    var /= (nb - 1.0);
    out.theta_mc_se = (var / nb).cwiseSqrt();
  }
  out.accept_rate.resize(coords);
  for (int c = 0; c < coords; ++c) {
    out.accept_rate(c) =
        state.proposals[c] > 0 ? static_cast<double>(state.accepts[c]) / state.proposals[c] : 0.0;
  }
  out.completion_failures = state.completion_failures;
  out.independent_coords = static_cast<int>(std::count(state.independent.begin(), state.independent.end(), 1));
  return out;
}

}  // namespace

DrawSummary sample(const RconSpec& spec, const CgwParams& params, const SamplerConfig& cfg,
                   std::uint64_t seed) {
  if (cfg.iters < 1) throw InvalidArgument("sampler needs iters >= 1");
  if (cfg.burn_in < 0) throw InvalidArgument("sampler needs burn_in >= 0");
  if (cfg.thin < 1) throw InvalidArgument("sampler needs thin >= 1");
  if (cfg.mode == SamplerMode::Psi) {
    PsiSampler sampler(spec, params);
    return run_chain(sampler, spec, cfg, seed);
  }
  RwSampler sampler(spec, params);
  return run_chain(sampler, spec, cfg, seed);
}

}  // namespace rcon
