#include "gss/cacgmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "gss/linalg.hpp"
#include "gss/parallel.hpp"

namespace gss {

namespace {

// log of Gamma(D) / (2 pi^D), the normalizer of the complex angular central
// Gaussian on the unit sphere in C^D.
Real log_normalizer(Eigen::Index dim) {
  const auto d = static_cast<Real>(dim);
  return std::lgamma(d) - std::log(2.0) - d * std::log(std::numbers::pi);
}

std::vector<std::string> class_names(const ActivityPattern& act, bool include_noise) {
  std::vector<std::string> names = act.speakers;
  if (include_noise) names.push_back(kNoiseClass);
  return names;
}

// Trace-normalized, loaded shape matrix from the weighted scatter
// dim * sum_t w(t) y y^H / mass.
ComplexMatrix shape_update(const ComplexMatrix& y, const RealVector& weight, Real mass,
                           Real regularization) {
  const Eigen::Index dim = y.rows();
  ComplexMatrix b = ComplexMatrix::Identity(dim, dim);
  if (mass > std::numeric_limits<Real>::min() && weight.maxCoeff() > 0) {
    const ComplexMatrix yw = y * weight.cwiseSqrt().asDiagonal();
    ComplexMatrix scatter = ComplexMatrix::Zero(dim, dim);
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(yw);
    b = scatter.selfadjointView<Eigen::Lower>();
    b *= static_cast<Real>(dim) / mass;
  }
  b = linalg::hermitian_part(b);
  Real tr = linalg::real_trace(b);
  if (!(tr > 0) || !std::isfinite(tr)) {
    b.setIdentity();
    tr = static_cast<Real>(dim);
  }
  b *= static_cast<Real>(dim) / tr;
  b.diagonal().array() += Complex(regularization);
  b *= static_cast<Real>(dim) / linalg::real_trace(b);
  return b;
}

// M-step for the shapes of one frequency. gamma and quad are frames x classes;
// flagged frames are excluded.
std::vector<ComplexMatrix> m_step_bin(const ComplexMatrix& y, const BoolMatrix& flags,
                                      Eigen::Index f, const RealMatrix& gamma,
                                      const RealMatrix& quad, Real regularization) {
  const Eigen::Index frames = y.cols();
  std::vector<ComplexMatrix> shapes;
  shapes.reserve(static_cast<std::size_t>(gamma.cols()));
  RealVector weight(frames);
  for (Eigen::Index k = 0; k < gamma.cols(); ++k) {
    Real mass = 0;
    for (Eigen::Index t = 0; t < frames; ++t) {
      if (flags(t, f)) {
        weight(t) = 0;
        continue;
      }
      weight(t) = gamma(t, k) / quad(t, k);
      mass += gamma(t, k);
    }
    shapes.push_back(shape_update(y, weight, mass, regularization));
  }
  return shapes;
}

void check_shapes(const CacgmmState& state, const NormalizedBins& obs,
                  const BoolMatrix& admissible) {
  const auto freqs = static_cast<Eigen::Index>(obs.bins.size());
  const auto classes = static_cast<Eigen::Index>(state.classes.size());
  if (static_cast<Eigen::Index>(state.shape.size()) != freqs)
    throw Error("em_step: state and observation frequency counts differ");
  if (admissible.cols() != classes || state.weights.cols() != classes)
    throw Error("em_step: class count mismatch");
  if (freqs > 0 && (admissible.rows() != obs.bins.front().cols() ||
                    state.weights.rows() != admissible.rows()))
    throw Error("em_step: frame count mismatch");
}

}  // namespace

Eigen::Index MaskSet::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < classes.size(); ++k)
    if (classes[k] == name) return static_cast<Eigen::Index>(k);
  return -1;
}

BoolMatrix class_activity(const ActivityPattern& act, bool include_noise) {
  const Eigen::Index speakers = act.active.rows();
  BoolMatrix out(act.frames(), speakers + (include_noise ? 1 : 0));
  out.leftCols(speakers) = act.active.transpose();
  if (include_noise) out.col(speakers).setConstant(true);
  return out;
}

MaskSet init_posteriors(const ActivityPattern& act, Eigen::Index frames, Eigen::Index frequencies,
                        bool include_noise) {
  if (act.frames() != frames)
    throw Error("init_posteriors: activity has " + std::to_string(act.frames()) +
                " frames, expected " + std::to_string(frames));
  const BoolMatrix admissible = class_activity(act, include_noise);
  MaskSet out;
  out.classes = class_names(act, include_noise);
  out.gamma.assign(out.classes.size(), RealMatrix::Zero(frames, frequencies));
  for (Eigen::Index t = 0; t < frames; ++t) {
    const auto count = admissible.row(t).count();
    if (count == 0)
      throw Error("init_posteriors: no class is active at frame " + std::to_string(t) +
                  "; include the noise class");
    for (Eigen::Index k = 0; k < admissible.cols(); ++k)
      if (admissible(t, k)) out.gamma[static_cast<std::size_t>(k)].row(t).setConstant(1.0 / count);
  }
  return out;
}

CacgmmState initial_state(const NormalizedBins& obs, const MaskSet& posteriors,
                          const BoolMatrix& admissible, Real inverse_regularization) {
  const auto freqs = static_cast<Eigen::Index>(obs.bins.size());
  const Eigen::Index classes = posteriors.class_count();
  const Eigen::Index frames = posteriors.frames();

  CacgmmState state;
  state.classes = posteriors.classes;
  state.shape.resize(static_cast<std::size_t>(freqs));
  parallel_for(static_cast<std::size_t>(freqs), [&](std::size_t fi) {
    const auto f = static_cast<Eigen::Index>(fi);
    RealMatrix gamma(frames, classes);
    for (Eigen::Index k = 0; k < classes; ++k)
      gamma.col(k) = posteriors.gamma[static_cast<std::size_t>(k)].col(f);
    // Identity shapes make every quadratic form of a unit vector equal one.
    const RealMatrix quad = RealMatrix::Ones(frames, classes);
    state.shape[fi] = m_step_bin(obs.bins[fi], obs.zero_flags, f, gamma, quad,
                                 inverse_regularization);
  });

  state.weights = RealMatrix::Zero(frames, classes);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index k = 0; k < classes; ++k)
      state.weights(t, k) = posteriors.gamma[static_cast<std::size_t>(k)].row(t).mean();
    for (Eigen::Index k = 0; k < classes; ++k)
      if (!admissible(t, k)) state.weights(t, k) = 0;
    const Real total = state.weights.row(t).sum();
    if (total > 0) state.weights.row(t) /= total;
  }
  return state;
}

EmStepResult em_step(const CacgmmState& state, const NormalizedBins& obs,
                     const BoolMatrix& admissible, Real inverse_regularization) {
  check_shapes(state, obs, admissible);
  const auto freqs = static_cast<Eigen::Index>(obs.bins.size());
  const Eigen::Index classes = admissible.cols();
  const Eigen::Index frames = admissible.rows();
  const Eigen::Index dim = freqs > 0 ? obs.bins.front().rows() : 0;
  const Real log_c = log_normalizer(dim);
  const Real minus_inf = -std::numeric_limits<Real>::infinity();

  RealMatrix log_weights(frames, classes);
  for (Eigen::Index t = 0; t < frames; ++t)
    for (Eigen::Index k = 0; k < classes; ++k) {
      const Real w = state.weights(t, k);
      log_weights(t, k) = (admissible(t, k) && w > 0) ? std::log(w) : minus_inf;
    }

  EmStepResult result;
  result.masks.classes = state.classes;
  result.masks.gamma.assign(static_cast<std::size_t>(classes), RealMatrix::Zero(frames, freqs));
  result.state.classes = state.classes;
  result.state.shape.resize(static_cast<std::size_t>(freqs));
  std::vector<Real> bin_likelihood(static_cast<std::size_t>(freqs), 0.0);

  parallel_for(static_cast<std::size_t>(freqs), [&](std::size_t fi) {
    const auto f = static_cast<Eigen::Index>(fi);
    const ComplexMatrix& y = obs.bins[fi];
    RealMatrix quad(frames, classes);
    RealVector log_det(classes);
    for (Eigen::Index k = 0; k < classes; ++k) {
      const auto llt = linalg::loaded_llt(state.shape[fi][static_cast<std::size_t>(k)], 0.0);
      log_det(k) = linalg::log_det(llt);
      const ComplexMatrix whitened = llt.matrixL().solve(y);
      quad.col(k) = whitened.colwise().squaredNorm().transpose();
    }

    RealMatrix gamma = RealMatrix::Zero(frames, classes);
    RealVector joint(classes);
    Real likelihood = 0;
    for (Eigen::Index t = 0; t < frames; ++t) {
      if (obs.zero_flags(t, f)) {
        const auto count = admissible.row(t).count();
        for (Eigen::Index k = 0; k < classes; ++k)
          if (admissible(t, k)) gamma(t, k) = 1.0 / static_cast<Real>(count);
        continue;
      }
      Real peak = minus_inf;
      for (Eigen::Index k = 0; k < classes; ++k) {
        joint(k) = log_weights(t, k) == minus_inf
                       ? minus_inf
                       : log_weights(t, k) + log_c - log_det(k) -
                             static_cast<Real>(dim) * std::log(quad(t, k));
        peak = std::max(peak, joint(k));
      }
      if (peak == minus_inf) throw NumericalError("em_step: no admissible class carries weight");
      Real total = 0;
      for (Eigen::Index k = 0; k < classes; ++k) {
        const Real e = joint(k) == minus_inf ? 0.0 : std::exp(joint(k) - peak);
        gamma(t, k) = e;
        total += e;
      }
      gamma.row(t) /= total;
      likelihood += peak + std::log(total);
    }
    bin_likelihood[fi] = likelihood;
    for (Eigen::Index k = 0; k < classes; ++k)
      result.masks.gamma[static_cast<std::size_t>(k)].col(f) = gamma.col(k);
    result.state.shape[fi] = m_step_bin(y, obs.zero_flags, f, gamma, quad, inverse_regularization);
  });

  // Frequency-shared weights; the reduction runs serially in bin order.
  result.state.weights = RealMatrix::Zero(frames, classes);
  for (Eigen::Index t = 0; t < frames; ++t) {
    Eigen::Index used = 0;
    for (Eigen::Index f = 0; f < freqs; ++f) {
      if (obs.zero_flags(t, f)) continue;
      ++used;
      for (Eigen::Index k = 0; k < classes; ++k)
        result.state.weights(t, k) += result.masks.gamma[static_cast<std::size_t>(k)](t, f);
    }
    const auto count = admissible.row(t).count();
    for (Eigen::Index k = 0; k < classes; ++k) {
      if (!admissible(t, k))
        result.state.weights(t, k) = 0;
      else if (used == 0)
        result.state.weights(t, k) = 1.0 / static_cast<Real>(count);
    }
    const Real total = result.state.weights.row(t).sum();
    if (total > 0) result.state.weights.row(t) /= total;
  }

  for (Real v : bin_likelihood) result.log_likelihood += v;
  return result;
}

EmStepResult em_step(const CacgmmState& state, const NormalizedBins& obs,
                     const ActivityPattern& act, const GssConfig& cfg) {
  return em_step(state, obs, class_activity(act, cfg.include_noise_class),
                 cfg.inverse_regularization);
}

GssResult run_gss_traced(const MultiChannelSpectrogram& s, const ActivityPattern& act,
                         const GssConfig& cfg, const GssObserver& observer) {
  if (cfg.iterations < 0) throw ConfigError("iterations", "must be >= 0");
  if (act.frames() != s.frames())
    throw Error("run_gss: activity covers " + std::to_string(act.frames()) +
                " frames, spectrogram has " + std::to_string(s.frames()));
  GssResult result;
  result.masks = init_posteriors(act, s.frames(), s.frequencies(), cfg.include_noise_class);
  if (cfg.iterations == 0) return result;

  const NormalizedBins obs = unit_normalize_bins(s);
  const BoolMatrix admissible = class_activity(act, cfg.include_noise_class);
  CacgmmState state = initial_state(obs, result.masks, admissible, cfg.inverse_regularization);
  for (int it = 1; it <= cfg.iterations; ++it) {
    EmStepResult step = em_step(state, obs, admissible, cfg.inverse_regularization);
    result.log_likelihoods.push_back(step.log_likelihood);
    if (observer) observer(it, step);
    state = std::move(step.state);
    result.masks = std::move(step.masks);
  }
  return result;
}

MaskSet run_gss(const MultiChannelSpectrogram& s, const ActivityPattern& act,
                const GssConfig& cfg) {
  return run_gss_traced(s, act, cfg).masks;
}

TargetMasks extract_masks(const MaskSet& masks, const std::string& target) {
  const Eigen::Index index = masks.index_of(target);
  if (index < 0) throw Error("extract_masks: unknown class " + target);
  TargetMasks out;
  out.target = masks.gamma[static_cast<std::size_t>(index)];
  out.distortion = RealMatrix::Zero(masks.frames(), masks.frequencies());
  for (Eigen::Index k = 0; k < masks.class_count(); ++k)
    if (k != index) out.distortion += masks.gamma[static_cast<std::size_t>(k)];
  return out;
}

}  // namespace gss
