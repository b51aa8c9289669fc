#include "hftp/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hftp/error.hpp"
#include "hftp/parallel.hpp"
#include "hftp/permute.hpp"
#include "hftp/probe_brain.hpp"
#include "hftp/stats.hpp"

namespace hftp {

namespace {

bool in_band(double f, const Band& b) { return f >= b.low - 1e-9 && f <= b.high + 1e-9; }

std::vector<std::size_t> band_bins(std::size_t n, double rate_hz, const Band& band) {
  std::vector<std::size_t> bins;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    if (in_band(static_cast<double>(k) * rate_hz / static_cast<double>(n), band)) bins.push_back(k);
  }
  if (bins.empty()) throw FrequencyGridError("no model frequency bins inside the encoding band");
  return bins;
}

template <class T>
std::vector<T> gather(std::span<const T> v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

void require_finite(std::span<const Row2> X, std::span<const double> y) {
  for (const auto& r : X) {
    if (!std::isfinite(r[0]) || !std::isfinite(r[1])) throw ValidationError("ridge: non-finite feature");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("ridge: non-finite target");
  }
}

}  // namespace

std::optional<EncodingDesign> build_model_features(std::span<const ActivationTensor> blocks, std::size_t window,
                                                   std::span<const UnitId> members, Band band) {
  if (members.empty()) return std::nullopt;
  if (blocks.empty()) throw IncompleteDesignError("build_model_features: no blocks");
  EncodingDesign d;
  d.n_blocks = blocks.size();
  const double rate = blocks.front().rate_hz();
  const auto bins = band_bins(window, rate, band);
  for (auto k : bins) d.freqs.push_back(static_cast<double>(k) * rate / static_cast<double>(window));
  for (const auto& b : blocks) {
    if (b.rate_hz() != rate || b.n_timepoints() % window != 0 || b.n_timepoints() == 0) {
      throw ValidationError("build_model_features: block is not a whole number of windows at the shared rate");
    }
    const std::size_t T = b.n_timepoints() / window;
    std::vector<double> avg(window, 0.0);
    for (const auto& u : members) {
      auto s = b.series(u);
      for (std::size_t i = 0; i < s.size(); ++i) avg[i % window] += s[i];
    }
    const double scale = 1.0 / static_cast<double>(members.size() * T);
    for (auto& v : avg) v *= scale;
    const auto X = dft_full(avg);
    for (auto k : bins) d.X.push_back({X[k].real(), X[k].imag()});
  }
  return d;
}

std::size_t nearest_index(std::span<const double> grid, double f) {
  if (grid.empty()) throw FrequencyGridError("nearest_index: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i] - f) < std::abs(grid[best] - f)) best = i;
  }
  return best;
}

TargetVector build_brain_targets(std::span<const TrialRecording> blocks, std::size_t channel,
                                 std::span<const double> model_freqs) {
  TargetVector t;
  const double half_spacing = model_freqs.size() > 1 ? (model_freqs[1] - model_freqs[0]) / 2.0 : INFINITY;
  for (const auto& b : blocks) {
    const auto spec = itpc(b, channel);
    for (double f : model_freqs) {
      const auto i = nearest_index(spec.freqs, f);
      const double dist = std::abs(spec.freqs[i] - f);
      t.max_distance_hz = std::max(t.max_distance_hz, dist);
      if (dist > half_spacing + 1e-12) t.alignment_warning = true;
      t.y.push_back(spec.itpc[i]);
    }
  }
  return t;
}

Row2 Standardizer::apply(const Row2& x) const { return {(x[0] - mean[0]) / sd[0], (x[1] - mean[1]) / sd[1]}; }

Standardizer fit_standardizer(std::span<const Row2> X) {
  Standardizer s;
  if (X.empty()) throw ValidationError("standardizer: no rows");
  for (int c = 0; c < 2; ++c) {
    std::vector<double> col;
    for (const auto& r : X) col.push_back(r[c]);
    s.mean[c] = stats::mean(col);
    const double sd = stats::stddev(col, 0);
    s.sd[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

RidgeFit ridge_fit(std::span<const Row2> X, std::span<const double> y, double alpha) {
  if (X.size() != y.size() || X.empty()) throw ValidationError("ridge_fit: X and y must be non-empty and equally long");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("ridge_fit: alpha must be positive");
  require_finite(X, y);
  const double n = static_cast<double>(X.size());
  Row2 xm{};
  double ym = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    xm[0] += X[i][0];
    xm[1] += X[i][1];
    ym += y[i];
  }
  xm[0] /= n;
  xm[1] /= n;
  ym /= n;
  double a00 = alpha, a01 = 0.0, a11 = alpha, b0 = 0.0, b1 = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double u = X[i][0] - xm[0], v = X[i][1] - xm[1], w = y[i] - ym;
    a00 += u * u;
    a01 += u * v;
    a11 += v * v;
    b0 += u * w;
    b1 += v * w;
  }
  const double det = a00 * a11 - a01 * a01;
  RidgeFit f;
  f.alpha = alpha;
  f.beta = {(a11 * b0 - a01 * b1) / det, (a00 * b1 - a01 * b0) / det};
  f.intercept = ym - f.beta[0] * xm[0] - f.beta[1] * xm[1];
  return f;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> g(13);
  for (int i = 0; i < 13; ++i) g[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + 0.5 * i);
  return g;
}

double ridge_cv_alpha(std::span<const Row2> X, std::span<const double> y, std::span<const double> grid,
                      std::size_t folds) {
  if (grid.empty()) throw ConfigError("alpha grid is empty");
  if (X.size() != y.size()) throw ValidationError("ridge_cv_alpha: length mismatch");
  std::vector<double> alphas(grid.begin(), grid.end());
  std::sort(alphas.begin(), alphas.end());
  if (alphas.size() == 1) return alphas.front();
  const std::size_t n = X.size();
  folds = std::min(folds, n);
  if (folds < 2) throw ValidationError("ridge_cv_alpha: need at least 2 training rows");

  std::vector<std::size_t> bounds{0};
  for (std::size_t f = 0; f < folds; ++f) bounds.push_back(bounds.back() + n / folds + (f < n % folds ? 1 : 0));

  double best_alpha = alphas.front();
  double best_mse = INFINITY;
  for (double a : alphas) {
    double mse_sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<Row2> xt;
      std::vector<double> yt;
      for (std::size_t i = 0; i < n; ++i) {
        if (i >= bounds[f] && i < bounds[f + 1]) continue;
        xt.push_back(X[i]);
        yt.push_back(y[i]);
      }
      const auto st = fit_standardizer(xt);
      for (auto& r : xt) r = st.apply(r);
      const auto fit = ridge_fit(xt, yt, a);
      double se = 0.0;
      for (std::size_t i = bounds[f]; i < bounds[f + 1]; ++i) {
        const double e = fit.predict(st.apply(X[i])) - y[i];
        se += e * e;
      }
      mse_sum += se / static_cast<double>(bounds[f + 1] - bounds[f]);
    }
    const double mse = mse_sum / static_cast<double>(folds);
    if (mse < best_mse) {
      best_mse = mse;
      best_alpha = a;
    }
  }
  return best_alpha;
}

SplitResult evaluate_split(std::span<const Row2> X, std::span<const double> y, std::span<const std::size_t> train,
                           std::span<const std::size_t> test, std::span<const double> grid) {
  SplitResult r;
  auto xt = gather(X, train);
  const auto yt = gather(y, train);
  r.standardizer = fit_standardizer(xt);
  r.alpha = ridge_cv_alpha(xt, yt, grid);
  for (auto& row : xt) row = r.standardizer.apply(row);
  r.fit = ridge_fit(xt, yt, r.alpha);
  std::vector<double> pred, actual;
  for (auto i : test) {
    pred.push_back(r.fit.predict(r.standardizer.apply(X[i])));
    actual.push_back(y[i]);
  }
  const auto rc = stats::spearman(pred, actual);
  r.degenerate = rc.degenerate;
  r.rho = rc.degenerate ? 0.0 : rc.rho;
  return r;
}

std::array<std::vector<std::size_t>, 2> random_split(std::size_t n, double test_frac, std::uint64_t seed) {
  if (!(test_frac > 0.0 && test_frac < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
  const auto n_test = static_cast<std::size_t>(std::ceil(test_frac * static_cast<double>(n) - 1e-9));
  if (n_test < 2 || n - n_test < 2) throw ValidationError("random_split: too few rows for a train/test split");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  shuffle_in_place(std::span<std::size_t>(idx), rng);
  std::array<std::vector<std::size_t>, 2> out;
  out[1].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  out[0].assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(out[0].begin(), out[0].end());
  std::sort(out[1].begin(), out[1].end());
  return out;
}

PredictiveScore predictive_score(std::span<const Row2> X, std::span<const double> y, std::uint64_t seed,
                                 const PredictiveOptions& opts) {
  if (X.size() != y.size()) throw ValidationError("predictive_score: length mismatch");
  if (X.size() < 10) throw ValidationError("predictive_score: need at least 10 rows, got " + std::to_string(X.size()));
  if (opts.n_splits == 0) throw ConfigError("n_splits must be at least 1");
  require_finite(X, y);
  PredictiveScore out;
  for (std::size_t s = 0; s < opts.n_splits; ++s) {
    const auto split = random_split(X.size(), opts.test_frac, derive_seed(seed, s));
    const auto r = evaluate_split(X, y, split[0], split[1], opts.grid);
    out.split_scores.push_back(r.rho);
    out.alphas.push_back(r.alpha);
    if (r.degenerate) ++out.n_degenerate;
  }
  out.p_score = stats::mean(out.split_scores);
  return out;
}

std::vector<NeuronPool> encoding_pools(StimulusClass corpus) {
  switch (corpus) {
    case StimulusClass::sentence: return {NeuronPool::sentence, NeuronPool::phrase, NeuronPool::both};
    case StimulusClass::phrase: return {NeuronPool::phrase};
    case StimulusClass::random: return {NeuronPool::pooled};
  }
  return {NeuronPool::pooled};
}

std::vector<GroupSummary> aggregate_predictive(const ScoreMatrix& scores, std::size_t k,
                                               const std::map<std::size_t, UnitClass>& channel_class) {
  std::vector<GroupSummary> out;
  for (const auto& g : channel_groups()) out.push_back(summarize_group(scores, g, k, channel_class));
  return out;
}

EncodingReport encode(const ModelConditions& model, const BrainConditions& brain, const NeuronClassification& neurons,
                      const std::map<std::size_t, UnitClass>& channel_class, const EncodeOptions& opts) {
  const auto& ref = model.at(0);
  if (neurons.n_layers != ref.n_layers() || neurons.n_neurons != ref.n_neurons()) {
    throw ValidationError("neuron classification shape does not match the model tensors");
  }
  EncodingReport rep;
  rep.corpus = opts.corpus;
  rep.k = opts.k;

  const std::size_t ia = condition_index({opts.corpus, Split::A});
  const std::size_t ib = condition_index({opts.corpus, Split::B});
  const std::array<ActivationTensor, 2> mblocks{model.at(ia), model.at(ib)};
  const std::array<TrialRecording, 2> bblocks{brain.at(ia), brain.at(ib)};

  std::vector<double> grid;
  for (auto k : band_bins(model.window, ref.rate_hz(), opts.band)) {
    grid.push_back(static_cast<double>(k) * ref.rate_hz() / static_cast<double>(model.window));
  }
  const auto& channels = bblocks[0].channels();
  std::vector<TargetVector> targets(channels.size());
  parallel_for(channels.size(), opts.workers, [&](std::size_t c) { targets[c] = build_brain_targets(bblocks, c, grid); });
  for (const auto& t : targets) rep.n_alignment_warnings += t.alignment_warning ? 1 : 0;

  for (auto pool : encoding_pools(opts.corpus)) {
    EncodingPool ep;
    ep.pool = pool;
    ep.scores.channels = channels;
    std::vector<EncodingDesign> designs;
    for (std::size_t l = 0; l < neurons.n_layers; ++l) {
      std::vector<UnitId> members;
      for (std::size_t k = 0; k < neurons.n_neurons; ++k) {
        if (pool_contains(pool, neurons.at({l, k}))) members.push_back({l, k});
      }
      auto d = build_model_features(mblocks, model.window, members, opts.band);
      if (!d) {
        ep.skipped_layers.push_back(l);
        continue;
      }
      ep.scores.layers.push_back(l);
      designs.push_back(std::move(*d));
    }
    ep.scores.score.assign(designs.size(), std::vector<double>(channels.size(), 0.0));
    std::vector<std::size_t> degenerate(designs.size() * channels.size(), 0);
    parallel_for(designs.size() * channels.size(), opts.workers, [&](std::size_t idx) {
      const std::size_t row = idx / channels.size(), col = idx % channels.size();
      const auto ps = predictive_score(designs[row].X, targets[col].y,
                                       derive_seed(opts.seed, ep.scores.layers[row], channels[col].channel_id),
                                       opts.predictive);
      ep.scores.score[row][col] = ps.p_score;
      degenerate[idx] = ps.n_degenerate;
    });
    ep.n_degenerate_splits = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
    ep.groups = aggregate_predictive(ep.scores, opts.k, channel_class);
    rep.pools.push_back(std::move(ep));
  }

  for (std::size_t gi = 0; gi < channel_groups().size(); ++gi) {
    std::vector<GroupSummary> per_pool;
    for (const auto& ep : rep.pools) per_pool.push_back(ep.groups[gi]);
    rep.class_mean[channel_groups()[gi]] = mean_of(per_pool);
  }
  return rep;
}

nlohmann::json to_json(const EncodingReport& r) {
  nlohmann::json j;
  j["corpus"] = std::string(to_string(r.corpus));
  j["k"] = r.k;
  j["n_alignment_warnings"] = r.n_alignment_warnings;
  nlohmann::json pools = nlohmann::json::object();
  for (const auto& p : r.pools) {
    nlohmann::json pj;
    pj["skipped_layers"] = p.skipped_layers;
    pj["n_degenerate_splits"] = p.n_degenerate_splits;
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& g : p.groups) groups[g.group] = to_json(g);
    pj["groups"] = groups;
    pools[std::string(to_string(p.pool))] = pj;
  }
  j["pools"] = pools;
  nlohmann::json cm = nlohmann::json::object();
  for (const auto& [g, m] : r.class_mean) cm[g] = to_json(m);
  j["class_mean"] = cm;
  return j;
}

}  // namespace hftp
