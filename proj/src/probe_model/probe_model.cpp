#include "hftp/probe_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hftp/error.hpp"
#include "hftp/parallel.hpp"
#include "hftp/permute.hpp"

namespace hftp {

std::string_view to_string(UnitClass c) {
  switch (c) {
    case UnitClass::none: return "none";
    case UnitClass::sentence: return "sentence";
    case UnitClass::phrase: return "phrase";
    case UnitClass::both: return "both";
  }
  return "none";
}

UnitClass parse_unit_class(std::string_view s) {
  if (s == "none") return UnitClass::none;
  if (s == "sentence") return UnitClass::sentence;
  if (s == "phrase") return UnitClass::phrase;
  if (s == "both") return UnitClass::both;
  throw FormatError("unknown unit class '" + std::string(s) + "'");
}

UnitClass combine_class(bool at_sentence_rate, bool at_phrase_rate) {
  if (at_sentence_rate && at_phrase_rate) return UnitClass::both;
  if (at_sentence_rate) return UnitClass::sentence;
  if (at_phrase_rate) return UnitClass::phrase;
  return UnitClass::none;
}

void validate(const PermutationOptions& o) {
  if (o.n_perm < 100) throw ConfigError("n_perm must be at least 100, got " + std::to_string(o.n_perm));
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

std::vector<PermutationResult> permutation_ci(std::span<const double> series, double rate_hz,
                                              std::span<const double> freqs, const PermutationOptions& opts,
                                              std::uint64_t stream_seed) {
  validate(opts);
  if (series.size() < 2) throw ValidationError("permutation_ci: need at least 2 samples");
  std::vector<BinProjector> proj;
  proj.reserve(freqs.size());
  for (double f : freqs) proj.emplace_back(series.size(), resolve_bin(series.size(), rate_hz, f, 1e-6));

  std::vector<PermutationResult> out(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    out[i].freq_hz = freqs[i];
    out[i].n_perm = opts.n_perm;
    out[i].observed = amp_value(proj[i].project(series), opts.mode);
  }

  std::vector<std::vector<double>> null(freqs.size(), std::vector<double>(opts.n_perm));
  std::vector<double> work(series.begin(), series.end());
  std::mt19937_64 rng(stream_seed);
  for (std::size_t p = 0; p < opts.n_perm; ++p) {
    shuffle_in_place(std::span<double>(work), rng);
    for (std::size_t i = 0; i < freqs.size(); ++i) null[i][p] = amp_value(proj[i].project(work), opts.mode);
  }
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    std::sort(null[i].begin(), null[i].end());
    out[i].ci_low = stats::quantile_sorted(null[i], opts.alpha / 2.0);
    out[i].ci_high = stats::quantile_sorted(null[i], 1.0 - opts.alpha / 2.0);
    out[i].significant = out[i].observed < out[i].ci_low || out[i].observed > out[i].ci_high;
  }
  return out;
}

PermutationResult permutation_ci(std::span<const double> series, double rate_hz, double f,
                                 const PermutationOptions& opts, std::uint64_t stream_seed) {
  return permutation_ci(series, rate_hz, std::span<const double>(&f, 1), opts, stream_seed).front();
}

std::vector<std::vector<PermutationResult>> scan_tensor(const ActivationTensor& t, std::span<const double> freqs,
                                                        const PermutationOptions& opts, std::size_t workers) {
  validate(opts);
  for (double f : freqs) resolve_bin(t.n_timepoints(), t.rate_hz(), f, 1e-6);
  const std::size_t n = t.n_units();
  std::vector<std::vector<PermutationResult>> out(freqs.size(), std::vector<PermutationResult>(n));
  parallel_for(n, workers, [&](std::size_t idx) {
    const UnitId u{idx / t.n_neurons(), idx % t.n_neurons()};
    auto series = t.series_f64(u);
    auto res = permutation_ci(series, t.rate_hz(), freqs, opts, derive_seed(opts.seed, u.layer, u.neuron));
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      res[i].unit = u;
      out[i][idx] = res[i];
    }
  });
  return out;
}

std::vector<UnitId> significant_units(std::span<const PermutationResult> results) {
  std::vector<UnitId> s;
  for (const auto& r : results) {
    if (r.significant) s.push_back(r.unit);
  }
  std::sort(s.begin(), s.end());
  return s;
}

std::vector<UnitId> significant_neurons(const ActivationTensor& t, double f, const PermutationOptions& opts,
                                        std::size_t workers) {
  auto scan = scan_tensor(t, std::span<const double>(&f, 1), opts, workers);
  return significant_units(scan.front());
}

ZPopulation parse_z_population(std::string_view s) {
  if (s == "all") return ZPopulation::all;
  if (s == "significant") return ZPopulation::significant;
  throw ConfigError("z_population must be 'all' or 'significant'");
}

ZScope parse_z_scope(std::string_view s) {
  if (s == "pooled") return ZScope::pooled;
  if (s == "per_layer") return ZScope::per_layer;
  throw ConfigError("z_scope must be 'pooled' or 'per_layer'");
}

std::string_view to_string(ZPopulation p) { return p == ZPopulation::all ? "all" : "significant"; }
std::string_view to_string(ZScope s) { return s == ZScope::pooled ? "pooled" : "per_layer"; }

double ZScoreTable::threshold(std::size_t layer) const {
  const std::size_t g = options.scope == ZScope::pooled ? 0 : layer;
  return mu[g] + 2.0 * sigma[g];
}

bool ZScoreTable::passes(const ZEntry& e) const {
  const double th = threshold(e.unit.layer);
  return std::isfinite(th) && e.z_dev >= th;
}

namespace {

struct Moments {
  double mean;
  double sd;
};

Moments moments(std::span<const double> x) { return {stats::mean(x), stats::stddev(x, 0)}; }

}  // namespace

ZScoreTable zscore_deviation(const ActivationTensor& exp, const ActivationTensor& ctrl, std::span<const UnitId> s,
                             double f, const ZOptions& opts) {
  if (exp.n_layers() != ctrl.n_layers() || exp.n_neurons() != ctrl.n_neurons() ||
      exp.n_timepoints() != ctrl.n_timepoints() || exp.rate_hz() != ctrl.rate_hz()) {
    throw ValidationError("zscore_deviation: experimental and control tensors differ in shape or rate");
  }
  if (s.size() < 3) {
    throw DegenerateError("population too small: " + std::to_string(s.size()) + " significant units at " +
                          std::to_string(f) + " Hz (need at least 3)");
  }
  std::vector<UnitId> members(s.begin(), s.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (const auto& u : members) {
    if (u.layer >= exp.n_layers() || u.neuron >= exp.n_neurons()) throw BoundsError("zscore_deviation: unit out of range");
  }

  const std::size_t n = exp.n_timepoints();
  const BinProjector proj(n, resolve_bin(n, exp.rate_hz(), f, 1e-6));
  auto amp = [&](const ActivationTensor& t, UnitId u) { return amp_value(proj.project(t.series_f64(u)), opts.mode); };

  // Population per scope group.
  const std::size_t n_groups = opts.scope == ZScope::pooled ? 1 : exp.n_layers();
  std::vector<std::vector<UnitId>> pop(n_groups);
  if (opts.population == ZPopulation::all) {
    for (std::size_t l = 0; l < exp.n_layers(); ++l) {
      for (std::size_t k = 0; k < exp.n_neurons(); ++k) pop[n_groups == 1 ? 0 : l].push_back({l, k});
    }
  } else {
    for (const auto& u : members) pop[n_groups == 1 ? 0 : u.layer].push_back(u);
  }

  ZScoreTable table;
  table.freq_hz = f;
  table.options = opts;
  table.mu.assign(n_groups, std::numeric_limits<double>::quiet_NaN());
  table.sigma.assign(n_groups, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> dev_of(exp.n_units(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> zexp_of(exp.n_units()), zctrl_of(exp.n_units());
  for (std::size_t g = 0; g < n_groups; ++g) {
    const auto& p = pop[g];
    if (p.size() < 3) continue;  // layer cannot be thresholded
    std::vector<double> ae(p.size()), ac(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      ae[i] = amp(exp, p[i]);
      ac[i] = amp(ctrl, p[i]);
    }
    const auto me = moments(ae), mc = moments(ac);
    if (me.sd == 0.0 || mc.sd == 0.0) {
      throw DegenerateError("degenerate population: zero amplitude variance at " + std::to_string(f) + " Hz in the " +
                            std::string(me.sd == 0.0 ? "experimental" : "control") + " group");
    }
    std::vector<double> dev(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::size_t idx = p[i].layer * exp.n_neurons() + p[i].neuron;
      zexp_of[idx] = (ae[i] - me.mean) / me.sd;
      zctrl_of[idx] = (ac[i] - mc.mean) / mc.sd;
      dev[i] = dev_of[idx] = zexp_of[idx] - zctrl_of[idx];
    }
    const auto md = moments(dev);
    table.mu[g] = md.mean;
    table.sigma[g] = md.sd;
  }

  for (const auto& u : members) {
    const std::size_t idx = u.layer * exp.n_neurons() + u.neuron;
    if (std::isnan(dev_of[idx])) continue;
    table.entries.push_back({u, zexp_of[idx], zctrl_of[idx], dev_of[idx]});
  }
  return table;
}

std::vector<UnitId> NeuronClassification::members(UnitClass c, std::optional<std::size_t> layer) const {
  std::vector<UnitId> out;
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (layer && *layer != l) continue;
    for (std::size_t k = 0; k < n_neurons; ++k) {
      if (classes[l * n_neurons + k] == c) out.push_back({l, k});
    }
  }
  return out;
}

namespace {

std::vector<bool> passing(const ZScoreTable& z, std::size_t n_layers, std::size_t n_neurons) {
  for (std::size_t g = 0; g < z.sigma.size(); ++g) {
    if (z.sigma[g] == 0.0) {
      throw DegenerateError("degenerate population: all z-score deviations equal at " + std::to_string(z.freq_hz) +
                            " Hz, so the 2-sigma threshold is undefined");
    }
  }
  std::vector<bool> out(n_layers * n_neurons, false);
  for (const auto& e : z.entries) {
    if (e.unit.layer >= n_layers || e.unit.neuron >= n_neurons) throw BoundsError("classify_neurons: unit out of range");
    if (z.passes(e)) out[e.unit.layer * n_neurons + e.unit.neuron] = true;
  }
  return out;
}

}  // namespace

NeuronClassification classify_neurons(const ZScoreTable& z1, const ZScoreTable& z2, std::size_t n_layers,
                                      std::size_t n_neurons) {
  const auto p1 = passing(z1, n_layers, n_neurons);
  const auto p2 = passing(z2, n_layers, n_neurons);
  NeuronClassification c;
  c.n_layers = n_layers;
  c.n_neurons = n_neurons;
  c.classes.resize(n_layers * n_neurons);
  for (std::size_t i = 0; i < c.classes.size(); ++i) c.classes[i] = combine_class(p1[i], p2[i]);
  return c;
}

std::size_t LayerDistribution::total_syntactic() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.n_syntactic();
  return n;
}

LayerDistribution layer_distribution(const NeuronClassification& c) {
  LayerDistribution d;
  d.rows.resize(c.n_layers);
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    auto& r = d.rows[l];
    r.layer = l;
    r.width = c.n_neurons;
    for (std::size_t k = 0; k < c.n_neurons; ++k) {
      switch (c.classes[l * c.n_neurons + k]) {
        case UnitClass::sentence: ++r.n_sentence; break;
        case UnitClass::phrase: ++r.n_phrase; break;
        case UnitClass::both: ++r.n_both; break;
        case UnitClass::none: break;
      }
    }
  }
  return d;
}

stats::Correlation covariance_trend(const LayerDistribution& d, bool inclusive) {
  std::vector<double> s, p;
  for (const auto& r : d.rows) {
    const double extra = inclusive ? static_cast<double>(r.n_both) : 0.0;
    s.push_back(static_cast<double>(r.n_sentence) + extra);
    p.push_back(static_cast<double>(r.n_phrase) + extra);
  }
  return stats::pearson(s, p);
}

std::vector<BilingualRow> bilingual_sets(const NeuronClassification& first, const NeuronClassification& second) {
  if (first.n_layers != second.n_layers || first.n_neurons != second.n_neurons) {
    throw ValidationError("bilingual_sets: classifications have different shapes");
  }
  std::vector<BilingualRow> rows(first.n_layers);
  for (std::size_t l = 0; l < first.n_layers; ++l) {
    rows[l].layer = l;
    for (std::size_t k = 0; k < first.n_neurons; ++k) {
      const std::size_t i = l * first.n_neurons + k;
      const bool a = first.classes[i] != UnitClass::none;
      const bool b = second.classes[i] != UnitClass::none;
      if (a && b) ++rows[l].shared;
      else if (a) ++rows[l].first_only;
      else if (b) ++rows[l].second_only;
    }
  }
  return rows;
}

}  // namespace hftp
