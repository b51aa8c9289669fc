#include "hftp/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "hftp/error.hpp"
#include "hftp/parallel.hpp"

namespace hftp {

namespace {

constexpr double kBandTopHz = 2.0;

std::string design_gap(std::size_t c) {
  return "incomplete design: condition '" + all_conditions()[c].name() + "' is missing";
}

ConditionLabel with_split(ConditionLabel c, Split s) {
  c.split = s;
  return c;
}

template <class T>
void place(std::array<std::optional<T>, kConditions>& slots, T value) {
  const std::size_t c = condition_index(value.condition());
  if (slots[c]) throw IncompleteDesignError("condition '" + all_conditions()[c].name() + "' supplied twice");
  slots[c].emplace(std::move(value));
}

std::vector<std::size_t> band_bins(std::size_t n, double rate_hz) {
  std::vector<std::size_t> bins;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * rate_hz / static_cast<double>(n);
    if (f <= kBandTopHz + 1e-9) bins.push_back(k);
  }
  if (bins.empty()) throw FrequencyGridError("no frequency bins in (0, 2] Hz for this window");
  return bins;
}

}  // namespace

const ActivationTensor& ModelConditions::at(std::size_t c) const {
  if (!cond[c]) throw IncompleteDesignError(design_gap(c));
  return *cond[c];
}

const TrialRecording& BrainConditions::at(std::size_t c) const {
  if (!cond[c]) throw IncompleteDesignError(design_gap(c));
  return *cond[c];
}

ModelConditions model_conditions(std::span<const ActivationTensor> inputs, const DesignOptions& opts) {
  ModelConditions m;
  for (const auto& t : inputs) {
    const std::size_t spu = samples_per_unit(t.rate_hz());
    m.window = opts.window_units * spu;
    auto trials = split_trials(t, opts.trial_units * spu);
    for (auto& tr : trials) tr = slice_last(tr, opts.window_units);
    if (t.condition().split) {
      place(m.cond, concat_time(trials, t.condition()));
      continue;
    }
    const auto halves = split_halves(trials.size(), opts.policy);
    for (Split s : {Split::A, Split::B}) {
      std::vector<ActivationTensor> part;
      for (auto i : halves[s == Split::A ? 0 : 1]) part.push_back(trials[i]);
      place(m.cond, concat_time(part, with_split(t.condition(), s)));
    }
  }
  for (std::size_t c = 0; c < kConditions; ++c) {
    const auto& t = m.at(c);
    const auto& ref = m.at(0);
    if (t.n_layers() != ref.n_layers() || t.n_neurons() != ref.n_neurons() || t.rate_hz() != ref.rate_hz()) {
      throw ValidationError("condition tensors differ in shape or rate");
    }
  }
  return m;
}

BrainConditions brain_conditions(std::span<const TrialRecording> inputs, const DesignOptions& opts) {
  BrainConditions b;
  for (const auto& r : inputs) {
    auto sliced = slice_last(r, opts.window_units);
    if (r.condition().split) {
      place(b.cond, std::move(sliced));
      continue;
    }
    const auto halves = split_halves(r.n_trials(), opts.policy);
    for (Split s : {Split::A, Split::B}) {
      place(b.cond, sliced.select_trials(halves[s == Split::A ? 0 : 1], with_split(r.condition(), s)));
    }
  }
  for (std::size_t c = 0; c < kConditions; ++c) {
    const auto& r = b.at(c);
    const auto& ref = b.at(0);
    if (r.channels() != ref.channels() || r.rate_hz() != ref.rate_hz() || r.n_samples() != ref.n_samples()) {
      throw ValidationError("condition recordings differ in channels, rate or window");
    }
  }
  return b;
}

ConditionFeatures condition_features(const ModelConditions& m, UnitId unit, SpectrumAveraging how) {
  ConditionFeatures out;
  const std::size_t n = m.window;
  const double rate = m.at(0).rate_hz();
  const auto bins = band_bins(n, rate);
  for (auto k : bins) out.freqs.push_back(static_cast<double>(k) * rate / static_cast<double>(n));
  for (std::size_t c = 0; c < kConditions; ++c) {
    const auto& t = m.at(c);
    const auto series = t.series_f64(unit);
    const std::size_t T = t.n_timepoints() / n;
    if (T == 0) throw IncompleteDesignError("condition '" + all_conditions()[c].name() + "' has no trials");
    std::vector<double> mag(bins.size(), 0.0);
    std::vector<cplx> sum(bins.size());
    for (std::size_t tr = 0; tr < T; ++tr) {
      auto X = dft_full(std::span<const double>(series).subspan(tr * n, n));
      for (std::size_t i = 0; i < bins.size(); ++i) {
        mag[i] += std::abs(X[bins[i]]);
        sum[i] += X[bins[i]];
      }
    }
    auto& v = out.values[c];
    v.resize(bins.size());
    for (std::size_t i = 0; i < bins.size(); ++i) {
      v[i] = how == SpectrumAveraging::magnitude_then_mean ? mag[i] / static_cast<double>(T)
                                                           : std::abs(sum[i] / static_cast<double>(T));
    }
  }
  return out;
}

ConditionFeatures condition_features(const BrainConditions& b, std::size_t channel) {
  ConditionFeatures out;
  const auto& ref = b.at(0);
  const auto bins = band_bins(ref.n_samples(), ref.rate_hz());
  for (auto k : bins) out.freqs.push_back(static_cast<double>(k) * ref.rate_hz() / static_cast<double>(ref.n_samples()));
  for (std::size_t c = 0; c < kConditions; ++c) {
    const auto spec = itpc(b.at(c), channel);
    auto& v = out.values[c];
    for (auto k : bins) v.push_back(spec.itpc[k]);
  }
  return out;
}

Srdm srdm(const ConditionFeatures& f) {
  std::array<double, kConditions> norm{};
  for (std::size_t a = 0; a < kConditions; ++a) {
    if (f.values[a].size() != f.freqs.size()) throw ValidationError("srdm: feature length mismatch");
    double s = 0.0;
    for (double v : f.values[a]) s += v * v;
    norm[a] = std::sqrt(s);
    if (!(norm[a] > 0.0) || !std::isfinite(norm[a])) {
      throw DegenerateError("degenerate features: zero-norm vector for condition '" + all_conditions()[a].name() + "'");
    }
  }
  Srdm out;
  for (std::size_t a = 0; a < kConditions; ++a) {
    for (std::size_t b = a + 1; b < kConditions; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < f.freqs.size(); ++i) dot += f.values[a][i] * f.values[b][i];
      const double d = std::clamp(1.0 - dot / (norm[a] * norm[b]), 0.0, 2.0);
      out.d[a][b] = out.d[b][a] = d;
    }
  }
  return out;
}

Srdm layer_srdm(std::span<const Srdm> members) {
  if (members.empty()) throw DegenerateError("layer_srdm: no member SRDMs");
  Srdm out;
  for (std::size_t a = 0; a < kConditions; ++a) {
    for (std::size_t b = a + 1; b < kConditions; ++b) {
      double sim = 0.0;
      for (const auto& m : members) sim += 1.0 - m.d[a][b];
      out.d[a][b] = out.d[b][a] = 1.0 - sim / static_cast<double>(members.size());
    }
  }
  return out;
}

std::array<double, 15> upper_triangle(const Srdm& s) {
  std::array<double, 15> v{};
  std::size_t i = 0;
  for (std::size_t a = 0; a < kConditions; ++a) {
    for (std::size_t b = a + 1; b < kConditions; ++b) v[i++] = s.d[a][b];
  }
  return v;
}

stats::RankCorrelation rsa_spearman(const Srdm& a, const Srdm& b) {
  const auto ua = upper_triangle(a);
  const auto ub = upper_triangle(b);
  return stats::spearman(ua, ub);
}

std::vector<ChannelScore> top_k_channels(std::vector<ChannelScore> scores, std::size_t k, bool* clipped) {
  std::sort(scores.begin(), scores.end(), [](const ChannelScore& x, const ChannelScore& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.channel_id < y.channel_id;
  });
  if (clipped) *clipped = scores.size() < k;
  if (scores.size() > k) scores.resize(k);
  return scores;
}

double LayerSelection::mean_score() const {
  if (top.empty()) throw DegenerateError("empty channel selection for layer " + std::to_string(layer));
  double s = 0.0;
  for (const auto& c : top) s += c.score;
  return s / static_cast<double>(top.size());
}

double model_brain_similarity(std::span<const LayerSelection> selections) {
  if (selections.empty()) throw DegenerateError("model_brain_similarity: no layers");
  double s = 0.0;
  for (const auto& sel : selections) s += sel.mean_score();
  return s / static_cast<double>(selections.size());
}

namespace {

std::map<std::size_t, const ChannelMeta*> index_channels(std::span<const ChannelMeta> channels) {
  std::map<std::size_t, const ChannelMeta*> idx;
  for (const auto& c : channels) idx[c.channel_id] = &c;
  return idx;
}

const ChannelMeta& lookup(const std::map<std::size_t, const ChannelMeta*>& idx, std::size_t id) {
  auto it = idx.find(id);
  if (it == idx.end()) throw ValidationError("selected channel " + std::to_string(id) + " has no metadata");
  return *it->second;
}

}  // namespace

std::optional<double> model_region_similarity(std::span<const LayerSelection> selections,
                                              std::span<const ChannelMeta> channels, const std::string& roi) {
  const auto idx = index_channels(channels);
  double outer = 0.0;
  std::size_t contributing = 0;
  for (const auto& sel : selections) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& c : sel.top) {
      if (lookup(idx, c.channel_id).roi == roi) {
        s += c.score;
        ++n;
      }
    }
    if (n == 0) continue;
    outer += s / static_cast<double>(n);
    ++contributing;
  }
  if (contributing == 0) return std::nullopt;
  return outer / static_cast<double>(contributing);
}

double contribution_ratio(const LayerSelection& selection, std::span<const ChannelMeta> universe,
                          const std::string& roi) {
  const auto idx = index_channels(universe);
  std::size_t total_r = 0;
  for (const auto& c : universe) total_r += c.roi == roi ? 1 : 0;
  if (total_r == 0) throw UndefinedTestError("contribution ratio undefined: region '" + roi + "' has no channels");
  if (selection.top.empty()) throw UndefinedTestError("contribution ratio undefined: empty selection");
  std::size_t top_r = 0;
  for (const auto& c : selection.top) top_r += lookup(idx, c.channel_id).roi == roi ? 1 : 0;
  const double top_share = static_cast<double>(top_r) / static_cast<double>(selection.top.size());
  const double total_share = static_cast<double>(total_r) / static_cast<double>(universe.size());
  return top_share / total_share;
}

std::array<std::array<double, 2>, 2> overlap_table(const LayerSelection& selection,
                                                   std::span<const ChannelMeta> universe,
                                                   const std::map<std::size_t, UnitClass>& channel_class) {
  std::map<std::size_t, bool> selected;
  for (const auto& c : selection.top) selected[c.channel_id] = true;
  std::array<std::array<double, 2>, 2> t{};
  for (const auto& c : universe) {
    auto it = channel_class.find(c.channel_id);
    if (it == channel_class.end()) throw ValidationError("no classification for channel " + std::to_string(c.channel_id));
    const int row = selected.count(c.channel_id) ? 0 : 1;
    const int col = it->second != UnitClass::none ? 0 : 1;
    t[row][col] += 1.0;
  }
  return t;
}

stats::ChiSquare overlap_chi_square(const LayerSelection& selection, std::span<const ChannelMeta> universe,
                                    const std::map<std::size_t, UnitClass>& channel_class) {
  return stats::chi_square_2x2(overlap_table(selection, universe, channel_class));
}

std::vector<LayerSelection> GroupSummary::selections() const {
  std::vector<LayerSelection> out;
  for (const auto& l : layers) out.push_back(l.selection);
  return out;
}

GroupSummary summarize_group(const ScoreMatrix& m, const std::string& group, std::size_t k,
                             const std::map<std::size_t, UnitClass>& channel_class) {
  if (k == 0) throw ConfigError("k must be at least 1");
  GroupSummary g;
  g.group = group;
  std::vector<std::size_t> cols;
  std::vector<ChannelMeta> universe;
  for (std::size_t c = 0; c < m.channels.size(); ++c) {
    if (group == "all" || to_string(m.channels[c].hemisphere) == group) {
      cols.push_back(c);
      universe.push_back(m.channels[c]);
    }
  }
  g.n_channels = cols.size();
  g.k = std::min(k, cols.size());
  g.clipped = cols.size() < k;
  for (auto roi : roi_names()) g.s_mbr[std::string(roi)] = std::nullopt;
  if (cols.empty()) return g;

  for (std::size_t row = 0; row < m.layers.size(); ++row) {
    std::vector<ChannelScore> scores;
    for (auto c : cols) scores.push_back({m.channels[c].channel_id, m.score[row][c]});
    LayerSummary ls;
    ls.selection.layer = m.layers[row];
    ls.selection.top = top_k_channels(std::move(scores), k);
    for (auto roi : roi_names()) {
      const std::string r(roi);
      if (std::any_of(universe.begin(), universe.end(), [&](const ChannelMeta& c) { return c.roi == r; })) {
        ls.contribution[r] = contribution_ratio(ls.selection, universe, r);
      }
    }
    if (!channel_class.empty()) {
      try {
        ls.chi_square = overlap_chi_square(ls.selection, universe, channel_class);
      } catch (const UndefinedTestError& e) {
        ls.chi_square_note = e.what();
      }
    }
    g.layers.push_back(std::move(ls));
  }
  if (!g.layers.empty()) {
    const auto sel = g.selections();
    g.s_mb = model_brain_similarity(sel);
    for (auto roi : roi_names()) g.s_mbr[std::string(roi)] = model_region_similarity(sel, universe, std::string(roi));
  }
  return g;
}

MeanSummary mean_of(std::span<const GroupSummary> summaries) {
  MeanSummary out;
  auto avg = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  std::vector<double> s;
  for (const auto& g : summaries) {
    if (g.s_mb) s.push_back(*g.s_mb);
  }
  out.s_mb = avg(s);
  for (auto roi : roi_names()) {
    std::vector<double> r;
    for (const auto& g : summaries) {
      auto it = g.s_mbr.find(std::string(roi));
      if (it != g.s_mbr.end() && it->second) r.push_back(*it->second);
    }
    out.s_mbr[std::string(roi)] = avg(r);
  }
  return out;
}

std::string_view to_string(NeuronPool p) {
  switch (p) {
    case NeuronPool::sentence: return "sentence";
    case NeuronPool::phrase: return "phrase";
    case NeuronPool::both: return "both";
    case NeuronPool::pooled: return "pooled";
  }
  return "pooled";
}

const std::array<NeuronPool, 4>& neuron_pools() {
  static const std::array<NeuronPool, 4> p{NeuronPool::sentence, NeuronPool::phrase, NeuronPool::both,
                                           NeuronPool::pooled};
  return p;
}

bool pool_contains(NeuronPool p, UnitClass c) {
  switch (p) {
    case NeuronPool::sentence: return c == UnitClass::sentence;
    case NeuronPool::phrase: return c == UnitClass::phrase;
    case NeuronPool::both: return c == UnitClass::both;
    case NeuronPool::pooled: return c != UnitClass::none;
  }
  return false;
}

AlignmentReport align(const ModelConditions& model, const BrainConditions& brain, const NeuronClassification& neurons,
                      const std::map<std::size_t, UnitClass>& channel_class, const AlignOptions& opts) {
  const auto& ref = model.at(0);
  if (neurons.n_layers != ref.n_layers() || neurons.n_neurons != ref.n_neurons()) {
    throw ValidationError("neuron classification shape does not match the model tensors");
  }
  AlignmentReport rep;
  rep.k = opts.k;

  // Channel SRDMs.
  const auto& channels = brain.at(0).channels();
  std::vector<std::optional<Srdm>> ch_srdm(channels.size());
  parallel_for(channels.size(), opts.workers, [&](std::size_t c) {
    try {
      ch_srdm[c] = srdm(condition_features(brain, c));
    } catch (const DegenerateError&) {
    }
  });
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (ch_srdm[c]) kept.push_back(c);
    else rep.excluded_channels.push_back(channels[c].channel_id);
  }

  // Neuron SRDMs for every classified neuron.
  std::vector<UnitId> classified;
  for (std::size_t l = 0; l < neurons.n_layers; ++l) {
    for (std::size_t k = 0; k < neurons.n_neurons; ++k) {
      if (neurons.at({l, k}) != UnitClass::none) classified.push_back({l, k});
    }
  }
  std::vector<std::optional<Srdm>> n_srdm(classified.size());
  parallel_for(classified.size(), opts.workers, [&](std::size_t i) {
    try {
      n_srdm[i] = srdm(condition_features(model, classified[i], opts.averaging));
    } catch (const DegenerateError&) {
    }
  });
  for (std::size_t i = 0; i < classified.size(); ++i) {
    if (!n_srdm[i]) rep.degenerate_neurons.push_back(classified[i]);
  }

  for (auto pool : neuron_pools()) {
    PoolReport pr;
    pr.pool = pool;
    pr.rho.channels.clear();
    for (auto c : kept) pr.rho.channels.push_back(channels[c]);
    std::vector<Srdm> layer_rdm;
    for (std::size_t l = 0; l < neurons.n_layers; ++l) {
      std::vector<Srdm> members;
      for (std::size_t i = 0; i < classified.size(); ++i) {
        if (classified[i].layer == l && n_srdm[i] && pool_contains(pool, neurons.at(classified[i]))) {
          members.push_back(*n_srdm[i]);
        }
      }
      if (members.empty()) {
        pr.skipped_layers.push_back(l);
        continue;
      }
      pr.layer_size[l] = members.size();
      pr.rho.layers.push_back(l);
      layer_rdm.push_back(layer_srdm(members));
    }
    pr.rho.score.assign(layer_rdm.size(), std::vector<double>(kept.size(), 0.0));
    parallel_for(layer_rdm.size() * kept.size(), opts.workers, [&](std::size_t idx) {
      const std::size_t row = idx / kept.size(), col = idx % kept.size();
      pr.rho.score[row][col] = rsa_spearman(layer_rdm[row], *ch_srdm[kept[col]]).rho;
    });
    for (const auto& g : channel_groups()) pr.groups.push_back(summarize_group(pr.rho, g, opts.k, channel_class));
    rep.pools.push_back(std::move(pr));
  }

  for (std::size_t gi = 0; gi < channel_groups().size(); ++gi) {
    std::vector<GroupSummary> per_class;
    for (const auto& pr : rep.pools) {
      if (pr.pool != NeuronPool::pooled) per_class.push_back(pr.groups[gi]);
    }
    rep.class_mean[channel_groups()[gi]] = mean_of(per_class);
  }
  return rep;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
  if (v) return *v;
  return "/";
}

}  // namespace

nlohmann::json to_json(const MeanSummary& m) {
  nlohmann::json j;
  j["s_mb"] = opt_json(m.s_mb);
  nlohmann::json r = nlohmann::json::object();
  for (const auto& [roi, v] : m.s_mbr) r[roi] = opt_json(v);
  j["s_mbr"] = r;
  return j;
}

nlohmann::json to_json(const GroupSummary& g) {
  nlohmann::json j;
  j["group"] = g.group;
  j["n_channels"] = g.n_channels;
  j["k"] = g.k;
  j["k_clipped"] = g.clipped;
  j["s_mb"] = opt_json(g.s_mb);
  nlohmann::json r = nlohmann::json::object();
  for (const auto& [roi, v] : g.s_mbr) r[roi] = opt_json(v);
  j["s_mbr"] = r;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : g.layers) {
    nlohmann::json lj;
    lj["layer"] = l.selection.layer;
    lj["mean_score"] = l.selection.mean_score();
    nlohmann::json top = nlohmann::json::array();
    for (const auto& c : l.selection.top) top.push_back({{"channel", c.channel_id}, {"score", c.score}});
    lj["top"] = top;
    lj["contribution_ratio"] = l.contribution;
    if (l.chi_square) {
      lj["chi_square"] = {{"statistic", l.chi_square->statistic}, {"p", l.chi_square->p}};
    } else if (!l.chi_square_note.empty()) {
      lj["chi_square"] = {{"undefined", l.chi_square_note}};
    }
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j;
}

nlohmann::json to_json(const AlignmentReport& r) {
  nlohmann::json j;
  j["k"] = r.k;
  j["excluded_channels"] = r.excluded_channels;
  nlohmann::json dn = nlohmann::json::array();
  for (const auto& u : r.degenerate_neurons) dn.push_back({u.layer, u.neuron});
  j["degenerate_neurons"] = dn;
  nlohmann::json pools = nlohmann::json::object();
  for (const auto& p : r.pools) {
    nlohmann::json pj;
    pj["skipped_layers"] = p.skipped_layers;
    nlohmann::json sizes = nlohmann::json::object();
    for (const auto& [l, n] : p.layer_size) sizes[std::to_string(l)] = n;
    pj["layer_size"] = sizes;
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

std::string table_csv(std::span<const ModelColumn> models) {
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("/");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return std::string(buf);
  };
  auto get = [](const ModelColumn& m, const std::string& g) -> const MeanSummary* {
    auto it = m.second.find(g);
    return it == m.second.end() ? nullptr : &it->second;
  };
  std::string out = "region";
  for (const auto& m : models) out += "," + m.first + "_L," + m.first + "_R";
  out += '\n';
  for (auto roi : roi_names()) {
    out += std::string(roi);
    for (const auto& m : models) {
      for (const char* g : {"L", "R"}) {
        const auto* s = get(m, g);
        std::optional<double> v;
        if (s) {
          auto it = s->s_mbr.find(std::string(roi));
          if (it != s->s_mbr.end()) v = it->second;
        }
        out += "," + cell(v);
      }
    }
    out += '\n';
  }
  out += "S_mb";
  for (const auto& m : models) {
    for (const char* g : {"L", "R"}) {
      const auto* s = get(m, g);
      out += "," + cell(s ? s->s_mb : std::nullopt);
    }
  }
  out += '\n';
  return out;
}

std::vector<double> layer_means(std::span<const LayerSelection> selections) {
  std::vector<double> out;
  for (const auto& s : selections) out.push_back(s.mean_score());
  return out;
}

}  // namespace hftp
