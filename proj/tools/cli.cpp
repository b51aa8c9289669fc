#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hftp/error.hpp"
#include "hftp/json_util.hpp"
#include "hftp/probe_brain.hpp"
#include "hftp/stats.hpp"
#include "svg.hpp"

namespace hftp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// --- helpers ------------------------------------------------------------------

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + p.string());
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw IoError("write failed: " + p.string());
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace {

std::string hz(double f) { return fmt(f) + "Hz"; }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const fs::path& p) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw FormatError(p.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

Csv read_csv(const fs::path& p) {
  std::istringstream in(read_text(p));
  Csv c;
  std::string line;
  if (!std::getline(in, line)) throw FormatError(p.string() + ": empty CSV");
  c.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = split_csv_line(line);
    if (r.size() != c.header.size()) throw FormatError(p.string() + ": ragged row");
    c.rows.push_back(std::move(r));
  }
  return c;
}

std::size_t to_index(const std::string& s, const fs::path& p) {
  std::size_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw FormatError(p.string() + ": bad integer '" + s + "'");
  return v;
}

fs::path require_path(const std::optional<fs::path>& p, const char* key) {
  if (!p) throw ConfigError(std::string("config key '") + key + "' is required for this command");
  return *p;
}

fs::path prepare_out(const RunConfig& c) {
  if (c.out.empty()) throw ConfigError("no output directory (set 'out' or pass --out)");
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw IoError("cannot create " + c.out.string() + ": " + ec.message());
  return c.out;
}

PermutationOptions perm_options(const RunConfig& c) {
  PermutationOptions o;
  o.n_perm = c.n_perm;
  o.alpha = c.alpha;
  o.seed = c.seed;
  o.mode = c.amp_mode;
  validate(o);
  return o;
}

DesignOptions design_options(const RunConfig& c) { return {c.trial_units, c.window_units, c.split_policy}; }

json correlation_json(const stats::Correlation& r) {
  json j;
  j["r"] = r.degenerate ? json(nullptr) : json(r.r);
  j["p"] = r.degenerate ? json(nullptr) : json(r.p);
  j["degenerate"] = r.degenerate;
  return j;
}

const RoiMap& roi_map_for(const RunConfig& c, std::optional<RoiMap>& storage) {
  if (!c.roi_map) return default_roi_map();
  storage = load_roi_map(*c.roi_map);
  return *storage;
}

std::string_view amp_mode_name(AmpMode m) { return m == AmpMode::real ? "real" : "magnitude"; }

}  // namespace

NeuronClassification read_unit_classes(const fs::path& p) {
  const Csv c = read_csv(p);
  const auto il = c.column("layer", p), in = c.column("neuron", p), ic = c.column("class", p);
  std::size_t L = 0, N = 0;
  for (const auto& r : c.rows) {
    L = std::max(L, to_index(r[il], p) + 1);
    N = std::max(N, to_index(r[in], p) + 1);
  }
  if (c.rows.size() != L * N) throw FormatError(p.string() + ": unit table is not a full layer x neuron grid");
  NeuronClassification out{L, N, std::vector<UnitClass>(L * N, UnitClass::none)};
  std::vector<bool> seen(L * N, false);
  for (const auto& r : c.rows) {
    const std::size_t idx = to_index(r[il], p) * N + to_index(r[in], p);
    if (seen[idx]) throw FormatError(p.string() + ": duplicate unit");
    seen[idx] = true;
    out.classes[idx] = parse_unit_class(r[ic]);
  }
  return out;
}

std::map<std::size_t, UnitClass> read_channel_classes(const fs::path& p) {
  const Csv c = read_csv(p);
  const auto iid = c.column("channel_id", p), ic = c.column("class", p);
  std::map<std::size_t, UnitClass> out;
  for (const auto& r : c.rows) {
    if (!out.emplace(to_index(r[iid], p), parse_unit_class(r[ic])).second)
      throw FormatError(p.string() + ": duplicate channel");
  }
  return out;
}

// --- configuration -------------------------------------------------------------

json RunConfig::echo() const {
  json j;
  j["seed"] = seed;
  j["n_perm"] = n_perm;
  j["alpha"] = alpha;
  j["k"] = k;
  j["frequencies"] = frequencies;
  j["split_policy"] = std::string(to_string(split_policy));
  j["amp_mode"] = std::string(amp_mode_name(amp_mode));
  j["z_population"] = std::string(to_string(z_population));
  j["z_scope"] = std::string(to_string(z_scope));
  j["spectrum_averaging"] = to_string(spectrum_averaging);
  j["trial_units"] = trial_units;
  j["window_units"] = window_units;
  j["n_partitions"] = n_partitions;
  j["n_splits"] = n_splits;
  j["test_frac"] = test_frac;
  j["corpus"] = std::string(to_string(corpus));
  j["model_name"] = model_name;
  j["anova_group"] = anova_group;
  return j;
}

RunConfig parse_config(const json& j, const fs::path& base_dir) {
  require_known_keys(j,
                     {"seed",           "n_perm",          "alpha",        "k",
                      "frequencies",    "split_policy",    "workers",      "out",
                      "svg",            "amp_mode",        "z_population", "z_scope",
                      "spectrum_averaging", "trial_units", "window_units", "n_partitions",
                      "n_splits",       "test_frac",       "corpus",       "model_name",
                      "anova_group",    "roi_map",         "experimental", "control",
                      "recording",      "model_inputs",    "brain_inputs", "neuron_classes",
                      "channel_classes", "bilingual_classes", "reports",   "synth"},
                     "config");
  RunConfig c;
  c.base_dir = base_dir;
  auto path = [&](const std::string& s) {
    fs::path p(s);
    return p.is_absolute() ? p : base_dir / p;
  };
  auto opt_path = [&](const char* key) -> std::optional<fs::path> {
    auto s = json_get_or<std::string>(j, key, "");
    if (s.empty()) return std::nullopt;
    return path(s);
  };
  auto paths = [&](const char* key) {
    std::vector<fs::path> out;
    for (const auto& s : json_get_or<std::vector<std::string>>(j, key, {})) out.push_back(path(s));
    return out;
  };
  // Enum parsers raise FormatError; inside a config that is a config error.
  auto enum_value = [&](const char* key, auto parse, auto fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
      return parse(it->template get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  };

  c.seed = json_get_or<std::uint64_t>(j, "seed", c.seed);
  c.n_perm = json_get_or<std::size_t>(j, "n_perm", c.n_perm);
  c.alpha = json_get_or<double>(j, "alpha", c.alpha);
  c.k = json_get_or<std::size_t>(j, "k", c.k);
  c.frequencies = json_get_or<std::vector<double>>(j, "frequencies", c.frequencies);
  if (c.frequencies.size() != 2) throw ConfigError("'frequencies' must list the sentence and phrase rates");
  c.split_policy = enum_value("split_policy", [](const std::string& s) { return parse_split_policy(s); },
                              c.split_policy);
  c.workers = json_get_or<std::size_t>(j, "workers", c.workers);
  auto out = json_get_or<std::string>(j, "out", "");
  if (!out.empty()) c.out = path(out);
  c.svg = json_get_or<bool>(j, "svg", c.svg);
  c.amp_mode = enum_value("amp_mode", [](const std::string& s) { return parse_amp_mode(s); }, c.amp_mode);
  c.z_population =
      enum_value("z_population", [](const std::string& s) { return parse_z_population(s); }, c.z_population);
  c.z_scope = enum_value("z_scope", [](const std::string& s) { return parse_z_scope(s); }, c.z_scope);
  c.spectrum_averaging = enum_value(
      "spectrum_averaging", [](const std::string& s) { return parse_spectrum_averaging(s); }, c.spectrum_averaging);
  c.trial_units = json_get_or<std::size_t>(j, "trial_units", c.trial_units);
  c.window_units = json_get_or<std::size_t>(j, "window_units", c.window_units);
  if (c.window_units == 0 || c.window_units > c.trial_units)
    throw ConfigError("'window_units' must be in [1, trial_units]");
  c.n_partitions = json_get_or<std::size_t>(j, "n_partitions", c.n_partitions);
  c.n_splits = json_get_or<std::size_t>(j, "n_splits", c.n_splits);
  c.test_frac = json_get_or<double>(j, "test_frac", c.test_frac);
  if (!(c.test_frac > 0.0 && c.test_frac < 1.0)) throw ConfigError("'test_frac' must lie in (0, 1)");
  c.corpus = enum_value("corpus", [](const std::string& s) { return parse_stimulus_class(s); }, c.corpus);
  c.model_name = json_get_or<std::string>(j, "model_name", c.model_name);
  c.anova_group = json_get_or<std::string>(j, "anova_group", c.anova_group);
  if (c.anova_group != "L" && c.anova_group != "R" && c.anova_group != "all")
    throw ConfigError("'anova_group' must be L, R or all");

  c.roi_map = opt_path("roi_map");
  c.experimental = opt_path("experimental");
  c.control = opt_path("control");
  c.recording = opt_path("recording");
  c.model_inputs = paths("model_inputs");
  c.brain_inputs = paths("brain_inputs");
  c.neuron_classes = opt_path("neuron_classes");
  c.channel_classes = opt_path("channel_classes");
  c.bilingual_classes = opt_path("bilingual_classes");
  if (auto it = j.find("reports"); it != j.end()) {
    if (!it->is_object()) throw ConfigError("'reports' must map model names to output directories");
    for (const auto& [name, dir] : it->items()) {
      if (!dir.is_string()) throw ConfigError("'reports' values must be directory paths");
      c.reports.emplace_back(name, path(dir.get<std::string>()));
    }
  }
  if (auto it = j.find("synth"); it != j.end()) {
    if (!it->is_array()) throw ConfigError("'synth' must be an array of generator specs");
    c.synth = *it;
  }
  return c;
}

RunConfig load_config(const std::optional<fs::path>& path, const Overrides& flags, const char* env_seed) {
  RunConfig c;
  if (path) {
    json j;
    try {
      j = json::parse(read_text(*path));
    } catch (const json::parse_error& e) {
      throw ConfigError("cannot parse " + path->string() + ": " + e.what());
    } catch (const IoError& e) {
      throw ConfigError(e.what());
    }
    c = parse_config(j, fs::absolute(*path).parent_path());
  } else {
    c = parse_config(json::object(), fs::current_path());
  }
  if (env_seed && *env_seed) {
    const std::string s(env_seed);
    std::uint64_t v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError("HFTP_SEED is not an unsigned integer");
    c.seed = v;
  }
  if (flags.out) c.out = *flags.out;
  if (flags.seed) c.seed = *flags.seed;
  if (flags.n_perm) c.n_perm = *flags.n_perm;
  if (flags.workers) c.workers = *flags.workers;
  if (flags.svg) c.svg = true;
  return c;
}

// --- synth -----------------------------------------------------------------------

int cmd_synth(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  if (c.synth.empty()) throw ConfigError("'synth' lists no generator specs");
  std::size_t i = 0;
  for (json spec : c.synth) {
    if (!spec.is_object() || !spec.contains("output") || !spec["output"].is_string())
      throw ConfigError("every synth spec needs an 'output' file name");
    if (!spec.contains("seed")) spec["seed"] = derive_seed(c.seed, i);
    SynthSpec s;
    try {
      s = synth_spec_from_json(spec);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("synth spec: ") + e.what());
    }
    fs::path target(spec["output"].get<std::string>());
    if (target.is_relative()) target = out / target;
    if (s.kind == SynthKind::activation) {
      write_activation_file(synth_activation(s), target);
    } else {
      write_trial_recording(synth_recording(s), target);
    }
    ++i;
  }
  return kOk;
}

// --- probe-model ---------------------------------------------------------------

namespace {

/// Replicate spectra: per partition, the mean over units of |X|.
std::vector<Spectrum> partition_replicates(const ActivationTensor& t, std::size_t n_parts) {
  std::vector<Spectrum> reps;
  for (std::size_t l = 0; l < t.n_layers(); ++l) {
    for (std::size_t n = 0; n < t.n_neurons(); ++n) {
      auto parts = partition_spectra(t.series_f64({l, n}), t.rate_hz(), n_parts);
      if (reps.empty()) {
        reps = parts;
        for (auto& r : reps) std::fill(r.coeffs.begin(), r.coeffs.end(), cplx{});
      }
      for (std::size_t p = 0; p < parts.size(); ++p)
        for (std::size_t b = 0; b < parts[p].coeffs.size(); ++b) reps[p].coeffs[b] += std::abs(parts[p].coeffs[b]);
    }
  }
  const double u = static_cast<double>(t.n_units());
  for (auto& r : reps)
    for (auto& x : r.coeffs) x /= u;
  return reps;
}

}  // namespace

int cmd_probe_model(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  const auto opts = perm_options(c);
  const ActivationTensor exp = read_activation_file(require_path(c.experimental, "experimental"));
  const ActivationTensor ctrl = read_activation_file(require_path(c.control, "control"));
  if (exp.n_layers() != ctrl.n_layers() || exp.n_neurons() != ctrl.n_neurons() ||
      exp.n_timepoints() != ctrl.n_timepoints() || exp.rate_hz() != ctrl.rate_hz())
    throw ValidationError("experimental and control tensors differ in shape or rate");

  const auto scan = scan_tensor(exp, c.frequencies, opts, c.workers);
  const ZOptions zo{c.z_population, c.z_scope, c.amp_mode};
  std::vector<std::vector<UnitId>> s_f;
  std::vector<ZScoreTable> z;
  for (std::size_t fi = 0; fi < 2; ++fi) {
    s_f.push_back(significant_units(scan[fi]));
    z.push_back(zscore_deviation(exp, ctrl, s_f[fi], c.frequencies[fi], zo));
  }
  const auto cls = classify_neurons(z[0], z[1], exp.n_layers(), exp.n_neurons());
  const auto dist = layer_distribution(cls);

  // Units table.
  std::vector<std::map<UnitId, double>> zdev(2);
  for (std::size_t fi = 0; fi < 2; ++fi)
    for (const auto& e : z[fi].entries) zdev[fi][e.unit] = e.z_dev;
  std::string units = "layer,neuron,class";
  for (double f : c.frequencies) {
    const auto h = hz(f);
    units += ",observed_" + h + ",ci_low_" + h + ",ci_high_" + h + ",significant_" + h + ",z_dev_" + h;
  }
  units += '\n';
  for (std::size_t i = 0; i < exp.n_units(); ++i) {
    const UnitId u = scan[0][i].unit;
    units += std::to_string(u.layer) + "," + std::to_string(u.neuron) + "," + std::string(to_string(cls.at(u)));
    for (std::size_t fi = 0; fi < 2; ++fi) {
      const auto& r = scan[fi][i];
      auto it = zdev[fi].find(u);
      units += "," + fmt(r.observed) + "," + fmt(r.ci_low) + "," + fmt(r.ci_high) + "," + (r.significant ? "1" : "0") +
               "," + (it == zdev[fi].end() ? std::string() : fmt(it->second));
    }
    units += '\n';
  }
  write_text(out / "probe_model_units.csv", units);

  // Layers table.
  const double total = static_cast<double>(dist.total_syntactic());
  std::string layers =
      "layer,width,n_sentence,n_phrase,n_both,n_syntactic,proportion,proportion_of_syntactic\n";
  for (const auto& r : dist.rows) {
    const double n = static_cast<double>(r.n_syntactic());
    layers += std::to_string(r.layer) + "," + std::to_string(r.width) + "," + std::to_string(r.n_sentence) + "," +
              std::to_string(r.n_phrase) + "," + std::to_string(r.n_both) + "," + std::to_string(r.n_syntactic()) +
              "," + fmt(n / static_cast<double>(r.width)) + "," + fmt(total > 0 ? n / total : 0.0) + "\n";
  }
  write_text(out / "probe_model_layers.csv", layers);

  // Spectrum-level peak tests over contiguous partitions.
  json summary;
  summary["config"] = c.echo();
  summary["shape"] = {{"layers", exp.n_layers()}, {"neurons", exp.n_neurons()}, {"timepoints", exp.n_timepoints()},
                      {"rate_hz", exp.rate_hz()}};
  json sig = json::object();
  json zj = json::object();
  for (std::size_t fi = 0; fi < 2; ++fi) {
    const auto h = hz(c.frequencies[fi]);
    sig[h] = s_f[fi].size();
    zj[h] = {{"mu", z[fi].mu}, {"sigma", z[fi].sigma}, {"n_entries", z[fi].entries.size()}};
  }
  summary["n_significant"] = sig;
  summary["zscore"] = zj;
  summary["n_syntactic"] = dist.total_syntactic();
  summary["class_counts"] = {{"sentence", cls.members(UnitClass::sentence).size()},
                             {"phrase", cls.members(UnitClass::phrase).size()},
                             {"both", cls.members(UnitClass::both).size()}};
  summary["covariance"] = {{"inclusive", correlation_json(covariance_trend(dist, true))},
                           {"exclusive", correlation_json(covariance_trend(dist, false))}};

  const auto reps_exp = partition_replicates(exp, c.n_partitions);
  const auto reps_ctrl = partition_replicates(ctrl, c.n_partitions);
  json peaks = json::object();
  std::vector<double> pvals;
  std::vector<std::string> keys;
  for (const auto& [name, reps] : {std::pair{"experimental", &reps_exp}, std::pair{"control", &reps_ctrl}}) {
    for (double f : c.frequencies) {
      const std::string key = std::string(name) + "_" + hz(f);
      try {
        const auto r = peak_test(*reps, f, AmpMode::magnitude);
        peaks[key] = {{"t", std::isfinite(r.statistic) ? json(r.statistic) : json(fmt(r.statistic))},
                      {"p", r.p_value},
                      {"mean_difference", r.mean_difference},
                      {"n_neighbors", r.neighbor_bins.size()}};
        pvals.push_back(r.p_value);
        keys.push_back(key);
      } catch (const FrequencyGridError& e) {
        peaks[key] = {{"undefined", e.what()}};
      }
    }
  }
  const auto rejected = fdr_correct(pvals, c.alpha);
  for (std::size_t i = 0; i < keys.size(); ++i) peaks[keys[i]]["fdr_significant"] = static_cast<bool>(rejected[i]);
  summary["peak_tests"] = peaks;

  // Mean amplitude spectra.
  const auto m_exp = mean_amplitude(reps_exp, SpectrumAveraging::magnitude_then_mean);
  const auto m_ctrl = mean_amplitude(reps_ctrl, SpectrumAveraging::magnitude_then_mean);
  std::string spec = "freq_hz,experimental_mean,experimental_sem,control_mean,control_sem\n";
  for (std::size_t b = 0; b < m_exp.freqs.size(); ++b)
    spec += fmt(m_exp.freqs[b]) + "," + fmt(m_exp.mean[b]) + "," + fmt(m_exp.sem[b]) + "," + fmt(m_ctrl.mean[b]) + "," +
            fmt(m_ctrl.sem[b]) + "\n";
  write_text(out / "probe_model_spectrum.csv", spec);

  if (c.bilingual_classes) {
    const auto other = read_unit_classes(*c.bilingual_classes);
    std::string bi = "layer,first_only,second_only,shared\n";
    for (const auto& r : bilingual_sets(cls, other)) {
      bi += std::to_string(r.layer) + "," + std::to_string(r.first_only) + "," + std::to_string(r.second_only) + "," +
            std::to_string(r.shared) + "\n";
    }
    write_text(out / "probe_model_bilingual.csv", bi);
  }
  write_text(out / "probe_model_summary.json", dump(summary));

  if (c.svg) {
    std::vector<svg::Curve> curves{{"experimental", m_exp.freqs, m_exp.mean, m_exp.sem},
                                   {"control", m_ctrl.freqs, m_ctrl.mean, m_ctrl.sem}};
    write_text(out / "probe_model_spectrum.svg",
               svg::line_plot("Mean amplitude spectrum", "frequency (Hz)", "amplitude", curves));
    std::vector<std::string> cats;
    std::vector<svg::BarSeries> bars{{"sentence", {}}, {"phrase", {}}, {"both", {}}};
    for (const auto& r : dist.rows) {
      cats.push_back(std::to_string(r.layer));
      const double w = static_cast<double>(r.width);
      bars[0].values.push_back(static_cast<double>(r.n_sentence) / w);
      bars[1].values.push_back(static_cast<double>(r.n_phrase) / w);
      bars[2].values.push_back(static_cast<double>(r.n_both) / w);
    }
    write_text(out / "probe_model_layers.svg", svg::bar_chart("Units per layer", "proportion", cats, bars));
  }
  return kOk;
}

// --- probe-brain ---------------------------------------------------------------

int cmd_probe_brain(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  const auto opts = perm_options(c);
  std::optional<RoiMap> storage;
  const RoiMap& map = roi_map_for(c, storage);
  const TrialRecording full = read_trial_recording(require_path(c.recording, "recording"));
  const TrialRecording rec = slice_last(full, c.window_units);

  const auto cls = classify_channels(rec, opts, c.workers);
  const auto dist = roi_distribution(cls, map);
  const double max_hz = 2.0 * kUnitRateHz;

  std::string itpc_csv = "channel_id,freq_hz,itpc,n_included\n";
  std::map<UnitClass, std::vector<double>> class_sum;
  std::map<UnitClass, std::size_t> class_n;
  std::vector<double> grid;
  std::vector<std::size_t> flagged;
  for (std::size_t ch = 0; ch < rec.n_channels(); ++ch) {
    const auto s = itpc(rec, ch);
    if (s.quality_flag) {
      flagged.push_back(s.channel_id);
    }
    std::vector<double> kept;
    for (std::size_t b = 0; b < s.freqs.size() && s.freqs[b] <= max_hz + 1e-9; ++b) {
      itpc_csv += std::to_string(s.channel_id) + "," + fmt(s.freqs[b]) + "," + fmt(s.itpc[b]) + "," +
                  std::to_string(s.n_included[b]) + "\n";
      kept.push_back(s.itpc[b]);
      if (ch == 0) grid.push_back(s.freqs[b]);
    }
    auto& acc = class_sum[cls.classes[ch]];
    if (acc.empty()) acc.assign(kept.size(), 0.0);
    for (std::size_t b = 0; b < kept.size(); ++b) acc[b] += kept[b];
    ++class_n[cls.classes[ch]];
  }
  write_text(out / "probe_brain_itpc.csv", itpc_csv);

  std::string ch_csv = "channel_id,hemisphere,aal_label,roi,class,itpc_1Hz,ci_low_1Hz,ci_high_1Hz,significant_1Hz,"
                       "itpc_2Hz,ci_low_2Hz,ci_high_2Hz,significant_2Hz\n";
  for (std::size_t i = 0; i < cls.channels.size(); ++i) {
    const auto& m = cls.channels[i];
    ch_csv += std::to_string(m.channel_id) + "," + std::string(to_string(m.hemisphere)) + "," + m.aal_label + "," +
              map.resolve(m.aal_label) + "," + std::string(to_string(cls.classes[i]));
    for (const auto* r : {&cls.sentence_rate[i], &cls.phrase_rate[i]})
      ch_csv += "," + fmt(r->observed) + "," + fmt(r->ci_low) + "," + fmt(r->ci_high) + "," +
                (r->significant ? "1" : "0");
    ch_csv += "\n";
  }
  write_text(out / "probe_brain_channels.csv", ch_csv);

  json roi;
  roi["config"] = c.echo();
  roi["shape"] = {{"channels", rec.n_channels()}, {"trials", rec.n_trials()}, {"samples", rec.n_samples()},
                  {"rate_hz", rec.rate_hz()}};
  roi["n_significant"] = cls.n_significant();
  roi["quality_flagged_channels"] = flagged;
  json rows = json::array();
  for (const auto& r : dist.rows) {
    rows.push_back({{"roi", r.roi},
                    {"hemisphere", std::string(to_string(r.hemisphere))},
                    {"n_channels", r.n_channels},
                    {"n_sentence", r.n_sentence},
                    {"n_phrase", r.n_phrase},
                    {"n_both", r.n_both}});
  }
  roi["distribution"] = rows;
  json corr = json::object();
  for (Hemisphere h : {Hemisphere::L, Hemisphere::R}) {
    corr[std::string(to_string(h))] = {{"inclusive", correlation_json(roi_correlation(dist, h, true))},
                                       {"exclusive", correlation_json(roi_correlation(dist, h, false))}};
  }
  roi["roi_correlation"] = corr;
  write_text(out / "probe_brain_roi.json", dump(roi));

  if (c.svg) {
    std::vector<svg::Curve> curves;
    for (const auto& [k, sum] : class_sum) {
      std::vector<double> mean(sum.size());
      for (std::size_t b = 0; b < sum.size(); ++b) mean[b] = sum[b] / static_cast<double>(class_n[k]);
      curves.push_back({std::string(to_string(k)), grid, mean, {}});
    }
    write_text(out / "probe_brain_itpc.svg", svg::line_plot("Mean ITPC by channel class", "frequency (Hz)", "ITPC",
                                                            curves));
    std::vector<std::string> cats;
    std::vector<svg::BarSeries> bars{{"sentence", {}}, {"phrase", {}}, {"both", {}}};
    for (const auto& r : dist.rows) {
      cats.push_back(r.roi + "_" + std::string(to_string(r.hemisphere)));
      bars[0].values.push_back(static_cast<double>(r.n_sentence));
      bars[1].values.push_back(static_cast<double>(r.n_phrase));
      bars[2].values.push_back(static_cast<double>(r.n_both));
    }
    write_text(out / "probe_brain_roi.svg", svg::bar_chart("Significant channels by region", "channels", cats, bars));
  }
  return kOk;
}

// --- align / encode --------------------------------------------------------------

namespace {

struct Inputs {
  ModelConditions model;
  BrainConditions brain;
  NeuronClassification neurons;
  std::map<std::size_t, UnitClass> channel_class;
};

Inputs load_inputs(const RunConfig& c) {
  if (c.model_inputs.empty()) throw ConfigError("'model_inputs' is required for this command");
  if (c.brain_inputs.empty()) throw ConfigError("'brain_inputs' is required for this command");
  std::vector<ActivationTensor> mi;
  for (const auto& p : c.model_inputs) mi.push_back(read_activation_file(p));
  std::vector<TrialRecording> bi;
  for (const auto& p : c.brain_inputs) bi.push_back(read_trial_recording(p));
  Inputs in{model_conditions(mi, design_options(c)), brain_conditions(bi, design_options(c)),
            read_unit_classes(require_path(c.neuron_classes, "neuron_classes")), {}};
  if (c.channel_classes) in.channel_class = read_channel_classes(*c.channel_classes);
  const auto& t = in.model.at(0);
  if (in.neurons.n_layers != t.n_layers() || in.neurons.n_neurons != t.n_neurons())
    throw ValidationError("neuron classes do not match the model tensor shape");
  return in;
}

std::string score_csv(const std::string& pool, const ScoreMatrix& m) {
  std::string s;
  for (std::size_t r = 0; r < m.layers.size(); ++r)
    for (std::size_t col = 0; col < m.channels.size(); ++col)
      s += pool + "," + std::to_string(m.layers[r]) + "," + std::to_string(m.channels[col].channel_id) + "," +
           fmt(m.score[r][col]) + "\n";
  return s;
}

std::string layer_mean_csv(const std::string& pool, const std::vector<GroupSummary>& groups) {
  std::string s;
  for (const auto& g : groups)
    for (const auto& l : g.layers)
      s += pool + "," + g.group + "," + std::to_string(l.selection.layer) + "," + fmt(l.selection.mean_score()) + "\n";
  return s;
}

void region_svg(const fs::path& p, const std::string& title, const std::map<std::string, MeanSummary>& cm) {
  std::vector<std::string> cats;
  for (auto r : roi_names()) cats.emplace_back(r);
  std::vector<svg::BarSeries> bars;
  for (const char* g : {"L", "R"}) {
    svg::BarSeries b{g, {}};
    auto it = cm.find(g);
    for (auto r : roi_names()) {
      double v = NAN;
      if (it != cm.end()) {
        auto jt = it->second.s_mbr.find(std::string(r));
        if (jt != it->second.s_mbr.end() && jt->second) v = *jt->second;
      }
      b.values.push_back(v);
    }
    bars.push_back(std::move(b));
  }
  write_text(p, svg::bar_chart(title, "similarity", cats, bars));
}

}  // namespace

int cmd_align(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  const Inputs in = load_inputs(c);
  AlignOptions opts;
  opts.k = c.k;
  opts.averaging = c.spectrum_averaging;
  opts.workers = c.workers;
  const auto report = align(in.model, in.brain, in.neurons, in.channel_class, opts);

  json j = to_json(report);
  j["config"] = c.echo();
  j["model_name"] = c.model_name;
  write_text(out / "align_report.json", dump(j));

  const std::vector<ModelColumn> cols{{c.model_name, report.class_mean}};
  write_text(out / "align_table.csv", table_csv(cols));

  std::string rho = "pool,layer,channel_id,rho\n";
  std::string means = "pool,group,layer,mean_score\n";
  for (const auto& p : report.pools) {
    rho += score_csv(std::string(to_string(p.pool)), p.rho);
    means += layer_mean_csv(std::string(to_string(p.pool)), p.groups);
  }
  write_text(out / "align_rho.csv", rho);
  write_text(out / "align_layers.csv", means);
  if (c.svg) region_svg(out / "align_regions.svg", "Model-region similarity (" + c.model_name + ")", report.class_mean);
  return kOk;
}

int cmd_encode(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  const Inputs in = load_inputs(c);
  EncodeOptions opts;
  opts.k = c.k;
  opts.seed = c.seed;
  opts.workers = c.workers;
  opts.corpus = c.corpus;
  opts.predictive.n_splits = c.n_splits;
  opts.predictive.test_frac = c.test_frac;
  const auto report = encode(in.model, in.brain, in.neurons, in.channel_class, opts);

  json j = to_json(report);
  j["config"] = c.echo();
  j["model_name"] = c.model_name;
  write_text(out / "encode_scores.json", dump(j));
  const std::vector<ModelColumn> cols{{c.model_name, report.class_mean}};
  write_text(out / "encode_table.csv", table_csv(cols));
  std::string scores = "pool,layer,channel_id,p_score\n";
  for (const auto& p : report.pools) scores += score_csv(std::string(to_string(p.pool)), p.scores);
  write_text(out / "encode_scores.csv", scores);
  if (c.svg)
    region_svg(out / "encode_regions.svg", "Predictive model-region score (" + c.model_name + ")", report.class_mean);
  return kOk;
}

// --- report --------------------------------------------------------------------

namespace {

std::optional<double> opt_from_json(const json& v) {
  if (v.is_number()) return v.get<double>();
  return std::nullopt;
}

std::map<std::string, MeanSummary> class_mean_from_json(const json& j) {
  std::map<std::string, MeanSummary> out;
  for (const auto& [g, m] : j.items()) {
    MeanSummary s;
    s.s_mb = opt_from_json(m.at("s_mb"));
    for (const auto& [roi, v] : m.at("s_mbr").items()) s.s_mbr[roi] = opt_from_json(v);
    out[g] = s;
  }
  return out;
}

}  // namespace

int cmd_report(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  if (c.reports.empty()) throw ConfigError("'reports' lists no stage output directories");
  static const std::array<std::pair<const char*, const char*>, 4> stages{{{"probe_model", "probe_model_summary.json"},
                                                                          {"probe_brain", "probe_brain_roi.json"},
                                                                          {"align", "align_report.json"},
                                                                          {"encode", "encode_scores.json"}}};
  json models = json::object();
  std::vector<ModelColumn> align_cols, encode_cols;
  std::vector<std::vector<double>> anova_groups;
  std::vector<std::string> anova_names;
  for (const auto& [name, dir] : c.reports) {
    json m = json::object();
    json gaps = json::array();
    for (const auto& [stage, file] : stages) {
      const fs::path p = dir / file;
      if (!fs::exists(p)) {
        m[stage] = nullptr;
        gaps.push_back(stage);
        continue;
      }
      try {
        m[stage] = json::parse(read_text(p));
      } catch (const json::parse_error& e) {
        throw FormatError(p.string() + ": " + e.what());
      }
    }
    m["gaps"] = gaps;
    try {
      if (m["align"].is_object()) {
        align_cols.emplace_back(name, class_mean_from_json(m["align"].at("class_mean")));
        const auto& groups = m["align"].at("pools").at("pooled").at("groups");
        if (groups.contains(c.anova_group)) {
          std::vector<double> means;
          for (const auto& l : groups.at(c.anova_group).at("layers")) means.push_back(l.at("mean_score").get<double>());
          anova_groups.push_back(std::move(means));
          anova_names.push_back(name);
        }
      }
      if (m["encode"].is_object()) encode_cols.emplace_back(name, class_mean_from_json(m["encode"].at("class_mean")));
    } catch (const json::exception& e) {
      throw FormatError("stage output for '" + name + "' is malformed: " + e.what());
    }
    models[name] = m;
  }

  json report;
  report["config"] = c.echo();
  report["models"] = models;
  if (anova_groups.size() >= 2) {
    json aj;
    aj["group"] = c.anova_group;
    aj["models"] = anova_names;
    try {
      const auto a = stats::one_way_anova(anova_groups);
      aj["f"] = a.f;
      aj["p"] = a.p;
      aj["eta_squared"] = a.eta_squared;
      aj["df_between"] = a.df_between;
      aj["df_within"] = a.df_within;
    } catch (const Error& e) {
      aj["undefined"] = e.what();
    }
    report["anova"] = aj;
  } else {
    report["anova"] = {{"undefined", "needs alignment results from at least two models"}};
  }
  write_text(out / "report.json", dump(report));
  write_text(out / "report.csv", table_csv(align_cols));
  if (!encode_cols.empty()) write_text(out / "report_encode.csv", table_csv(encode_cols));

  if (c.svg) {
    std::vector<std::string> cats;
    for (auto r : roi_names()) cats.emplace_back(r);
    std::vector<svg::BarSeries> bars;
    for (const auto& [name, cm] : align_cols) {
      auto it = cm.find(c.anova_group);
      svg::BarSeries b{name, {}};
      for (auto r : roi_names()) {
        double v = NAN;
        if (it != cm.end()) {
          auto jt = it->second.s_mbr.find(std::string(r));
          if (jt != it->second.s_mbr.end() && jt->second) v = *jt->second;
        }
        b.values.push_back(v);
      }
      bars.push_back(std::move(b));
    }
    write_text(out / "report_regions.svg", svg::bar_chart("Model-region similarity", "similarity", cats, bars));
  }
  return kOk;
}

// --- entry point -------------------------------------------------------------------

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"hftp: frequency-tagging probes for model activations and trial recordings"};
  app.require_subcommand(1);
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_perm, workers;
  bool svg = false;
  std::vector<std::pair<std::string, int (*)(const RunConfig&)>> cmds{
      {"synth", cmd_synth},       {"probe-model", cmd_probe_model}, {"probe-brain", cmd_probe_brain},
      {"align", cmd_align},       {"encode", cmd_encode},           {"report", cmd_report}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, fn] : cmds) {
    auto* s = app.add_subcommand(name);
    s->add_option("-c,--config", config, "JSON config file");
    s->add_option("-o,--out", out, "output directory");
    s->add_option("--seed", seed, "global seed");
    s->add_option("--n-perm", n_perm, "permutations per test");
    s->add_option("--workers", workers, "worker threads (0 = all cores)");
    s->add_flag("--svg", svg, "also write SVG plots");
    subs.push_back(s);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    Overrides o;
    if (out) o.out = fs::path(*out);
    o.seed = seed;
    o.n_perm = n_perm;
    o.workers = workers;
    o.svg = svg;
    std::optional<fs::path> cfg;
    if (config) cfg = fs::path(*config);
    const RunConfig c = load_config(cfg, o, std::getenv("HFTP_SEED"));
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) return cmds[i].second(c);
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DegenerateError& e) {
    std::cerr << "degenerate statistics: " << e.what() << "\n";
    return kDegenerate;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace hftp::cli
