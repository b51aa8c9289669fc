#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cli.hpp"
#include "hftp/error.hpp"
#include "oracles.hpp"

using namespace hftp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json activation(const std::string& tag, std::vector<json> planted, const std::string& file) {
  return {{"kind", "activation"}, {"n_layers", 2},          {"n_neurons", 12},
          {"n_timepoints", 1440}, {"rate_hz", 4.0},         {"corpus_tag", tag},
          {"condition", {{"stimulus_class", tag}}},         {"planted", planted},
          {"output", file}};
}

json recording(const std::string& tag, std::vector<json> planted, const std::string& file) {
  return {{"kind", "recording"}, {"n_channels", 8},         {"n_trials", 8},
          {"n_samples", 288},    {"rate_hz", 32.0},         {"condition", {{"stimulus_class", tag}}},
          {"planted", planted},  {"output", file}};
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream(p) << j.dump(2);
}

// A tiny three-corpus data set plus one config per stage, all relative to dir.
void make_workspace(const fs::path& dir) {
  const json m1{{"layer", 1}, {"first", 0}, {"count", 4}, {"freq_hz", 1.0}, {"amplitude", 1.0}};
  const json m2{{"layer", 1}, {"first", 0}, {"count", 4}, {"freq_hz", 2.0}, {"amplitude", 1.0}};
  const json b1{{"first", 0}, {"count", 2}, {"freq_hz", 1.0}, {"amplitude", 1.0}};
  const json b2{{"first", 0}, {"count", 2}, {"freq_hz", 2.0}, {"amplitude", 1.0}};
  write_json(dir / "synth.json",
             {{"seed", 11},
              {"out", "data"},
              {"synth",
               {activation("sentence", {m1, m2}, "m_s.act"), activation("phrase", {m2}, "m_p.act"),
                activation("random", {}, "m_r.act"), recording("sentence", {b1, b2}, "b_s.tri"),
                recording("phrase", {b2}, "b_p.tri"), recording("random", {}, "b_r.tri")}}});
  write_json(dir / "pm.json", {{"seed", 3},
                               {"n_perm", 100},
                               {"out", "pm"},
                               {"experimental", "data/m_s.act"},
                               {"control", "data/m_r.act"}});
  write_json(dir / "pb.json", {{"seed", 3}, {"n_perm", 100}, {"out", "pb"}, {"recording", "data/b_s.tri"}});
  const json inputs{{"model_inputs", {"data/m_s.act", "data/m_p.act", "data/m_r.act"}},
                    {"brain_inputs", {"data/b_s.tri", "data/b_p.tri", "data/b_r.tri"}},
                    {"neuron_classes", "pm/probe_model_units.csv"},
                    {"channel_classes", "pb/probe_brain_channels.csv"}};
  json al = inputs, en = inputs;
  al.update({{"seed", 5}, {"k", 3}, {"out", "al"}});
  en.update({{"seed", 5}, {"k", 3}, {"out", "en"}});
  write_json(dir / "al.json", al);
  write_json(dir / "en.json", en);
  write_json(dir / "rep.json", {{"out", "rep"}, {"reports", {{"m1", "."}, {"m2", "al"}}}});
}

int run_stage(const fs::path& dir, const std::string& cmd, const std::string& cfg, std::vector<std::string> extra = {}) {
  std::vector<std::string> args{cmd, "-c", (dir / cfg).string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return cli::run(args);
}

int run_all(const fs::path& dir, bool svg) {
  const std::vector<std::string> extra = svg ? std::vector<std::string>{"--svg"} : std::vector<std::string>{};
  for (auto [cmd, cfg] : std::vector<std::pair<std::string, std::string>>{{"synth", "synth.json"},
                                                                          {"probe-model", "pm.json"},
                                                                          {"probe-brain", "pb.json"},
                                                                          {"align", "al.json"},
                                                                          {"encode", "en.json"}}) {
    if (int rc = run_stage(dir, cmd, cfg, extra); rc != 0) return rc;
  }
  // The report reads stage outputs from one directory per model.
  for (const char* d : {"pm", "pb", "al", "en"})
    for (const auto& e : fs::directory_iterator(dir / d)) fs::copy_file(e.path(), dir / e.path().filename(), fs::copy_options::overwrite_existing);
  return run_stage(dir, "report", "rep.json", extra);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      files[fs::relative(e.path(), dir).string()] = cli::read_text(e.path());
  return files;
}

// Minimal well-formedness check: balanced, properly nested tags.
bool well_formed_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const auto j = s.find('>', i);
    if (j == std::string::npos) return false;
    std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
      continue;
    }
    stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
  }
  return stack.empty() && s.find("&&") == std::string::npos;
}

int shell(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("full pipeline is byte-deterministic") {
    const auto a = oracle::scratch("cli_det_a"), b = oracle::scratch("cli_det_b");
    make_workspace(a);
    make_workspace(b);
    REQUIRE(run_all(a, true) == 0);
    REQUIRE(run_all(b, true) == 0);
    const auto sa = snapshot(a), sb = snapshot(b);
    CHECK(sa.size() == sb.size());
    for (const auto& [name, content] : sa) {
      INFO(name);
      REQUIRE(sb.count(name));
      CHECK(content == sb.at(name));
    }
    for (const char* f : {"pm/probe_model_units.csv", "pm/probe_model_layers.csv", "pm/probe_model_summary.json",
                          "pb/probe_brain_channels.csv", "pb/probe_brain_roi.json", "al/align_report.json",
                          "al/align_table.csv", "en/encode_scores.json", "rep/report.json", "rep/report.csv"})
      CHECK(sa.count(f) == 1);

    // SVG plots parse as nested XML.
    std::size_t n_svg = 0;
    for (const auto& [name, content] : sa) {
      if (fs::path(name).extension() != ".svg") continue;
      ++n_svg;
      INFO(name);
      CHECK(well_formed_xml(content));
      CHECK(content.find("<svg") != std::string::npos);
    }
    CHECK(n_svg >= 3);

    // Artifacts never mention where they were written.
    CHECK(sa.at("pm/probe_model_summary.json").find(a.string()) == std::string::npos);
  }

  TEST_CASE("report merges stages and lists gaps") {
    const auto d = oracle::scratch("cli_report");
    make_workspace(d);
    REQUIRE(run_all(d, false) == 0);
    const auto r = json::parse(cli::read_text(d / "rep" / "report.json"));
    REQUIRE(r.contains("models"));
    const auto& m1 = r["models"]["m1"];
    CHECK(m1["gaps"].empty());
    CHECK(m1["probe_model"]["zscore"]["1Hz"].contains("mu"));
    CHECK(m1["align"]["pools"].contains("pooled"));
    const auto& m2 = r["models"]["m2"];
    CHECK(m2["probe_model"].is_null());
    CHECK(m2["gaps"].size() == 3);
    CHECK(r["anova"].is_object());

    // The table uses "/" for regions without channels.
    const auto table = cli::read_text(d / "al" / "align_table.csv");
    CHECK(table.rfind("region,", 0) == 0);
    CHECK(table.find("/") != std::string::npos);
  }

  TEST_CASE("config errors exit with 2") {
    const auto d = oracle::scratch("cli_cfg");
    write_json(d / "bad.json", {{"seed", 1}, {"no_such_key", 1}});
    CHECK(run_stage(d, "synth", "bad.json") == cli::kConfigError);
    std::ofstream(d / "broken.json") << "{ not json";
    CHECK(run_stage(d, "synth", "broken.json") == cli::kConfigError);
    write_json(d / "frac.json", {{"test_frac", 1.5}});
    CHECK(run_stage(d, "encode", "frac.json") == cli::kConfigError);
    CHECK(cli::run(std::vector<std::string>{"synth", "--bogus"}) == cli::kConfigError);
    CHECK(cli::run(std::vector<std::string>{}) == cli::kConfigError);
    write_json(d / "np.json", {{"n_perm", 10}, {"out", "o"}, {"recording", "x.tri"}});
    CHECK_THROWS_AS(cli::load_config(d / "np.json", {}, "abc"), ConfigError);
  }

  TEST_CASE("malformed input exits with 3, degenerate with 4") {
    const auto d = oracle::scratch("cli_inputs");
    std::ofstream(d / "junk.act") << "definitely not an activation file";
    write_json(d / "pm.json", {{"n_perm", 100}, {"out", "o"}, {"experimental", "junk.act"}, {"control", "junk.act"}});
    CHECK(run_stage(d, "probe-model", "pm.json") == cli::kInputError);
    write_json(d / "missing.json", {{"n_perm", 100}, {"out", "o"}, {"recording", "nope.tri"}});
    CHECK(run_stage(d, "probe-brain", "missing.json") == cli::kInputError);

    // All-constant activations leave nothing significant to z-score.
    write_json(d / "synth.json", {{"out", "."},
                                  {"synth",
                                   {{{"kind", "activation"},
                                     {"n_layers", 1},
                                     {"n_neurons", 6},
                                     {"n_timepoints", 288},
                                     {"rate_hz", 4.0},
                                     {"noise_sigma", 0.0},
                                     {"output", "flat.act"}}}}});
    REQUIRE(run_stage(d, "synth", "synth.json") == 0);
    write_json(d / "flat.json", {{"n_perm", 100}, {"out", "o"}, {"experimental", "flat.act"}, {"control", "flat.act"}});
    CHECK(run_stage(d, "probe-model", "flat.json") == cli::kDegenerate);
  }

  TEST_CASE("seed precedence: config < HFTP_SEED < flag") {
    const auto d = oracle::scratch("cli_seed");
    write_json(d / "c.json", {{"seed", 10}, {"out", "rel/out"}, {"recording", "x.tri"}});
    const fs::path cfg = d / "c.json";
    CHECK(cli::load_config(cfg, {}, nullptr).seed == 10);
    CHECK(cli::load_config(cfg, {}, "20").seed == 20);
    cli::Overrides o;
    o.seed = 30;
    CHECK(cli::load_config(cfg, o, "20").seed == 30);

    // Relative paths resolve against the config file's directory.
    const auto c = cli::load_config(cfg, {}, nullptr);
    CHECK(c.out == d / "rel/out");
    CHECK(*c.recording == d / "x.tri");
  }

  TEST_CASE("the executable honours HFTP_SEED") {
    const auto d = oracle::scratch("cli_exe");
    const json spec{{"kind", "activation"}, {"n_layers", 1}, {"n_neurons", 2}, {"n_timepoints", 144},
                    {"rate_hz", 4.0},       {"output", "a.act"}};
    write_json(d / "s.json", {{"out", "x"}, {"synth", {spec}}});
    const std::string exe = HFTP_EXE;
    const std::string cfg = (d / "s.json").string();
    REQUIRE(shell("HFTP_SEED=1 " + exe + " synth -c " + cfg + " -o " + (d / "e1").string()) == 0);
    REQUIRE(shell("HFTP_SEED=1 " + exe + " synth -c " + cfg + " -o " + (d / "e2").string()) == 0);
    REQUIRE(shell("HFTP_SEED=2 " + exe + " synth -c " + cfg + " -o " + (d / "e3").string()) == 0);
    REQUIRE(shell(exe + " synth -c " + cfg + " --seed 2 -o " + (d / "e4").string()) == 0);
    const auto f1 = cli::read_text(d / "e1/a.act"), f3 = cli::read_text(d / "e3/a.act");
    CHECK(f1 == cli::read_text(d / "e2/a.act"));
    CHECK(f1 != f3);
    CHECK(f3 == cli::read_text(d / "e4/a.act"));
    CHECK(shell("HFTP_SEED=x " + exe + " synth -c " + cfg) == 2);
    CHECK(shell(exe + " frobnicate") == 2);
  }

  TEST_CASE("class CSV readers round-trip probe output") {
    const auto d = oracle::scratch("cli_classes");
    make_workspace(d);
    REQUIRE(run_stage(d, "synth", "synth.json") == 0);
    REQUIRE(run_stage(d, "probe-model", "pm.json") == 0);
    const auto n = cli::read_unit_classes(d / "pm/probe_model_units.csv");
    CHECK(n.n_layers == 2);
    CHECK(n.n_neurons == 12);
  }

  TEST_CASE("number formatting") {
    CHECK(cli::fmt(0.5) == "0.5");
    CHECK(cli::fmt(3.0) == "3");
    CHECK(cli::dump(json{{"b", 1}, {"a", 2}}) == "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
  }
}
