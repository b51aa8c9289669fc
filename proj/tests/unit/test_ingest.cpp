#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "hftp/error.hpp"
#include "hftp/ingest.hpp"
#include "oracles.hpp"

using namespace hftp;

namespace {

ActivationTensor small_tensor(std::size_t L, std::size_t N, std::size_t T, unsigned seed = 1) {
  auto v = oracle::gaussian(L * N * T, seed);
  return ActivationTensor(L, N, T, 4.0, std::vector<float>(v.begin(), v.end()), "unit-test",
                          {StimulusClass::phrase, Split::B}, {{"note", "x"}});
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t off) {
  std::uint32_t v;
  std::memcpy(&v, b.data() + off, 4);
  return v;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("activation file round-trips exactly") {
    auto dir = oracle::scratch("ingest_rt");
    const auto t = small_tensor(2, 3, 17);
    write_activation_file(t, dir / "a.act");
    CHECK(read_activation_file(dir / "a.act") == t);
  }

  TEST_CASE("two writes of one tensor are byte-identical") {
    const auto t = small_tensor(3, 2, 9);
    CHECK(encode_activation(t) == encode_activation(t));
  }

  TEST_CASE("file size is header plus metadata plus payload") {
    const ActivationTensor t(1, 1, 2, 4.0, {1.0f, 2.0f});
    const auto bytes = encode_activation(t);
    const std::uint32_t meta_len = read_u32(bytes, 28);
    CHECK(bytes.size() == 32u + meta_len + 8u);
    CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "HFTPACT1");
    CHECK(read_u32(bytes, 8) == 1);
    CHECK(read_u32(bytes, 12) == 1);
    CHECK(read_u32(bytes, 16) == 2);
    double rate;
    std::memcpy(&rate, bytes.data() + 20, 8);
    CHECK(rate == 4.0);
  }

  TEST_CASE("header claiming one more timepoint than stored is corruption") {
    const ActivationTensor t(1, 1, 31, 4.0, std::vector<float>(31, 0.5f));
    auto bytes = encode_activation(t);
    const std::uint32_t thirty_two = 32;
    std::memcpy(bytes.data() + 16, &thirty_two, 4);
    CHECK_THROWS_AS(decode_activation(bytes), CorruptionError);
  }

  TEST_CASE("truncated and mislabelled files are rejected") {
    const auto t = small_tensor(1, 2, 8);
    auto bytes = encode_activation(t);
    CHECK_THROWS_AS(decode_activation(std::span(bytes).first(10)), Error);
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_activation(bytes), FormatError);
    CHECK_THROWS_AS(decode_recording(encode_activation(t)), FormatError);
  }

  TEST_CASE("wide model header: 36 layers by 5120 neurons") {
    const ActivationTensor t(36, 5120, 2, 4.0, std::vector<float>(36 * 5120 * 2, 0.0f));
    const auto back = decode_activation(encode_activation(t));
    CHECK(back.n_layers() == 36);
    CHECK(back.n_neurons() == 5120);
  }

  TEST_CASE("recording round-trip keeps channel metadata") {
    auto dir = oracle::scratch("ingest_rec");
    std::vector<ChannelMeta> ch{{0, Hemisphere::L, "Heschl_L", "A1"}, {1, Hemisphere::R, "Insula_R", "Insula"}};
    auto v = oracle::gaussian(2 * 3 * 8, 5);
    const TrialRecording r(2, 3, 8, 32.0, std::vector<float>(v.begin(), v.end()), ch,
                           {StimulusClass::sentence, std::nullopt});
    write_trial_recording(r, dir / "r.tri");
    const auto back = read_trial_recording(dir / "r.tri");
    CHECK(back == r);
    CHECK(back.channels()[1].aal_label == "Insula_R");
  }

  TEST_CASE("non-finite values fail validation") {
    std::vector<float> v{1.0f, std::nanf("")};
    CHECK_THROWS_AS(ActivationTensor(1, 1, 2, 4.0, v), ValidationError);
  }

  TEST_CASE("default ROI map") {
    const auto& m = default_roi_map();
    CHECK(m.resolve("Heschl") == "A1");
    CHECK(m.resolve("Heschl_R") == "A1");
    CHECK(m.resolve("Temporal_Pole_Sup") == m.resolve("Temporal_Pole_Mid"));
    CHECK(m.resolve("Temporal_Pole_Sup") == "Temporal_Pole");
    CHECK(m.entries().size() == 24);
    CHECK_THROWS_AS(m.resolve("Cerebellum"), ValidationError);
  }

  TEST_CASE("ROI map must cover all twelve regions") {
    auto entries = default_roi_map().entries();
    for (auto it = entries.begin(); it != entries.end();) {
      if (it->second == "Amygdala") {
        it = entries.erase(it);
      } else {
        ++it;
      }
    }
    CHECK_THROWS_AS(RoiMap{entries}, ValidationError);
    CHECK_THROWS_AS(parse_roi_map(R"({"Heschl": "A1", "Heschl": "A1"})"), ValidationError);
    CHECK_THROWS_AS(parse_roi_map("not json"), FormatError);
  }

  TEST_CASE("slice_last keeps the trailing units") {
    std::vector<float> v(36);
    for (std::size_t i = 0; i < 36; ++i) v[i] = static_cast<float>(i);
    const ActivationTensor t(1, 1, 36, 4.0, v);
    const auto s = slice_last(t, 32);
    REQUIRE(s.n_timepoints() == 32);
    CHECK(s.at(0, 0, 0) == 4.0f);
    CHECK(s.at(0, 0, 31) == 35.0f);
    CHECK(slice_last(t, 36) == t);
    CHECK_THROWS_AS(slice_last(t, 37), BoundsError);
  }

  TEST_CASE("slice_last scales with the recording rate") {
    const TrialRecording r(1, 2, 36 * 8, 32.0, std::vector<float>(2 * 36 * 8, 1.0f), {{0, Hemisphere::L, "Heschl", "A1"}});
    CHECK(slice_last(r, 32).n_samples() == 256);
    CHECK_THROWS_AS(samples_per_unit(10.0), ValidationError);
  }

  TEST_CASE("split halves") {
    auto c = split_halves(40, SplitPolicy::contiguous);
    CHECK(c[0].size() == 20);
    CHECK(c[0].front() == 0);
    CHECK(c[1].front() == 20);
    auto i = split_halves(6, SplitPolicy::interleaved);
    CHECK(i[0] == std::vector<std::size_t>{0, 2, 4});
    CHECK(i[1] == std::vector<std::size_t>{1, 3, 5});
    CHECK_THROWS_AS(split_halves(3, SplitPolicy::contiguous), BoundsError);
  }

  TEST_CASE("split_trials and concat_time invert each other") {
    const auto t = small_tensor(2, 2, 12);
    const auto parts = split_trials(t, 4);
    REQUIRE(parts.size() == 3);
    const auto back = concat_time(parts, t.condition());
    CHECK(std::equal(back.values().begin(), back.values().end(), t.values().begin()));
  }

  TEST_CASE("noise-free synthetic unit is an exact sampled cosine") {
    SynthSpec s;
    s.n_layers = 1;
    s.n_neurons = 2;
    s.n_timepoints = 32;
    s.noise_sigma = 0.0;
    s.planted = {{0, 1, 1, 1.0, 2.5, 0.3, true}};
    const auto t = synth_activation(s);
    for (std::size_t i = 0; i < 32; ++i) {
      const double want = 2.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / 4.0 + 0.3);
      CHECK(t.at(0, 1, i) == doctest::Approx(want).epsilon(1e-6));
      CHECK(t.at(0, 0, i) == 0.0f);
    }
    CHECK(t.attributes().at("synth").at("planted").size() == 1);
  }

  TEST_CASE("synthetic data is deterministic per seed") {
    SynthSpec s;
    s.n_layers = 2;
    s.n_neurons = 3;
    s.n_timepoints = 20;
    s.seed = 11;
    CHECK(synth_activation(s) == synth_activation(s));
    auto s2 = s;
    s2.seed = 12;
    CHECK_FALSE(synth_activation(s) == synth_activation(s2));
  }

  TEST_CASE("synth spec JSON rejects unknown keys") {
    CHECK_THROWS_AS(synth_spec_from_json({{"kind", "activation"}, {"bogus", 1}}), ConfigError);
    const auto s = synth_spec_from_json({{"kind", "recording"}, {"n_channels", 4}, {"n_trials", 3},
                                         {"n_samples", 64}, {"rate_hz", 32.0}});
    const auto r = synth_recording(s);
    CHECK(r.n_channels() == 4);
    CHECK(r.channels().size() == 4);
  }

  TEST_CASE("condition labels") {
    CHECK(all_conditions().size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(condition_index(all_conditions()[i]) == i);
    CHECK(condition_from_json(to_json(ConditionLabel{StimulusClass::random, Split::B})) ==
          ConditionLabel{StimulusClass::random, Split::B});
  }
}
