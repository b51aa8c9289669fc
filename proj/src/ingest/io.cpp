#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hftp/error.hpp"
#include "hftp/ingest.hpp"

namespace hftp {

static_assert(std::endian::native == std::endian::little, "interchange I/O assumes a little-endian host");

namespace {

constexpr std::string_view kActMagic = "HFTPACT1";
constexpr std::string_view kTriMagic = "HFTPTRI1";

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    auto b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  void raw(void* p, std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size()) throw FormatError(std::string("truncated header reading ") + what);
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    raw(&v, 4, what);
    return v;
  }
  double f64(const char* what) {
    double v;
    raw(&v, 8, what);
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw ValidationError(std::string(what) + " exceeds the u32 range of the format");
  return static_cast<std::uint32_t>(v);
}

struct Header {
  std::array<std::uint32_t, 3> dims{};
  double rate_hz = 0;
  nlohmann::json meta;
  std::span<const std::uint8_t> payload;
};

Header read_header(std::span<const std::uint8_t> bytes, std::string_view magic) {
  Reader r(bytes);
  char m[8];
  r.raw(m, 8, "magic");
  if (std::string_view(m, 8) != magic) {
    throw FormatError("bad magic: expected " + std::string(magic));
  }
  Header h;
  for (auto& d : h.dims) d = r.u32("dimensions");
  h.rate_hz = r.f64("rate_hz");
  std::uint32_t len = r.u32("metadata length");
  if (len > r.remaining()) throw FormatError("metadata length exceeds file size");
  auto meta_bytes = r.rest().first(len);
  try {
    h.meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!h.meta.is_object()) throw FormatError("metadata must be a JSON object");
  r.skip(len);
  std::size_t expected = std::size_t{h.dims[0]} * h.dims[1] * h.dims[2] * sizeof(float);
  if (r.remaining() != expected) {
    throw CorruptionError("payload holds " + std::to_string(r.remaining()) + " bytes, header implies " +
                          std::to_string(expected));
  }
  h.payload = r.rest();
  return h;
}

std::vector<float> payload_floats(std::span<const std::uint8_t> p) {
  std::vector<float> v(p.size() / sizeof(float));
  std::memcpy(v.data(), p.data(), p.size());
  return v;
}

void write_header(Writer& w, std::string_view magic, std::array<std::size_t, 3> dims, double rate,
                  const nlohmann::json& meta) {
  w.raw(magic.data(), 8);
  w.u32(checked_u32(dims[0], "dimension"));
  w.u32(checked_u32(dims[1], "dimension"));
  w.u32(checked_u32(dims[2], "dimension"));
  w.f64(rate);
  std::string text = meta.dump();
  w.u32(checked_u32(text.size(), "metadata length"));
  w.raw(text.data(), text.size());
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json channel_to_json(const ChannelMeta& c) {
  return {{"channel_id", c.channel_id},
          {"hemisphere", std::string(to_string(c.hemisphere))},
          {"aal_label", c.aal_label},
          {"roi", c.roi}};
}

template <class T>
T meta_field(const nlohmann::json& meta, const char* key) {
  try {
    return meta.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metadata field '") + key + "': " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const ConditionLabel& c) {
  nlohmann::json j = {{"stimulus_class", std::string(to_string(c.stimulus_class))}};
  j["split"] = c.split ? nlohmann::json(std::string(to_string(*c.split))) : nlohmann::json(nullptr);
  return j;
}

ConditionLabel condition_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("condition must be a JSON object");
  ConditionLabel c;
  c.stimulus_class = parse_stimulus_class(j.at("stimulus_class").get<std::string>());
  if (auto it = j.find("split"); it != j.end() && !it->is_null()) c.split = parse_split(it->get<std::string>());
  return c;
}

std::vector<std::uint8_t> encode_activation(const ActivationTensor& t) {
  nlohmann::json meta = {{"corpus_tag", t.corpus_tag()}, {"condition", to_json(t.condition())}};
  if (!t.attributes().empty()) meta["attributes"] = t.attributes();
  Writer w;
  write_header(w, kActMagic, {t.n_layers(), t.n_neurons(), t.n_timepoints()}, t.rate_hz(), meta);
  w.raw(t.values().data(), t.values().size_bytes());
  return w.take();
}

ActivationTensor decode_activation(std::span<const std::uint8_t> bytes) {
  Header h = read_header(bytes, kActMagic);
  ConditionLabel cond;
  try {
    cond = condition_from_json(h.meta.at("condition"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metadata condition: ") + e.what());
  }
  auto tag = meta_field<std::string>(h.meta, "corpus_tag");
  auto attrs = h.meta.contains("attributes") ? h.meta["attributes"] : nlohmann::json::object();
  return ActivationTensor(h.dims[0], h.dims[1], h.dims[2], h.rate_hz, payload_floats(h.payload), std::move(tag),
                          cond, std::move(attrs));
}

ActivationTensor read_activation_file(const std::filesystem::path& path) { return decode_activation(slurp(path)); }

void write_activation_file(const ActivationTensor& t, const std::filesystem::path& path) {
  dump(encode_activation(t), path);
}

std::vector<std::uint8_t> encode_recording(const TrialRecording& r) {
  nlohmann::json chans = nlohmann::json::array();
  for (const auto& c : r.channels()) chans.push_back(channel_to_json(c));
  nlohmann::json meta = {{"condition", to_json(r.condition())}, {"channels", std::move(chans)}};
  if (!r.attributes().empty()) meta["attributes"] = r.attributes();
  Writer w;
  write_header(w, kTriMagic, {r.n_channels(), r.n_trials(), r.n_samples()}, r.rate_hz(), meta);
  w.raw(r.values().data(), r.values().size_bytes());
  return w.take();
}

TrialRecording decode_recording(std::span<const std::uint8_t> bytes) {
  Header h = read_header(bytes, kTriMagic);
  ConditionLabel cond;
  std::vector<ChannelMeta> channels;
  try {
    cond = condition_from_json(h.meta.at("condition"));
    for (const auto& c : h.meta.at("channels")) {
      channels.push_back({c.at("channel_id").get<std::size_t>(), parse_hemisphere(c.at("hemisphere").get<std::string>()),
                          c.at("aal_label").get<std::string>(), c.at("roi").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("recording metadata: ") + e.what());
  }
  auto attrs = h.meta.contains("attributes") ? h.meta["attributes"] : nlohmann::json::object();
  return TrialRecording(h.dims[0], h.dims[1], h.dims[2], h.rate_hz, payload_floats(h.payload), std::move(channels),
                        cond, std::move(attrs));
}

TrialRecording read_trial_recording(const std::filesystem::path& path) { return decode_recording(slurp(path)); }

void write_trial_recording(const TrialRecording& r, const std::filesystem::path& path) {
  dump(encode_recording(r), path);
}

}  // namespace hftp
