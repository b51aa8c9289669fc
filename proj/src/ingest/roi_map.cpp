#include <fstream>
#include <set>
#include <sstream>

#include "hftp/error.hpp"
#include "hftp/ingest.hpp"

namespace hftp {

RoiMap::RoiMap(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {
  std::set<std::string_view> seen;
  for (const auto& [label, roi] : entries_) {
    if (!is_roi_name(roi)) throw ValidationError("AAL label '" + label + "' maps to unknown ROI '" + roi + "'");
    seen.insert(roi);
  }
  if (seen.size() != roi_names().size()) {
    throw ValidationError("ROI map covers " + std::to_string(seen.size()) + " ROIs, expected " +
                          std::to_string(roi_names().size()));
  }
}

const std::string& RoiMap::resolve(std::string_view aal_label) const {
  if (auto it = entries_.find(std::string(aal_label)); it != entries_.end()) return it->second;
  if (aal_label.size() > 2 && (aal_label.ends_with("_L") || aal_label.ends_with("_R"))) {
    aal_label.remove_suffix(2);
    if (auto it = entries_.find(std::string(aal_label)); it != entries_.end()) return it->second;
  }
  throw ValidationError("unknown AAL label '" + std::string(aal_label) + "'");
}

RoiMap parse_roi_map(std::string_view json_text) {
  // Duplicate keys are legal JSON but ambiguous here, so they are caught at
  // parse time rather than silently keeping the last one.
  std::set<std::string> keys;
  std::string duplicate;
  int depth = 0;
  auto cb = [&](int d, nlohmann::json::parse_event_t ev, nlohmann::json& parsed) {
    depth = d;
    if (ev == nlohmann::json::parse_event_t::key && depth == 1) {
      auto k = parsed.get<std::string>();
      if (!keys.insert(k).second && duplicate.empty()) duplicate = k;
    }
    return true;
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text.begin(), json_text.end(), cb);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("ROI map is not valid JSON: ") + e.what());
  }
  if (!duplicate.empty()) throw ValidationError("duplicate AAL label '" + duplicate + "' in ROI map");
  if (!j.is_object()) throw ValidationError("ROI map must be a JSON object");
  std::map<std::string, std::string> entries;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw ValidationError("ROI for '" + k + "' must be a string");
    entries.emplace(k, v.get<std::string>());
  }
  return RoiMap(std::move(entries));
}

RoiMap load_roi_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_roi_map(ss.str());
}

const RoiMap& default_roi_map() {
  static const RoiMap kMap(std::map<std::string, std::string>{
      {"Heschl", "A1"},
      {"Temporal_Sup", "STG"},
      {"Temporal_Mid", "MTG"},
      {"Temporal_Inf", "ITG"},
      {"ParaHippocampal", "ITG"},
      {"Fusiform", "ITG"},
      {"Insula", "Insula"},
      {"Angular", "TPJ"},
      {"SupraMarginal", "TPJ"},
      {"Parietal_Inf", "TPJ"},
      {"Temporal_Pole_Sup", "Temporal_Pole"},
      {"Temporal_Pole_Mid", "Temporal_Pole"},
      {"Paracentral_Lobule", "Sensorimotor"},
      {"Supp_Motor_Area", "Sensorimotor"},
      {"Rolandic_Oper", "Sensorimotor"},
      {"Precentral", "Sensorimotor"},
      {"Postcentral", "Sensorimotor"},
      {"Frontal_Inf_Oper", "IFG"},
      {"Frontal_Inf_Tri", "IFG"},
      {"Frontal_Inf_Orb", "IFG"},
      {"Frontal_Mid", "MFG"},
      {"Frontal_Mid_Orb", "MFG"},
      {"Hippocampus", "Hippocampus"},
      {"Amygdala", "Amygdala"},
  });
  return kMap;
}

}  // namespace hftp
