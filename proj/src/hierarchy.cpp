#include "grain/hierarchy.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "grain/errors.hpp"
#include "json.hpp"

namespace grain {

LabelHierarchy::LabelHierarchy(std::vector<std::string> fine_names,
                               std::vector<std::string> coarse_names,
                               std::vector<int> fine_to_coarse)
    : fine_names_(std::move(fine_names)),
      coarse_names_(std::move(coarse_names)),
      fine_to_coarse_(std::move(fine_to_coarse)) {
  if (fine_names_.empty()) {
    throw Error("hierarchy: no fine classes");
  }
  if (coarse_names_.empty()) {
    throw Error("hierarchy: no coarse classes");
  }
  if (fine_to_coarse_.size() != fine_names_.size()) {
    throw Error("hierarchy: mapping length differs from fine class count");
  }
  groups_.resize(coarse_names_.size());
  for (std::size_t f = 0; f < fine_to_coarse_.size(); ++f) {
    const int c = fine_to_coarse_[f];
    if (c < 0 || c >= coarse_count()) {
      throw Error("hierarchy: fine class '" + fine_names_[f] +
                  "' maps to coarse id " + std::to_string(c) +
                  " outside [0, " + std::to_string(coarse_count()) + ")");
    }
    groups_[c].push_back(static_cast<int>(f));
  }
  for (std::size_t c = 0; c < groups_.size(); ++c) {
    if (groups_[c].empty()) {
      throw Error("hierarchy: coarse class '" + coarse_names_[c] + "' has no fine classes");
    }
  }
  for (std::size_t f = 0; f < fine_names_.size(); ++f) {
    if (fine_names_[f].empty()) {
      throw Error("hierarchy: empty fine class name at index " + std::to_string(f));
    }
    if (!fine_index_.emplace(fine_names_[f], static_cast<int>(f)).second) {
      throw Error("hierarchy: duplicate fine class name '" + fine_names_[f] + "'");
    }
  }
  std::unordered_map<std::string, int> coarse_seen;
  for (std::size_t c = 0; c < coarse_names_.size(); ++c) {
    if (coarse_names_[c].empty()) {
      throw Error("hierarchy: empty coarse class name at index " + std::to_string(c));
    }
    if (!coarse_seen.emplace(coarse_names_[c], static_cast<int>(c)).second) {
      throw Error("hierarchy: duplicate coarse class name '" + coarse_names_[c] + "'");
    }
  }
}

int LabelHierarchy::coarse_of(int fine) const {
  if (fine < 0 || fine >= fine_count()) {
    throw std::out_of_range("coarse_of: fine id " + std::to_string(fine) +
                            " outside [0, " + std::to_string(fine_count()) + ")");
  }
  return fine_to_coarse_[fine];
}

bool LabelHierarchy::same_coarse(int fine_a, int fine_b) const {
  return coarse_of(fine_a) == coarse_of(fine_b);
}

const std::vector<int>& LabelHierarchy::fine_ids_of(int coarse) const {
  if (coarse < 0 || coarse >= coarse_count()) {
    throw std::out_of_range("fine_ids_of: coarse id " + std::to_string(coarse) +
                            " outside [0, " + std::to_string(coarse_count()) + ")");
  }
  return groups_[coarse];
}

int LabelHierarchy::fine_id(std::string_view name) const {
  auto it = fine_index_.find(std::string(name));
  if (it == fine_index_.end()) {
    throw Error("hierarchy: unknown fine class name '" + std::string(name) + "'");
  }
  return it->second;
}

LabelHierarchy load_hierarchy(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("hierarchy: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("coarse") || !doc.contains("fine")) {
    throw Error("hierarchy: document must be an object with 'coarse' and 'fine'");
  }
  std::vector<std::string> coarse_names;
  std::unordered_map<std::string, int> coarse_ids;
  for (const auto& c : doc.at("coarse")) {
    if (!c.is_string()) {
      throw Error("hierarchy: 'coarse' entries must be strings");
    }
    const std::string name = c.get<std::string>();
    if (!coarse_ids.emplace(name, static_cast<int>(coarse_names.size())).second) {
      throw Error("hierarchy: duplicate coarse class name '" + name + "'");
    }
    coarse_names.push_back(name);
  }
  std::vector<std::string> fine_names;
  std::vector<int> fine_to_coarse;
  for (const auto& f : doc.at("fine")) {
    if (!f.is_object() || !f.contains("name") || !f.contains("coarse")) {
      throw Error("hierarchy: 'fine' entries must be objects with 'name' and 'coarse'");
    }
    const std::string name = f.at("name").get<std::string>();
    const std::string parent = f.at("coarse").get<std::string>();
    auto it = coarse_ids.find(parent);
    if (it == coarse_ids.end()) {
      throw Error("hierarchy: fine class '" + name +
                  "' references unknown coarse class '" + parent + "'");
    }
    fine_names.push_back(name);
    fine_to_coarse.push_back(it->second);
  }
  return {std::move(fine_names), std::move(coarse_names), std::move(fine_to_coarse)};
}

LabelHierarchy load_hierarchy_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("hierarchy: cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_hierarchy(buf.str());
}

std::string hierarchy_to_json(const LabelHierarchy& h) {
  nlohmann::ordered_json doc;
  doc["coarse"] = h.coarse_names();
  doc["fine"] = nlohmann::ordered_json::array();
  for (int f = 0; f < h.fine_count(); ++f) {
    doc["fine"].push_back({{"name", h.fine_names()[f]},
                           {"coarse", h.coarse_names()[h.coarse_of(f)]}});
  }
  return doc.dump(2) + "\n";
}

LabelHierarchy repartition(const LabelHierarchy& h, const PartitionAssignment& p,
                           std::vector<std::string> coarse_names) {
  if (p.coarse_of_fine.size() != static_cast<std::size_t>(h.fine_count())) {
    throw Error("repartition: assignment length differs from fine class count");
  }
  return {h.fine_names(), std::move(coarse_names), p.coarse_of_fine};
}

CoarseRestriction restrict_coarse(const LabelHierarchy& h, const std::vector<int>& keep) {
  std::vector<int> new_coarse_of_old(h.coarse_count(), -1);
  std::vector<std::string> coarse_names;
  for (int c : keep) {
    if (c < 0 || c >= h.coarse_count()) {
      throw Error("restrict_coarse: coarse id " + std::to_string(c) + " out of range");
    }
    if (new_coarse_of_old[c] != -1) {
      throw Error("restrict_coarse: coarse id " + std::to_string(c) + " listed twice");
    }
    new_coarse_of_old[c] = 0;  // mark; final ids assigned below in original order
  }
  for (int c = 0; c < h.coarse_count(); ++c) {
    if (new_coarse_of_old[c] != -1) {
      new_coarse_of_old[c] = static_cast<int>(coarse_names.size());
      coarse_names.push_back(h.coarse_names()[c]);
    }
  }
  if (coarse_names.empty()) {
    throw Error("restrict_coarse: keep list is empty");
  }
  std::vector<std::string> fine_names;
  std::vector<int> fine_to_coarse;
  std::vector<int> fine_remap(h.fine_count(), -1);
  for (int f = 0; f < h.fine_count(); ++f) {
    const int nc = new_coarse_of_old[h.coarse_of(f)];
    if (nc == -1) {
      continue;
    }
    fine_remap[f] = static_cast<int>(fine_names.size());
    fine_names.push_back(h.fine_names()[f]);
    fine_to_coarse.push_back(nc);
  }
  return {LabelHierarchy(std::move(fine_names), std::move(coarse_names),
                         std::move(fine_to_coarse)),
          std::move(fine_remap)};
}

LabelHierarchy coarse_identity(const LabelHierarchy& h) {
  std::vector<int> identity(h.coarse_count());
  for (int c = 0; c < h.coarse_count(); ++c) {
    identity[c] = c;
  }
  return {h.coarse_names(), h.coarse_names(), std::move(identity)};
}

}  // namespace grain
