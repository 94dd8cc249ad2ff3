#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace grain {

// Two-level label taxonomy: a fixed set of fine classes, each belonging to
// exactly one coarse class. Ids are dense, 0-based and assigned in document
// order; names are display metadata. Instances are immutable after
// construction and safe to share across threads.
class LabelHierarchy {
 public:
  // Throws grain::Error when names collide, a mapping index is out of range,
  // either level is empty, or some coarse class has no fine classes.
  LabelHierarchy(std::vector<std::string> fine_names,
                 std::vector<std::string> coarse_names,
                 std::vector<int> fine_to_coarse);

  int fine_count() const { return static_cast<int>(fine_names_.size()); }
  int coarse_count() const { return static_cast<int>(coarse_names_.size()); }

  const std::vector<std::string>& fine_names() const { return fine_names_; }
  const std::vector<std::string>& coarse_names() const { return coarse_names_; }
  const std::vector<int>& fine_to_coarse() const { return fine_to_coarse_; }

  // Coarse id of a fine id; throws std::out_of_range on a bad id.
  int coarse_of(int fine) const;

  // True iff both fine classes map to the same coarse class.
  bool same_coarse(int fine_a, int fine_b) const;

  // Fine ids of one coarse class, in ascending fine-id order.
  const std::vector<int>& fine_ids_of(int coarse) const;

  // Fine id by name; throws grain::Error for an unknown name.
  int fine_id(std::string_view name) const;

 private:
  std::vector<std::string> fine_names_;
  std::vector<std::string> coarse_names_;
  std::vector<int> fine_to_coarse_;
  std::vector<std::vector<int>> groups_;
  std::unordered_map<std::string, int> fine_index_;
};

// One coarse id per fine id; raw material for regrouping a hierarchy.
struct PartitionAssignment {
  std::vector<int> coarse_of_fine;
};

// Parses the hierarchy document format:
//   { "coarse": ["animal", ...],
//     "fine":   [ {"name": "bird", "coarse": "animal"}, ... ] }
// Throws grain::Error on malformed JSON, unknown coarse references, or
// duplicate names.
LabelHierarchy load_hierarchy(const std::string& json_text);
LabelHierarchy load_hierarchy_file(const std::filesystem::path& path);

// Serializes back to the document format (ordered keys, 2-space indent).
std::string hierarchy_to_json(const LabelHierarchy& h);

// Same fine classes regrouped per the assignment. coarse_names gives the new
// coarse level; the assignment indexes into it.
LabelHierarchy repartition(const LabelHierarchy& h, const PartitionAssignment& p,
                           std::vector<std::string> coarse_names);

struct CoarseRestriction {
  LabelHierarchy hierarchy;
  // Old fine id -> new fine id, or -1 when the class was dropped.
  std::vector<int> fine_remap;
};

// Keeps only the listed coarse classes (ids into h, no duplicates); the
// surviving classes are re-densified in their original order.
CoarseRestriction restrict_coarse(const LabelHierarchy& h, const std::vector<int>& keep);

// Hierarchy whose fine classes are h's coarse classes, each alone in its own
// coarse class. Training directly on coarse labels uses this as its label
// space, which lets one training path serve both granularities.
LabelHierarchy coarse_identity(const LabelHierarchy& h);

}  // namespace grain
