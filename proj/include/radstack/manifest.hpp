#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "radstack/common.hpp"

namespace radstack {

enum class Task { IDH, OS };

inline const char* to_token(Task t) { return t == Task::IDH ? "IDH" : "OS"; }

inline Task parse_task(const std::string& s) {
  if (s == "IDH") return Task::IDH;
  if (s == "OS") return Task::OS;
  throw validation_error("unknown task '" + s + "' (expected IDH or OS)");
}

struct SubjectLabel {
  Task task = Task::IDH;
  int value = 0;  // IDH: {0,1}; OS: {0 short, 1 medium, 2 long}
};

struct SubjectEntry {
  std::string id;
  std::map<std::string, std::filesystem::path> volumes;  // channel token -> path
  std::map<std::string, std::filesystem::path> masks;    // rater name -> path
  std::optional<SubjectLabel> label;
  std::optional<double> age;  // years
};

struct CohortManifest {
  std::filesystem::path source_path;
  std::vector<SubjectEntry> subjects;

  std::vector<std::string> rater_names() const {
    std::set<std::string> names;
    for (const auto& s : subjects)
      for (const auto& [r, _] : s.masks) names.insert(r);
    return {names.begin(), names.end()};
  }
};

inline void validate_label(const SubjectLabel& l, const std::string& id) {
  if (l.task == Task::IDH && l.value != 0 && l.value != 1)
    throw validation_error("invalid label for subject '" + id + "': IDH value must be 0 or 1");
  if (l.task == Task::OS && (l.value < 0 || l.value > 2))
    throw validation_error("invalid label for subject '" + id + "': OS value must be 0, 1 or 2");
}

/// Loads a cohort manifest (JSON). Referenced paths are resolved relative to
/// the manifest file; existence is checked lazily at use.
inline CohortManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open manifest: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw validation_error("manifest parse failure in " + path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("subjects") || !doc["subjects"].is_array())
    throw validation_error("manifest must be an object with a 'subjects' array: " + path.string());

  CohortManifest m;
  m.source_path = path;
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::set<std::string> seen;
  for (const auto& js : doc["subjects"]) {
    SubjectEntry e;
    e.id = js.value("id", "");
    if (e.id.empty()) throw validation_error("manifest subject without id");
    if (!seen.insert(e.id).second) throw validation_error("duplicate subject id '" + e.id + "'");
    if (js.contains("volumes"))
      for (const auto& [k, v] : js["volumes"].items())
        e.volumes[k] = base / v.template get<std::string>();
    if (js.contains("masks"))
      for (const auto& [k, v] : js["masks"].items())
        e.masks[k] = base / v.template get<std::string>();
    if (js.contains("label") && !js["label"].is_null()) {
      SubjectLabel l;
      l.task = parse_task(js["label"].value("task", ""));
      if (!js["label"].contains("value") || !js["label"]["value"].is_number_integer())
        throw validation_error("invalid label for subject '" + e.id + "': missing integer value");
      l.value = js["label"]["value"].get<int>();
      validate_label(l, e.id);
      e.label = l;
    }
    if (js.contains("age") && !js["age"].is_null()) e.age = js["age"].get<double>();
    m.subjects.push_back(std::move(e));
  }
  return m;
}

/// The labels of a test cohort, sealed away from all pre-evaluation stages.
/// Opening the vault before it is unlocked aborts the run (leakage guard).
class LabelVault {
 public:
  LabelVault() = default;
  explicit LabelVault(std::map<std::string, int> labels) : labels_(std::move(labels)) {}

  void unlock() { unlocked_ = true; }
  bool empty() const { return labels_.empty(); }

  const std::map<std::string, int>& open() const {
    if (!unlocked_)
      throw validation_error("leakage guard: test labels accessed before the evaluate stage");
    return labels_;
  }

 private:
  std::map<std::string, int> labels_;
  bool unlocked_ = false;
};

/// Splits a manifest into a label-stripped copy plus a sealed label vault.
inline std::pair<CohortManifest, LabelVault> strip_labels(CohortManifest m) {
  std::map<std::string, int> labels;
  for (auto& s : m.subjects) {
    if (s.label) labels[s.id] = s.label->value;
    s.label.reset();
  }
  return {std::move(m), LabelVault(std::move(labels))};
}

}  // namespace radstack
