#include "dnslsh/labels.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "dnslsh/error.hpp"

namespace dnslsh {
namespace {

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// Majority with "preferred" winning ties, then lexicographic order.
std::string majority(const std::map<std::string, std::size_t>& counts,
                     bool (*preferred)(const std::string&)) {
  const std::string* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) {  // map order = lexicographic
    if (!best || count > best_count ||
        (count == best_count && preferred && preferred(label) && !preferred(*best))) {
      best = &label;
      best_count = count;
    }
  }
  return best ? *best : std::string{};
}

bool is_malicious(const std::string& family) { return family != kLegitimate; }

}  // namespace

std::string to_string(Task task) {
  switch (task) {
    case Task::Binary: return "binary";
    case Task::Family: return "family";
    case Task::BehaviorCompound: return "behavior-compound";
    case Task::BehaviorAction: return "behavior-action";
  }
  return "binary";
}

Task task_from_string(std::string_view name) {
  if (name == "binary") return Task::Binary;
  if (name == "family") return Task::Family;
  if (name == "behavior-compound") return Task::BehaviorCompound;
  if (name == "behavior-action") return Task::BehaviorAction;
  throw std::invalid_argument("unknown task '" + std::string(name) +
                              "' (expected binary, family, behavior-compound or behavior-action)");
}

int default_segment_count(Task task) {
  return task == Task::BehaviorCompound || task == Task::BehaviorAction ? 3 : 2;
}

const std::vector<std::string>& known_families() {
  static const std::vector<std::string> families = {
      "dnscat2",        "iodine",         "roguerobin-net", "roguerobin-ps",
      "saitama",        "symbiote",       "symbiote-dnscat2", "synthetic",
      "legitimate"};
  return families;
}

const std::vector<std::string>& known_behaviors() {
  static const std::vector<std::string> behaviors = {"download", "handshake", "idle", "upload"};
  return behaviors;
}

std::optional<std::string> WindowLabel::compound() const {
  if (!behavior) return std::nullopt;
  return capitalize(family) + "_" + capitalize(*behavior);
}

WindowLabel label_window(std::span<const CleanQuery> queries) {
  std::map<std::string, std::size_t> families;
  for (const auto& q : queries) {
    if (!q.record.family_label) {
      throw DataError("unlabeled query '" + q.record.qname + "' (source " + q.record.source +
                      ", ts " + std::to_string(q.record.timestamp) + ")");
    }
    ++families[*q.record.family_label];
  }
  if (families.empty()) throw DataError("cannot label an empty window");

  WindowLabel label;
  label.family = majority(families, is_malicious);
  label.binary = label.family == kLegitimate ? kLegitimate : kMalicious;

  std::map<std::string, std::size_t> behaviors;
  for (const auto& q : queries) {
    if (*q.record.family_label == label.family && q.record.behavior_label) {
      ++behaviors[*q.record.behavior_label];
    }
  }
  if (!behaviors.empty()) label.behavior = majority(behaviors, nullptr);
  return label;
}

std::optional<std::string> task_label(const WindowLabel& label, Task task) {
  switch (task) {
    case Task::Binary:
      return label.binary;
    case Task::Family:
      return label.family;
    case Task::BehaviorCompound:
    case Task::BehaviorAction:
      if (label.family == kLegitimate) return std::string(kLegitimate);
      if (!label.behavior || *label.behavior == "handshake") return std::nullopt;
      return task == Task::BehaviorAction ? *label.behavior : *label.compound();
  }
  return std::nullopt;
}

bool is_task_label(Task task, const std::string& label) {
  const auto& fams = known_families();
  switch (task) {
    case Task::Binary:
      return label == kMalicious || label == kLegitimate;
    case Task::Family:
      return std::find(fams.begin(), fams.end(), label) != fams.end();
    case Task::BehaviorAction:
      return label == "upload" || label == "download" || label == "idle" || label == kLegitimate;
    case Task::BehaviorCompound:
      if (label == kLegitimate) return true;
      for (const auto& f : fams) {
        if (f == kLegitimate) continue;
        for (const char* b : {"idle", "download", "upload"}) {
          if (label == capitalize(f) + "_" + capitalize(b)) return true;
        }
      }
      return false;
  }
  return false;
}

void sort_classes(std::vector<std::string>& classes) {
  std::sort(classes.begin(), classes.end(), [](const std::string& a, const std::string& b) {
    const bool la = a == kLegitimate;
    const bool lb = b == kLegitimate;
    if (la != lb) return lb;
    return a < b;
  });
}

}  // namespace dnslsh
