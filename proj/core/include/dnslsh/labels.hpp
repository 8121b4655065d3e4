#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnslsh/records.hpp"

namespace dnslsh {

enum class Task { Binary, Family, BehaviorCompound, BehaviorAction };

std::string to_string(Task task);
Task task_from_string(std::string_view name);
/// Segment count used for a task when none is configured: 3 for the
/// behavioral tasks, 2 otherwise.
int default_segment_count(Task task);

inline constexpr const char* kMalicious = "malicious";

/// Known families. "synthetic" marks generated traffic and is never part of
/// a real-data evaluation.
const std::vector<std::string>& known_families();
const std::vector<std::string>& known_behaviors();

struct WindowLabel {
  std::string binary;  ///< "malicious" or "legitimate"
  std::string family;
  std::optional<std::string> behavior;

  /// "Family_Behavior" with both parts capitalized, e.g. "Iodine_Download".
  std::optional<std::string> compound() const;

  friend bool operator==(const WindowLabel&, const WindowLabel&) = default;
};

/// Majority vote over the window's queries. Family ties prefer any
/// malicious family over "legitimate", then the lexicographically smallest.
/// Behavior is the majority among queries of the winning family, ties to
/// the lexicographically smallest. Throws DataError naming the first
/// unlabeled query.
WindowLabel label_window(std::span<const CleanQuery> queries);

/// Class of a window under `task`, or nullopt when the task excludes the
/// window (handshake traffic and malicious windows without a behavior are
/// excluded from the behavioral tasks).
std::optional<std::string> task_label(const WindowLabel& label, Task task);

/// Whether `label` is a member of the task's taxonomy.
bool is_task_label(Task task, const std::string& label);

/// Lexicographic order with "legitimate" last.
void sort_classes(std::vector<std::string>& classes);

}  // namespace dnslsh
