#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "dnslsh/records.hpp"

namespace dnslsh {

/// Column order written by write_csv. Readers locate columns by name.
inline constexpr const char* kRecordColumns[] = {"ts", "qname", "qtype", "family", "behavior", "source"};

std::vector<DnsQueryRecord> read_csv(std::istream& in);
std::vector<DnsQueryRecord> read_csv(const std::filesystem::path& path);

void write_csv(const std::vector<DnsQueryRecord>& records, std::ostream& out);
void write_csv(const std::vector<DnsQueryRecord>& records, const std::filesystem::path& path);

}  // namespace dnslsh
