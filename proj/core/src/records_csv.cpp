#include "dnslsh/records_csv.hpp"

#include <array>
#include <fstream>

#include "dnslsh/csv.hpp"
#include "dnslsh/error.hpp"

namespace dnslsh {

bool is_known_behavior(const std::string& behavior) {
  return behavior == "handshake" || behavior == "idle" || behavior == "download" ||
         behavior == "upload";
}

void validate_record(const DnsQueryRecord& r) {
  if (r.qname.empty()) throw DataError("empty qname");
  if (!(r.timestamp >= 0.0)) throw DataError("timestamp must be >= 0");
  if (r.behavior_label) {
    if (!is_known_behavior(*r.behavior_label)) {
      throw DataError("unknown behavior '" + *r.behavior_label + "'");
    }
    if (!r.family_label || *r.family_label == kLegitimate) {
      throw DataError("behavior '" + *r.behavior_label + "' requires a malicious family label");
    }
  }
}

StreamKey StreamKey::parse(const std::string& text) {
  const auto bar = text.rfind('|');
  if (bar == std::string::npos) throw DataError("malformed stream key '" + text + "'");
  return {text.substr(0, bar), text.substr(bar + 1)};
}

std::vector<DnsQueryRecord> read_csv(std::istream& in) {
  CsvReader reader(in);
  CsvRow header;
  if (!reader.next(header)) throw SchemaError("CSV input is empty (header row required)");
  if (!header.fields.empty() && header.fields[0].starts_with("\xEF\xBB\xBF")) {
    header.fields[0].erase(0, 3);
  }

  std::array<std::size_t, 6> col{};
  for (std::size_t c = 0; c < 6; ++c) {
    bool found = false;
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
      if (header.fields[i] == kRecordColumns[c]) {
        col[c] = i;
        found = true;
        break;
      }
    }
    if (!found) throw SchemaError(std::string("missing column '") + kRecordColumns[c] + "'");
  }

  std::vector<DnsQueryRecord> records;
  CsvRow row;
  while (reader.next(row)) {
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;
    if (row.fields.size() != header.fields.size()) {
      throw RowError(row.line, "expected " + std::to_string(header.fields.size()) +
                                   " fields, found " + std::to_string(row.fields.size()));
    }
    DnsQueryRecord r;
    try {
      r.timestamp = parse_double(row.fields[col[0]]);
    } catch (const std::invalid_argument&) {
      throw RowError(row.line, "bad timestamp '" + row.fields[col[0]] + "'");
    }
    r.qname = row.fields[col[1]];
    r.qtype = row.fields[col[2]];
    if (!row.fields[col[3]].empty()) r.family_label = row.fields[col[3]];
    if (!row.fields[col[4]].empty()) r.behavior_label = row.fields[col[4]];
    r.source = row.fields[col[5]];
    try {
      validate_record(r);
    } catch (const DataError& e) {
      throw RowError(row.line, e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<DnsQueryRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_csv(in);
}

void write_csv(const std::vector<DnsQueryRecord>& records, std::ostream& out) {
  const std::vector<std::string> header(std::begin(kRecordColumns), std::end(kRecordColumns));
  write_csv_row(out, header);
  std::vector<std::string> fields(6);
  for (const auto& r : records) {
    fields[0] = format_double(r.timestamp);
    fields[1] = r.qname;
    fields[2] = r.qtype;
    fields[3] = r.family_label.value_or("");
    fields[4] = r.behavior_label.value_or("");
    fields[5] = r.source;
    write_csv_row(out, fields);
  }
}

void write_csv(const std::vector<DnsQueryRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(records, out);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace dnslsh
