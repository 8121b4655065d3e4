#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dnslsh/records.hpp"

namespace dnslsh {

/// Counters describing what a capture contained besides usable queries.
struct PcapSummary {
  std::size_t packets = 0;
  std::size_t queries = 0;
  std::size_t responses = 0;       ///< QR=1, filtered
  std::size_t non_dns = 0;         ///< not UDP/TCP port 53, or unsupported link/network layer
  std::size_t fragments = 0;       ///< IP fragments, not reassembled
  std::size_t truncated = 0;       ///< captured length shorter than the headers/message need
  std::size_t malformed = 0;       ///< DNS payload that failed to decode

  std::size_t skipped() const { return fragments + truncated + malformed; }
};

struct PcapResult {
  std::vector<DnsQueryRecord> records;
  PcapSummary summary;
};

/// Reads classic pcap (either byte order, micro- or nanosecond) or pcapng.
/// Supported link types: Ethernet (with 802.1Q tags), raw IP, Linux SLL and
/// SLL2, BSD loopback. One record per DNS query message (QR=0) in UDP or TCP
/// port-53 payloads; the qname comes from the first question. `source`
/// defaults to the file stem. Throws IoError / DataError when the file
/// cannot be opened or is not a capture.
PcapResult parse_pcap(const std::filesystem::path& path, const std::string& source = {});
PcapResult parse_pcap_bytes(std::span<const std::uint8_t> bytes, const std::string& source);

/// Decodes the first question of a DNS message. Returns false on malformed
/// input. Exposed for tests.
bool decode_dns_query(std::span<const std::uint8_t> message, bool& is_response, std::string& qname,
                      std::uint16_t& qtype);

std::string qtype_mnemonic(std::uint16_t qtype);
/// Inverse of qtype_mnemonic; accepts "TYPEnnn". Throws std::invalid_argument.
std::uint16_t qtype_code(const std::string& mnemonic);

/// Writes a classic little-endian microsecond pcap with one Ethernet/IPv4/UDP
/// DNS query per record. Labels and source are not representable in the
/// capture and are dropped.
void write_pcap(const std::vector<DnsQueryRecord>& records, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_dns_query(const std::string& qname, std::uint16_t qtype,
                                           std::uint16_t id);

}  // namespace dnslsh
