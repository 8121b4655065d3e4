#include "dnslsh/pcap.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "dnslsh/error.hpp"

namespace dnslsh {
namespace {

using Bytes = std::span<const std::uint8_t>;

std::uint16_t be16(Bytes b, std::size_t off) {
  return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

std::uint32_t rd32(Bytes b, std::size_t off, bool little) {
  if (little) {
    return std::uint32_t{b[off]} | (std::uint32_t{b[off + 1]} << 8) |
           (std::uint32_t{b[off + 2]} << 16) | (std::uint32_t{b[off + 3]} << 24);
  }
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

std::uint16_t rd16(Bytes b, std::size_t off, bool little) {
  return little ? static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8)) : be16(b, off);
}

struct QtypeName {
  std::uint16_t code;
  const char* name;
};

constexpr std::array<QtypeName, 30> kQtypes{{
    {1, "A"},       {2, "NS"},        {5, "CNAME"},  {6, "SOA"},    {10, "NULL"},
    {12, "PTR"},    {13, "HINFO"},    {15, "MX"},    {16, "TXT"},   {17, "RP"},
    {18, "AFSDB"},  {24, "SIG"},      {25, "KEY"},   {28, "AAAA"},  {29, "LOC"},
    {33, "SRV"},    {35, "NAPTR"},    {37, "CERT"},  {39, "DNAME"}, {41, "OPT"},
    {43, "DS"},     {46, "RRSIG"},    {47, "NSEC"},  {48, "DNSKEY"}, {52, "TLSA"},
    {64, "SVCB"},   {65, "HTTPS"},    {99, "SPF"},   {255, "ANY"},  {257, "CAA"},
}};

// Label bytes are emitted verbatim when printable; '.', '\\' and
// non-printable bytes use the presentation escapes (\. and \DDD).
void append_label(std::string& out, Bytes label) {
  for (auto byte : label) {
    if (byte == '.' || byte == '\\') {
      out.push_back('\\');
      out.push_back(static_cast<char>(byte));
    } else if (byte < 0x21 || byte > 0x7E) {
      out.push_back('\\');
      out.push_back(static_cast<char>('0' + byte / 100));
      out.push_back(static_cast<char>('0' + (byte / 10) % 10));
      out.push_back(static_cast<char>('0' + byte % 10));
    } else {
      out.push_back(static_cast<char>(byte));
    }
  }
}

// Returns offset just past the name in the original (uncompressed) stream,
// or 0 on failure.
std::size_t decode_name(Bytes msg, std::size_t off, std::string& out) {
  out.clear();
  std::size_t end = 0;
  std::size_t jumps = 0;
  std::size_t total = 0;
  while (true) {
    if (off >= msg.size()) return 0;
    const std::uint8_t len = msg[off];
    if ((len & 0xC0) == 0xC0) {
      if (off + 1 >= msg.size()) return 0;
      if (end == 0) end = off + 2;
      const std::size_t target = static_cast<std::size_t>(((len & 0x3F) << 8) | msg[off + 1]);
      if (++jumps > 64 || target >= msg.size()) return 0;
      off = target;
      continue;
    }
    if ((len & 0xC0) != 0) return 0;  // extended label types unsupported
    if (len == 0) {
      if (end == 0) end = off + 1;
      break;
    }
    if (off + 1 + len > msg.size()) return 0;
    total += len + 1U;
    if (total > 255) return 0;
    if (!out.empty()) out.push_back('.');
    append_label(out, msg.subspan(off + 1, len));
    off += 1U + len;
  }
  return end;
}

class Extractor {
 public:
  Extractor(std::string source, PcapResult& result)
      : source_(std::move(source)), result_(result) {}

  void packet(Bytes frame, std::uint32_t linktype, double ts, bool truncated_capture) {
    ++result_.summary.packets;
    truncated_capture_ = truncated_capture;
    ts_ = ts;
    switch (linktype) {
      case 1:  // Ethernet
        ethernet(frame);
        break;
      case 101:  // raw IP
      case 12:
      case 14:
        ip_any(frame);
        break;
      case 228:
        ipv4(frame);
        break;
      case 229:
        ipv6(frame);
        break;
      case 113:  // Linux cooked v1
        if (frame.size() < 16) return trunc();
        ethertype(be16(frame, 14), frame.subspan(16));
        break;
      case 276:  // Linux cooked v2
        if (frame.size() < 20) return trunc();
        ethertype(be16(frame, 0), frame.subspan(20));
        break;
      case 0: {  // BSD loopback, host-order family
        if (frame.size() < 4) return trunc();
        const std::uint32_t fam_le = rd32(frame, 0, true);
        const std::uint32_t fam_be = rd32(frame, 0, false);
        if (fam_le == 2 || fam_be == 2) {
          ipv4(frame.subspan(4));
        } else if (fam_le == 24 || fam_le == 28 || fam_le == 30 || fam_be == 24 ||
                   fam_be == 28 || fam_be == 30) {
          ipv6(frame.subspan(4));
        } else {
          ++result_.summary.non_dns;
        }
        break;
      }
      default:
        ++result_.summary.non_dns;
    }
  }

 private:
  void trunc() { ++result_.summary.truncated; }

  void ethernet(Bytes f) {
    if (f.size() < 14) return trunc();
    std::uint16_t type = be16(f, 12);
    std::size_t off = 14;
    while (type == 0x8100 || type == 0x88A8) {
      if (f.size() < off + 4) return trunc();
      type = be16(f, off + 2);
      off += 4;
    }
    ethertype(type, f.subspan(off));
  }

  void ethertype(std::uint16_t type, Bytes payload) {
    if (type == 0x0800) {
      ipv4(payload);
    } else if (type == 0x86DD) {
      ipv6(payload);
    } else {
      ++result_.summary.non_dns;
    }
  }

  void ip_any(Bytes p) {
    if (p.empty()) return trunc();
    const unsigned version = p[0] >> 4;
    if (version == 4) {
      ipv4(p);
    } else if (version == 6) {
      ipv6(p);
    } else {
      ++result_.summary.non_dns;
    }
  }

  void ipv4(Bytes p) {
    if (p.size() < 20) return trunc();
    if ((p[0] >> 4) != 4) {
      ++result_.summary.non_dns;
      return;
    }
    const std::size_t ihl = static_cast<std::size_t>(p[0] & 0x0F) * 4;
    if (ihl < 20 || p.size() < ihl) return trunc();
    const std::uint16_t total = be16(p, 2);
    const std::uint16_t frag = be16(p, 6);
    if ((frag & 0x2000) || (frag & 0x1FFF)) {
      ++result_.summary.fragments;
      return;
    }
    std::size_t end = p.size();
    if (total >= ihl && total <= p.size()) {
      end = total;
    } else if (total > p.size()) {
      return trunc();
    }
    transport(p[9], p.subspan(ihl, end - ihl));
  }

  void ipv6(Bytes p) {
    if (p.size() < 40) return trunc();
    if ((p[0] >> 4) != 6) {
      ++result_.summary.non_dns;
      return;
    }
    const std::size_t payload_len = be16(p, 4);
    if (p.size() < 40 + payload_len) return trunc();
    std::uint8_t next = p[6];
    Bytes rest = p.subspan(40, payload_len);
    // Skip extension headers: hop-by-hop, routing, destination options.
    while (next == 0 || next == 43 || next == 60 || next == 44) {
      if (next == 44) {
        ++result_.summary.fragments;
        return;
      }
      if (rest.size() < 8) return trunc();
      const std::size_t len = (static_cast<std::size_t>(rest[1]) + 1) * 8;
      if (rest.size() < len) return trunc();
      next = rest[0];
      rest = rest.subspan(len);
    }
    transport(next, rest);
  }

  void transport(std::uint8_t proto, Bytes seg) {
    if (proto == 17) {
      if (seg.size() < 8) return trunc();
      const std::uint16_t sport = be16(seg, 0);
      const std::uint16_t dport = be16(seg, 2);
      if (sport != 53 && dport != 53) {
        ++result_.summary.non_dns;
        return;
      }
      const std::uint16_t ulen = be16(seg, 4);
      Bytes payload = seg.subspan(8);
      if (ulen >= 8 && ulen <= seg.size()) {
        payload = seg.subspan(8, ulen - 8U);
      } else if (ulen > seg.size()) {
        return trunc();
      }
      dns_message(payload);
    } else if (proto == 6) {
      if (seg.size() < 20) return trunc();
      const std::uint16_t sport = be16(seg, 0);
      const std::uint16_t dport = be16(seg, 2);
      if (sport != 53 && dport != 53) {
        ++result_.summary.non_dns;
        return;
      }
      const std::size_t data_off = static_cast<std::size_t>(seg[12] >> 4) * 4;
      if (data_off < 20 || seg.size() < data_off) return trunc();
      Bytes payload = seg.subspan(data_off);
      // Handshake and pure ACK segments carry no DNS data.
      if (payload.empty()) return;
      // Length-prefixed messages; only segments that start on a message
      // boundary are decoded (no stream reassembly).
      while (!payload.empty()) {
        if (payload.size() < 2) return trunc();
        const std::size_t mlen = be16(payload, 0);
        if (payload.size() < 2 + mlen) return trunc();
        dns_message(payload.subspan(2, mlen));
        payload = payload.subspan(2 + mlen);
      }
    } else {
      ++result_.summary.non_dns;
    }
  }

  void dns_message(Bytes msg) {
    bool response = false;
    std::string qname;
    std::uint16_t qtype = 0;
    if (!decode_dns_query(msg, response, qname, qtype)) {
      if (truncated_capture_) {
        trunc();
      } else {
        ++result_.summary.malformed;
      }
      return;
    }
    if (response) {
      ++result_.summary.responses;
      return;
    }
    ++result_.summary.queries;
    DnsQueryRecord r;
    r.timestamp = ts_;
    r.qname = std::move(qname);
    r.qtype = qtype_mnemonic(qtype);
    r.source = source_;
    result_.records.push_back(std::move(r));
  }

  std::string source_;
  PcapResult& result_;
  double ts_ = 0.0;
  bool truncated_capture_ = false;
};

void parse_classic(Bytes data, PcapResult& result, const std::string& source) {
  const std::uint32_t magic_le = rd32(data, 0, true);
  bool little = true;
  bool nanos = false;
  switch (magic_le) {
    case 0xA1B2C3D4: little = true; break;
    case 0xA1B23C4D: little = true; nanos = true; break;
    case 0xD4C3B2A1: little = false; break;
    case 0x4D3CB2A1: little = false; nanos = true; break;
    default: throw DataError("not a pcap or pcapng capture");
  }
  if (data.size() < 24) throw DataError("pcap global header truncated");
  const std::uint32_t linktype = rd32(data, 20, little) & 0x0FFFFFFF;
  Extractor ex(source, result);
  std::size_t off = 24;
  while (off + 16 <= data.size()) {
    const std::uint32_t sec = rd32(data, off, little);
    const std::uint32_t frac = rd32(data, off + 4, little);
    const std::uint32_t incl = rd32(data, off + 8, little);
    const std::uint32_t orig = rd32(data, off + 12, little);
    off += 16;
    if (incl > data.size() - off) {
      ++result.summary.packets;
      ++result.summary.truncated;
      return;
    }
    const double ts = static_cast<double>(sec) + static_cast<double>(frac) / (nanos ? 1e9 : 1e6);
    ex.packet(data.subspan(off, incl), linktype, ts, incl < orig);
    off += incl;
  }
  if (off != data.size()) {
    ++result.summary.truncated;
  }
}

void parse_pcapng(Bytes data, PcapResult& result, const std::string& source) {
  Extractor ex(source, result);
  struct Interface {
    std::uint32_t linktype;
    double units_per_second;
  };
  std::vector<Interface> interfaces;
  bool little = true;
  std::size_t off = 0;
  while (off + 12 <= data.size()) {
    std::uint32_t type = rd32(data, off, little);
    if (type == 0x0A0D0D0A) {
      const std::uint32_t bom = rd32(data, off + 8, true);
      if (bom == 0x1A2B3C4D) {
        little = true;
      } else if (bom == 0x4D3C2B1A) {
        little = false;
      } else {
        throw DataError("pcapng section header has a bad byte-order magic");
      }
      interfaces.clear();
    }
    const std::uint32_t len = rd32(data, off + 4, little);
    if (len < 12 || len % 4 != 0 || len > data.size() - off) {
      ++result.summary.truncated;
      return;
    }
    Bytes block = data.subspan(off, len);
    Bytes body = block.subspan(8, len - 12);
    if (type == 1 && body.size() >= 8) {  // interface description
      Interface itf{rd16(body, 0, little), 1e6};
      std::size_t o = 8;
      while (o + 4 <= body.size()) {
        const std::uint16_t code = rd16(body, o, little);
        const std::uint16_t olen = rd16(body, o + 2, little);
        if (code == 0 || o + 4 + olen > body.size()) break;
        if (code == 9 && olen >= 1) {
          const std::uint8_t r = body[o + 4];
          itf.units_per_second =
              (r & 0x80) ? std::pow(2.0, r & 0x7F) : std::pow(10.0, r & 0x7F);
        }
        o += 4 + ((olen + 3U) & ~3U);
      }
      interfaces.push_back(itf);
    } else if (type == 6 && body.size() >= 20) {  // enhanced packet
      const std::uint32_t if_id = rd32(body, 0, little);
      const std::uint64_t ts = (std::uint64_t{rd32(body, 4, little)} << 32) | rd32(body, 8, little);
      const std::uint32_t cap = rd32(body, 12, little);
      const std::uint32_t orig = rd32(body, 16, little);
      if (if_id >= interfaces.size() || cap > body.size() - 20) {
        ++result.summary.packets;
        ++result.summary.truncated;
      } else {
        const auto& itf = interfaces[if_id];
        ex.packet(body.subspan(20, cap), itf.linktype,
                  static_cast<double>(ts) / itf.units_per_second, cap < orig);
      }
    } else if (type == 3 && body.size() >= 4 && !interfaces.empty()) {  // simple packet
      const std::uint32_t orig = rd32(body, 0, little);
      const std::size_t cap = std::min<std::size_t>(orig, body.size() - 4);
      ex.packet(body.subspan(4, cap), interfaces[0].linktype, 0.0, cap < orig);
    }
    off += len;
  }
  if (off != data.size()) ++result.summary.truncated;
}

void put16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x >> 8));
  v.push_back(static_cast<std::uint8_t>(x & 0xFF));
}

void put32le(std::vector<std::uint8_t>& v, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>((x >> (8 * i)) & 0xFF));
}

}  // namespace

bool decode_dns_query(std::span<const std::uint8_t> msg, bool& is_response, std::string& qname,
                      std::uint16_t& qtype) {
  if (msg.size() < 12) return false;
  is_response = (msg[2] & 0x80) != 0;
  const std::uint16_t qdcount = be16(msg, 4);
  if (qdcount == 0) return false;
  const std::size_t end = decode_name(msg, 12, qname);
  if (end == 0 || end + 4 > msg.size()) return false;
  if (qname.empty()) qname = ".";
  qtype = be16(msg, end);
  return true;
}

std::string qtype_mnemonic(std::uint16_t qtype) {
  for (const auto& q : kQtypes) {
    if (q.code == qtype) return q.name;
  }
  return "TYPE" + std::to_string(qtype);
}

std::uint16_t qtype_code(const std::string& mnemonic) {
  for (const auto& q : kQtypes) {
    if (mnemonic == q.name) return q.code;
  }
  if (mnemonic.starts_with("TYPE") && mnemonic.size() > 4) {
    const unsigned long v = std::stoul(mnemonic.substr(4));
    if (v <= 0xFFFF) return static_cast<std::uint16_t>(v);
  }
  throw std::invalid_argument("unknown query type '" + mnemonic + "'");
}

PcapResult parse_pcap_bytes(std::span<const std::uint8_t> data, const std::string& source) {
  PcapResult result;
  if (data.size() < 4) throw DataError("file too short to be a capture");
  if (rd32(data, 0, true) == 0x0A0D0D0A) {
    parse_pcapng(data, result, source);
  } else {
    parse_classic(data, result, source);
  }
  return result;
}

PcapResult parse_pcap(const std::filesystem::path& path, const std::string& source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open capture '" + path.string() + "'");
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error on '" + path.string() + "'");
  return parse_pcap_bytes(data, source.empty() ? path.stem().string() : source);
}

std::vector<std::uint8_t> encode_dns_query(const std::string& qname, std::uint16_t qtype,
                                           std::uint16_t id) {
  std::vector<std::uint8_t> msg;
  put16(msg, id);
  put16(msg, 0x0100);  // RD
  put16(msg, 1);
  put16(msg, 0);
  put16(msg, 0);
  put16(msg, 0);
  std::size_t start = 0;
  while (start < qname.size()) {
    auto dot = qname.find('.', start);
    if (dot == std::string::npos) dot = qname.size();
    const std::size_t len = dot - start;
    if (len == 0 || len > 63) throw std::invalid_argument("invalid label in '" + qname + "'");
    msg.push_back(static_cast<std::uint8_t>(len));
    msg.insert(msg.end(), qname.begin() + static_cast<std::ptrdiff_t>(start),
               qname.begin() + static_cast<std::ptrdiff_t>(dot));
    start = dot + 1;
  }
  msg.push_back(0);
  put16(msg, qtype);
  put16(msg, 1);  // IN
  return msg;
}

void write_pcap(const std::vector<DnsQueryRecord>& records, const std::filesystem::path& path) {
  std::vector<std::uint8_t> out;
  put32le(out, 0xA1B2C3D4);
  out.push_back(2); out.push_back(0);  // version 2.4
  out.push_back(4); out.push_back(0);
  put32le(out, 0);
  put32le(out, 0);
  put32le(out, 65535);
  put32le(out, 1);

  std::uint16_t id = 1;
  for (const auto& r : records) {
    const auto dns = encode_dns_query(r.qname, qtype_code(r.qtype.empty() ? "A" : r.qtype), id);
    std::vector<std::uint8_t> frame = {0x02, 0, 0, 0, 0, 0x02, 0x02, 0, 0, 0, 0, 0x01};
    put16(frame, 0x0800);
    const auto ip_len = static_cast<std::uint16_t>(20 + 8 + dns.size());
    const std::size_t ip_start = frame.size();
    frame.push_back(0x45);
    frame.push_back(0);
    put16(frame, ip_len);
    put16(frame, id);
    put16(frame, 0);
    frame.push_back(64);
    frame.push_back(17);
    put16(frame, 0);
    frame.insert(frame.end(), {10, 0, 0, 2, 10, 0, 0, 1});
    std::uint32_t sum = 0;
    for (std::size_t i = ip_start; i < ip_start + 20; i += 2) {
      sum += static_cast<std::uint32_t>((frame[i] << 8) | frame[i + 1]);
    }
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    const auto csum = static_cast<std::uint16_t>(~sum);
    frame[ip_start + 10] = static_cast<std::uint8_t>(csum >> 8);
    frame[ip_start + 11] = static_cast<std::uint8_t>(csum & 0xFF);
    put16(frame, static_cast<std::uint16_t>(40000 + id % 20000));
    put16(frame, 53);
    put16(frame, static_cast<std::uint16_t>(8 + dns.size()));
    put16(frame, 0);
    frame.insert(frame.end(), dns.begin(), dns.end());

    const double whole = std::floor(r.timestamp);
    auto usec = static_cast<std::uint32_t>(std::llround((r.timestamp - whole) * 1e6));
    auto sec = static_cast<std::uint32_t>(whole);
    if (usec >= 1000000) {
      ++sec;
      usec -= 1000000;
    }
    put32le(out, sec);
    put32le(out, usec);
    put32le(out, static_cast<std::uint32_t>(frame.size()));
    put32le(out, static_cast<std::uint32_t>(frame.size()));
    out.insert(out.end(), frame.begin(), frame.end());
    ++id;
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace dnslsh
