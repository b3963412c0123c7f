#include "ssc/hash.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ssc/error.hpp"

namespace ssc {

namespace {

inline std::uint32_t rotl(std::uint32_t x, int n) {
  return (x << n) | (x >> (32 - n));
}

struct Sha1 {
  std::array<std::uint32_t, 5> h = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu,
                                    0x10325476u, 0xC3D2E1F0u};
  std::array<unsigned char, 64> block{};
  std::size_t block_len = 0;
  std::uint64_t total_bits = 0;

  void process() {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (std::uint32_t(block[4 * i]) << 24) |
             (std::uint32_t(block[4 * i + 1]) << 16) |
             (std::uint32_t(block[4 * i + 2]) << 8) |
             std::uint32_t(block[4 * i + 3]);
    }
    for (int i = 16; i < 80; ++i) {
      w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4];
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | (~b & d);
        k = 0x5A827999u;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1u;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDCu;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6u;
      }
      std::uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rotl(b, 30);
      b = a;
      a = tmp;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    block_len = 0;
  }

  void update(const unsigned char* data, std::size_t len) {
    total_bits += std::uint64_t(len) * 8;
    for (std::size_t i = 0; i < len; ++i) {
      block[block_len++] = data[i];
      if (block_len == 64) {
        process();
      }
    }
  }

  std::string finish() {
    unsigned char pad = 0x80;
    std::uint64_t bits = total_bits;
    update(&pad, 1);
    unsigned char zero = 0;
    while (block_len != 56) {
      update(&zero, 1);
    }
    // length is appended manually so total_bits is not disturbed
    for (int i = 7; i >= 0; --i) {
      block[block_len++] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    }
    process();
    std::ostringstream out;
    out << std::hex;
    for (std::uint32_t v : h) {
      for (int shift = 28; shift >= 0; shift -= 4) {
        out << "0123456789abcdef"[(v >> shift) & 0xF];
      }
    }
    return out.str();
  }
};

}  // namespace

std::string sha1_hex(const void* data, std::size_t len) {
  Sha1 s;
  s.update(static_cast<const unsigned char*>(data), len);
  return s.finish();
}

std::string git_blob_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open file for hashing: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  std::string header = "blob " + std::to_string(bytes.size());
  header.push_back('\0');
  Sha1 s;
  s.update(reinterpret_cast<const unsigned char*>(header.data()),
           header.size());
  s.update(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  return s.finish();
}

}  // namespace ssc
