#pragma once

// Fiat-Shamir transcript: absorb the public statement and the prover's
// commitments, squeeze a deterministic challenge.  Every proof kind uses its
// own domain tag so transcripts of different protocols can never collide.

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <string_view>

#include "ranksec/bigint.hpp"

namespace ranksec {

using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(std::span<const std::uint8_t> data) {
  Digest d{};
  unsigned len = 0;
  if (EVP_Digest(data.data(), data.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != d.size())
    throw std::runtime_error("sha256 failed");
  return d;
}

class FsTranscript {
 public:
  explicit FsTranscript(std::string_view domain_tag) {
    // Length-prefixed tag, then length-prefixed items: unambiguous framing.
    append_u32(static_cast<std::uint32_t>(domain_tag.size()));
    buf_.insert(buf_.end(), domain_tag.begin(), domain_tag.end());
  }

  void absorb_bytes(std::span<const std::uint8_t> b) {
    append_u32(static_cast<std::uint32_t>(b.size()));
    buf_.insert(buf_.end(), b.begin(), b.end());
  }

  // Integers are absorbed at their minimal big-endian width; the length
  // prefix keeps the encoding injective.
  void absorb(const Int& v) {
    if (v < 0) throw std::invalid_argument("FsTranscript::absorb: negative");
    size_t need = (v == 0) ? 0 : (bit_length(v) + 7) / 8;
    Bytes b = to_be(v, need);
    absorb_bytes(b);
  }

  Digest digest() const { return sha256(buf_); }

  // Deterministic integer in [0, bound).  The digest is expanded in counter
  // mode until it carries 64 bits of slack beyond the bound, then reduced.
  Int challenge(const Int& bound) const {
    if (bound <= 0) throw std::invalid_argument("FsTranscript::challenge: bad bound");
    size_t want_bits = bit_length(bound) + 64;
    Int acc = 0;
    std::uint32_t counter = 0;
    Bytes block(buf_);
    size_t tail = block.size();
    block.resize(tail + 4);
    while (bit_length(acc) < want_bits) {
      block[tail + 0] = static_cast<std::uint8_t>(counter >> 24);
      block[tail + 1] = static_cast<std::uint8_t>(counter >> 16);
      block[tail + 2] = static_cast<std::uint8_t>(counter >> 8);
      block[tail + 3] = static_cast<std::uint8_t>(counter);
      Digest d = sha256(block);
      Int piece;
      mpz_import(piece.get_mpz_t(), d.size(), 1, 1, 1, 0, d.data());
      acc = (acc << 256) + piece;
      ++counter;
    }
    return mod(acc, bound);
  }

 private:
  void append_u32(std::uint32_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 24));
    buf_.push_back(static_cast<std::uint8_t>(v >> 16));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
  }

  Bytes buf_;
};

}  // namespace ranksec
