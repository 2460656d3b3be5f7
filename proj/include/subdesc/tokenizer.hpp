//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "subdesc/descriptors.hpp"
#include "subdesc/error.hpp"
#include "subdesc/random.hpp"

namespace subdesc::tokenizer {

using descriptors::CapTable;
using descriptors::DescriptorVector;
using descriptors::kDescriptorSize;

using TokenId = std::int32_t;

inline constexpr TokenId kBos = 0;
inline constexpr TokenId kPad = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kMask = 3;
inline constexpr TokenId kSepSub = 4;    // '!' between substructures
inline constexpr TokenId kSepExtra = 5;  // '$' before the pair section
inline constexpr TokenId kSpecialCount = 6;

inline constexpr bool is_special(TokenId t) { return t >= 0 && t < kSpecialCount; }

/// Position-aware vocabulary: slot j owns ids [base_j, base_j + c_j].
class Vocab {
 public:
  explicit Vocab(const CapTable& caps) : caps_(caps) {
    caps.validate();
    TokenId next = kSpecialCount;
    for (std::size_t j = 0; j < kDescriptorSize; ++j) {
      base_[j] = next;
      next += caps.max[j] + 1;
    }
    size_ = next;
  }

  TokenId base(std::size_t slot) const { return base_[slot]; }
  int cap(std::size_t slot) const { return caps_.max[slot]; }
  const CapTable& caps() const { return caps_; }
  TokenId size() const { return size_; }

 private:
  CapTable caps_;
  std::array<TokenId, kDescriptorSize> base_{};
  TokenId size_ = 0;
};

inline Vocab build_vocab(const CapTable& caps) { return Vocab(caps); }

/// Descriptor rows of one molecule: BRICS rows first, pair rows from
/// `pair_start` on.
struct SubstructureRows {
  std::vector<DescriptorVector> rows;
  std::size_t pair_start = 0;

  bool operator==(const SubstructureRows&) const = default;
};

struct TokenSequence {
  static constexpr std::size_t kNoExtra = static_cast<std::size_t>(-1);

  std::vector<TokenId> ids;
  std::vector<std::size_t> boundaries;  // index of each row's first token
  std::size_t extra_start = kNoExtra;   // index of the '$' token
};

inline TokenSequence encode(const SubstructureRows& in, const Vocab& v) {
  if (in.rows.empty()) throw TokenError("no substructures to encode");
  if (in.pair_start == 0 || in.pair_start > in.rows.size())
    throw TokenError("pair section must follow at least one BRICS row");
  TokenSequence ts;
  ts.ids.reserve(2 + in.rows.size() * (kDescriptorSize + 1));
  ts.ids.push_back(kBos);
  for (std::size_t r = 0; r < in.rows.size(); ++r) {
    if (r > 0) {
      if (r == in.pair_start) {
        ts.extra_start = ts.ids.size();
        ts.ids.push_back(kSepExtra);
      } else {
        ts.ids.push_back(kSepSub);
      }
    }
    ts.boundaries.push_back(ts.ids.size());
    for (std::size_t j = 0; j < kDescriptorSize; ++j) {
      const int d = in.rows[r][j];
      if (d < 0 || d > v.cap(j))
        throw TokenError("slot " + std::to_string(j) + " value " +
                         std::to_string(d) + " outside [0, " +
                         std::to_string(v.cap(j)) + "]");
      ts.ids.push_back(v.base(j) + d);
    }
  }
  ts.ids.push_back(kEos);
  return ts;
}

/// Inverse of `encode`. Throws `TokenError` on malformed structure or an id
/// outside its slot's range.
inline SubstructureRows decode(std::span<const TokenId> ids, const Vocab& v) {
  if (ids.size() < 2 || ids.front() != kBos || ids.back() != kEos)
    throw TokenError("sequence must start with BOS and end with EOS");
  SubstructureRows out;
  bool seen_extra = false;
  std::size_t i = 1;
  const std::size_t end = ids.size() - 1;
  if (i == end) throw TokenError("sequence has no substructure");
  for (;;) {
    if (end - i < kDescriptorSize)
      throw TokenError("truncated substructure at token " + std::to_string(i));
    DescriptorVector row{};
    for (std::size_t j = 0; j < kDescriptorSize; ++j, ++i) {
      const TokenId t = ids[i];
      const TokenId lo = v.base(j), hi = v.base(j) + v.cap(j);
      if (t < lo || t > hi)
        throw TokenError("token " + std::to_string(t) + " at position " +
                         std::to_string(i) + " outside slot " +
                         std::to_string(j) + " range");
      row[j] = t - lo;
    }
    out.rows.push_back(row);
    if (i == end) break;
    if (ids[i] == kSepExtra) {
      if (seen_extra) throw TokenError("more than one '$' separator");
      seen_extra = true;
      out.pair_start = out.rows.size();
    } else if (ids[i] != kSepSub) {
      throw TokenError("expected separator at position " + std::to_string(i));
    }
    ++i;
    if (i == end) throw TokenError("separator before EOS");
  }
  if (!seen_extra) out.pair_start = out.rows.size();
  return out;
}

inline SubstructureRows decode(const TokenSequence& ts, const Vocab& v) {
  return decode(std::span<const TokenId>(ts.ids), v);
}

struct MaskedSequence {
  std::vector<TokenId> ids;      // with masked positions set to kMask
  std::vector<TokenId> targets;  // original ids at `positions`
  std::vector<std::size_t> positions;  // ascending
};

/// Round half up, at least one when rate > 0 and anything is maskable.
inline std::size_t masked_count(double rate, std::size_t maskable) {
  if (maskable == 0 || rate <= 0.0) return 0;
  auto k = static_cast<std::size_t>(std::floor(rate * maskable + 0.5));
  return std::clamp<std::size_t>(k, 1, maskable);
}

/// Replaces a uniformly drawn subset of descriptor tokens with MASK.
/// Special tokens are never selected.
inline MaskedSequence mask_tokens(const TokenSequence& ts, double rate,
                                  std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw DomainError("mask rate must lie in [0, 1]");
  std::vector<std::size_t> maskable;
  for (std::size_t i = 0; i < ts.ids.size(); ++i)
    if (!is_special(ts.ids[i])) maskable.push_back(i);
  const std::size_t k = masked_count(rate, maskable.size());

  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.below(maskable.size() - i);
    std::swap(maskable[i], maskable[j]);
  }
  MaskedSequence m;
  m.ids = ts.ids;
  m.positions.assign(maskable.begin(), maskable.begin() + k);
  std::sort(m.positions.begin(), m.positions.end());
  for (std::size_t p : m.positions) {
    m.targets.push_back(m.ids[p]);
    m.ids[p] = kMask;
  }
  return m;
}

/// Slot index (0..22) of the descriptor token at `position`, given the
/// row layout of `ts`; -1 for specials.
inline int slot_of(const TokenSequence& ts, std::size_t position) {
  auto it = std::upper_bound(ts.boundaries.begin(), ts.boundaries.end(), position);
  if (it == ts.boundaries.begin()) return -1;
  std::size_t off = position - *(it - 1);
  return off < kDescriptorSize ? static_cast<int>(off) : -1;
}

}  // namespace subdesc::tokenizer
