//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subdesc/chem/scaffold.hpp"
#include "subdesc/chem/smiles_parser.hpp"
#include "subdesc/chem/smiles_writer.hpp"
#include "subdesc/error.hpp"

namespace subdesc::corpus {

enum class Format { kSmi, kCsv };

/// Picks the format from the file extension; anything but .csv is SMILES.
inline Format format_for(std::string_view path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? Format::kCsv
                                                                    : Format::kSmi;
}

struct CorpusRecord {
  std::string smiles;
  std::map<std::string, double> labels;
  std::size_t line = 0;  // 1-based
  std::size_t index = 0;  // position among accepted records
};

struct Reject {
  std::size_t line = 0;
  std::string text;
  std::string reason;
};

/// Splits one CSV line. Fields may be double-quoted, with "" for a literal
/// quote. Returns nullopt on an unterminated quote.
inline std::optional<std::vector<std::string>> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) return std::nullopt;
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Streams records from a .smi or .csv file. Lines whose SMILES does not
/// parse, or whose label cells are not numbers, become rejects.
///
/// .smi: the first whitespace-separated field of each line; blank lines
/// and lines starting with '#' are skipped.
/// .csv: a header row with a `smiles` column (any case); every other
/// non-empty cell is a numeric label.
class CorpusReader {
 public:
  CorpusReader(const std::string& path, Format format) : format_(format), in_(path) {
    if (!in_) throw Error("cannot open " + path);
    if (format_ == Format::kCsv) read_header(path);
  }

  /// Next accepted record, or nullopt at end of input. Rejected lines are
  /// appended to `rejects`.
  std::optional<CorpusRecord> next(std::vector<Reject>& rejects) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::string_view text = trim(line);
      if (text.empty() || (format_ == Format::kSmi && text.front() == '#')) continue;
      CorpusRecord rec;
      rec.line = line_no_;
      if (auto reason = fill(text, rec)) {
        rejects.push_back({line_no_, std::string(text), *reason});
        continue;
      }
      try {
        chem::parse_smiles(rec.smiles);
      } catch (const Error& e) {
        rejects.push_back({line_no_, std::string(text), e.what()});
        continue;
      }
      rec.index = accepted_++;
      return rec;
    }
    return std::nullopt;
  }

  std::size_t lines_read() const { return line_no_; }

 private:
  void read_header(const std::string& path) {
    std::string header;
    while (std::getline(in_, header)) {
      ++line_no_;
      if (!trim(header).empty()) break;
    }
    const auto cols = split_csv_line(trim(header));
    if (!cols) throw Error(path + ": malformed CSV header");
    for (std::size_t k = 0; k < cols->size(); ++k) {
      const std::string name(trim((*cols)[k]));
      std::string lower = name;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (lower == "smiles")
        smiles_col_ = k;
      columns_.push_back(name);
    }
    if (smiles_col_ == kNone) throw Error(path + ": CSV has no 'smiles' column");
  }

  std::optional<std::string> fill(std::string_view text, CorpusRecord& rec) const {
    if (format_ == Format::kSmi) {
      const auto end = text.find_first_of(" \t");
      rec.smiles = std::string(text.substr(0, end));
      return std::nullopt;
    }
    const auto cells = split_csv_line(text);
    if (!cells) return "unterminated quote";
    if (cells->size() != columns_.size())
      return "expected " + std::to_string(columns_.size()) + " fields, found " +
             std::to_string(cells->size());
    for (std::size_t k = 0; k < cells->size(); ++k) {
      const auto cell = trim((*cells)[k]);
      if (k == smiles_col_) {
        rec.smiles = std::string(cell);
      } else if (!cell.empty()) {
        const auto v = parse_number(cell);
        if (!v) return "label '" + columns_[k] + "' is not a number";
        rec.labels[columns_[k]] = *v;
      }
    }
    if (rec.smiles.empty()) return "empty smiles";
    return std::nullopt;
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  Format format_;
  std::ifstream in_;
  std::vector<std::string> columns_;
  std::size_t smiles_col_ = kNone;
  std::size_t line_no_ = 0;
  std::size_t accepted_ = 0;
};

// ---------------------------------------------------------------- split

enum class Partition { kTrain = 0, kValid = 1, kTest = 2 };

inline std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kValid: return "valid";
    case Partition::kTest: return "test";
  }
  return "?";
}

struct SplitAssignment {
  std::vector<Partition> partition;  // per input record
  std::vector<std::string> scaffold;  // per input record
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> achieved{};
  std::size_t groups = 0;
  std::size_t largest_group = 0;
};

/// Canonical Murcko scaffold SMILES; empty for acyclic molecules.
inline std::string scaffold_key(const std::string& smiles) {
  return chem::write_smiles(chem::murcko_scaffold(chem::parse_smiles(smiles)));
}

/// Deterministic scaffold split from precomputed scaffold keys. Groups are
/// taken largest first (ties by scaffold string) and each goes to the
/// partition with the largest shortfall against its target count; ties
/// prefer train, then valid, then test.
inline SplitAssignment scaffold_split_keys(std::vector<std::string> scaffolds,
                                           std::array<double, 3> ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw DomainError("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("split ratios must sum to 1");

  SplitAssignment out;
  const std::size_t n = scaffolds.size();
  out.partition.assign(n, Partition::kTrain);
  std::map<std::string, std::vector<std::size_t>> by_scaffold;
  for (std::size_t i = 0; i < n; ++i) by_scaffold[scaffolds[i]].push_back(i);
  std::vector<std::pair<const std::string*, const std::vector<std::size_t>*>> groups;
  for (const auto& [key, members] : by_scaffold) groups.emplace_back(&key, &members);
  std::stable_sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return a.second->size() > b.second->size();
  });

  for (const auto& [key, members] : groups) {
    int best = 0;
    double best_deficit = -1e300;
    for (int p = 0; p < 3; ++p) {
      const double deficit = ratios[p] * static_cast<double>(n) - static_cast<double>(out.counts[p]);
      if (deficit > best_deficit) {
        best = p;
        best_deficit = deficit;
      }
    }
    for (std::size_t i : *members) out.partition[i] = static_cast<Partition>(best);
    out.counts[best] += members->size();
    out.largest_group = std::max(out.largest_group, members->size());
  }
  out.groups = groups.size();
  for (int p = 0; p < 3; ++p)
    out.achieved[p] = n ? static_cast<double>(out.counts[p]) / static_cast<double>(n) : 0.0;
  out.scaffold = std::move(scaffolds);
  return out;
}

inline SplitAssignment scaffold_split(const std::vector<std::string>& smiles,
                                      std::array<double, 3> ratios = {0.8, 0.1, 0.1}) {
  std::vector<std::string> keys;
  keys.reserve(smiles.size());
  for (const auto& s : smiles) keys.push_back(scaffold_key(s));
  return scaffold_split_keys(std::move(keys), ratios);
}

}  // namespace subdesc::corpus
