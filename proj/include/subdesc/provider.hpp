//
// Project subdesc - Copyright 2026 The subdesc Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <fstream>
#include <string>
#include <unordered_map>

#include "subdesc/brics.hpp"
#include "subdesc/chem/smiles_parser.hpp"
#include "subdesc/chem/smiles_writer.hpp"
#include "subdesc/corpus.hpp"
#include "subdesc/descriptors.hpp"
#include "subdesc/error.hpp"

namespace subdesc::descriptors {

/// External logP / strain values keyed by canonical fragment SMILES.
/// Fragments found here bypass the built-in estimators.
class PropertyProvider {
 public:
  void add(const std::string& smiles, PropertyOverride props) {
    table_[chem::write_smiles(chem::parse_smiles(smiles))] = props;
  }

  const PropertyOverride* find(const std::string& canonical) const {
    const auto it = table_.find(canonical);
    return it == table_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return table_.size(); }

  /// CSV with header `fragment_smiles,logp,uff_energy`. Any malformed row
  /// is an error naming its line.
  static PropertyProvider load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open provider file " + path);
    PropertyProvider p;
    std::string line;
    std::size_t line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
      ++line_no;
      const auto text = corpus::trim(line);
      if (text.empty()) continue;
      const auto cells = corpus::split_csv_line(text);
      const std::string where = path + ":" + std::to_string(line_no) + ": ";
      if (!cells || cells->size() != 3) throw Error(where + "expected 3 fields");
      if (header) {
        if (corpus::trim((*cells)[0]) != "fragment_smiles" || corpus::trim((*cells)[1]) != "logp" ||
            corpus::trim((*cells)[2]) != "uff_energy")
          throw Error(where + "header must be fragment_smiles,logp,uff_energy");
        header = false;
        continue;
      }
      const auto logp = corpus::parse_number((*cells)[1]);
      const auto uff = corpus::parse_number((*cells)[2]);
      if (!logp || !uff) throw Error(where + "logp and uff_energy must be numbers");
      try {
        p.add(std::string(corpus::trim((*cells)[0])), {*logp, *uff});
      } catch (const SmilesError& e) {
        throw Error(where + e.what());
      }
    }
    if (header) throw Error(path + ": empty provider file");
    return p;
  }

 private:
  std::unordered_map<std::string, PropertyOverride> table_;
};

/// Descriptor vector of a fragment, with provider values when the
/// fragment's canonical SMILES is listed.
inline DescriptorVector fragment_descriptors(const brics::Fragment& f, const chem::MolGraph& parent,
                                             const CapTable& caps, ClipCounter* clips,
                                             const PropertyProvider* provider) {
  const auto frag = brics::materialize(f, parent);
  const PropertyOverride* props = provider ? provider->find(chem::write_smiles(frag)) : nullptr;
  return descriptor_vector(frag, caps, clips, props);
}

}  // namespace subdesc::descriptors
