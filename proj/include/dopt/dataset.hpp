#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dopt/bradley_terry.hpp"
#include "dopt/design.hpp"

namespace dopt {

/// Features plus whatever labels came with them. Row r of `features` carries
/// external identifier ids[r]; labels refer to rows.
struct Dataset {
  FeatureMatrix features;
  std::vector<std::int64_t> ids;
  LabeledData labels;
};

/// CSV layouts:
///   features:    header `id,f0,...,f{d-1}`, one row per sample
///   absolute:    header `id,label`, label in {-1, 1}
///   comparisons: header `i,j,label`, label in {-1, 1}; +1 means i preferred
/// Empty paths skip the optional label files. Errors carry the offending line.
Dataset load_dataset(const std::string& features_csv, const std::string& absolute_csv = {},
                     const std::string& comparisons_csv = {});

/// Writes the three files; empty paths are skipped. Reals use 17 significant digits.
void write_dataset(const Dataset& data, const std::string& features_csv,
                   const std::string& absolute_csv = {},
                   const std::string& comparisons_csv = {});

}  // namespace dopt
