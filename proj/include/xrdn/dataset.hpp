#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xrdn/frame.hpp"

namespace xrdn {

struct SplitFractions {
    double train = 0.7;
    double val = 0.2;
    double test = 0.1;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

// Seeded shuffle, then partition. Validation and test sizes are floored;
// the remainder goes to train, so no pair is dropped. Fractions must be
// non-negative and sum to 1 within 1e-9.
SplitIndices split_dataset(std::size_t n_pairs, const SplitFractions& fractions,
                           std::uint64_t seed);

inline SplitIndices split_dataset(std::size_t n_pairs, std::uint64_t seed) {
    return split_dataset(n_pairs, SplitFractions{}, seed);
}

struct ManifestEntry {
    std::string pair_id;
    std::string split;  // train | val | test
    std::string lc_path;
    std::string hc_path;
};

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// Loads the pairs for one split ("" loads everything). Paths in the manifest
// are taken relative to the manifest's directory unless absolute.
std::vector<FramePair> load_split(const std::string& manifest_path,
                                  const std::string& split);

}  // namespace xrdn
