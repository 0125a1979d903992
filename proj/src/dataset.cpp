#include "xrdn/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "xrdn/csv.hpp"
#include "xrdn/frame_io.hpp"
#include "xrdn/rng.hpp"

namespace xrdn {

SplitIndices split_dataset(std::size_t n_pairs, const SplitFractions& fr,
                           std::uint64_t seed) {
    if (fr.train < 0.0 || fr.val < 0.0 || fr.test < 0.0)
        throw std::invalid_argument("split fractions must be non-negative");
    if (std::abs(fr.train + fr.val + fr.test - 1.0) > 1e-9)
        throw std::invalid_argument("split fractions must sum to 1");
    if (fr.train > 0.0 && fr.val > 0.0 && fr.test > 0.0 && n_pairs < 3)
        throw std::invalid_argument(
            "need at least 3 pairs for a three-way split");

    std::vector<std::size_t> order(n_pairs);
    std::iota(order.begin(), order.end(), std::size_t{0});

    Rng rng(seed);
    for (std::size_t i = n_pairs; i > 1; --i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform_below(i));
        std::swap(order[i - 1], order[j]);
    }

    const std::size_t n_val =
        static_cast<std::size_t>(fr.val * static_cast<double>(n_pairs));
    const std::size_t n_test =
        static_cast<std::size_t>(fr.test * static_cast<double>(n_pairs));
    const std::size_t n_train = n_pairs - n_val - n_test;

    SplitIndices s;
    s.train.assign(order.begin(), order.begin() + n_train);
    s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    s.test.assign(order.begin() + n_train + n_val, order.end());
    return s;
}

void write_manifest(const std::string& path,
                    const std::vector<ManifestEntry>& entries) {
    CsvTable t;
    t.header = {"pair_id", "lc_path", "hc_path", "split"};
    for (const auto& e : entries)
        t.rows.push_back({e.pair_id, e.lc_path, e.hc_path, e.split});
    write_csv(path, t);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    const CsvTable t = read_csv(path);
    if (t.header != std::vector<std::string>{"pair_id", "lc_path", "hc_path", "split"})
        throw std::runtime_error("unexpected manifest header in " + path);
    std::vector<ManifestEntry> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        if (row.size() != 4)
            throw std::runtime_error("malformed manifest row in " + path);
        if (row[3] != "train" && row[3] != "val" && row[3] != "test")
            throw std::runtime_error("unknown split '" + row[3] + "' in " + path);
        out.push_back({row[0], row[3], row[1], row[2]});
    }
    return out;
}

std::vector<FramePair> load_split(const std::string& manifest_path,
                                  const std::string& split) {
    namespace fs = std::filesystem;
    const fs::path base = fs::path(manifest_path).parent_path();
    const auto entries = read_manifest(manifest_path);

    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    std::vector<FramePair> pairs;
    for (const auto& e : entries) {
        if (!split.empty() && e.split != split) continue;
        FramePair pair;
        pair.pair_id = e.pair_id;
        pair.lc = load_frame(resolve(e.lc_path));
        pair.hc = load_frame(resolve(e.hc_path));
        validate_pair(pair);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

}  // namespace xrdn
