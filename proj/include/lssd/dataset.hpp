#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lssd/error.hpp"
#include "lssd/jpeg_codec.hpp"
#include "lssd/matio.hpp"
#include "lssd/recipe.hpp"
#include "lssd/rng.hpp"

namespace lssd {

enum class Source { Alaska2, Boss, StegoAppDb, Wesaturate, Raise, Dresden };

inline constexpr std::array<Source, 6> kAllSources = {Source::Alaska2,    Source::Boss,
                                                      Source::StegoAppDb, Source::Wesaturate,
                                                      Source::Raise,      Source::Dresden};

inline const char* to_string(Source s) {
    switch (s) {
        case Source::Alaska2: return "ALASKA2";
        case Source::Boss: return "BOSS";
        case Source::StegoAppDb: return "StegoAppDB";
        case Source::Wesaturate: return "Wesaturate";
        case Source::Raise: return "RAISE";
        case Source::Dresden: return "Dresden";
    }
    return "?";
}

inline Source parse_source(const std::string& s) {
    for (Source src : kAllSources) {
        if (s == to_string(src)) return src;
    }
    fail(ErrorKind::Format, "unknown source '" + s + "'");
}

/// Default directory layout: one subdirectory per source under the input root.
inline const std::vector<std::pair<std::string, Source>>& default_source_dirs() {
    static const std::vector<std::pair<std::string, Source>> dirs = {
        {"alaska2", Source::Alaska2},       {"boss", Source::Boss},
        {"stegoappdb", Source::StegoAppDb}, {"wesaturate", Source::Wesaturate},
        {"raise", Source::Raise},           {"dresden", Source::Dresden},
    };
    return dirs;
}

struct CatalogEntry {
    std::string image_id;  // "<source-dir>/<stem>"
    Source source = Source::Alaska2;
    std::filesystem::path cfa_path;
};

struct SourceCatalog {
    std::vector<CatalogEntry> entries;  // sorted by image_id

    size_t size() const { return entries.size(); }

    std::map<Source, size_t> counts() const {
        std::map<Source, size_t> c;
        for (const auto& e : entries) ++c[e.source];
        return c;
    }

    const CatalogEntry& find(const std::string& id) const {
        auto it = std::lower_bound(entries.begin(), entries.end(), id,
                                   [](const CatalogEntry& e, const std::string& key) {
                                       return e.image_id < key;
                                   });
        require(it != entries.end() && it->image_id == id, ErrorKind::Argument,
                "unknown image id '" + id + "'");
        return *it;
    }

    void sort_and_check() {
        std::sort(entries.begin(), entries.end(),
                  [](const CatalogEntry& a, const CatalogEntry& b) {
                      return a.image_id < b.image_id;
                  });
        for (size_t i = 1; i < entries.size(); ++i) {
            require(entries[i].image_id != entries[i - 1].image_id, ErrorKind::Format,
                    "duplicate image id '" + entries[i].image_id + "'");
        }
    }
};

/// Enumerates mosaics under per-source subdirectories. Stable: ids are
/// sorted, so rebuilding over the same tree gives an identical catalog.
inline SourceCatalog build_catalog(
    const std::filesystem::path& root,
    const std::vector<std::pair<std::string, Source>>& source_dirs = default_source_dirs()) {
    SourceCatalog catalog;
    for (const auto& [dir, source] : source_dirs) {
        const std::filesystem::path sub = root / dir;
        if (!std::filesystem::is_directory(sub)) continue;
        for (const auto& entry : std::filesystem::directory_iterator(sub)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
            CatalogEntry e;
            e.image_id = dir + "/" + entry.path().stem().string();
            e.source = source;
            e.cfa_path = entry.path();
            catalog.entries.push_back(std::move(e));
        }
    }
    catalog.sort_and_check();
    return catalog;
}

// ---------------------------------------------------------------------------
// Apportionment and splits

namespace detail {

/// Largest-remainder apportionment of `total` over `counts` (keeps the
/// per-key shares within one unit of exact proportionality). Ties go to the
/// larger count, then to the earlier key.
inline std::vector<size_t> largest_remainder(const std::vector<size_t>& counts, size_t total) {
    const size_t sum = std::accumulate(counts.begin(), counts.end(), size_t{0});
    require(sum > 0, ErrorKind::Argument, "cannot apportion over an empty pool");
    require(total <= sum, ErrorKind::Argument, "apportionment target exceeds pool");

    std::vector<size_t> quota(counts.size(), 0);
    std::vector<std::pair<double, size_t>> fractional;  // (-frac for sort, index)
    size_t assigned = 0;
    for (size_t i = 0; i < counts.size(); ++i) {
        const double exact = static_cast<double>(total) * counts[i] / static_cast<double>(sum);
        quota[i] = static_cast<size_t>(exact);
        assigned += quota[i];
        fractional.emplace_back(exact - static_cast<double>(quota[i]), i);
    }
    std::sort(fractional.begin(), fractional.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        if (counts[a.second] != counts[b.second]) return counts[a.second] > counts[b.second];
        return a.second < b.second;
    });
    for (size_t k = 0; assigned < total; ++k) {
        const size_t i = fractional[k % fractional.size()].second;
        if (quota[i] < counts[i]) {
            ++quota[i];
            ++assigned;
        }
    }
    return quota;
}

inline void seeded_shuffle(std::vector<std::string>& ids, rng::Stream& stream) {
    for (size_t i = ids.size(); i > 1; --i) {
        const size_t j = stream.uniform_int(static_cast<uint32_t>(i));
        std::swap(ids[i - 1], ids[j]);
    }
}

}  // namespace detail

struct TestPartition {
    SourceCatalog train_pool;
    std::vector<std::string> test_ids;  // sorted
    std::map<Source, size_t> test_counts;
};

/// Isolates a test set drawn only from non-excluded sources, per-source
/// counts proportional to the non-excluded catalog shares. Excluded-source
/// images stay in the training pool (the deliberate weak mismatch).
inline TestPartition partition_test(const SourceCatalog& catalog, size_t n_test,
                                    const std::set<Source>& excluded, uint64_t seed) {
    std::map<Source, std::vector<std::string>> by_source;
    for (const auto& e : catalog.entries) by_source[e.source].push_back(e.image_id);

    std::vector<Source> eligible;
    std::vector<size_t> counts;
    for (Source s : kAllSources) {
        if (excluded.count(s) != 0) continue;
        auto it = by_source.find(s);
        if (it == by_source.end()) continue;
        eligible.push_back(s);
        counts.push_back(it->second.size());
    }
    const size_t available = std::accumulate(counts.begin(), counts.end(), size_t{0});
    require(n_test <= available, ErrorKind::Argument,
            "test size " + std::to_string(n_test) + " exceeds eligible pool of " +
                std::to_string(available));

    const std::vector<size_t> quota = detail::largest_remainder(counts, n_test);

    TestPartition part;
    std::set<std::string> test_set;
    for (size_t i = 0; i < eligible.size(); ++i) {
        auto ids = by_source[eligible[i]];
        auto stream = rng::Stream::for_id(seed, std::string("test/") + to_string(eligible[i]));
        detail::seeded_shuffle(ids, stream);
        for (size_t k = 0; k < quota[i]; ++k) test_set.insert(ids[k]);
        part.test_counts[eligible[i]] = quota[i];
    }
    for (Source s : kAllSources) {
        if (excluded.count(s) != 0 && by_source.count(s) != 0) part.test_counts[s] = 0;
    }

    for (const auto& e : catalog.entries) {
        if (test_set.count(e.image_id) != 0) {
            part.test_ids.push_back(e.image_id);
        } else {
            part.train_pool.entries.push_back(e);
        }
    }
    return part;
}

struct SplitPlan {
    uint64_t master_seed = 0;
    std::vector<std::string> test_ids;
    // ascending sizes; each subset's ids are sorted and nested in the next
    std::vector<std::pair<std::string, std::vector<std::string>>> train_subsets;
};

/// Ratio-preserving nested subsets: one seeded shuffle per source, then
/// prefix-taking with largest-remainder quotas per size. Quotas are forced
/// monotone across sizes so nesting always holds.
inline SplitPlan nested_subsets(const SourceCatalog& pool, const std::vector<size_t>& sizes,
                                uint64_t seed) {
    require(!sizes.empty(), ErrorKind::Argument, "no subset sizes given");
    for (size_t i = 1; i < sizes.size(); ++i) {
        require(sizes[i - 1] < sizes[i], ErrorKind::Argument, "subset sizes must be ascending");
    }
    require(sizes.back() <= pool.size(), ErrorKind::Argument,
            "largest subset exceeds pool size");

    std::map<Source, std::vector<std::string>> by_source;
    for (const auto& e : pool.entries) by_source[e.source].push_back(e.image_id);

    std::vector<Source> sources;
    std::vector<size_t> counts;
    for (Source s : kAllSources) {
        auto it = by_source.find(s);
        if (it == by_source.end()) continue;
        sources.push_back(s);
        counts.push_back(it->second.size());
        auto stream = rng::Stream::for_id(seed, std::string("subset/") + to_string(s));
        detail::seeded_shuffle(it->second, stream);
    }

    SplitPlan plan;
    plan.master_seed = seed;
    std::vector<size_t> prev(sources.size(), 0);
    for (size_t size : sizes) {
        std::vector<size_t> quota = detail::largest_remainder(counts, size);
        // guard against the apportionment paradox: prefixes must never shrink
        for (size_t i = 0; i < quota.size(); ++i) {
            while (quota[i] < prev[i]) {
                ++quota[i];
                // take the unit back from the source with the largest surplus
                size_t best = quota.size();
                size_t best_surplus = 0;
                for (size_t j = 0; j < quota.size(); ++j) {
                    const size_t surplus = quota[j] > prev[j] ? quota[j] - prev[j] : 0;
                    if (surplus > best_surplus) {
                        best_surplus = surplus;
                        best = j;
                    }
                }
                require(best < quota.size(), ErrorKind::Invariant,
                        "monotone quota fixup has no donor");
                --quota[best];
            }
        }
        std::vector<std::string> ids;
        ids.reserve(size);
        for (size_t i = 0; i < sources.size(); ++i) {
            const auto& shuffled = by_source[sources[i]];
            for (size_t k = 0; k < quota[i]; ++k) ids.push_back(shuffled[k]);
        }
        std::sort(ids.begin(), ids.end());
        plan.train_subsets.emplace_back(std::to_string(size), std::move(ids));
        prev = quota;
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Ratio report

struct RatioRow {
    std::string subset_label;
    Source source = Source::Alaska2;
    double subset_share = 0.0;   // percent
    double pool_share = 0.0;     // percent
    double deviation_pp = 0.0;   // percentage points
};

struct RatioReport {
    std::vector<RatioRow> rows;

    double max_abs_deviation() const {
        double m = 0.0;
        for (const auto& r : rows) m = std::max(m, std::fabs(r.deviation_pp));
        return m;
    }

    /// Table with one row per source, one column per subset; deviations
    /// under half of 0.01 print as "=".
    std::string formatted() const {
        std::map<Source, std::map<std::string, double>> dev;
        std::vector<std::string> labels;
        for (const auto& r : rows) {
            if (std::find(labels.begin(), labels.end(), r.subset_label) == labels.end()) {
                labels.push_back(r.subset_label);
            }
            dev[r.source][r.subset_label] = r.deviation_pp;
        }
        std::ostringstream os;
        os << "source";
        for (const auto& l : labels) os << "\t" << l;
        os << "\n";
        for (Source s : kAllSources) {
            auto it = dev.find(s);
            if (it == dev.end()) continue;
            os << to_string(s);
            for (const auto& l : labels) {
                const double d = it->second.count(l) ? it->second.at(l) : 0.0;
                char buf[32];
                if (std::fabs(d) < 0.005) {
                    std::snprintf(buf, sizeof(buf), "=");
                } else {
                    std::snprintf(buf, sizeof(buf), "%+.2f%%", d);
                }
                os << "\t" << buf;
            }
            os << "\n";
        }
        return os.str();
    }
};

/// Signed per-subset, per-source share deviations against the pool shares.
inline RatioReport ratio_report(const SplitPlan& plan, const SourceCatalog& pool) {
    std::map<std::string, Source> source_of;
    std::map<Source, size_t> pool_counts;
    for (const auto& e : pool.entries) {
        source_of[e.image_id] = e.source;
        ++pool_counts[e.source];
    }
    RatioReport report;
    for (const auto& [label, ids] : plan.train_subsets) {
        std::map<Source, size_t> sub_counts;
        for (const auto& id : ids) {
            auto it = source_of.find(id);
            require(it != source_of.end(), ErrorKind::Argument,
                    "subset id '" + id + "' not in pool");
            ++sub_counts[it->second];
        }
        for (const auto& [source, pcount] : pool_counts) {
            RatioRow row;
            row.subset_label = label;
            row.source = source;
            row.pool_share = 100.0 * static_cast<double>(pcount) / static_cast<double>(pool.size());
            const size_t sc = sub_counts.count(source) ? sub_counts.at(source) : 0;
            row.subset_share = ids.empty() ? 0.0
                                           : 100.0 * static_cast<double>(sc) /
                                                 static_cast<double>(ids.size());
            row.deviation_pp = row.subset_share - row.pool_share;
            report.rows.push_back(row);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Stego plumbing and exports

/// Toy +-1 coefficient flipper over nonzero AC coefficients. Deterministic in
/// (cover, rate, seed); emits with the cover's tables. Plumbing for pairing
/// tests only, in no sense a secure embedding.
inline jpeg::Bytes toy_embed(std::span<const uint8_t> cover, double rate, uint64_t seed) {
    require(rate >= 0.0 && rate <= 1.0, ErrorKind::Argument, "embed rate outside [0,1]");
    jpeg::JpegCoefficients coeffs = jpeg::decode_coefficients(cover);
    require(coeffs.planes.size() == 1, ErrorKind::Unsupported,
            "toy embedding is defined for grey streams");

    auto stream = rng::Stream::for_id(seed, "toy-embed");
    for (auto& block : coeffs.planes[0].blocks) {
        for (int k = 1; k < 64; ++k) {
            int32_t& v = block[static_cast<size_t>(k)];
            if (v == 0) continue;
            if (!stream.bernoulli(rate)) continue;
            v += stream.bernoulli(0.5) ? 1 : -1;
        }
    }
    return jpeg::encode_from_coefficients(coeffs);
}

/// Decompresses a grey JPEG without rounding and stores the real values as a
/// MAT level-5 double array named "im".
inline void export_decompressed(std::span<const uint8_t> blob,
                                const std::filesystem::path& path) {
    const jpeg::UnroundedImage img = jpeg::decode_unrounded(blob);
    mat::Array array;
    array.rows = img.height;
    array.cols = img.width;
    array.name = "im";
    array.values = img.values;
    mat::write_array(array, path);
}

// ---------------------------------------------------------------------------
// Storage accounting

struct StorageCounts {
    uint64_t raw = 0;
    uint64_t jpeg_colour = 0;
    uint64_t jpeg_grey = 0;
    uint64_t jpeg_grey_stego = 0;
    uint64_t mat_grey = 0;
    uint64_t mat_grey_stego = 0;
};

struct StorageUnits {
    uint64_t raw_bytes = 0;          // per mosaic, measured from fixtures
    uint64_t jpeg_colour_bytes = 0;  // per tile, measured
    uint64_t jpeg_grey_bytes = 0;    // per tile, measured
    uint64_t mat_bytes = 256ull * 256ull * 8ull;  // decompressed tile payload
};

struct StorageLine {
    std::string format;
    uint64_t count = 0;
    uint64_t unit_bytes = 0;
    uint64_t total_bytes = 0;
};

struct StorageReport {
    std::vector<StorageLine> lines;
    uint64_t total_bytes = 0;

    std::string formatted() const {
        std::ostringstream os;
        for (const auto& l : lines) {
            os << l.format << "\t" << l.count << "\t" << l.unit_bytes << "\t" << l.total_bytes
               << "\n";
        }
        os << "total\t\t\t" << total_bytes << "\n";
        return os.str();
    }
};

inline StorageReport estimate_storage(const StorageCounts& counts, const StorageUnits& units) {
    StorageReport report;
    auto add = [&](const char* format, uint64_t count, uint64_t unit) {
        report.lines.push_back({format, count, unit, count * unit});
        report.total_bytes += count * unit;
    };
    add("raw", counts.raw, units.raw_bytes);
    add("jpeg-colour", counts.jpeg_colour, units.jpeg_colour_bytes);
    add("jpeg-grey", counts.jpeg_grey, units.jpeg_grey_bytes);
    add("jpeg-grey-stego", counts.jpeg_grey_stego, units.jpeg_grey_bytes);
    add("mat-grey", counts.mat_grey, units.mat_bytes);
    add("mat-grey-stego", counts.mat_grey_stego, units.mat_bytes);
    return report;
}

// ---------------------------------------------------------------------------
// Manifest records

/// One line per image, tab-separated key=value fields in fixed order.
struct ManifestRecord {
    std::string image_id;
    Source source = Source::Alaska2;
    std::string role = "all";
    DevRecipe recipe;
    int tiles = 16;
    bool upscaled = false;
    std::string cover_rel;     // output location relative to the run root
    std::string stego_rel = "-";
    std::string digest;        // sha256 over the image's emitted tile bytes

    std::string to_line() const {
        std::ostringstream os;
        os << "id=" << image_id << "\tsource=" << to_string(source) << "\trole=" << role
           << "\trecipe=" << recipe.serialize() << "\ttiles=" << tiles
           << "\tupscaled=" << (upscaled ? 1 : 0) << "\tcover=" << cover_rel
           << "\tstego=" << stego_rel << "\tdigest=" << digest;
        return os.str();
    }

    static ManifestRecord parse_line(const std::string& line) {
        std::map<std::string, std::string> kv;
        size_t pos = 0;
        while (pos <= line.size()) {
            size_t end = line.find('\t', pos);
            if (end == std::string::npos) end = line.size();
            const std::string field = line.substr(pos, end - pos);
            const size_t eq = field.find('=');
            require(eq != std::string::npos, ErrorKind::Format,
                    "bad manifest field '" + field + "'");
            kv[field.substr(0, eq)] = field.substr(eq + 1);
            pos = end + 1;
            if (end == line.size()) break;
        }
        auto get = [&](const char* key) -> const std::string& {
            auto it = kv.find(key);
            require(it != kv.end(), ErrorKind::Format,
                    std::string("manifest line missing key ") + key);
            return it->second;
        };
        ManifestRecord r;
        r.image_id = get("id");
        r.source = parse_source(get("source"));
        r.role = get("role");
        r.recipe = DevRecipe::parse(get("recipe"));
        r.tiles = std::atoi(get("tiles").c_str());
        r.upscaled = get("upscaled") == "1";
        r.cover_rel = get("cover");
        r.stego_rel = get("stego");
        r.digest = get("digest");
        return r;
    }
};

}  // namespace lssd
