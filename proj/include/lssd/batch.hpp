#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lssd/dataset.hpp"
#include "lssd/develop.hpp"
#include "lssd/error.hpp"
#include "lssd/jpeg_codec.hpp"
#include "lssd/rawio.hpp"
#include "lssd/recipe.hpp"
#include "lssd/sha256.hpp"

namespace lssd::batch {

// Exit codes shared by all verbs.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

struct RunConfig {
    uint64_t master_seed = 1;
    Profile profile = Profile::Learning;
    int workers = 1;
    std::filesystem::path input_root;
    std::filesystem::path output_root;
    std::vector<size_t> split_sizes;
    size_t test_size = 0;
    std::set<Source> excluded_sources;
    int quality = 75;
    double usm_probability = 0.5;
    double embed_rate = 0.2;
    bool machine_readable = false;
    bool export_ppm = false;                // also keep 1024x1024 P6/P5 intermediates
    std::filesystem::path materialize_from; // develop output to copy split tiles from

    void validate() const {
        require(workers >= 1, ErrorKind::Config, "worker count must be >= 1");
        require(quality >= 1 && quality <= 100, ErrorKind::Config,
                "quality factor outside [1,100]");
        require(usm_probability >= 0.0 && usm_probability <= 1.0, ErrorKind::Config,
                "usm probability outside [0,1]");
        require(embed_rate >= 0.0 && embed_rate <= 1.0, ErrorKind::Config,
                "embed rate outside [0,1]");
    }
};

/// Reads key=value lines into a config; '#' starts a comment. Flags given on
/// the command line are applied afterwards and win.
inline void load_config_file(const std::filesystem::path& path, RunConfig& config) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::Config, "cannot open config " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::Config,
                "config line " + std::to_string(lineno) + " is not key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "seed") config.master_seed = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "profile") config.profile = parse_profile(value);
        else if (key == "workers") config.workers = std::atoi(value.c_str());
        else if (key == "in") config.input_root = value;
        else if (key == "out") config.output_root = value;
        else if (key == "quality") config.quality = std::atoi(value.c_str());
        else if (key == "test_size") config.test_size = std::strtoull(value.c_str(), nullptr, 10);
        else if (key == "usm_probability") config.usm_probability = std::strtod(value.c_str(), nullptr);
        else if (key == "embed_rate") config.embed_rate = std::strtod(value.c_str(), nullptr);
        else if (key == "sizes") {
            config.split_sizes.clear();
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) config.split_sizes.push_back(std::strtoull(tok.c_str(), nullptr, 10));
            }
        } else if (key == "exclude") {
            config.excluded_sources.clear();
            std::stringstream ss(value);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) config.excluded_sources.insert(parse_source(tok));
            }
        } else {
            fail(ErrorKind::Config, "unknown config key '" + key + "'");
        }
    }
}

namespace detail {

inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto run = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int count = static_cast<int>(std::min<size_t>(static_cast<size_t>(workers), n));
    pool.reserve(static_cast<size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
}

inline std::string read_file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) return {};
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
    return Sha256::hex_digest(data);
}

inline void write_file(const std::filesystem::path& path, std::span<const uint8_t> data) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::Io, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

inline jpeg::Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::Io, "cannot open " + path.string());
    return jpeg::Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline std::string tile_suffix(int k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "_%02d", k);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// develop

/// Per-image completion journal: one manifest line per finished image. A
/// resumed run trusts an entry only if the files it points at still hash to
/// the recorded digest.
struct RunState {
    std::map<std::string, ManifestRecord> completed;

    static RunState load(const std::filesystem::path& path) {
        RunState state;
        std::ifstream in(path);
        if (!in.good()) return state;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                ManifestRecord r = ManifestRecord::parse_line(line);
                state.completed[r.image_id] = std::move(r);
            } catch (const Error&) {
                // a torn last line from an interrupted run is expected; skip it
            }
        }
        return state;
    }
};

struct DevelopStats {
    size_t total = 0;
    size_t developed = 0;
    size_t reused = 0;
    size_t failed = 0;
    double seconds = 0.0;
};

/// Develops every catalog image into 16 colour + 16 grey Q-quality tiles.
/// Output bytes are independent of worker count; interrupted runs resume
/// from the journal without re-emitting differing bytes.
inline int cmd_develop(const RunConfig& config, std::ostream& log, DevelopStats* stats_out = nullptr) {
    config.validate();
    require(!config.input_root.empty() && !config.output_root.empty(), ErrorKind::Config,
            "develop needs input and output roots");
    const SourceCatalog catalog = build_catalog(config.input_root);
    require(!catalog.entries.empty(), ErrorKind::Config,
            "no mosaics found under " + config.input_root.string());

    std::filesystem::create_directories(config.output_root);
    const std::filesystem::path state_path = config.output_root / "run.state";
    const RunState resume = RunState::load(state_path);

    struct Slot {
        bool ok = false;
        bool reused = false;
        std::string line;
        std::string error;
    };
    std::vector<Slot> slots(catalog.size());

    std::mutex journal_mutex;
    std::ofstream journal(state_path, std::ios::app);
    require(journal.good(), ErrorKind::Io, "cannot open journal " + state_path.string());

    std::atomic<size_t> done{0};
    const auto t0 = std::chrono::steady_clock::now();
    const size_t report_every = std::max<size_t>(1, catalog.size() / 8);

    detail::parallel_for(catalog.size(), config.workers, [&](size_t index) {
        const CatalogEntry& entry = catalog.entries[index];
        Slot& slot = slots[index];
        try {
            // resumable: trust the journal only when the files still match
            auto it = resume.completed.find(entry.image_id);
            if (it != resume.completed.end()) {
                bool intact = true;
                Sha256 hash;
                for (const char* kind : {"colour", "grey"}) {
                    for (int k = 0; k < kTileCount && intact; ++k) {
                        const auto p = config.output_root / kind /
                                       (entry.image_id + detail::tile_suffix(k) + ".jpg");
                        if (!std::filesystem::is_regular_file(p)) {
                            intact = false;
                            break;
                        }
                        const auto bytes = detail::read_file(p);
                        hash.update(bytes);
                    }
                }
                if (intact && Sha256::to_hex(hash.finish()) == it->second.digest) {
                    slot.ok = true;
                    slot.reused = true;
                    slot.line = it->second.to_line();
                    done.fetch_add(1);
                    return;
                }
            }

            const CfaImage cfa = read_cfa(entry.cfa_path);
            const SeedSpec seed{config.master_seed, entry.image_id};
            SampleOptions opts;
            opts.usm_probability = config.usm_probability;
            DevRecipe recipe = sample_recipe(seed, config.profile, opts);
            recipe.quality_factor = config.quality;
            const DevelopResult dev = develop_image(cfa, recipe, entry.image_id);

            Sha256 hash;
            for (int k = 0; k < kTileCount; ++k) {
                const jpeg::Bytes bytes = jpeg::encode_jpeg(dev.colour_tiles.tiles[static_cast<size_t>(k)],
                                                            recipe.quality_factor);
                hash.update(bytes);
                detail::write_file(config.output_root / "colour" /
                                       (entry.image_id + detail::tile_suffix(k) + ".jpg"),
                                   bytes);
            }
            for (int k = 0; k < kTileCount; ++k) {
                const jpeg::Bytes bytes = jpeg::encode_jpeg(dev.grey_tiles.tiles[static_cast<size_t>(k)],
                                                            recipe.quality_factor);
                hash.update(bytes);
                detail::write_file(config.output_root / "grey" /
                                       (entry.image_id + detail::tile_suffix(k) + ".jpg"),
                                   bytes);
            }

            if (config.export_ppm) {
                const auto ppm_dir = config.output_root / "ppm";
                std::filesystem::create_directories(
                    (ppm_dir / entry.image_id).parent_path());
                write_ppm8(dev.colour, ppm_dir / (entry.image_id + ".ppm"));
                write_pgm8(dev.grey, ppm_dir / (entry.image_id + ".pgm"));
            }

            ManifestRecord record;
            record.image_id = entry.image_id;
            record.source = entry.source;
            record.role = "all";
            record.recipe = recipe;
            record.tiles = kTileCount;
            record.upscaled = dev.upscaled;
            record.cover_rel = "grey/" + entry.image_id;
            record.digest = Sha256::to_hex(hash.finish());
            slot.ok = true;
            slot.line = record.to_line();

            {
                std::lock_guard<std::mutex> lock(journal_mutex);
                journal << slot.line << "\n";
                journal.flush();
            }
        } catch (const std::exception& e) {
            slot.ok = false;
            slot.error = e.what();
        }
        const size_t k = done.fetch_add(1) + 1;
        if (k % report_every == 0 || k == catalog.size()) {
            const double dt =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::ostringstream os;
            os << "developed " << k << "/" << catalog.size() << " (" << std::fixed
               << std::setprecision(2) << (dt > 0 ? k / dt : 0.0) << " img/s)\n";
            std::lock_guard<std::mutex> lock(journal_mutex);
            log << os.str();
        }
    });

    // manifest: fixed header (worker count deliberately omitted), records in id order
    std::ofstream manifest(config.output_root / "manifest.tsv");
    require(manifest.good(), ErrorKind::Io, "cannot write manifest");
    manifest << "#lssd-manifest v1\tseed=" << config.master_seed
             << "\tprofile=" << to_string(config.profile) << "\tquality=" << config.quality
             << "\tusm_p=" << config.usm_probability << "\n";
    DevelopStats stats;
    stats.total = catalog.size();
    for (const Slot& slot : slots) {
        if (slot.ok) {
            manifest << slot.line << "\n";
            if (slot.reused) ++stats.reused;
            else ++stats.developed;
        } else {
            ++stats.failed;
        }
    }
    manifest.close();

    // rewrite the journal sorted so finished trees are byte-stable
    {
        std::ofstream sorted(state_path, std::ios::trunc);
        for (const Slot& slot : slots) {
            if (slot.ok) sorted << slot.line << "\n";
        }
    }

    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (stats_out != nullptr) *stats_out = stats;

    for (size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i].ok) {
            log << "FAILED " << catalog.entries[i].image_id << ": " << slots[i].error << "\n";
        }
    }
    log << "develop: " << stats.developed << " developed, " << stats.reused << " reused, "
        << stats.failed << " failed, " << std::fixed << std::setprecision(1) << stats.seconds
        << "s\n";
    return stats.failed == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// split

inline int cmd_split(const RunConfig& config, std::ostream& log) {
    config.validate();
    require(!config.input_root.empty() && !config.output_root.empty(), ErrorKind::Config,
            "split needs input and output roots");
    require(config.test_size > 0, ErrorKind::Config, "split needs a test size");
    require(!config.split_sizes.empty(), ErrorKind::Config, "split needs subset sizes");

    const SourceCatalog catalog = build_catalog(config.input_root);
    require(!catalog.entries.empty(), ErrorKind::Config,
            "no mosaics found under " + config.input_root.string());

    const TestPartition part =
        partition_test(catalog, config.test_size, config.excluded_sources, config.master_seed);
    SplitPlan plan = nested_subsets(part.train_pool, config.split_sizes, config.master_seed);
    plan.test_ids = part.test_ids;
    const RatioReport report = ratio_report(plan, part.train_pool);

    const auto dir = config.output_root / "split";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "test_ids.txt");
        for (const auto& id : plan.test_ids) out << id << "\n";
    }
    for (const auto& [label, ids] : plan.train_subsets) {
        std::ofstream out(dir / ("train_" + label + ".txt"));
        for (const auto& id : ids) out << id << "\n";
    }
    {
        std::ofstream out(dir / "ratio_report.tsv");
        out << report.formatted();
    }

    // optional materialization into <split>/<cover|stego>/<id>_<tile>.jpg;
    // stego stays empty until embed-toy fills it
    if (!config.materialize_from.empty()) {
        auto copy_tiles = [&](const std::vector<std::string>& ids, const std::string& label) {
            const auto cover_dir = dir / label / "cover";
            std::filesystem::create_directories(dir / label / "stego");
            for (const auto& id : ids) {
                for (int k = 0; k < kTileCount; ++k) {
                    const std::string rel = id + detail::tile_suffix(k) + ".jpg";
                    const auto src = config.materialize_from / "grey" / rel;
                    require(std::filesystem::is_regular_file(src), ErrorKind::Config,
                            "missing developed tile " + src.string() +
                                " (run develop before materializing)");
                    const auto dst = cover_dir / rel;
                    std::filesystem::create_directories(dst.parent_path());
                    std::filesystem::copy_file(
                        src, dst, std::filesystem::copy_options::overwrite_existing);
                }
            }
        };
        copy_tiles(plan.test_ids, "test");
        for (const auto& [label, ids] : plan.train_subsets) copy_tiles(ids, "train_" + label);
    }

    if (config.machine_readable) {
        log << "test_count=" << plan.test_ids.size() << "\n";
        for (const auto& [source, count] : part.test_counts) {
            log << "test_" << to_string(source) << "=" << count << "\n";
        }
        for (const auto& [label, ids] : plan.train_subsets) {
            log << "train_" << label << "=" << ids.size() << "\n";
        }
        log << "max_abs_deviation_pp=" << report.max_abs_deviation() << "\n";
    } else {
        log << "test set: " << plan.test_ids.size() << " images\n";
        for (const auto& [source, count] : part.test_counts) {
            log << "  " << to_string(source) << ": " << count << "\n";
        }
        log << "train subsets:";
        for (const auto& [label, ids] : plan.train_subsets) log << " " << label;
        log << "\nratio report:\n" << report.formatted();
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// inspect

inline int cmd_inspect(const std::vector<std::filesystem::path>& files, std::ostream& log,
                       bool machine_readable) {
    int failures = 0;
    for (const auto& path : files) {
        try {
            const jpeg::Bytes data = detail::read_file(path);
            const auto tables = jpeg::extract_quant_tables(data);
            for (size_t ci = 0; ci < tables.size(); ++ci) {
                const auto kind = ci == 0 ? jpeg::TableKind::Luminance : jpeg::TableKind::Chrominance;
                const jpeg::QfEstimate est = jpeg::estimate_qf(tables[ci], kind);
                const char* component = ci == 0 ? (tables.size() == 1 ? "grey" : "Y")
                                                : (ci == 1 ? "Cb" : "Cr");
                if (machine_readable) {
                    log << "file=" << path.string() << "\tcomponent=" << component
                        << "\tstandard=" << (est.is_standard ? 1 : 0) << "\tq=" << est.q_estimated
                        << "\tdistance=" << est.distance << "\n";
                } else {
                    log << path.string() << " [" << component << "] "
                        << (est.is_standard ? "standard" : "non-standard")
                        << ", Q=" << est.q_estimated << ", distance=" << est.distance << "\n";
                    for (int r = 0; r < 8; ++r) {
                        log << "   ";
                        for (int c = 0; c < 8; ++c) log << " " << tables[ci].at(r, c);
                        log << "\n";
                    }
                }
            }
        } catch (const Error& e) {
            log << path.string() << ": " << e.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// recompress / embed / export

inline int cmd_recompress(const std::vector<std::filesystem::path>& files, int target_quality,
                          bool preserve_nonstandard, const std::filesystem::path& out_dir,
                          int workers, std::ostream& log) {
    require(!files.empty(), ErrorKind::Config, "no files to recompress");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> errors(files.size());
    detail::parallel_for(files.size(), workers, [&](size_t i) {
        try {
            const jpeg::Bytes data = detail::read_file(files[i]);
            const jpeg::Bytes out = jpeg::recompress(data, target_quality, preserve_nonstandard);
            detail::write_file(out_dir / files[i].filename(), out);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    int failures = 0;
    for (size_t i = 0; i < files.size(); ++i) {
        if (!errors[i].empty()) {
            log << "FAILED " << files[i].string() << ": " << errors[i] << "\n";
            ++failures;
        }
    }
    return failures == 0 ? kExitOk : kExitPartial;
}

inline int cmd_embed_toy(const std::vector<std::filesystem::path>& covers, double rate,
                         uint64_t seed, const std::filesystem::path& out_dir, int workers,
                         std::ostream& log) {
    require(!covers.empty(), ErrorKind::Config, "no cover files given");
    require(rate >= 0.0 && rate <= 1.0, ErrorKind::Config, "embed rate outside [0,1]");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> errors(covers.size());
    std::vector<std::string> pair_lines(covers.size());
    detail::parallel_for(covers.size(), workers, [&](size_t i) {
        try {
            const jpeg::Bytes cover = detail::read_file(covers[i]);
            // key the stream by file name so each cover gets its own subset
            const uint64_t file_seed = seed ^ rng::fnv1a64(covers[i].filename().string());
            const jpeg::Bytes stego = toy_embed(cover, rate, file_seed);
            const auto out_path = out_dir / covers[i].filename();
            detail::write_file(out_path, stego);
            std::ostringstream os;
            os << "cover=" << covers[i].string() << "\tstego=" << out_path.string()
               << "\tcover_digest=" << Sha256::hex_digest(cover)
               << "\tstego_digest=" << Sha256::hex_digest(stego);
            pair_lines[i] = os.str();
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    std::ofstream pairs(out_dir / "pairs.tsv");
    int failures = 0;
    for (size_t i = 0; i < covers.size(); ++i) {
        if (!errors[i].empty()) {
            log << "FAILED " << covers[i].string() << ": " << errors[i] << "\n";
            ++failures;
        } else {
            pairs << pair_lines[i] << "\n";
        }
    }
    return failures == 0 ? kExitOk : kExitPartial;
}

inline int cmd_export_mat(const std::vector<std::filesystem::path>& files,
                          const std::filesystem::path& out_dir, int workers, std::ostream& log) {
    require(!files.empty(), ErrorKind::Config, "no files to export");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> errors(files.size());
    detail::parallel_for(files.size(), workers, [&](size_t i) {
        try {
            const jpeg::Bytes data = detail::read_file(files[i]);
            auto out_path = out_dir / files[i].filename();
            out_path.replace_extension(".mat");
            export_decompressed(data, out_path);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    int failures = 0;
    for (size_t i = 0; i < files.size(); ++i) {
        if (!errors[i].empty()) {
            log << "FAILED " << files[i].string() << ": " << errors[i] << "\n";
            ++failures;
        }
    }
    return failures == 0 ? kExitOk : kExitPartial;
}

// ---------------------------------------------------------------------------
// storage / verify

inline int cmd_estimate_storage(const StorageCounts& counts, const StorageUnits& units,
                                std::ostream& log, bool machine_readable) {
    const StorageReport report = estimate_storage(counts, units);
    if (machine_readable) {
        for (const auto& l : report.lines) {
            log << "format=" << l.format << "\tcount=" << l.count << "\tunit=" << l.unit_bytes
                << "\ttotal=" << l.total_bytes << "\n";
        }
        log << "total_bytes=" << report.total_bytes << "\n";
    } else {
        log << report.formatted();
        log << "total: " << static_cast<double>(report.total_bytes) / 1e12 << " TB\n";
    }
    return kExitOk;
}

/// Re-hashes every manifest record's outputs and reports mismatches.
inline int cmd_verify(const std::filesystem::path& run_root, std::ostream& log) {
    const auto manifest_path = run_root / "manifest.tsv";
    std::ifstream in(manifest_path);
    require(in.good(), ErrorKind::Config, "no manifest at " + manifest_path.string());
    std::string line;
    int checked = 0, mismatched = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const ManifestRecord record = ManifestRecord::parse_line(line);
        Sha256 hash;
        bool intact = true;
        for (const char* kind : {"colour", "grey"}) {
            for (int k = 0; k < record.tiles && intact; ++k) {
                const auto p =
                    run_root / kind / (record.image_id + detail::tile_suffix(k) + ".jpg");
                if (!std::filesystem::is_regular_file(p)) {
                    intact = false;
                    break;
                }
                hash.update(detail::read_file(p));
            }
        }
        ++checked;
        if (!intact || Sha256::to_hex(hash.finish()) != record.digest) {
            log << "MISMATCH " << record.image_id << "\n";
            ++mismatched;
        }
    }
    log << "verify: " << checked << " records, " << mismatched << " mismatched\n";
    return mismatched == 0 ? kExitOk : kExitPartial;
}

}  // namespace lssd::batch
