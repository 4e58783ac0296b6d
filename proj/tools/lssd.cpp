// lssd: controlled development of CFA mosaics into tiled QF-75 JPEG corpora,
// quantization-table forensics, and reproducible dataset splits.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lssd/batch.hpp"

namespace {

namespace fs = std::filesystem;
using lssd::batch::RunConfig;

int default_workers() {
    if (const char* env = std::getenv("LSSD_WORKERS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

/// Expands directories to the .jpg files inside them, sorted.
std::vector<fs::path> collect_jpegs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& raw : inputs) {
        const fs::path p(raw);
        if (fs::is_directory(p)) {
            for (const auto& e : fs::recursive_directory_iterator(p)) {
                if (e.is_regular_file() && e.path().extension() == ".jpg") {
                    files.push_back(e.path());
                }
            }
        } else {
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

struct CommonFlags {
    std::string config_file;
    RunConfig config;

    void attach(CLI::App* cmd) {
        config.workers = default_workers();
        cmd->add_option("--config", config_file, "key=value config file; flags override it");
        cmd->add_option("--seed", config.master_seed, "master seed");
        cmd->add_option("--workers", config.workers, "worker thread count");
        cmd->add_option("--quality", config.quality, "JPEG quality factor");
        cmd->add_flag("--machine", config.machine_readable,
                      "emit line-delimited machine-readable reports");
    }

    /// Re-applies command-line values after the config file so flags win.
    void finalize(CLI::App* cmd) {
        if (config_file.empty()) return;
        RunConfig from_file = config;
        lssd::batch::load_config_file(config_file, from_file);
        // every flag the user actually passed overrides the file
        RunConfig merged = from_file;
        if (cmd->count("--seed")) merged.master_seed = config.master_seed;
        if (cmd->count("--workers")) merged.workers = config.workers;
        if (cmd->count("--quality")) merged.quality = config.quality;
        if (cmd->count("--profile")) merged.profile = config.profile;
        if (cmd->count("--in")) merged.input_root = config.input_root;
        if (cmd->count("--out")) merged.output_root = config.output_root;
        merged.machine_readable = config.machine_readable;
        config = merged;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"controlled image development and JPEG corpus toolkit"};
    app.require_subcommand(1);

    // develop
    auto* develop = app.add_subcommand("develop", "develop a mosaic tree into JPEG tiles");
    CommonFlags dev_flags;
    std::string dev_in, dev_out, dev_profile = "learning";
    dev_flags.attach(develop);
    develop->add_option("--in", dev_in, "input root (per-source mosaic directories)");
    develop->add_option("--out", dev_out, "output root");
    develop->add_option("--profile", dev_profile, "learning | test");
    develop->add_option("--usm-probability", dev_flags.config.usm_probability,
                        "USM gate probability in the test profile");
    develop->add_flag("--export-ppm", dev_flags.config.export_ppm,
                      "also keep the 1024x1024 P6/P5 intermediates");

    // split
    auto* split = app.add_subcommand("split", "plan test partition and nested training subsets");
    CommonFlags split_flags;
    std::string split_in, split_out, split_exclude = "Dresden";
    std::vector<size_t> split_sizes;
    size_t split_test_size = 0;
    split_flags.attach(split);
    split->add_option("--in", split_in, "input root");
    split->add_option("--out", split_out, "output root");
    split->add_option("--test-size", split_test_size, "test partition size");
    split->add_option("--sizes", split_sizes, "ascending nested subset sizes")->delimiter(',');
    split->add_option("--exclude", split_exclude, "comma-separated sources excluded from test");
    std::string split_materialize;
    split->add_option("--materialize", split_materialize,
                      "develop output root; copies grey tiles into "
                      "<split>/cover/<id>_<tile>.jpg");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "report quantization tables and standardness");
    std::vector<std::string> inspect_files;
    bool inspect_machine = false;
    inspect->add_option("files", inspect_files, "JPEG files")->required();
    inspect->add_flag("--machine", inspect_machine, "machine-readable output");

    // recompress
    auto* recompress = app.add_subcommand("recompress", "decode and re-encode at a target quality");
    std::vector<std::string> rc_files;
    std::string rc_out = ".";
    int rc_quality = 75;
    bool rc_preserve = false;
    int rc_workers = default_workers();
    recompress->add_option("files", rc_files, "JPEG files or directories")->required();
    recompress->add_option("--quality", rc_quality, "target quality factor");
    recompress->add_flag("--preserve", rc_preserve, "re-target non-standard tables");
    recompress->add_option("--out", rc_out, "output directory");
    recompress->add_option("--workers", rc_workers, "worker thread count");

    // embed-toy
    auto* embed = app.add_subcommand("embed-toy", "toy +-1 coefficient embedding over covers");
    std::vector<std::string> em_files;
    std::string em_out = "stego";
    double em_rate = 0.2;
    uint64_t em_seed = 1;
    int em_workers = default_workers();
    embed->add_option("covers", em_files, "cover JPEG files or directories")->required();
    embed->add_option("--rate", em_rate, "changes per nonzero AC coefficient");
    embed->add_option("--seed", em_seed, "embedding seed");
    embed->add_option("--out", em_out, "output directory");
    embed->add_option("--workers", em_workers, "worker thread count");

    // export-mat
    auto* exportmat = app.add_subcommand("export-mat", "decompress grey JPEGs to MAT arrays");
    std::vector<std::string> mat_files;
    std::string mat_out = "mat";
    int mat_workers = default_workers();
    exportmat->add_option("files", mat_files, "grey JPEG files or directories")->required();
    exportmat->add_option("--out", mat_out, "output directory");
    exportmat->add_option("--workers", mat_workers, "worker thread count");

    // estimate-storage
    auto* storage = app.add_subcommand("estimate-storage", "project corpus storage by format");
    lssd::StorageCounts st_counts;
    lssd::StorageUnits st_units;
    std::string st_measure_dir;
    bool st_machine = false;
    storage->add_option("--raws", st_counts.raw, "mosaic count");
    storage->add_option("--jpeg-colour", st_counts.jpeg_colour, "colour tile count");
    storage->add_option("--jpeg-grey", st_counts.jpeg_grey, "grey cover tile count");
    storage->add_option("--jpeg-grey-stego", st_counts.jpeg_grey_stego, "grey stego tile count");
    storage->add_option("--mat-grey", st_counts.mat_grey, "decompressed cover count");
    storage->add_option("--mat-grey-stego", st_counts.mat_grey_stego, "decompressed stego count");
    storage->add_option("--raw-bytes", st_units.raw_bytes, "bytes per mosaic");
    storage->add_option("--jpeg-colour-bytes", st_units.jpeg_colour_bytes, "bytes per colour tile");
    storage->add_option("--jpeg-grey-bytes", st_units.jpeg_grey_bytes, "bytes per grey tile");
    storage->add_option("--measure-jpeg", st_measure_dir,
                        "directory of sample tiles; sets grey/colour unit sizes to measured means");
    storage->add_flag("--machine", st_machine, "machine-readable output");

    // verify
    auto* verify = app.add_subcommand("verify", "re-hash a run's outputs against its manifest");
    std::string verify_root;
    verify->add_option("run", verify_root, "run output root")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (develop->parsed()) {
            dev_flags.config.input_root = dev_in;
            dev_flags.config.output_root = dev_out;
            dev_flags.config.profile = lssd::parse_profile(dev_profile);
            dev_flags.finalize(develop);
            return lssd::batch::cmd_develop(dev_flags.config, std::cout);
        }
        if (split->parsed()) {
            split_flags.config.input_root = split_in;
            split_flags.config.output_root = split_out;
            split_flags.config.test_size = split_test_size;
            split_flags.config.split_sizes = split_sizes;
            split_flags.config.materialize_from = split_materialize;
            split_flags.config.excluded_sources.clear();
            std::stringstream ss(split_exclude);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty() && tok != "none") {
                    split_flags.config.excluded_sources.insert(lssd::parse_source(tok));
                }
            }
            split_flags.finalize(split);
            return lssd::batch::cmd_split(split_flags.config, std::cout);
        }
        if (inspect->parsed()) {
            return lssd::batch::cmd_inspect(collect_jpegs(inspect_files), std::cout,
                                            inspect_machine);
        }
        if (recompress->parsed()) {
            return lssd::batch::cmd_recompress(collect_jpegs(rc_files), rc_quality, rc_preserve,
                                               rc_out, rc_workers, std::cout);
        }
        if (embed->parsed()) {
            return lssd::batch::cmd_embed_toy(collect_jpegs(em_files), em_rate, em_seed, em_out,
                                              em_workers, std::cout);
        }
        if (exportmat->parsed()) {
            return lssd::batch::cmd_export_mat(collect_jpegs(mat_files), mat_out, mat_workers,
                                               std::cout);
        }
        if (storage->parsed()) {
            if (!st_measure_dir.empty()) {
                uint64_t total = 0, n = 0;
                for (const auto& f : collect_jpegs({st_measure_dir})) {
                    total += fs::file_size(f);
                    ++n;
                }
                if (n > 0) {
                    const uint64_t mean = total / n;
                    if (!storage->count("--jpeg-grey-bytes")) st_units.jpeg_grey_bytes = mean;
                    if (!storage->count("--jpeg-colour-bytes")) st_units.jpeg_colour_bytes = mean;
                }
            }
            return lssd::batch::cmd_estimate_storage(st_counts, st_units, std::cout, st_machine);
        }
        if (verify->parsed()) {
            return lssd::batch::cmd_verify(verify_root, std::cout);
        }
    } catch (const lssd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == lssd::ErrorKind::Config ? lssd::batch::kExitConfig
                                                   : lssd::batch::kExitPartial;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lssd::batch::kExitPartial;
    }
    return lssd::batch::kExitConfig;
}
