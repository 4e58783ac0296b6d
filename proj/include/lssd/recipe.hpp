#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>

#include "lssd/error.hpp"
#include "lssd/rng.hpp"

namespace lssd {

enum class DemosaicMethod { Fast, Dcb };
enum class ResizeKernel { Nearest, Bilinear, Bicubic };
enum class Profile { Learning, Test };

inline const char* to_string(DemosaicMethod m) {
    return m == DemosaicMethod::Fast ? "fast" : "dcb";
}
inline const char* to_string(ResizeKernel k) {
    switch (k) {
        case ResizeKernel::Nearest: return "nearest";
        case ResizeKernel::Bilinear: return "bilinear";
        case ResizeKernel::Bicubic: return "bicubic";
    }
    return "?";
}
inline const char* to_string(Profile p) { return p == Profile::Learning ? "learning" : "test"; }

inline Profile parse_profile(const std::string& s) {
    if (s == "learning") return Profile::Learning;
    if (s == "test") return Profile::Test;
    fail(ErrorKind::Config, "unknown profile '" + s + "'");
}

/// Complete sampled development parameters for one image.
struct DevRecipe {
    DemosaicMethod demosaic = DemosaicMethod::Dcb;
    ResizeKernel resize_kernel = ResizeKernel::Bicubic;
    int target_side = 1024;
    bool usm_enabled = false;
    double usm_amount = 0.0;          // meaningful only when usm_enabled
    double denoise_intensity = 0.0;   // [0, 60], meaningful when !usm_enabled
    int denoise_detail = 0;           // {0..40}, meaningful when !usm_enabled
    bool microcontrast_enabled = false;
    double mc_strength = 0.0;         // [0, 100]
    int mc_uniformity = 0;            // >= 0
    int quality_factor = 75;

    bool operator==(const DevRecipe&) const = default;

    void validate() const {
        require(target_side >= 8, ErrorKind::Invariant, "recipe target side too small");
        require(usm_amount >= 0.0, ErrorKind::Invariant, "usm amount negative");
        require(denoise_intensity >= 0.0 && denoise_intensity <= 60.0, ErrorKind::Invariant,
                "denoise intensity outside [0,60]");
        require(denoise_detail >= 0 && denoise_detail <= 40, ErrorKind::Invariant,
                "denoise detail outside {0..40}");
        require(mc_strength >= 0.0 && mc_strength <= 100.0, ErrorKind::Invariant,
                "micro-contrast strength outside [0,100]");
        require(mc_uniformity >= 0, ErrorKind::Invariant, "micro-contrast uniformity negative");
        require(quality_factor >= 1 && quality_factor <= 100, ErrorKind::Invariant,
                "quality factor outside [1,100]");
    }

    /// One-line key=value form, bit-exact round trip through parse().
    std::string serialize() const {
        char buf[320];
        // %.17g keeps doubles exact through the text round trip
        std::snprintf(buf, sizeof(buf),
                      "demosaic=%s kernel=%s side=%d usm=%d usm_amount=%.17g "
                      "dn_intensity=%.17g dn_detail=%d mc=%d mc_strength=%.17g "
                      "mc_uniformity=%d qf=%d",
                      to_string(demosaic), to_string(resize_kernel), target_side,
                      usm_enabled ? 1 : 0, usm_amount, denoise_intensity, denoise_detail,
                      microcontrast_enabled ? 1 : 0, mc_strength, mc_uniformity, quality_factor);
        return buf;
    }

    static DevRecipe parse(const std::string& text) {
        std::map<std::string, std::string> kv;
        size_t pos = 0;
        while (pos < text.size()) {
            size_t end = text.find(' ', pos);
            if (end == std::string::npos) end = text.size();
            const std::string field = text.substr(pos, end - pos);
            const size_t eq = field.find('=');
            require(eq != std::string::npos, ErrorKind::Format, "bad recipe field '" + field + "'");
            kv[field.substr(0, eq)] = field.substr(eq + 1);
            pos = end + 1;
        }
        auto get = [&](const char* key) -> const std::string& {
            auto it = kv.find(key);
            require(it != kv.end(), ErrorKind::Format, std::string("recipe missing key ") + key);
            return it->second;
        };
        DevRecipe r;
        const std::string& dm = get("demosaic");
        if (dm == "fast") r.demosaic = DemosaicMethod::Fast;
        else if (dm == "dcb") r.demosaic = DemosaicMethod::Dcb;
        else fail(ErrorKind::Format, "unknown demosaic '" + dm + "'");
        const std::string& kn = get("kernel");
        if (kn == "nearest") r.resize_kernel = ResizeKernel::Nearest;
        else if (kn == "bilinear") r.resize_kernel = ResizeKernel::Bilinear;
        else if (kn == "bicubic") r.resize_kernel = ResizeKernel::Bicubic;
        else fail(ErrorKind::Format, "unknown kernel '" + kn + "'");
        r.target_side = std::atoi(get("side").c_str());
        r.usm_enabled = get("usm") == "1";
        r.usm_amount = std::strtod(get("usm_amount").c_str(), nullptr);
        r.denoise_intensity = std::strtod(get("dn_intensity").c_str(), nullptr);
        r.denoise_detail = std::atoi(get("dn_detail").c_str());
        r.microcontrast_enabled = get("mc") == "1";
        r.mc_strength = std::strtod(get("mc_strength").c_str(), nullptr);
        r.mc_uniformity = std::atoi(get("mc_uniformity").c_str());
        r.quality_factor = std::atoi(get("qf").c_str());
        r.validate();
        return r;
    }
};

/// (master_seed, image_id) fully determines an image's recipe.
struct SeedSpec {
    uint64_t master_seed = 0;
    std::string image_id;
};

struct SampleOptions {
    double usm_probability = 0.5;  // test profile gate; no value claimed by the source material
};

/// Draws Gamma(shape, 1), scales, and clamps to [lo, hi].
inline double sample_gamma_scaled(double shape, double scale, double lo, double hi,
                                  rng::Stream& stream) {
    require(shape > 0.0 && scale > 0.0, ErrorKind::Argument, "gamma shape/scale must be positive");
    require(lo < hi, ErrorKind::Argument, "gamma clamp range empty");
    const double x = scale * stream.gamma(shape);
    return std::clamp(x, lo, hi);
}

/// floor(Normal(mu, sigma)) rectified below at lo.
inline int sample_floor_normal(double mu, double sigma, int lo, rng::Stream& stream) {
    require(sigma > 0.0, ErrorKind::Argument, "sigma must be positive");
    const double x = stream.normal(mu, sigma);
    const long long f = static_cast<long long>(std::floor(x));
    return static_cast<int>(std::max<long long>(lo, f));
}

namespace detail {
// Fixed substream slot per recipe field. Conditional fields draw from their
// own slot, so enabling one stage never shifts another stage's values.
enum RecipeSlot : uint32_t {
    kSlotDemosaic = 1,
    kSlotKernel = 2,
    kSlotUsmGate = 3,
    kSlotUsmAmount = 4,
    kSlotDenoiseIntensity = 5,
    kSlotDenoiseDetail = 6,
    kSlotMcGate = 7,
    kSlotMcStrength = 8,
    kSlotMcUniformity = 9,
};

inline rng::Stream slot_stream(const SeedSpec& seed, uint32_t slot) {
    return rng::Stream::for_id(seed.master_seed, seed.image_id, slot);
}
}  // namespace detail

/// Samples one image's full development recipe. Pure function of
/// (master_seed, image_id, profile, options).
inline DevRecipe sample_recipe(const SeedSpec& seed, Profile profile,
                               const SampleOptions& options = {}) {
    DevRecipe r;
    r.target_side = 1024;
    r.quality_factor = 75;

    {
        auto s = detail::slot_stream(seed, detail::kSlotDemosaic);
        r.demosaic = s.uniform() < 0.35 ? DemosaicMethod::Fast : DemosaicMethod::Dcb;
    }
    {
        auto s = detail::slot_stream(seed, detail::kSlotKernel);
        const double u = s.uniform();
        if (u < 0.2) r.resize_kernel = ResizeKernel::Nearest;
        else if (u < 0.7) r.resize_kernel = ResizeKernel::Bicubic;
        else r.resize_kernel = ResizeKernel::Bilinear;
    }

    if (profile == Profile::Learning) {
        r.usm_enabled = false;
    } else {
        auto s = detail::slot_stream(seed, detail::kSlotUsmGate);
        r.usm_enabled = s.bernoulli(options.usm_probability);
    }

    if (r.usm_enabled) {
        auto s = detail::slot_stream(seed, detail::kSlotUsmAmount);
        r.usm_amount = 0.5 + s.uniform();  // uniform on [0.5, 1.5)
    } else {
        auto si = detail::slot_stream(seed, detail::kSlotDenoiseIntensity);
        r.denoise_intensity = sample_gamma_scaled(4.0, 10.0, 0.0, 60.0, si);
        auto sd = detail::slot_stream(seed, detail::kSlotDenoiseDetail);
        r.denoise_detail = static_cast<int>(sd.uniform_int(41));
    }

    {
        auto s = detail::slot_stream(seed, detail::kSlotMcGate);
        r.microcontrast_enabled = s.bernoulli(0.5);
    }
    if (r.microcontrast_enabled) {
        auto ss = detail::slot_stream(seed, detail::kSlotMcStrength);
        r.mc_strength = sample_gamma_scaled(1.0, 50.0, 0.0, 100.0, ss);
        auto su = detail::slot_stream(seed, detail::kSlotMcUniformity);
        r.mc_uniformity = sample_floor_normal(30.0, 5.0, 0, su);
    }

    r.validate();
    return r;
}

}  // namespace lssd
