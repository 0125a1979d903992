#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "xrdn/cli/config.hpp"

namespace xrdn::cli {

namespace {

struct KeyDef {
    const char* name;
    const char* value;
    const char* help;
};

// The single source of truth for configuration keys. "auto" placeholders are
// replaced by architecture defaults in resolve().
const KeyDef kKeys[] = {
    {"seed", "0", "master seed for every derived stream"},
    {"scene", "desk", "scene preset: desk (64x64 single frame) or default (160x160 stack)"},
    {"pairs", "200", "number of LC/HC pairs to synthesize"},
    {"lc_over_hc", "0.0952380952380952", "exposure ratio gamma (2 s / 21 s)"},
    {"split_train", "0.7", "train fraction"},
    {"split_val", "0.2", "validation fraction"},
    {"split_test", "0.1", "test fraction"},
    {"noise", "pois+g", "noise recipe: pois, gauss, pois+g or gauss+g"},
    {"noise_sigma", "auto", "gaussian noise sigma; auto matches the poisson scale"},
    {"blur_min", "0.3", "kernel std lower bound (pixels)"},
    {"blur_max", "0.5", "kernel std upper bound (pixels)"},
    {"arch", "vdsr", "network topology: vdsr or irunet"},
    {"depth", "auto", "conv layers (auto: 20)"},
    {"filters", "auto", "filters per layer (auto: 64)"},
    {"ilr", "0.0005", "initial learning rate"},
    {"batch", "auto", "batch size (auto: vdsr 8, irunet 16)"},
    {"epochs", "auto", "training epochs (auto: vdsr 250, irunet 300)"},
    {"flip_probability", "0.5", "row-flip augmentation probability"},
    {"mae_normalization", "mean", "mae term divided by pixel count (fixed)"},
    {"flank_fraction", "0.25", "background fit flank fraction per side"},
    {"q0_h", "0.23", "scan centre h (r.l.u.)"},
    {"q0_k", "0", "scan centre k (r.l.u.)"},
    {"q0_l", "8.5", "scan centre l (r.l.u.)"},
    {"window_h", "0.005", "transverse half-width in h (r.l.u.)"},
    {"window_k", "0.01", "transverse half-width in k (r.l.u.)"},
    {"window_l", "0.05", "transverse half-width in l (r.l.u.)"},
};

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool known_key(const std::string& key) {
    for (const KeyDef& d : kKeys)
        if (key == d.name) return true;
    return false;
}

void check_enum(const std::string& key, const std::string& value,
                std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (value == a) return;
    std::string msg = "config: invalid value '" + value + "' for " + key +
                      " (expected one of:";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw ConfigError(msg + ")");
}

}  // namespace

RunConfig::RunConfig() {
    for (const KeyDef& d : kKeys) kv_[d.name] = d.value;
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + path + ":" +
                              std::to_string(lineno) + ": expected key=value");
        set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!known_key(key))
        throw ConfigError("config: unknown key '" + key + "'");
    kv_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end())
        throw ConfigError("config: unknown key '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string& v = get(key);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size())
        throw ConfigError("config: key '" + key + "' is not a number: " + v);
    return out;
}

int RunConfig::get_int(const std::string& key) const {
    const double d = get_double(key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw ConfigError("config: key '" + key + "' is not an integer");
    return i;
}

std::uint64_t RunConfig::get_seed() const {
    const std::string& v = get("seed");
    try {
        std::size_t used = 0;
        const std::uint64_t s = std::stoull(v, &used);
        if (used == v.size()) return s;
    } catch (const std::exception&) {
    }
    throw ConfigError("config: bad seed: " + v);
}

bool RunConfig::has_default(const std::string& key) const {
    for (const KeyDef& d : kKeys)
        if (key == d.name) return get(key) == d.value;
    return false;
}

void RunConfig::resolve() {
    check_enum("scene", get("scene"), {"desk", "default"});
    check_enum("noise", get("noise"), {"pois", "gauss", "pois+g", "gauss+g"});
    check_enum("arch", get("arch"), {"vdsr", "irunet"});
    if (get("mae_normalization") != "mean")
        throw ConfigError("config: mae_normalization is fixed to 'mean'");

    const bool irunet = get("arch") == "irunet";
    if (get("depth") == "auto") kv_["depth"] = "20";
    if (get("filters") == "auto") kv_["filters"] = "64";
    if (get("batch") == "auto") kv_["batch"] = irunet ? "16" : "8";
    if (get("epochs") == "auto") kv_["epochs"] = irunet ? "300" : "250";

    get_seed();
    for (const char* k : {"pairs", "depth", "filters", "batch", "epochs"})
        if (get_int(k) <= 0)
            throw ConfigError(std::string("config: ") + k + " must be positive");
    for (const char* k :
         {"lc_over_hc", "split_train", "split_val", "split_test", "ilr",
          "blur_min", "blur_max", "flip_probability", "flank_fraction", "q0_h",
          "q0_k", "q0_l", "window_h", "window_k", "window_l"})
        get_double(k);
    if (get("noise_sigma") != "auto") get_double("noise_sigma");

    if (get_double("flip_probability") < 0.0 || get_double("flip_probability") > 1.0)
        throw ConfigError("config: flip_probability must be in [0, 1]");
    if (get_double("lc_over_hc") <= 0.0 || get_double("lc_over_hc") > 1.0)
        throw ConfigError("config: lc_over_hc must be in (0, 1]");
}

void RunConfig::write_resolved(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write " + path);
    out << "# resolved configuration, one key per line\n";
    for (const KeyDef& d : kKeys) {
        const auto it = kv_.find(d.name);
        out << d.name << " = " << it->second << "   # " << d.help << "\n";
    }
    if (!out) throw ConfigError("config: write failed for " + path);
}

}  // namespace xrdn::cli
