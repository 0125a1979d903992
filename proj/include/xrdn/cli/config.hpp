#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace xrdn::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value configuration. Every key has a registered default; unknown
// keys are rejected so typos fail loudly. Values with an arch-dependent
// default use 0 / "auto" placeholders resolved by resolve().
class RunConfig {
public:
    RunConfig();   // defaults only

    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_seed() const;
    bool has_default(const std::string& key) const;

    // Fills arch-dependent placeholders (depth, filters, batch, epochs) and
    // validates every value. Non-destructive for explicit settings.
    void resolve();

    void write_resolved(const std::string& path) const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace xrdn::cli
