#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ebsde/model.hpp"

namespace ebsde {

// Flat key = value configuration.  '#' starts a comment, values are numbers,
// bare words, or double-quoted strings; dotted keys namespace parameters
// (model.eta, driver.k, ...).  Unknown keys are kept and available.
class ExperimentConfig {
  public:
    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;

    // The RNG seed is deliberately never defaulted.
    std::uint64_t seed() const;

    // Numeric parameters under `prefix.`, with the prefix stripped.
    Params params_with_prefix(const std::string& prefix) const;

    const std::string& text() const { return text_; }
    // FNV-1a of the raw config text, hex encoded.
    std::string hash() const;

  private:
    std::map<std::string, std::string> kv_;
    std::string text_;
};

// Catalog lookups driven by the config keys `model`, `driver`, `terminal`
// and their dotted parameters.  The driver key `manufactured` builds the
// manufactured problem from driver.lambda_star and driver.kappa.
SdeModel model_from_config(const ExperimentConfig& cfg);
Driver driver_from_config(const ExperimentConfig& cfg, const SdeModel& model);
TerminalCondition terminal_from_config(const ExperimentConfig& cfg);

}  // namespace ebsde
