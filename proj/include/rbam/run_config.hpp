#pragma once

#include "rbam/fem_core.hpp"
#include "rbam/rb_offline.hpp"
#include "rbam/vi_truth.hpp"

#include <cstdint>
#include <string>

namespace rbam {

struct MeshConfig {
    int H = 99;
    double s_f = 300.0;
};

struct SamplingConfig {
    std::uint64_t seed = 42;
    int N_train = 16;
    int N_test = 10;
};

struct IoConfig {
    std::string output_dir = "rbam_out";
    std::string model_path;  ///< empty: <output_dir>/model.json
};

/// Everything a pipeline run needs. Defaults give the standard American-put setup.
struct RunConfig {
    MeshConfig mesh;
    SchemeConfig time;
    ParameterBox box;
    SamplingConfig sampling;
    BasisBudget rb;
    IoConfig io;

    /// Throws ConfigError on any out-of-range field.
    void validate() const;
    std::string resolved_model_path() const;
};

/// Parses a JSON document. Missing keys keep their defaults; unknown keys and
/// wrongly typed values are rejected with ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Parses "K,R,Q,SIGMA".
ParameterVector parse_mu(const std::string& text);

}  // namespace rbam
