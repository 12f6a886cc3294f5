#include "rbam/run_config.hpp"

#include "rbam/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace rbam {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const std::string& name, std::initializer_list<const char*> known) {
    if (!section.is_object()) throw ConfigError("config: '" + name + "' must be an object");
    for (const auto& item : section.items()) {
        bool found = false;
        for (const char* k : known) found = found || item.key() == k;
        if (!found) throw ConfigError("config: unknown key '" + name + "." + item.key() + "'");
    }
}

template <typename T>
void read(const json& section, const char* key, T& target, const std::string& name) {
    if (!section.contains(key)) return;
    const json& value = section.at(key);
    try {
        if constexpr (std::is_same_v<T, std::string>) {
            if (!value.is_string()) throw ConfigError("expected a string");
        } else if constexpr (std::is_integral_v<T>) {
            if (!value.is_number_integer()) throw ConfigError("expected an integer");
            if (std::is_unsigned_v<T> && !value.is_number_unsigned()) throw ConfigError("expected a non-negative integer");
        } else {
            if (!value.is_number()) throw ConfigError("expected a number");
        }
        target = value.get<T>();
    } catch (const ConfigError& e) {
        throw ConfigError("config: '" + name + "." + key + "': " + e.what());
    }
}

}  // namespace

void RunConfig::validate() const {
    try {
        if (mesh.H < 2) throw ConfigError("mesh.H must be at least 2");
        if (!(mesh.s_f > 0.0)) throw ConfigError("mesh.s_f must be positive");
        time.validate();
        box.validate();
        if (sampling.N_train < 1) throw ConfigError("sampling.N_train must be at least 1");
        if (sampling.N_test < 1) throw ConfigError("sampling.N_test must be at least 1");
        if (rb.NV_tilde < 1) throw ConfigError("rb.NV_tilde must be at least 1");
        if (rb.NW < 0) throw ConfigError("rb.NW must be non-negative");
        if (io.output_dir.empty()) throw ConfigError("io.output_dir must not be empty");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

std::string RunConfig::resolved_model_path() const {
    return io.model_path.empty() ? io.output_dir + "/model.json" : io.model_path;
}

RunConfig parse_run_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    reject_unknown(doc, "config", {"mesh", "time", "box", "sampling", "rb", "io"});

    RunConfig cfg;
    if (doc.contains("mesh")) {
        const json& s = doc["mesh"];
        reject_unknown(s, "mesh", {"H", "s_f"});
        read(s, "H", cfg.mesh.H, "mesh");
        read(s, "s_f", cfg.mesh.s_f, "mesh");
    }
    if (doc.contains("time")) {
        const json& s = doc["time"];
        reject_unknown(s, "time", {"T", "L", "theta"});
        read(s, "T", cfg.time.T, "time");
        read(s, "L", cfg.time.L, "time");
        read(s, "theta", cfg.time.theta, "time");
    }
    if (doc.contains("box")) {
        const json& s = doc["box"];
        reject_unknown(s, "box", {"K0", "r0", "q0", "sigma0", "eps"});
        read(s, "K0", cfg.box.K0, "box");
        read(s, "r0", cfg.box.r0, "box");
        read(s, "q0", cfg.box.q0, "box");
        read(s, "sigma0", cfg.box.sigma0, "box");
        read(s, "eps", cfg.box.eps, "box");
    }
    if (doc.contains("sampling")) {
        const json& s = doc["sampling"];
        reject_unknown(s, "sampling", {"seed", "N_train", "N_test"});
        read(s, "seed", cfg.sampling.seed, "sampling");
        read(s, "N_train", cfg.sampling.N_train, "sampling");
        read(s, "N_test", cfg.sampling.N_test, "sampling");
    }
    if (doc.contains("rb")) {
        const json& s = doc["rb"];
        reject_unknown(s, "rb", {"NV_tilde", "NW"});
        read(s, "NV_tilde", cfg.rb.NV_tilde, "rb");
        read(s, "NW", cfg.rb.NW, "rb");
    }
    if (doc.contains("io")) {
        const json& s = doc["io"];
        reject_unknown(s, "io", {"output_dir", "model_path"});
        read(s, "output_dir", cfg.io.output_dir, "io");
        read(s, "model_path", cfg.io.model_path, "io");
    }
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

ParameterVector parse_mu(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string field;
    while (std::getline(stream, field, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(field, &used);
        } catch (const std::exception&) {
            throw ConfigError("--mu: cannot parse '" + field + "' as a number");
        }
        if (used != field.size()) throw ConfigError("--mu: trailing characters in '" + field + "'");
        values.push_back(v);
    }
    if (values.size() != 4) throw ConfigError("--mu expects four values K,R,Q,SIGMA");
    ParameterVector mu{values[0], values[1], values[2], values[3]};
    try {
        mu.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--mu: ") + e.what());
    }
    return mu;
}

}  // namespace rbam
