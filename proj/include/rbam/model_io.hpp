#pragma once

#include "rbam/rb_offline.hpp"

#include <string>

namespace rbam {

inline constexpr int kModelSchemaVersion = 1;

/// JSON text of the model; numbers are written with 17 significant digits so that
/// a load reproduces every double bit for bit.
std::string serialize_model(const ReducedModel& model);
ReducedModel deserialize_model(const std::string& text);

void save_model(const ReducedModel& model, const std::string& path);

/// Throws LoadError (VersionMismatch for a foreign schema) on unreadable, malformed or
/// inconsistent files, including a rank-deficient B_N.
ReducedModel load_model(const std::string& path);

}  // namespace rbam
