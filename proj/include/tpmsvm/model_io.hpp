#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "tpmsvm/data_pipeline.hpp"
#include "tpmsvm/model.hpp"

namespace tpmsvm {

/// A trained model plus the scaling its inputs expect.
struct SavedModel {
  MulticlassModel model;
  std::optional<ScalingParams> scaling;
  bool clamp = false;  // clamp scaled inputs to [0, 1]
};

constexpr int kModelFormatVersion = 1;

/// 64-bit FNV-1a over the row-major bytes of the matrix and its shape.
std::uint64_t sample_digest(const Matrix& samples);

std::string model_to_json(const SavedModel& saved);
SavedModel model_from_json(const std::string& text);

void save_model(const SavedModel& saved, const std::string& path);
SavedModel load_model(const std::string& path);

}  // namespace tpmsvm
