#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "damf/boosting.hpp"
#include "damf/calendar.hpp"
#include "damf/dataset.hpp"
#include "damf/lstm.hpp"

namespace damf {

inline constexpr int kModelFormatVersion = 1;

// Everything needed to score a test split: the fitted scalers, the model and
// the dataset layout it was trained on.
struct ModelFile {
    std::string model_name;
    int window_days = 0;
    YearMonth month;
    std::size_t lag_depth = 0;
    std::vector<std::string> feature_names;
    std::vector<std::size_t> categorical_slots;
    ScalerParams feature_scaler;
    ScalerParams target_scaler;
    std::variant<std::monostate, Ensemble, LstmFfecModel> body;
};

// Versioned whitespace-separated text; every double is written in its
// shortest exact form, so reading back reproduces predictions bit for bit.
std::string serialize_model(const ModelFile& model);
ModelFile parse_model(std::string_view text);  // throws BadModelFile

void write_model(const ModelFile& model, const std::filesystem::path& path);  // throws OutputUnwritable
ModelFile read_model(const std::filesystem::path& path);                      // throws FileUnreadable, BadModelFile

std::string serialize_ensemble(const Ensemble& model);
Ensemble parse_ensemble(std::string_view text);

}  // namespace damf
