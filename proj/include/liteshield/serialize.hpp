#pragma once

#include "liteshield/models.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace liteshield {

// Model file layout, all little-endian:
//   "LSHD" | u16 version | u8 family | u32 n_classes | u32 n_features | payload
// Payloads use f32 for weights, thresholds and coordinates and LEB128
// varints for tree structure, counts and labels.
inline constexpr std::uint16_t model_format_version = 1;

struct ModelHeader {
    std::uint16_t version = 0;
    Family family = Family::dt;
    std::uint32_t n_classes = 0;
    std::uint32_t n_features = 0;
};

std::vector<std::uint8_t> serialize(const TrainedModel& model);

// Throws FormatError (bad_magic, unsupported_version, truncated, corrupt).
TrainedModel deserialize(std::span<const std::uint8_t> bytes);
ModelHeader read_header(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace liteshield
