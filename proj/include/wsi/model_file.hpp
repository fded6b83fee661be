#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "wsi/config.hpp"
#include "wsi/model.hpp"

// Binary model container, little-endian throughout:
//
//   "WSI1" | u16 format_version | u32 header_len | header (UTF-8 key=value text)
//   u32 tensor_count
//   per tensor, sorted by name:
//     u16 name_len | name | u8 dtype (0 = f32, 1 = i8 + scales) | u8 rank |
//     u32 dims[rank] | u64 offset | u64 length
//   payload: tensors back to back in directory order. An i8 tensor stores its
//   f32 per-channel scale table followed by the int8 codes.
//
// Offsets are absolute file positions. The header records the config, the
// applied quantization policy and the tied layer map in a fixed key order, so
// every model has exactly one encoding.
namespace wsi {

inline constexpr char kModelMagic[4] = {'W', 'S', 'I', '1'};
inline constexpr std::uint16_t kModelFormatVersion = 1;

std::string encode_model(const Model& model);
Model decode_model(std::string_view bytes);

// Bytes written.
std::size_t save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Exact encoded size of a model with this config whose covered matrices are
// int8 under `applied`, computed without weights.
std::size_t encoded_size(const ModelConfig& config, const QuantPolicy& applied);

// Header text for the given config and policy.
std::string model_header(const ModelConfig& config, const QuantPolicy& applied);

}  // namespace wsi
