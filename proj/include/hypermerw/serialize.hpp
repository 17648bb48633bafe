#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hypermerw/broadcast.hpp"
#include "hypermerw/merge.hpp"

namespace hypermerw {

/// Kernel documents use 1-based node ids and carry a "type" field.
enum class KernelKind { Broadcast, Merge };

nlohmann::json to_json(const BroadcastKernel& kernel);
nlohmann::json to_json(const MergeKernel& kernel);
KernelKind kernel_kind(const nlohmann::json& doc);
BroadcastKernel broadcast_kernel_from_json(const nlohmann::json& doc);
MergeKernel merge_kernel_from_json(const nlohmann::json& doc);

nlohmann::json vector_to_json(const Vector& v);
/// Accepts an array of numbers or an object with a "p" array.
Vector vector_from_json(const nlohmann::json& doc);

/// Whole-file helpers; failures throw IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace hypermerw
