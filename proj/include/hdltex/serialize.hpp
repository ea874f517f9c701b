#pragma once

#include <string>

#include "hdltex/hierarchy.hpp"

namespace hdltex {

// Single-file model container. Little-endian; 8-byte magic and a u32
// version, then length-prefixed sections (config snapshot, label space,
// optional shared embedding table, one section per submodel) and a trailing
// FNV-1a checksum. Tensors are stored as u32 rank, u32 dims, then raw
// IEEE-754 doubles row-major, so a round trip is bit-exact.
void save_model(const HierarchicalModel& model, const std::string& path);

HierarchicalModel load_model(const std::string& path);

}  // namespace hdltex
