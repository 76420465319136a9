#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sedkit/tensor.hpp"

namespace sedkit {

// Single-tensor container: ASCII header line "TNSR v1 <ndims> <d0> <d1> ...",
// a newline, then the row-major payload as little-endian 32-bit floats.
void write_tnsr(const std::string& path, const TensorF& t);
TensorF read_tnsr(const std::string& path);

// Text manifest mapping tensor names to container files, one "name<TAB>file"
// line per tensor. File paths are relative to the manifest's directory.
struct ManifestEntry {
    std::string name;
    std::string file;
};

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

// Directory-level convenience: each tensor goes to "<dir>/<name>.tnsr" and
// the set is indexed by "<dir>/manifest.txt".
void save_tensors(const std::string& dir,
                  const std::vector<std::pair<std::string, const TensorF*>>& tensors);
std::vector<std::pair<std::string, TensorF>> load_tensors(const std::string& dir);

}  // namespace sedkit
