#pragma once

#include <filesystem>
#include <string>

#include "cts/levy.hpp"

namespace cts::io {

// Dome interchange document: a versioned JSON text carrying nodes (id,
// coordinates, fixed flag), elements (id, endpoints, kind, family), cluster
// groups with their rest lengths, per-element materials, and the solved
// prestress.  Numbers are written with shortest round-trip precision, so
// read_dome(write_dome(d)) reproduces every stored double bit-exactly.
std::string write_dome(const levy::DesignedDome& dome);

// Parse an interchange document.  Throws InvalidInput naming the offending
// field on any structural defect (missing key, wrong type, bad kind tag,
// out-of-range endpoint, strings preceding bars, ...).
levy::DesignedDome read_dome(const std::string& text);

// File convenience wrappers.  save_dome refuses nothing and overwrites;
// load_dome throws InvalidInput when the file cannot be read.
void save_dome(const std::filesystem::path& path, const levy::DesignedDome& dome);
levy::DesignedDome load_dome(const std::filesystem::path& path);

}  // namespace cts::io
