#pragma once

namespace l0cert {

// Single version string, also embedded in every file format header.
// Readers reject files written by a different version.
inline constexpr const char* kVersion = "0.1.0";

}  // namespace l0cert
