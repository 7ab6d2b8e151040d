#pragma once

namespace predstab {

inline constexpr const char* kVersion = "0.1.0";

// Normal variates are produced by inverting the standard normal CDF
// (Wichura's AS 241 rational approximation, polished with one Newton step
// against erfc). Recorded in report metadata so simulation output can be
// reproduced exactly.
inline constexpr const char* kNormalMethod = "inverse-cdf-as241-newton";

}  // namespace predstab
