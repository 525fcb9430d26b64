#pragma once

#include <string>
#include <string_view>

namespace cryptic {

/// Deterministic sound key used by the homophone oracle. The full rule list
/// lives in docs/phonetic_key.md; changing it changes verification results.
std::string phonetic_key(std::string_view text);

}  // namespace cryptic
