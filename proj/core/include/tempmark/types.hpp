#pragma once

#include <cstdint>
#include <vector>

namespace tempmark {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

// Reserved ids are fixed so hashing and file formats stay bit-stable.
inline constexpr TokenId kBosId = 0;
inline constexpr TokenId kUnkId = 1;

inline constexpr const char* kBosSurface = "<bos>";
inline constexpr const char* kUnkSurface = "<unk>";

}  // namespace tempmark
