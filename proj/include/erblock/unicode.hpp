#pragma once

#include <string>
#include <string_view>

namespace erblock::unicode {

// Reserved characters. Ingestion strips both from field values so they can
// delimit fields and pad short shingles without colliding with real text.
inline constexpr char32_t kFieldSeparator = U'␟';
inline constexpr char32_t kPad = U'␀';

/// NFC-normalizes UTF-8 text and strips the reserved characters.
/// Throws Error(Parse) on invalid UTF-8.
std::string normalize_field(std::string_view utf8);

/// Decodes UTF-8 into Unicode scalars. Throws Error(Parse) on invalid input.
std::u32string decode(std::string_view utf8);

std::string encode(std::u32string_view scalars);
void append_utf8(std::string& out, char32_t cp);

}  // namespace erblock::unicode
