#include "erblock/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "erblock/error.hpp"

namespace erblock::unicode {

std::u32string decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < utf8.size()) {
    const auto lead = static_cast<unsigned char>(utf8[i]);
    char32_t cp = 0;
    std::size_t extra = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      fail(ErrorCode::Parse, "invalid UTF-8 lead byte");
    }
    if (i + extra >= utf8.size() && extra > 0) {
      fail(ErrorCode::Parse, "truncated UTF-8 sequence");
    }
    for (std::size_t j = 1; j <= extra; ++j) {
      const auto cont = static_cast<unsigned char>(utf8[i + j]);
      if ((cont & 0xC0) != 0x80) {
        fail(ErrorCode::Parse, "invalid UTF-8 continuation byte");
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    const bool overlong = (extra == 1 && cp < 0x80) ||
                          (extra == 2 && cp < 0x800) ||
                          (extra == 3 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      fail(ErrorCode::Parse, "invalid UTF-8 scalar value");
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view scalars) {
  std::string out;
  out.reserve(scalars.size());
  for (char32_t cp : scalars) append_utf8(out, cp);
  return out;
}

std::string normalize_field(std::string_view utf8) {
  // Validate first so malformed bytes surface as a parse error rather than
  // being silently replaced by ICU.
  const std::u32string scalars = decode(utf8);
  bool ascii = true;
  for (char32_t cp : scalars) {
    if (cp >= 0x80) {
      ascii = false;
      break;
    }
  }
  if (ascii) return std::string(utf8);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorCode::Parse, "NFC normalizer unavailable");
  const icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) fail(ErrorCode::Parse, "NFC normalization failed");

  std::string out;
  normalized.toUTF8String(out);
  std::u32string cleaned = decode(out);
  std::erase_if(cleaned,
                [](char32_t cp) { return cp == kFieldSeparator || cp == kPad; });
  return encode(cleaned);
}

}  // namespace erblock::unicode
