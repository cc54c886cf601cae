#pragma once

// Grapheme clusters and NFC, backed by ICU.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "rtransfer/error.hpp"

namespace rtransfer::unicode {

/// Byte offset of the first invalid UTF-8 sequence, if any.
inline std::optional<std::size_t> first_invalid_utf8(std::string_view s) {
  std::int32_t i = 0;
  const auto len = static_cast<std::int32_t>(s.size());
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  while (i < len) {
    const std::int32_t start = i;
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) return static_cast<std::size_t>(start);
  }
  return std::nullopt;
}

inline bool is_valid_utf8(std::string_view s) { return !first_invalid_utf8(s).has_value(); }

inline std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorKind::Io, "ICU NFC normalizer unavailable");
  const icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
  if (normalizer->isNormalized(in, status) && U_SUCCESS(status)) return std::string(s);
  status = U_ZERO_ERROR;
  const icu::UnicodeString out = normalizer->normalize(in, status);
  if (U_FAILURE(status)) throw Error(ErrorKind::InvalidUtf8, "NFC normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

inline std::string to_lower(std::string_view s) {
  icu::UnicodeString u =
      icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
  u.toLower(icu::Locale::getRoot());
  std::string result;
  u.toUTF8String(result);
  return result;
}

/// Splits UTF-8 text into extended grapheme clusters.
inline std::vector<std::string> graphemes(std::string_view s) {
  std::vector<std::string> clusters;
  if (s.empty()) return clusters;
  const icu::UnicodeString u =
      icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
  UErrorCode status = U_ZERO_ERROR;
  // createCharacterInstance is comparatively expensive; one per thread.
  thread_local std::unique_ptr<icu::BreakIterator> it(
      icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
  if (!it) throw Error(ErrorKind::Io, "ICU character break iterator unavailable");
  it->setText(u);
  std::int32_t start = it->first();
  for (std::int32_t end = it->next(); end != icu::BreakIterator::DONE; start = end, end = it->next()) {
    std::string cluster;
    u.tempSubStringBetween(start, end).toUTF8String(cluster);
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

inline std::size_t grapheme_count(std::string_view s) { return graphemes(s).size(); }

inline std::string join(const std::vector<std::string>& parts, std::string_view sep = "") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace rtransfer::unicode
