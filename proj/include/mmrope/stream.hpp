#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mmrope {

enum class Modality { Text, Image, Video };
enum class Role { Prompt, Generated };

inline const char* modality_name(Modality m) {
  switch (m) {
    case Modality::Text: return "text";
    case Modality::Image: return "image";
    default: return "video";
  }
}

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One stream segment. Text carries (len, role); Image carries (h, w);
// Video carries (t_frames, h, w). Unused fields stay zero so equality is
// plain member comparison.
struct Segment {
  Modality kind = Modality::Text;
  std::int64_t len = 0;       // Text
  std::int64_t h = 0, w = 0;  // Image / Video
  std::int64_t t_frames = 0;  // Video
  Role role = Role::Prompt;   // Text

  static Segment text(std::int64_t len, Role role = Role::Prompt) {
    Segment s;
    s.kind = Modality::Text;
    s.len = len;
    s.role = role;
    return s;
  }
  static Segment image(std::int64_t h, std::int64_t w) {
    Segment s;
    s.kind = Modality::Image;
    s.h = h;
    s.w = w;
    return s;
  }
  static Segment video(std::int64_t t_frames, std::int64_t h, std::int64_t w) {
    Segment s;
    s.kind = Modality::Video;
    s.t_frames = t_frames;
    s.h = h;
    s.w = w;
    return s;
  }

  std::int64_t frames() const { return kind == Modality::Video ? t_frames : 1; }
  std::int64_t token_count() const {
    switch (kind) {
      case Modality::Text: return len;
      case Modality::Image: return h * w;
      default: return t_frames * h * w;
    }
  }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct TokenStream {
  std::vector<Segment> segments;
  friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

inline std::int64_t token_count(const TokenStream& stream) {
  std::int64_t n = 0;
  for (const Segment& s : stream.segments) n += s.token_count();
  return n;
}

// One row per token, in stream order. Visual tokens enumerate in raster
// order: frames outermost, then rows, then columns.
struct TokenRef {
  std::size_t segment = 0;
  std::int64_t intra = 0;
  Modality modality = Modality::Text;
};

inline std::vector<TokenRef> token_table(const TokenStream& stream) {
  std::vector<TokenRef> table;
  table.reserve(static_cast<std::size_t>(token_count(stream)));
  for (std::size_t i = 0; i < stream.segments.size(); ++i) {
    const Segment& s = stream.segments[i];
    for (std::int64_t j = 0; j < s.token_count(); ++j) table.push_back({i, j, s.kind});
  }
  return table;
}

namespace detail {

inline std::int64_t require_extent(const nlohmann::json& seg, const char* key, std::size_t idx) {
  if (!seg.contains(key)) {
    throw ParseError("segment " + std::to_string(idx) + ": missing key '" + key + "'");
  }
  const auto& v = seg.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
    throw ParseError("segment " + std::to_string(idx) + ": '" + key +
                     "' must be a positive integer");
  }
  return v.get<std::int64_t>();
}

inline void reject_unknown_keys(const nlohmann::json& seg, std::initializer_list<const char*> allowed,
                                std::size_t idx) {
  for (const auto& item : seg.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) {
      if (item.key() == "role") {
        throw ParseError("segment " + std::to_string(idx) + ": visual segments carry no role");
      }
      throw ParseError("segment " + std::to_string(idx) + ": unknown key '" + item.key() + "'");
    }
  }
}

}  // namespace detail

inline TokenStream parse_stream(std::string_view spec_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(spec_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed stream spec: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("segments") || !doc.at("segments").is_array()) {
    throw ParseError("stream spec must be an object with a 'segments' array");
  }
  for (const auto& item : doc.items()) {
    if (item.key() != "segments") {
      throw ParseError("unknown top-level key '" + item.key() + "'");
    }
  }

  TokenStream stream;
  const auto& segs = doc.at("segments");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& seg = segs[i];
    if (!seg.is_object() || !seg.contains("kind") || !seg.at("kind").is_string()) {
      throw ParseError("segment " + std::to_string(i) + ": expected an object with a 'kind' string");
    }
    const std::string kind = seg.at("kind").get<std::string>();
    if (kind == "text") {
      detail::reject_unknown_keys(seg, {"kind", "len", "role"}, i);
      std::int64_t len = detail::require_extent(seg, "len", i);
      if (!seg.contains("role") || !seg.at("role").is_string()) {
        throw ParseError("segment " + std::to_string(i) + ": text requires a 'role' string");
      }
      const std::string role = seg.at("role").get<std::string>();
      if (role != "prompt" && role != "generated") {
        throw ParseError("segment " + std::to_string(i) + ": role must be 'prompt' or 'generated'");
      }
      stream.segments.push_back(
          Segment::text(len, role == "prompt" ? Role::Prompt : Role::Generated));
    } else if (kind == "image") {
      detail::reject_unknown_keys(seg, {"kind", "h", "w"}, i);
      stream.segments.push_back(
          Segment::image(detail::require_extent(seg, "h", i), detail::require_extent(seg, "w", i)));
    } else if (kind == "video") {
      detail::reject_unknown_keys(seg, {"kind", "t", "h", "w"}, i);
      stream.segments.push_back(Segment::video(detail::require_extent(seg, "t", i),
                                               detail::require_extent(seg, "h", i),
                                               detail::require_extent(seg, "w", i)));
    } else {
      throw ParseError("segment " + std::to_string(i) + ": unknown kind '" + kind + "'");
    }
  }
  return stream;
}

inline std::string serialize_stream(const TokenStream& stream) {
  nlohmann::ordered_json segs = nlohmann::ordered_json::array();
  for (const Segment& s : stream.segments) {
    nlohmann::ordered_json seg;
    switch (s.kind) {
      case Modality::Text:
        seg["kind"] = "text";
        seg["len"] = s.len;
        seg["role"] = s.role == Role::Prompt ? "prompt" : "generated";
        break;
      case Modality::Image:
        seg["kind"] = "image";
        seg["h"] = s.h;
        seg["w"] = s.w;
        break;
      case Modality::Video:
        seg["kind"] = "video";
        seg["t"] = s.t_frames;
        seg["h"] = s.h;
        seg["w"] = s.w;
        break;
    }
    segs.push_back(std::move(seg));
  }
  nlohmann::ordered_json doc;
  doc["segments"] = std::move(segs);
  return doc.dump();
}

}  // namespace mmrope
