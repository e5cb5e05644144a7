#include "webradio/icy.hpp"

#include <algorithm>
#include <charconv>

#include "webradio/error.hpp"

namespace webradio {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

constexpr std::string_view kTitleKey = "StreamTitle='";
constexpr std::size_t kMaxMetadataBytes = 255 * 16;

}  // namespace

icy_headers parse_icy_headers(std::span<const std::string> header_lines) {
  icy_headers h;
  for (const auto& line : header_lines) {
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string name = lower(trim(std::string_view(line).substr(0, colon)));
    std::string_view value = trim(std::string_view(line).substr(colon + 1));

    if (name == "icy-metaint") {
      std::size_t n = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
      if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size() || n == 0 ||
          n > kMaxMetaint) {
        throw error(errc::protocol, "invalid icy-metaint: \"" + std::string(value) + "\"");
      }
      h.metaint = n;
    } else if (name == "icy-name") {
      h.station_name = sanitize_utf8(value);
    } else if (name == "content-type") {
      h.content_type = std::string(value);
    }
  }
  return h;
}

std::string sanitize_utf8(std::string_view in) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    auto c = static_cast<unsigned char>(in[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      out += static_cast<char>(c);
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    }
    bool valid = len != 0 && i + len <= in.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      auto cc = static_cast<unsigned char>(in[i + k]);
      if ((cc & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (cc & 0x3F);
      }
    }
    // reject overlongs, surrogates and out-of-range code points
    if (valid) {
      static constexpr std::uint32_t min_cp[] = {0, 0, 0x80, 0x800, 0x10000};
      valid = cp >= min_cp[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (valid) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

std::optional<std::string> parse_stream_title(std::span<const std::uint8_t> metadata) {
  std::size_t end = metadata.size();
  while (end > 0 && metadata[end - 1] == 0) --end;
  std::string_view text(reinterpret_cast<const char*>(metadata.data()), end);

  auto key = text.find(kTitleKey);
  if (key == std::string_view::npos) return std::nullopt;
  std::size_t start = key + kTitleKey.size();
  // titles may contain apostrophes; the value ends at the first "';"
  auto close = text.find("';", start);
  if (close == std::string_view::npos) {
    close = text.rfind('\'');
    if (close == std::string_view::npos || close < start) return std::nullopt;
  }
  return sanitize_utf8(text.substr(start, close - start));
}

icy_demuxer::icy_demuxer(std::optional<std::size_t> metaint) : metaint_(metaint) {
  reset();
}

void icy_demuxer::reset() {
  state_ = state::audio;
  audio_left_ = metaint_.value_or(0);
  meta_.clear();
  meta_left_ = 0;
}

void icy_demuxer::feed(std::span<const std::uint8_t> bytes, const event_fn& emit) {
  consumed_total_ += bytes.size();
  if (!metaint_) {
    if (!bytes.empty()) {
      audio_total_ += bytes.size();
      emit(event::audio_chunk{{bytes.begin(), bytes.end()}});
    }
    return;
  }

  while (!bytes.empty()) {
    switch (state_) {
      case state::audio: {
        std::size_t n = std::min(audio_left_, bytes.size());
        emit(event::audio_chunk{{bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n)}});
        audio_total_ += n;
        audio_left_ -= n;
        bytes = bytes.subspan(n);
        if (audio_left_ == 0) state_ = state::length;
        break;
      }
      case state::length: {
        std::size_t len = bytes.front();
        bytes = bytes.subspan(1);
        if (len == 0) {
          state_ = state::audio;
          audio_left_ = *metaint_;
        } else {
          state_ = state::metadata;
          meta_left_ = len * 16;
          meta_.clear();
          meta_.reserve(meta_left_);
        }
        break;
      }
      case state::metadata: {
        std::size_t n = std::min(meta_left_, bytes.size());
        meta_.insert(meta_.end(), bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(n));
        meta_left_ -= n;
        bytes = bytes.subspan(n);
        if (meta_left_ == 0) {
          auto title = parse_stream_title(meta_);
          if (title && title != last_title_) {
            last_title_ = title;
            emit(event::title_change{*title});
          }
          state_ = state::audio;
          audio_left_ = *metaint_;
        }
        break;
      }
    }
  }
}

void icy_demuxer::finish(const event_fn& emit) {
  if (state_ == state::metadata) {
    emit(event::transport_error{"truncated metadata"});
  } else {
    emit(event::end_of_stream{});
  }
}

std::vector<std::size_t> find_mp3_frame_syncs(std::span<const std::uint8_t> bytes) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + 1 < bytes.size(); ++i) {
    if (bytes[i] == 0xFF && (bytes[i + 1] & 0xE0) == 0xE0) out.push_back(i);
  }
  return out;
}

std::vector<std::uint8_t> encode_title_block(std::string_view title) {
  std::string payload = std::string(kTitleKey) + std::string(title) + "';";
  std::size_t blocks = (payload.size() + 15) / 16;
  if (blocks * 16 > kMaxMetadataBytes) {
    throw error(errc::startup, "title too long for one metadata block");
  }
  std::vector<std::uint8_t> out(payload.begin(), payload.end());
  out.resize(blocks * 16, 0);
  return out;
}

icy_layout build_icy_stream(std::span<const std::uint8_t> audio, std::size_t metaint,
                            std::span<const scheduled_title> schedule) {
  if (metaint == 0 || metaint > kMaxMetaint) throw error(errc::startup, "metaint must lie in [1, 2^24]");
  std::vector<scheduled_title> pending(schedule.begin(), schedule.end());
  std::stable_sort(pending.begin(), pending.end(),
                   [](const auto& a, const auto& b) { return a.offset < b.offset; });
  for (const auto& t : pending) encode_title_block(t.title);  // reject oversize titles up front

  icy_layout layout;
  std::size_t blocks = audio.size() / metaint;
  layout.wire.reserve(audio.size() + blocks * 2);
  std::size_t next_title = 0;
  std::size_t pos = 0;
  while (pos < audio.size()) {
    std::size_t n = std::min(metaint, audio.size() - pos);
    layout.wire.insert(layout.wire.end(), audio.begin() + static_cast<std::ptrdiff_t>(pos),
                       audio.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
    if (n < metaint) break;

    std::optional<std::string> title;
    while (next_title < pending.size() && pending[next_title].offset <= pos) {
      title = pending[next_title++].title;
    }
    ++layout.metadata_blocks;
    if (!title) {
      layout.wire.push_back(0);
      continue;
    }
    auto block = encode_title_block(*title);
    layout.wire.push_back(static_cast<std::uint8_t>(block.size() / 16));
    layout.wire.insert(layout.wire.end(), block.begin(), block.end());
    layout.titles_emitted.push_back(std::move(*title));
  }
  return layout;
}

}  // namespace webradio
