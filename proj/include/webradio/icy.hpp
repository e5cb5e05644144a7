#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace webradio {

inline constexpr std::size_t kMaxMetaint = std::size_t{1} << 24;

struct icy_headers {
  std::optional<std::size_t> metaint;
  std::optional<std::string> station_name;
  std::string content_type;
};

// Accepts "name: value" lines; names are case-insensitive. Throws
// error(protocol) for a non-numeric, zero or oversized icy-metaint.
icy_headers parse_icy_headers(std::span<const std::string> header_lines);

namespace event {
struct audio_chunk {
  std::vector<std::uint8_t> bytes;
  bool operator==(const audio_chunk&) const = default;
};
struct title_change {
  std::string title;
  bool operator==(const title_change&) const = default;
};
struct end_of_stream {
  bool operator==(const end_of_stream&) const = default;
};
struct transport_error {
  std::string reason;
  bool operator==(const transport_error&) const = default;
};
}  // namespace event

using stream_event =
    std::variant<event::audio_chunk, event::title_change, event::end_of_stream, event::transport_error>;

using event_fn = std::function<void(stream_event)>;

// Value of StreamTitle='...' in a zero-padded metadata block, decoded as UTF-8
// with U+FFFD replacement. Absent when the key is missing or malformed.
std::optional<std::string> parse_stream_title(std::span<const std::uint8_t> metadata);

// Replace invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view in);

// Incremental splitter for [metaint audio][L][16*L metadata] framing. Accepts
// arbitrary chunk boundaries. Without a metaint every byte is audio.
class icy_demuxer {
public:
  explicit icy_demuxer(std::optional<std::size_t> metaint);

  void feed(std::span<const std::uint8_t> bytes, const event_fn& emit);
  // Emits end_of_stream, or transport_error("truncated metadata") when input
  // stopped inside a metadata block.
  void finish(const event_fn& emit);
  // Drops partial-block state; keeps the last title for deduplication.
  void reset();

  std::uint64_t audio_bytes() const { return audio_total_; }
  std::uint64_t consumed_bytes() const { return consumed_total_; }
  bool mid_metadata() const { return state_ == state::metadata; }

private:
  enum class state { audio, length, metadata };

  std::optional<std::size_t> metaint_;
  state state_ = state::audio;
  std::size_t audio_left_ = 0;
  std::vector<std::uint8_t> meta_;
  std::size_t meta_left_ = 0;
  std::optional<std::string> last_title_;
  std::uint64_t audio_total_ = 0;
  std::uint64_t consumed_total_ = 0;
};

// Offsets i with bytes[i] == 0xFF and (bytes[i+1] & 0xE0) == 0xE0.
std::vector<std::size_t> find_mp3_frame_syncs(std::span<const std::uint8_t> bytes);

// Title injected into the first metadata block at or after `offset` audio bytes.
struct scheduled_title {
  std::size_t offset = 0;
  std::string title;
};

struct icy_layout {
  std::vector<std::uint8_t> wire;            // audio interleaved with metadata blocks
  std::vector<std::string> titles_emitted;   // in block order, as placed on the wire
  std::size_t metadata_blocks = 0;
};

// Metadata payload "StreamTitle='<title>';" zero-padded to a multiple of 16.
std::vector<std::uint8_t> encode_title_block(std::string_view title);

// Builds the wire form of `audio`: a metadata block after every full metaint
// run, no block after a trailing partial run. Throws error(startup) for a zero
// metaint or a title that does not fit in 255*16 bytes.
icy_layout build_icy_stream(std::span<const std::uint8_t> audio, std::size_t metaint,
                            std::span<const scheduled_title> schedule);

}  // namespace webradio
