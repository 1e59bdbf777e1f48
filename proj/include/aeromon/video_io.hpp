#pragma once

#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aeromon/image.hpp"

namespace aeromon {

// RGV1 container: magic "RGV1", then little-endian u32 width, u32 height,
// u16 fps, u32 frame_count, then raw 8-bit grayscale frames row major.
inline constexpr char kRgvMagic[4] = {'R', 'G', 'V', '1'};
inline constexpr std::size_t kRgvHeaderSize = 18;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

inline std::string encode_header(const VideoMeta& meta) {
    std::string h(kRgvMagic, 4);
    detail::put_u32(h, meta.width);
    detail::put_u32(h, meta.height);
    detail::put_u16(h, meta.fps);
    detail::put_u32(h, meta.frame_count);
    return h;
}

// Sequential reader over any istream; also supports random access when the
// underlying stream is seekable (files).
class VideoReader {
public:
    explicit VideoReader(const std::string& path)
        : file_(std::make_unique<std::ifstream>(path, std::ios::binary)), stream_(file_.get()) {
        if (!*file_) throw VideoFormatError("cannot open video file: " + path);
        read_header();
        seekable_ = true;
    }

    // Non-seekable variant (e.g. stdin).
    explicit VideoReader(std::istream& in) : stream_(&in) {
        read_header();
        seekable_ = false;
    }

    const VideoMeta& meta() const { return meta_; }

    // Next frame in order; false at end of declared count.
    bool next(Frame& out) {
        if (next_index_ >= meta_.frame_count) return false;
        out = Frame(meta_.width, meta_.height, next_index_);
        read_payload(out);
        ++next_index_;
        return true;
    }

    // Random access; file-backed readers only.
    Frame frame(std::uint64_t i) {
        if (!seekable_) throw std::invalid_argument("stream is not seekable");
        if (i >= meta_.frame_count)
            throw std::invalid_argument("frame index " + std::to_string(i) + " out of range");
        stream_->clear();
        stream_->seekg(static_cast<std::streamoff>(kRgvHeaderSize + i * frame_size()), std::ios::beg);
        Frame f(meta_.width, meta_.height, i);
        read_payload(f);
        return f;
    }

    void rewind() {
        if (!seekable_) throw std::invalid_argument("stream is not seekable");
        stream_->clear();
        stream_->seekg(static_cast<std::streamoff>(kRgvHeaderSize), std::ios::beg);
        next_index_ = 0;
    }

private:
    std::size_t frame_size() const {
        return static_cast<std::size_t>(meta_.width) * meta_.height;
    }

    void read_header() {
        unsigned char h[kRgvHeaderSize];
        stream_->read(reinterpret_cast<char*>(h), kRgvHeaderSize);
        if (stream_->gcount() != static_cast<std::streamsize>(kRgvHeaderSize))
            throw VideoFormatError("truncated header");
        if (std::memcmp(h, kRgvMagic, 4) != 0) throw VideoFormatError("bad magic");
        meta_.width = detail::get_u32(h + 4);
        meta_.height = detail::get_u32(h + 8);
        meta_.fps = detail::get_u16(h + 12);
        meta_.frame_count = detail::get_u32(h + 14);
        if (!meta_.valid())
            throw VideoFormatError("invalid header fields (need width,height >= 32, fps >= 1)");
    }

    void read_payload(Frame& f) {
        stream_->read(reinterpret_cast<char*>(f.pixels.data()),
                      static_cast<std::streamsize>(f.pixels.size()));
        if (stream_->gcount() != static_cast<std::streamsize>(f.pixels.size())) {
            const std::uint64_t offset =
                kRgvHeaderSize + f.index * frame_size() + static_cast<std::uint64_t>(stream_->gcount());
            throw VideoCorruptError("truncated frame payload", offset);
        }
    }

    std::unique_ptr<std::ifstream> file_;
    std::istream* stream_;
    VideoMeta meta_;
    std::uint64_t next_index_ = 0;
    bool seekable_ = false;
};

// Streaming writer. The frame count is declared up front; close() verifies it.
class VideoWriter {
public:
    VideoWriter(const std::string& path, const VideoMeta& meta) : meta_(meta) {
        if (!meta.valid()) throw std::invalid_argument("invalid video meta");
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw VideoFormatError("cannot open for writing: " + path);
        const std::string h = encode_header(meta);
        out_.write(h.data(), static_cast<std::streamsize>(h.size()));
    }

    void write(const Frame& f) {
        if (f.width != meta_.width || f.height != meta_.height || !f.valid())
            throw std::invalid_argument("frame dimensions do not match video meta");
        if (written_ >= meta_.frame_count)
            throw std::invalid_argument("more frames than declared in header");
        out_.write(reinterpret_cast<const char*>(f.pixels.data()),
                   static_cast<std::streamsize>(f.pixels.size()));
        ++written_;
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        out_.flush();
        if (!out_) throw VideoFormatError("write failure");
        if (written_ != meta_.frame_count)
            throw std::invalid_argument("wrote " + std::to_string(written_) + " frames, header declares " +
                                        std::to_string(meta_.frame_count));
    }

private:
    VideoMeta meta_;
    std::ofstream out_;
    std::uint32_t written_ = 0;
    bool closed_ = false;
};

// In-memory video; shares the random-access surface of VideoReader so
// pipeline code can be written against either.
struct FrameBuffer {
    VideoMeta meta_{};
    std::vector<Frame> frames;

    FrameBuffer() = default;
    explicit FrameBuffer(const VideoMeta& m) : meta_(m) {}

    const VideoMeta& meta() const { return meta_; }
    Frame frame(std::uint64_t i) const {
        if (i >= frames.size()) throw std::invalid_argument("frame index out of range");
        return frames[i];
    }
    void push(Frame f) {
        f.index = frames.size();
        frames.push_back(std::move(f));
        meta_.frame_count = static_cast<std::uint32_t>(frames.size());
    }
};

// Anything with meta() and frame(i); VideoReader and FrameBuffer qualify.
template <typename T>
concept VideoSource = requires(T& v, std::uint64_t i) {
    { v.meta() };
    { v.frame(i) };
};

inline void write_video(const VideoMeta& meta, const std::vector<Frame>& frames,
                        const std::string& path) {
    if (frames.size() != meta.frame_count)
        throw std::invalid_argument("frame count does not match meta");
    VideoWriter w(path, meta);
    for (const auto& f : frames) w.write(f);
    w.close();
}

inline std::pair<VideoMeta, std::vector<Frame>> read_video(const std::string& path) {
    VideoReader r(path);
    std::vector<Frame> frames;
    frames.reserve(r.meta().frame_count);
    Frame f;
    while (r.next(f)) frames.push_back(f);
    return {r.meta(), std::move(frames)};
}

inline FrameBuffer load_video(const std::string& path) {
    auto [meta, frames] = read_video(path);
    FrameBuffer fb(meta);
    fb.frames = std::move(frames);
    return fb;
}

}  // namespace aeromon
