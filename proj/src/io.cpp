// Copyright 2026 The devafuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "devafuse/io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace devafuse {
namespace {

using nlohmann::json;

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr OpenFile(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw IoError(std::string("cannot open ") + path.string() + " for " +
                  (mode[0] == 'r' ? "reading" : "writing"));
  }
  return f;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void PngErrorFn(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}

void PngWarningFn(png_structp, png_const_charp) {}

template <typename T>
T Field(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) {
    throw IoError(where.string() + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(where.string() + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

std::string FrameStem(int frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05d", frame_index);
  return buf;
}

void WriteIdMapPng(const fs::path& path, const Segmentation& seg) {
  const int w = seg.width;
  const int h = seg.height;
  if (w < 1 || h < 1) throw IoError("cannot write an empty id map");
  std::vector<uint8_t> pixels(static_cast<size_t>(w) * h * 2, 0);
  for (const auto& s : seg.segments) {
    if (s.id < 1 || s.id > kMaxPngId) {
      throw IoError("segment id " + std::to_string(s.id) +
                    " does not fit a 16-bit id map");
    }
    const auto hi = static_cast<uint8_t>(s.id >> 8);
    const auto lo = static_cast<uint8_t>(s.id & 0xff);
    s.mask.ForEachSpan([&](int64_t start, int64_t len) {
      for (int64_t p = start; p < start + len; ++p) {
        pixels[2 * p] = hi;
        pixels[2 * p + 1] = lo;
      }
    });
  }
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<size_t>(y) * w * 2;

  FilePtr f = OpenFile(path, "wb");
  std::string error;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, PngErrorFn,
                              PngWarningFn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": " + error);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<uint16_t> ReadIdMapPng(const fs::path& path, int& width,
                                   int& height) {
  FilePtr f = OpenFile(path, "rb");
  std::string error;
  std::vector<uint8_t> bytes;
  std::vector<png_bytep> rows;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error,
                                           PngErrorFn, PngWarningFn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": " + error);
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 16 && depth != 8)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() +
                  ": id maps must be 8- or 16-bit grayscale PNGs");
  }
  const size_t bpp = depth / 8;
  bytes.assign(static_cast<size_t>(w) * h * bpp, 0);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = bytes.data() + y * w * bpp;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  width = static_cast<int>(w);
  height = static_cast<int>(h);
  std::vector<uint16_t> ids(static_cast<size_t>(w) * h);
  for (size_t i = 0; i < ids.size(); ++i) {
    ids[i] = bpp == 2 ? static_cast<uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1])
                      : bytes[i];
  }
  return ids;
}

json SidecarJson(const Segmentation& seg) {
  json segments = json::object();
  for (const auto& s : seg.segments) {
    json entry;
    entry["class"] = s.class_label ? json(*s.class_label) : json(nullptr);
    entry["confidence"] = s.confidence ? json(*s.confidence) : json(nullptr);
    segments[std::to_string(s.id)] = std::move(entry);
  }
  return json{{"frame", seg.frame_index},
              {"width", seg.width},
              {"height", seg.height},
              {"segments", std::move(segments)}};
}

void WriteFrame(const fs::path& dir, const Segmentation& seg) {
  Validate(seg);
  const std::string stem = FrameStem(seg.frame_index);
  WriteIdMapPng(dir / (stem + ".png"), seg);
  WriteJsonFile(dir / (stem + ".json"), SidecarJson(seg));
}

Segmentation ReadFrame(const fs::path& dir, int frame_index) {
  const std::string stem = FrameStem(frame_index);
  const fs::path png_path = dir / (stem + ".png");
  const fs::path json_path = dir / (stem + ".json");
  for (const auto& p : {png_path, json_path}) {
    if (!fs::exists(p)) {
      throw IoError("missing frame " + std::to_string(frame_index) + ": " +
                        p.string(),
                    kExitMissingFrame);
    }
  }
  const json meta = ReadJsonFile(json_path);
  int w = 0;
  int h = 0;
  const std::vector<uint16_t> ids = ReadIdMapPng(png_path, w, h);
  if (Field<int>(meta, "width", json_path) != w ||
      Field<int>(meta, "height", json_path) != h) {
    throw IoError(json_path.string() + ": size disagrees with " +
                  png_path.filename().string());
  }
  const int frame = Field<int>(meta, "frame", json_path);
  if (frame != frame_index) {
    throw IoError(json_path.string() + ": frame field is " +
                  std::to_string(frame) + ", expected " +
                  std::to_string(frame_index));
  }

  // Row-major runs per id in a single scan.
  std::map<uint16_t, std::pair<std::vector<uint32_t>, uint32_t>> runs;
  const uint32_t n = static_cast<uint32_t>(ids.size());
  for (uint32_t p = 0; p < n;) {
    const uint16_t v = ids[p];
    uint32_t q = p + 1;
    while (q < n && ids[q] == v) ++q;
    if (v != 0) {
      auto& [r, last_end] = runs[v];
      r.push_back(p - last_end);
      r.push_back(q - p);
      last_end = q;
    }
    p = q;
  }

  Segmentation seg = EmptySegmentation(frame_index, w, h);
  const json& entries = meta.contains("segments") ? meta.at("segments")
                                                  : json::object();
  if (!entries.is_object()) {
    throw IoError(json_path.string() + ": 'segments' must be an object");
  }
  std::map<SegmentId, json> by_id;
  for (const auto& [key, value] : entries.items()) {
    SegmentId id = 0;
    try {
      size_t used = 0;
      id = std::stoll(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw IoError(json_path.string() + ": segment key '" + key +
                    "' is not an integer id");
    }
    if (id < 1 || id > kMaxPngId) {
      throw IoError(json_path.string() + ": segment id " + key +
                    " is outside [1, 65535]");
    }
    by_id.emplace(id, value);
  }
  for (const auto& [v, r] : runs) {
    if (!by_id.count(v)) {
      throw IoError(png_path.string() + ": pixel id " + std::to_string(v) +
                    " has no entry in " + json_path.filename().string());
    }
  }
  for (const auto& [id, entry] : by_id) {
    Segment s;
    s.id = id;
    auto it = runs.find(static_cast<uint16_t>(id));
    if (it == runs.end()) {
      s.mask = BinaryMask(w, h);
    } else {
      std::vector<uint32_t> r = it->second.first;
      r.push_back(n - it->second.second);
      s.mask = BinaryMask::FromRuns(w, h, std::move(r));
    }
    if (entry.contains("class") && !entry.at("class").is_null()) {
      s.class_label = entry.at("class").get<ClassId>();
    }
    if (entry.contains("confidence") && !entry.at("confidence").is_null()) {
      s.confidence = entry.at("confidence").get<double>();
    }
    if (entry.contains("rle")) {
      const BinaryMask declared = BinaryMask::FromRuns(
          w, h, entry.at("rle").get<std::vector<uint32_t>>());
      if (declared != s.mask) {
        throw IoError(json_path.string() + ": rle of segment " +
                      std::to_string(id) + " disagrees with the id map");
      }
    }
    seg.segments.push_back(std::move(s));
  }
  return seg;
}

void WriteVideo(const fs::path& dir, const TrackedVideo& video) {
  fs::create_directories(dir);
  VideoMeta meta;
  meta.num_frames = static_cast<int>(video.size());
  if (!video.empty()) {
    meta.width = video.front().width;
    meta.height = video.front().height;
  }
  for (const auto& seg : video) WriteFrame(dir, seg);
  WriteJsonFile(dir / "meta.json", json{{"num_frames", meta.num_frames},
                                        {"width", meta.width},
                                        {"height", meta.height}});
}

VideoMeta ReadVideoMeta(const fs::path& dir) {
  const fs::path path = dir / "meta.json";
  if (!fs::exists(path)) throw IoError("missing " + path.string());
  const json j = ReadJsonFile(path);
  VideoMeta m;
  m.num_frames = Field<int>(j, "num_frames", path);
  m.width = Field<int>(j, "width", path);
  m.height = Field<int>(j, "height", path);
  if (m.num_frames < 0 || m.width < 0 || m.height < 0) {
    throw IoError(path.string() + ": negative size");
  }
  return m;
}

TrackedVideo ReadVideo(const fs::path& dir) {
  const VideoMeta meta = ReadVideoMeta(dir);
  TrackedVideo video;
  video.reserve(meta.num_frames);
  for (int t = 0; t < meta.num_frames; ++t) {
    Segmentation seg = ReadFrame(dir, t);
    if (seg.width != meta.width || seg.height != meta.height) {
      throw IoError((dir / (FrameStem(t) + ".png")).string() +
                    ": size disagrees with meta.json");
    }
    video.push_back(std::move(seg));
  }
  return video;
}

std::vector<fs::path> MissingFrameFiles(const fs::path& dir) {
  const VideoMeta meta = ReadVideoMeta(dir);
  std::vector<fs::path> missing;
  for (int t = 0; t < meta.num_frames; ++t) {
    for (const char* ext : {".png", ".json"}) {
      fs::path p = dir / (FrameStem(t) + ext);
      if (!fs::exists(p)) missing.push_back(std::move(p));
    }
  }
  return missing;
}

json ScriptsToJson(const SceneScripts& scripts) {
  json objects = json::array();
  for (const auto& o : scripts.objects()) {
    json shape;
    if (o.shape.kind == ShapeKind::kRectangle) {
      shape = {{"kind", "rectangle"},
               {"width", o.shape.width},
               {"height", o.shape.height}};
    } else {
      shape = {{"kind", "disk"}, {"radius", o.shape.radius}};
    }
    json transforms = json::array();
    for (const auto& tf : o.transforms) {
      transforms.push_back(json::array({tf.x, tf.y, tf.scale}));
    }
    objects.push_back({{"id", o.object_id},
                       {"class", o.class_label},
                       {"shape", std::move(shape)},
                       {"z_order", o.z_order},
                       {"entry_frame", o.entry_frame},
                       {"exit_frame", o.exit_frame},
                       {"transforms", std::move(transforms)}});
  }
  return json{{"width", scripts.width()},
              {"height", scripts.height()},
              {"num_frames", scripts.num_frames()},
              {"objects", std::move(objects)}};
}

SceneScripts ScriptsFromJson(const json& j) {
  try {
    std::vector<MotionScript> objects;
    for (const auto& o : j.at("objects")) {
      MotionScript m;
      m.object_id = o.at("id").get<SegmentId>();
      m.class_label = o.at("class").get<ClassId>();
      const json& shape = o.at("shape");
      const std::string kind = shape.at("kind").get<std::string>();
      if (kind == "rectangle") {
        m.shape.kind = ShapeKind::kRectangle;
        m.shape.width = shape.at("width").get<int>();
        m.shape.height = shape.at("height").get<int>();
      } else if (kind == "disk") {
        m.shape.kind = ShapeKind::kDisk;
        m.shape.radius = shape.at("radius").get<int>();
      } else {
        throw IoError("unknown shape kind '" + kind + "'");
      }
      m.z_order = o.at("z_order").get<int>();
      m.entry_frame = o.at("entry_frame").get<int>();
      m.exit_frame = o.at("exit_frame").get<int>();
      for (const auto& tf : o.at("transforms")) {
        m.transforms.push_back(RigidTransform{tf.at(0).get<int>(),
                                              tf.at(1).get<int>(),
                                              tf.at(2).get<double>()});
      }
      objects.push_back(std::move(m));
    }
    return SceneScripts(j.at("width").get<int>(), j.at("height").get<int>(),
                        j.at("num_frames").get<int>(), std::move(objects));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed motion scripts: ") + e.what());
  }
}

json TracksToJson(const TrackTable& tracks) {
  json arr = json::array();
  for (const auto& [id, t] : tracks.tracks()) {
    arr.push_back({{"id", id},
                   {"label", t.label ? json(*t.label) : json(nullptr)},
                   {"confidence",
                    t.confidence ? json(*t.confidence) : json(nullptr)},
                   {"birth_frame", t.birth_frame},
                   {"cnt", t.cnt},
                   {"class_votes", t.class_votes}});
  }
  return json{{"next_id", tracks.next_id()}, {"tracks", std::move(arr)}};
}

json ReadJsonFile(const fs::path& path) {
  const std::string text = ReadAll(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1;
    size_t column = 1;
    const size_t end = std::min<size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) {
      what = what.substr(pos);
    }
    throw IoError(path.string() + ":" + std::to_string(line) + ":" +
                  std::to_string(column) + ": " + what);
  }
}

void WriteJsonFile(const fs::path& path, const json& j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

void WriteTextFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace devafuse
