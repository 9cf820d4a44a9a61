#include "sumspike/blob.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "sumspike/errors.hpp"

namespace sumspike {

std::uint32_t crc32(const std::uint8_t* data, std::size_t len, std::uint32_t seed) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = seed ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i)
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

namespace {

class Writer {
public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { u8(v & 0xFF); u8(v >> 8); }
  void u32(std::uint32_t v) { u16(v & 0xFFFF); u16(static_cast<std::uint16_t>(v >> 16)); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i8(std::int8_t v) { u8(static_cast<std::uint8_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  const std::vector<std::uint8_t>& bytes() const { return out_; }

private:
  std::vector<std::uint8_t> out_;
};

class Reader {
public:
  Reader(const std::vector<std::uint8_t>& data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() {
    const std::uint16_t lo = u8();
    return static_cast<std::uint16_t>(lo | (u8() << 8));
  }
  std::uint32_t u32() {
    const std::uint32_t lo = u16();
    return lo | (static_cast<std::uint32_t>(u16()) << 16);
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int8_t i8() { return static_cast<std::int8_t>(u8()); }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  void need(std::size_t n) {
    if (pos_ + n > data_.size())
      throw FormatError("model blob truncated at offset " + std::to_string(pos_));
  }

private:
  const std::vector<std::uint8_t>& data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> pack_model(const QuantizedNetwork& net) {
  if (net.config.q != 8)
    throw ValidationError("model blob stores int8 weights; q must be 8");
  {
    const auto violations = validate(net);
    if (!violations.empty())
      throw ValidationError("pack_model: " + violations.front());
  }
  if (net.layers.size() > 255 || net.window > 255)
    throw ValidationError("pack_model: layer count and T must fit u8");

  Writer w;
  for (char c : kBlobMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u16(kBlobVersion);
  w.u8(static_cast<std::uint8_t>(net.window));
  w.u8(static_cast<std::uint8_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u16(static_cast<std::uint16_t>(l.in_width));
    w.u16(static_cast<std::uint16_t>(l.out_width));
    w.u8(static_cast<std::uint8_t>(l.bias_mode));
    w.i32(l.quant.theta_q);
    w.u32(l.quant.m_w);
    w.u8(static_cast<std::uint8_t>(l.quant.n_shift));
    w.u32(l.quant.m_b);
    w.u8(static_cast<std::uint8_t>(l.quant.m_shift));
    for (const auto& row : l.weights)
      for (std::int8_t v : row) w.i8(v);
    for (std::int32_t b : l.biases) w.i32(b);
  }
  const std::uint32_t crc = crc32(w.bytes().data(), w.bytes().size());
  w.u32(crc);
  return w.take();
}

QuantizedNetwork load_model(const std::vector<std::uint8_t>& blob,
                            const HardwareLimits& limits) {
  if (blob.size() < 12) throw FormatError("model blob too short");
  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(blob[blob.size() - 4]) |
      (static_cast<std::uint32_t>(blob[blob.size() - 3]) << 8) |
      (static_cast<std::uint32_t>(blob[blob.size() - 2]) << 16) |
      (static_cast<std::uint32_t>(blob[blob.size() - 1]) << 24);
  const std::uint32_t actual_crc = crc32(blob.data(), blob.size() - 4);
  if (stored_crc != actual_crc)
    throw FormatError("model blob checksum mismatch");

  Reader r(blob);
  for (char c : kBlobMagic)
    if (r.u8() != static_cast<std::uint8_t>(c))
      throw FormatError("model blob has wrong magic");
  const std::uint16_t version = r.u16();
  if (version != kBlobVersion)
    throw FormatError("unsupported model blob version " + std::to_string(version));

  QuantizedNetwork net;
  net.config.q = 8;
  net.window = r.u8();
  const int layer_count = r.u8();
  for (int li = 0; li < layer_count; ++li) {
    QuantizedLayer l;
    const std::uint8_t kind = r.u8();
    if (kind > 2)
      throw FormatError("layer " + std::to_string(li) + ": unknown kind " +
                        std::to_string(kind));
    l.kind = static_cast<LayerKind>(kind);
    l.in_width = r.u16();
    l.out_width = r.u16();
    const std::uint8_t bias_mode = r.u8();
    if (bias_mode > 1)
      throw FormatError("layer " + std::to_string(li) + ": unknown bias mode");
    l.bias_mode = static_cast<BiasMode>(bias_mode);
    l.quant.theta_q = r.i32();
    l.quant.m_w = r.u32();
    l.quant.n_shift = r.u8();
    l.quant.m_b = r.u32();
    l.quant.m_shift = r.u8();
    if (l.quant.n_shift > 31 || l.quant.m_shift > 31)
      throw FormatError("layer " + std::to_string(li) + ": shift out of range");
    r.need(static_cast<std::size_t>(l.in_width) * l.out_width +
           4u * static_cast<std::size_t>(l.out_width));
    l.weights.resize(static_cast<std::size_t>(l.out_width));
    for (auto& row : l.weights) {
      row.resize(static_cast<std::size_t>(l.in_width));
      for (auto& v : row) v = r.i8();
    }
    l.biases.resize(static_cast<std::size_t>(l.out_width));
    for (auto& b : l.biases) b = r.i32();
    net.layers.push_back(std::move(l));
  }
  if (r.remaining() != 4)
    throw FormatError("model blob has trailing bytes before checksum");
  net.input_width = net.layers.empty() ? 0 : net.layers.front().in_width;

  const auto violations = validate(net, limits);
  if (!violations.empty()) {
    std::string msg = "model fails validation:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
  return net;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace sumspike
