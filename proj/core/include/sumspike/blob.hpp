#ifndef SUMSPIKE_BLOB_HPP
#define SUMSPIKE_BLOB_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sumspike/network.hpp"

namespace sumspike {

// Model binary layout (all little-endian):
//   magic "SPRW" (4 bytes), format version u16, T u8, layer_count u8;
//   per layer: kind u8 (0=ANN, 1=IF, 2=SSF), in_width u16, out_width u16,
//     bias_mode u8, theta_q i32, m_w u32, n_shift u8, m_b u32, m_shift u8,
//     weights int8 row-major [out][in], biases i32 [out];
//   trailing CRC32 over everything before it.
inline constexpr char kBlobMagic[4] = {'S', 'P', 'R', 'W'};
inline constexpr std::uint16_t kBlobVersion = 1;

// CRC-32 (reflected 0xEDB88320 polynomial, the usual zlib/PNG variant).
std::uint32_t crc32(const std::uint8_t* data, std::size_t len,
                    std::uint32_t seed = 0);

// Serializes a quantized model. Requires q == 8 (the format stores int8
// weights) and a model that passes validate().
std::vector<std::uint8_t> pack_model(const QuantizedNetwork& net);

// Parses and checks a model blob. Throws FormatError on malformed bytes or a
// checksum mismatch, ValidationError when the decoded model violates the
// hardware limits.
QuantizedNetwork load_model(const std::vector<std::uint8_t>& blob,
                            const HardwareLimits& limits = {});

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace sumspike

#endif  // SUMSPIKE_BLOB_HPP
