/* Copyright 2026 The Vartha Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <cstring>

#include "common/rng.hpp"
#include "vartha/error.hpp"
#include "vartha/imagepipe.hpp"
#include "vartha/io.hpp"

namespace vartha::image {
namespace {

constexpr std::string_view kMagic = "VGG16W01";
// A max-pool follows these conv layers (0-based).
constexpr std::array<bool, 13> kPoolAfter = {false, true,  false, true,  false, false, true,
                                             false, false, true,  false, false, true};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) throw Error(ErrorCode::kExtractorUnavailable, "weights file is truncated");
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(4).data(), 4);
    return v;
  }
  void floats(float* dst, std::size_t n) { std::memcpy(dst, take(n * 4).data(), n * 4); }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

// (C x H*W) -> (9C x H*W), zero padding of one pixel on each side.
void im2col(const Eigen::MatrixXf& act, int h, int w, Eigen::MatrixXf& cols) {
  const int c = static_cast<int>(act.rows());
  cols.resize(9 * c, static_cast<Eigen::Index>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Index col = static_cast<Eigen::Index>(y) * w + x;
      float* dst = cols.col(col).data();
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const int sy = y + ky - 1;
          const int sx = x + kx - 1;
          float* block = dst + (ky * 3 + kx) * c;
          if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
            std::fill_n(block, c, 0.f);
          } else {
            std::memcpy(block, act.col(static_cast<Eigen::Index>(sy) * w + sx).data(),
                        sizeof(float) * c);
          }
        }
      }
    }
  }
}

Eigen::MatrixXf max_pool(const Eigen::MatrixXf& act, int h, int w) {
  const int oh = h / 2, ow = w / 2;
  Eigen::MatrixXf out(act.rows(), static_cast<Eigen::Index>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const auto i00 = static_cast<Eigen::Index>(2 * y) * w + 2 * x;
      const auto i10 = i00 + w;
      out.col(static_cast<Eigen::Index>(y) * ow + x) =
          act.col(i00).cwiseMax(act.col(i00 + 1)).cwiseMax(act.col(i10)).cwiseMax(act.col(i10 + 1));
    }
  }
  return out;
}

}  // namespace

const std::array<std::array<int, 2>, 13>& vgg16_conv_shapes() {
  static constexpr std::array<std::array<int, 2>, 13> kShapes = {{{3, 64},
                                                                   {64, 64},
                                                                   {64, 128},
                                                                   {128, 128},
                                                                   {128, 256},
                                                                   {256, 256},
                                                                   {256, 256},
                                                                   {256, 512},
                                                                   {512, 512},
                                                                   {512, 512},
                                                                   {512, 512},
                                                                   {512, 512},
                                                                   {512, 512}}};
  return kShapes;
}

Vgg16Extractor Vgg16Extractor::load(const fs::path& weights_path) {
  std::error_code ec;
  if (!fs::is_regular_file(weights_path, ec)) {
    throw Error(ErrorCode::kExtractorUnavailable, "extractor weights not found: " + weights_path.string());
  }
  const std::string data = io::read_file(weights_path);
  Reader r(data);
  if (r.take(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kExtractorUnavailable, "not a VGG-16 weights file: " + weights_path.string());
  }
  const std::string name(r.take(r.u32()));
  const auto count = r.u32();
  const auto& shapes = vgg16_conv_shapes();
  if (count != shapes.size()) {
    throw Error(ErrorCode::kExtractorUnavailable, "weights file has " + std::to_string(count) + " conv layers, expected 13");
  }

  Vgg16Extractor ex;
  ex.layers_.resize(count);
  for (std::size_t l = 0; l < count; ++l) {
    auto& layer = ex.layers_[l];
    layer.in = static_cast<int>(r.u32());
    layer.out = static_cast<int>(r.u32());
    if (layer.in != shapes[l][0] || layer.out != shapes[l][1]) {
      throw Error(ErrorCode::kExtractorUnavailable, "conv layer " + std::to_string(l + 1) + " has unexpected shape");
    }
    // A column-major (out x 9*in) matrix has exactly the (ky, kx, in, out) layout.
    layer.kernel.resize(layer.out, 9 * layer.in);
    r.floats(layer.kernel.data(), layer.kernel.size());
    layer.bias.resize(layer.out);
    r.floats(layer.bias.data(), layer.bias.size());
  }
  if (!r.done()) throw Error(ErrorCode::kExtractorUnavailable, "trailing bytes in weights file");
  ex.version_ = name + "@" + io::sha1_hex(data).substr(0, 12);
  return ex;
}

ImageFeatureVector Vgg16Extractor::extract(const PreparedImage& image, std::string source_image) const {
  if (layers_.empty()) throw Error(ErrorCode::kExtractorUnavailable, "extractor has no weights");
  int h = kInputSize, w = kInputSize;
  Eigen::MatrixXf act = Eigen::Map<const Eigen::MatrixXf>(image.tensor.data(), kChannels,
                                                          static_cast<Eigen::Index>(h) * w);
  Eigen::MatrixXf cols;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    im2col(act, h, w, cols);
    Eigen::MatrixXf next(layer.out, cols.cols());
    next.noalias() = layer.kernel * cols;
    next.colwise() += layer.bias;
    act = next.cwiseMax(0.f);
    if (kPoolAfter[l]) {
      act = max_pool(act, h, w);
      h /= 2;
      w /= 2;
    }
  }
  ImageFeatureVector out;
  out.source_image = std::move(source_image);
  out.values.assign(act.data(), act.data() + act.size());  // (y, x, channel) order
  return out;
}

std::string Vgg16Extractor::parameter_digest() const {
  std::string bytes;
  for (const auto& layer : layers_) {
    bytes.append(reinterpret_cast<const char*>(layer.kernel.data()), layer.kernel.size() * sizeof(float));
    bytes.append(reinterpret_cast<const char*>(layer.bias.data()), layer.bias.size() * sizeof(float));
  }
  return io::sha1_hex(bytes);
}

void write_vgg16_weights(const fs::path& path, std::string_view name, std::span<const ConvWeights> layers) {
  const auto& shapes = vgg16_conv_shapes();
  if (layers.size() != shapes.size()) {
    throw Error(ErrorCode::kInvalidArgument, "VGG-16 conv base needs 13 layers");
  }
  std::string out(kMagic);
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.append(name);
  put_u32(out, static_cast<std::uint32_t>(layers.size()));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto [in, o] = shapes[l];
    if (layers[l].kernel.size() != static_cast<std::size_t>(9 * in * o) ||
        layers[l].bias.size() != static_cast<std::size_t>(o)) {
      throw Error(ErrorCode::kInvalidArgument, "conv layer " + std::to_string(l + 1) + " has wrong size");
    }
    put_u32(out, static_cast<std::uint32_t>(in));
    put_u32(out, static_cast<std::uint32_t>(o));
    out += io::encode_f32_le(layers[l].kernel);
    out += io::encode_f32_le(layers[l].bias);
  }
  io::write_file_atomic(path, out);
}

void write_synthetic_vgg16_weights(const fs::path& path, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ConvWeights> layers;
  for (const auto& [in, out] : vgg16_conv_shapes()) {
    ConvWeights cw;
    // The first layer sees raw mean-subtracted pixels (|x| up to ~150), so it
    // is scaled down to keep activations near unit magnitude.
    const double scale = std::sqrt(2.0 / (9.0 * in)) * (in == 3 ? 1.0 / 64.0 : 1.0);
    cw.kernel.resize(static_cast<std::size_t>(9 * in * out));
    for (auto& v : cw.kernel) v = static_cast<float>(rng.normal() * scale);
    cw.bias.assign(static_cast<std::size_t>(out), 0.f);
    layers.push_back(std::move(cw));
  }
  write_vgg16_weights(path, "synthetic-he-seed" + std::to_string(seed), layers);
}

}  // namespace vartha::image
