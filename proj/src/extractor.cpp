// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/extractor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "shadowpose/tensor.hpp"

namespace shadowpose {

ImageTensor IdentityExtractor::feature_grad(const ImageTensor& img,
                                            const std::vector<double>& dfeat) const {
  if (dfeat.size() != img.values.size())
    throw ValidationError("identity extractor: gradient size mismatch");
  ImageTensor g(img.height, img.width, img.channels);
  g.values = dfeat;
  return g;
}

double StubLinearExtractor::coefficient(std::size_t k, std::size_t j,
                                        std::size_t n_in) const {
  const std::uint64_t h = splitmix64(splitmix64(seed_ ^ (k * 0x9E3779B97F4A7C15ULL)) ^ j);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) / std::sqrt(static_cast<double>(n_in));
}

std::vector<double> StubLinearExtractor::features(const ImageTensor& img) const {
  const std::size_t n = img.values.size();
  std::vector<double> out(static_cast<std::size_t>(out_dim_), 0.0);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < out_dim_; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      s += coefficient(static_cast<std::size_t>(k), j, n) * img.values[j];
    out[static_cast<std::size_t>(k)] = s;
  }
  return out;
}

ImageTensor StubLinearExtractor::feature_grad(const ImageTensor& img,
                                              const std::vector<double>& dfeat) const {
  const std::size_t n = img.values.size();
  if (dfeat.size() != static_cast<std::size_t>(out_dim_))
    throw ValidationError("stub extractor: gradient size mismatch");
  ImageTensor g(img.height, img.width, img.channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(n); ++j) {
    double s = 0.0;
    for (int k = 0; k < out_dim_; ++k)
      s += coefficient(static_cast<std::size_t>(k), static_cast<std::size_t>(j), n) *
           dfeat[static_cast<std::size_t>(k)];
    g.values[static_cast<std::size_t>(j)] = s;
  }
  return g;
}

namespace {

constexpr char kExtractorMagic[] = "SPOSEFEXT1\n";

int strided_out(int n, int stride) { return (n + stride - 1) / stride; }

// 3x3 conv, zero padding, arbitrary stride; plain loops (cold path).
Tensor conv3x3_strided(const Tensor& in, const ConvStackExtractor::Layer& l) {
  const int oh = strided_out(in.height, l.stride), ow = strided_out(in.width, l.stride);
  Tensor out(l.out_ch, oh, ow);
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < l.out_ch; ++oc) {
    double* op = out.plane(oc);
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double s = l.b[static_cast<std::size_t>(oc)];
        for (int ic = 0; ic < l.in_ch; ++ic) {
          const double* ip = in.plane(ic);
          const double* k =
              l.w.data() + (static_cast<std::size_t>(oc) * l.in_ch + ic) * 9;
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y * l.stride + ky - 1, xx = x * l.stride + kx - 1;
              if (yy < 0 || yy >= in.height || xx < 0 || xx >= in.width) continue;
              s += ip[static_cast<std::size_t>(yy) * in.width + xx] * k[ky * 3 + kx];
            }
        }
        op[static_cast<std::size_t>(y) * ow + x] = s;
      }
  }
  return out;
}

// Adjoint of conv3x3_strided w.r.t. the data (weights are frozen).
Tensor conv3x3_strided_backward(const Tensor& gout, const Tensor& in,
                                const ConvStackExtractor::Layer& l) {
  Tensor gin(in.channels, in.height, in.width);
  // scatter; channel planes of gin collide across output positions, so the
  // parallel loop owns input channels
#pragma omp parallel for schedule(static)
  for (int ic = 0; ic < l.in_ch; ++ic) {
    double* gp = gin.plane(ic);
    for (int oc = 0; oc < l.out_ch; ++oc) {
      const double* go = gout.plane(oc);
      const double* k = l.w.data() + (static_cast<std::size_t>(oc) * l.in_ch + ic) * 9;
      for (int y = 0; y < gout.height; ++y)
        for (int x = 0; x < gout.width; ++x) {
          const double g = go[static_cast<std::size_t>(y) * gout.width + x];
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y * l.stride + ky - 1, xx = x * l.stride + kx - 1;
              if (yy < 0 || yy >= in.height || xx < 0 || xx >= in.width) continue;
              gp[static_cast<std::size_t>(yy) * in.width + xx] += g * k[ky * 3 + kx];
            }
        }
    }
  }
  return gin;
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::ifstream& in, const char* what) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError(std::string("extractor archive: truncated ") + what);
  return v;
}

}  // namespace

void ConvStackExtractor::save(const std::filesystem::path& path,
                              const std::vector<Layer>& layers,
                              const std::array<double, 3>& norm_mean,
                              const std::array<double, 3>& norm_std, int input_h,
                              int input_w) {
  nlohmann::json header;
  header["schema_version"] = 1;
  header["type"] = "conv_stack";
  header["input"] = {input_h, input_w};
  header["norm_mean"] = norm_mean;
  header["norm_std"] = norm_std;
  auto jl = nlohmann::json::array();
  for (const auto& l : layers)
    jl.push_back({{"name", l.name},
                  {"in_ch", l.in_ch},
                  {"out_ch", l.out_ch},
                  {"stride", l.stride},
                  {"relu", l.relu}});
  header["layers"] = jl;
  const std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write extractor archive '" + path.string() + "'");
  out.write(kExtractorMagic, sizeof(kExtractorMagic) - 1);
  write_u64(out, hs.size());
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& l : layers) {
    write_u64(out, l.w.size());
    out.write(reinterpret_cast<const char*>(l.w.data()),
              static_cast<std::streamsize>(l.w.size() * sizeof(double)));
    write_u64(out, l.b.size());
    out.write(reinterpret_cast<const char*>(l.b.data()),
              static_cast<std::streamsize>(l.b.size() * sizeof(double)));
  }
}

ConvStackExtractor ConvStackExtractor::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open extractor archive '" + path.string() + "'");
  char magic[sizeof(kExtractorMagic) - 1];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kExtractorMagic, sizeof magic) != 0)
    throw ParseError("'" + path.string() + "' is not an extractor archive");
  const std::uint64_t hlen = read_u64(in, "header length");
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw ParseError("extractor archive: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(std::string("extractor archive header: ") + err.what());
  }
  if (header.value("type", "") != "conv_stack")
    throw ParseError("extractor archive: unknown type");

  ConvStackExtractor ex;
  ex.source_ = path.filename().string();
  const auto input = header.value("input", std::vector<int>{0, 0});
  ex.input_h_ = input.size() > 0 ? input[0] : 0;
  ex.input_w_ = input.size() > 1 ? input[1] : 0;
  ex.norm_mean_ = header.value("norm_mean", std::array<double, 3>{0, 0, 0});
  ex.norm_std_ = header.value("norm_std", std::array<double, 3>{1, 1, 1});
  for (const auto& jl : header.at("layers")) {
    Layer l;
    l.name = jl.value("name", "");
    l.in_ch = jl.at("in_ch").get<int>();
    l.out_ch = jl.at("out_ch").get<int>();
    l.stride = jl.value("stride", 1);
    l.relu = jl.value("relu", true);
    if (l.stride < 1) throw ParseError("extractor archive: bad stride");
    const std::uint64_t wn = read_u64(in, "weight count");
    l.w.resize(wn);
    in.read(reinterpret_cast<char*>(l.w.data()),
            static_cast<std::streamsize>(wn * sizeof(double)));
    const std::uint64_t bn = read_u64(in, "bias count");
    l.b.resize(bn);
    in.read(reinterpret_cast<char*>(l.b.data()),
            static_cast<std::streamsize>(bn * sizeof(double)));
    if (!in) throw ParseError("extractor archive: truncated tensors");
    if (l.w.size() != static_cast<std::size_t>(l.out_ch) * l.in_ch * 9 ||
        l.b.size() != static_cast<std::size_t>(l.out_ch))
      throw ParseError("extractor archive: tensor sizes disagree with layer dims");
    ex.layers_.push_back(std::move(l));
  }
  if (ex.layers_.empty()) throw ParseError("extractor archive: no layers");
  return ex;
}

std::vector<double> ConvStackExtractor::features(const ImageTensor& img) const {
  if (img.channels != layers_.front().in_ch)
    throw ValidationError("conv_stack extractor expects " +
                          std::to_string(layers_.front().in_ch) + " channels");
  ImageTensor normed = img;
  for (std::size_t i = 0; i < normed.values.size(); ++i) {
    const std::size_t ch = i % static_cast<std::size_t>(normed.channels);
    normed.values[i] = (normed.values[i] - norm_mean_[ch % 3]) / norm_std_[ch % 3];
  }
  Tensor t = to_planar(normed);
  for (const auto& l : layers_) {
    t = conv3x3_strided(t, l);
    if (l.relu)
      for (auto& v : t.data)
        if (v < 0) v = 0;
  }
  return t.data;
}

ImageTensor ConvStackExtractor::feature_grad(const ImageTensor& img,
                                             const std::vector<double>& dfeat) const {
  // replay forward, keeping activations
  ImageTensor normed = img;
  for (std::size_t i = 0; i < normed.values.size(); ++i) {
    const std::size_t ch = i % static_cast<std::size_t>(normed.channels);
    normed.values[i] = (normed.values[i] - norm_mean_[ch % 3]) / norm_std_[ch % 3];
  }
  std::vector<Tensor> acts;
  acts.push_back(to_planar(normed));
  for (const auto& l : layers_) {
    Tensor t = conv3x3_strided(acts.back(), l);
    if (l.relu)
      for (auto& v : t.data)
        if (v < 0) v = 0;
    acts.push_back(std::move(t));
  }
  if (dfeat.size() != acts.back().size())
    throw ValidationError("conv_stack extractor: gradient size mismatch");

  Tensor g = acts.back();
  g.data = dfeat;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& l = layers_[li];
    const Tensor& out = acts[li + 1];
    if (l.relu)
      for (std::size_t i = 0; i < g.data.size(); ++i)
        if (out.data[i] <= 0.0) g.data[i] = 0.0;
    g = conv3x3_strided_backward(g, acts[li], l);
  }
  ImageTensor gi = to_image(g);
  for (std::size_t i = 0; i < gi.values.size(); ++i) {
    const std::size_t ch = i % static_cast<std::size_t>(gi.channels);
    gi.values[i] /= norm_std_[ch % 3];
  }
  return gi;
}

std::shared_ptr<FeatureExtractor> make_extractor(const std::string& spec) {
  if (spec == "identity") return std::make_shared<IdentityExtractor>();
  if (spec == "stub") return std::make_shared<StubLinearExtractor>();
  if (spec.rfind("stub:", 0) == 0) {
    const std::uint64_t seed = std::stoull(spec.substr(5));
    return std::make_shared<StubLinearExtractor>(seed);
  }
  if (spec.rfind("file:", 0) == 0)
    return std::make_shared<ConvStackExtractor>(
        ConvStackExtractor::load(spec.substr(5)));
  throw ValidationError("unknown extractor spec '" + spec +
                        "' (expected identity | stub | stub:<seed> | file:<path>)");
}

}  // namespace shadowpose
