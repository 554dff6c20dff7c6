// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace shadowpose {

namespace {

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::ifstream& in, const char* what) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError(std::string("checkpoint: truncated reading ") + what);
  return v;
}

void write_tensor(std::ofstream& out, const std::string& name, const NamedTensor& t) {
  write_u64(out, name.size());
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u64(out, t.dims.size());
  for (auto d : t.dims) write_u64(out, d);
  write_u64(out, t.data.size());
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const CheckpointMeta& meta,
                     const std::map<std::string, NamedTensor>& extra) {
  nlohmann::json header;
  header["schema_version"] = kCheckpointSchemaVersion;
  header["config"] = net.config().to_json();
  header["fingerprint"] = net.config().fingerprint();
  header["seed"] = meta.seed;
  header["step"] = meta.step;
  header["loss_tail"] = meta.loss_tail;
  header["optimizer"] = meta.optimizer.is_null() ? nlohmann::json::object() : meta.optimizer;
  header["train_config"] =
      meta.train_config.is_null() ? nlohmann::json::object() : meta.train_config;
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
  write_u64(out, header_str.size());
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  const auto& layers = net.layers();
  write_u64(out, layers.size() * 2 + extra.size());
  for (const auto& l : layers) {
    NamedTensor w;
    w.dims = {static_cast<std::uint64_t>(l.out_ch), static_cast<std::uint64_t>(l.in_ch),
              3, 3};
    w.data = l.w;
    write_tensor(out, l.name + "/w", w);
    NamedTensor b;
    b.dims = {static_cast<std::uint64_t>(l.out_ch)};
    b.data = l.b;
    write_tensor(out, l.name + "/b", b);
  }
  for (const auto& [name, t] : extra) write_tensor(out, name, t);
  if (!out) throw IoError("write failed for checkpoint '" + path.string() + "'");
}

CheckpointArchive read_checkpoint(const std::filesystem::path& path,
                                  const std::optional<NetworkConfig>& expect_config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");

  char magic[sizeof(kCheckpointMagic) - 1];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
    throw ParseError("'" + path.string() + "' is not a checkpoint archive");

  const std::uint64_t header_len = read_u64(in, "header length");
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw ParseError("checkpoint: truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(std::string("checkpoint header: ") + err.what());
  }
  if (header.value("schema_version", 0) != kCheckpointSchemaVersion)
    throw ParseError("checkpoint: unsupported schema_version");

  CheckpointArchive archive;
  archive.config = NetworkConfig::from_json(header.at("config"));
  archive.fingerprint = header.value("fingerprint", "");
  const std::string computed = archive.config.fingerprint();
  if (computed != archive.fingerprint)
    throw ParseError("checkpoint fingerprint mismatch: archive says " +
                     archive.fingerprint + " but its config hashes to " + computed);
  if (expect_config) {
    const std::string want = expect_config->fingerprint();
    if (want != archive.fingerprint)
      throw ValidationError("checkpoint architecture mismatch: expected fingerprint " +
                            want + ", archive has " + archive.fingerprint);
  }

  archive.meta.seed = header.value("seed", 0ULL);
  archive.meta.step = header.value("step", 0LL);
  archive.meta.loss_tail = header.value("loss_tail", std::vector<double>{});
  archive.meta.optimizer = header.value("optimizer", nlohmann::json::object());
  archive.meta.train_config = header.value("train_config", nlohmann::json::object());

  const std::uint64_t count = read_u64(in, "tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t name_len = read_u64(in, "tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    NamedTensor t;
    const std::uint64_t ndim = read_u64(in, "tensor rank");
    t.dims.resize(ndim);
    for (auto& d : t.dims) d = read_u64(in, "tensor dim");
    const std::uint64_t numel = read_u64(in, "tensor element count");
    t.data.resize(numel);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(numel * sizeof(double)));
    if (!in) throw ParseError("checkpoint: truncated tensor '" + name + "'");
    archive.tensors.emplace(std::move(name), std::move(t));
  }
  return archive;
}

Network network_from_archive(const CheckpointArchive& archive) {
  Network net(archive.config);
  for (auto& l : net.layers()) {
    const auto wit = archive.tensors.find(l.name + "/w");
    const auto bit = archive.tensors.find(l.name + "/b");
    if (wit == archive.tensors.end() || bit == archive.tensors.end())
      throw ParseError("checkpoint: missing tensors for layer '" + l.name + "'");
    if (wit->second.data.size() != l.w.size() || bit->second.data.size() != l.b.size())
      throw ParseError("checkpoint: tensor size mismatch for layer '" + l.name + "'");
    l.w = wit->second.data;
    l.b = bit->second.data;
  }
  return net;
}

}  // namespace shadowpose
