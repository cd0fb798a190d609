#include "lte/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <unordered_set>

#include "lte/error.hpp"

namespace lte {

namespace {

constexpr char kMagic[4] = {'L', 'T', 'E', 'C'};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths.
  std::size_t done = 0;
  while (done < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
    crc = crc32(crc, bytes.data() + done, n);
    done += n;
  }
  return static_cast<std::uint32_t>(crc);
}

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    auto b = take(4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw CheckpointError("checkpoint: unexpected end of data");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

const Tensor& require(const std::map<std::string, Tensor>& by_name, const std::string& name) {
  auto it = by_name.find(name);
  if (it == by_name.end()) throw MissingTensorError("checkpoint: missing tensor '" + name + "'");
  return it->second;
}

std::map<std::string, Tensor> index(std::span<const NamedTensor> tensors) {
  std::map<std::string, Tensor> out;
  for (const auto& t : tensors) {
    if (!out.emplace(t.name, t.tensor).second) throw CheckpointError("checkpoint: duplicate tensor '" + t.name + "'");
  }
  return out;
}

// Integers above 2^24 do not survive a float, so counters go in 16-bit halves.
Tensor encode_count(std::int64_t v) {
  const auto u = static_cast<std::uint64_t>(v);
  return Tensor::from_vector({4}, {static_cast<float>(u & 0xffff), static_cast<float>((u >> 16) & 0xffff),
                                   static_cast<float>((u >> 32) & 0xffff), static_cast<float>((u >> 48) & 0xffff)});
}

std::int64_t decode_count(const Tensor& t) {
  if (t.numel() != 4) throw CheckpointError("checkpoint: malformed counter tensor");
  std::uint64_t u = 0;
  for (int i = 0; i < 4; ++i) u |= static_cast<std::uint64_t>(t.data()[static_cast<std::size_t>(i)]) << (16 * i);
  return static_cast<std::int64_t>(u);
}

int as_int(float v, const char* what) {
  if (!(v >= 0.0f) || v != static_cast<float>(static_cast<int>(v))) {
    throw CheckpointError(std::string("checkpoint: bad value for ") + what);
  }
  return static_cast<int>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_tensors(std::span<const NamedTensor> tensors) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  std::unordered_set<std::string> seen;
  for (const auto& nt : tensors) {
    if (!seen.insert(nt.name).second) throw InvalidArgument("checkpoint: duplicate tensor '" + nt.name + "'");
    if (nt.name.size() > 0xffff) throw InvalidArgument("checkpoint: tensor name too long");
    if (nt.tensor.rank() > 0xff) throw InvalidArgument("checkpoint: rank too large");
    w.u16(static_cast<std::uint16_t>(nt.name.size()));
    w.bytes(nt.name.data(), nt.name.size());
    w.u8(static_cast<std::uint8_t>(nt.tensor.rank()));
    for (auto d : nt.tensor.shape()) {
      if (d > 0xffffffffLL) throw InvalidArgument("checkpoint: dimension too large");
      w.u32(static_cast<std::uint32_t>(d));
    }
    for (float v : nt.tensor.data()) w.f32(v);
  }
  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

std::vector<NamedTensor> decode_tensors(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError("checkpoint: bad magic");
  }
  if (bytes.size() < 16) throw CrcMismatchError("checkpoint: truncated file");
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (tail.u32() != crc32_of(body)) throw CrcMismatchError("checkpoint: CRC mismatch");

  Reader r(body);
  r.take(4);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw UnsupportedVersionError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  std::unordered_set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t len = r.u16();
    const auto name_bytes = r.take(len);
    std::string name(name_bytes.begin(), name_bytes.end());
    if (!seen.insert(name).second) throw CheckpointError("checkpoint: duplicate tensor '" + name + "'");
    const std::uint8_t rank = r.u8();
    Shape shape(rank);
    std::uint64_t numel = 1;
    for (auto& d : shape) {
      d = r.u32();
      numel *= static_cast<std::uint64_t>(d);
    }
    if (numel * 4 > r.remaining()) throw CheckpointError("checkpoint: payload shorter than dims imply");
    std::vector<float> values(numel);
    const auto payload = r.take(numel * 4);
    for (std::size_t k = 0; k < numel; ++k) {
      const std::uint32_t bitsv = static_cast<std::uint32_t>(payload[4 * k]) |
                                  (static_cast<std::uint32_t>(payload[4 * k + 1]) << 8) |
                                  (static_cast<std::uint32_t>(payload[4 * k + 2]) << 16) |
                                  (static_cast<std::uint32_t>(payload[4 * k + 3]) << 24);
      values[k] = std::bit_cast<float>(bitsv);
    }
    out.push_back({std::move(name), Tensor::from_vector(std::move(shape), std::move(values))});
  }
  if (r.remaining() != 0) throw CheckpointError("checkpoint: trailing bytes after last tensor");
  return out;
}

void write_tensors(const std::filesystem::path& path, std::span<const NamedTensor> tensors) {
  const auto bytes = encode_tensors(tensors);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

std::vector<NamedTensor> read_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensors(bytes);
}

std::vector<NamedTensor> model_tensors(const SrModel& model) {
  const ModelConfig& c = model.config();
  const auto& ab = c.lte.ablation;
  std::vector<NamedTensor> out;
  out.push_back({"meta.arch", Tensor::from_vector({7}, {static_cast<float>(c.encoder.in_channels),
                                                        static_cast<float>(c.encoder.width),
                                                        static_cast<float>(c.encoder.n_resblocks), c.encoder.res_scale,
                                                        static_cast<float>(c.lte.K),
                                                        static_cast<float>(c.decoder_hidden),
                                                        c.decoder_variant == DecoderVariant::conv1x1 ? 1.0f : 0.0f})});
  out.push_back({"meta.min_cell", Tensor::from_vector({2}, {c.min_cell.cy, c.min_cell.cx})});
  out.push_back({"meta.ablation", Tensor::from_vector({4}, {ab.no_amplitude ? 1.0f : 0.0f, ab.half_freq ? 1.0f : 0.0f,
                                                            ab.no_phase ? 1.0f : 0.0f, ab.no_skip ? 1.0f : 0.0f})});
  for (auto& p : model.parameters()) out.push_back({p.name, p.tensor.detach()});
  return out;
}

std::vector<NamedTensor> training_tensors(const SrModel& model, const TrainState& state) {
  std::vector<NamedTensor> out = model_tensors(model);
  const auto params = model.parameters();
  const auto& opt = state.optim;
  if (!opt.m.empty()) {
    if (opt.m.size() != params.size() || opt.v.size() != params.size()) {
      throw InvalidArgument("checkpoint: optimizer state does not match model parameters");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      out.push_back({"optim.m." + params[i].name, Tensor::from_vector(params[i].tensor.shape(), opt.m[i])});
      out.push_back({"optim.v." + params[i].name, Tensor::from_vector(params[i].tensor.shape(), opt.v[i])});
    }
  }
  out.push_back({"optim.step", encode_count(opt.step)});
  out.push_back({"train.epoch", encode_count(state.epoch)});
  return out;
}

SrModel model_from_tensors(std::span<const NamedTensor> tensors) {
  const auto by_name = index(tensors);
  const Tensor& arch = require(by_name, "meta.arch");
  const Tensor& cell = require(by_name, "meta.min_cell");
  const Tensor& ablation = require(by_name, "meta.ablation");
  if (arch.numel() != 7 || cell.numel() != 2 || ablation.numel() != 4) {
    throw CheckpointError("checkpoint: malformed meta tensors");
  }
  const auto a = arch.data();
  ModelConfig c;
  c.encoder.in_channels = as_int(a[0], "in_channels");
  c.encoder.width = as_int(a[1], "width");
  c.encoder.n_resblocks = as_int(a[2], "n_resblocks");
  c.encoder.res_scale = a[3];
  c.lte.K = as_int(a[4], "K");
  c.decoder_hidden = as_int(a[5], "decoder_hidden");
  const int variant = as_int(a[6], "decoder_variant");
  if (variant > 1) throw CheckpointError("checkpoint: unknown decoder variant");
  c.decoder_variant = variant == 1 ? DecoderVariant::conv1x1 : DecoderVariant::mlp;
  c.min_cell = {cell.data()[0], cell.data()[1]};
  const auto ab = ablation.data();
  c.lte.ablation = {ab[0] != 0.0f, ab[1] != 0.0f, ab[2] != 0.0f, ab[3] != 0.0f};
  if (c.encoder.in_channels < 1 || c.encoder.width < 1 || c.lte.K < 1 || c.decoder_hidden < 1) {
    throw CheckpointError("checkpoint: invalid architecture");
  }

  SrModel model(c, 0);
  for (auto& p : model.parameters()) {
    const Tensor& src = require(by_name, p.name);
    if (src.shape() != p.tensor.shape()) {
      throw CheckpointError("checkpoint: tensor '" + p.name + "' has shape " + shape_str(src.shape()) + ", expected " +
                            shape_str(p.tensor.shape()));
    }
    std::ranges::copy(src.data(), p.tensor.data().begin());
  }
  return model;
}

std::optional<TrainState> train_state_from_tensors(const SrModel& model, std::span<const NamedTensor> tensors) {
  const auto by_name = index(tensors);
  if (!by_name.contains("train.epoch")) return std::nullopt;
  TrainState state;
  state.epoch = static_cast<int>(decode_count(by_name.at("train.epoch")));
  state.optim.step = decode_count(require(by_name, "optim.step"));
  if (state.optim.step > 0) {
    for (const auto& p : model.parameters()) {
      const Tensor& m = require(by_name, "optim.m." + p.name);
      const Tensor& v = require(by_name, "optim.v." + p.name);
      if (m.shape() != p.tensor.shape() || v.shape() != p.tensor.shape()) {
        throw CheckpointError("checkpoint: optimizer moment shape mismatch for '" + p.name + "'");
      }
      state.optim.m.push_back(m.to_vector());
      state.optim.v.push_back(v.to_vector());
    }
  }
  return state;
}

void save_model(const std::filesystem::path& path, const SrModel& model) {
  const auto tensors = model_tensors(model);
  write_tensors(path, tensors);
}

SrModel load_model(const std::filesystem::path& path) {
  const auto tensors = read_tensors(path);
  return model_from_tensors(tensors);
}

void save_training(const std::filesystem::path& path, const SrModel& model, const TrainState& state) {
  const auto tensors = training_tensors(model, state);
  write_tensors(path, tensors);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const auto tensors = read_tensors(path);
  SrModel model = model_from_tensors(tensors);
  auto train = train_state_from_tensors(model, tensors);
  return {std::move(model), std::move(train)};
}

}  // namespace lte
