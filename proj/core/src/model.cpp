#include "lte/model.hpp"

#include <algorithm>

#include "lte/error.hpp"
#include "lte/ops.hpp"

namespace lte {

namespace {

DecoderConfig decoder_config(const ModelConfig& config) {
  DecoderConfig d;
  d.in_dim = config.lte.feature_dim();
  d.hidden = config.decoder_hidden;
  d.out_dim = 3;
  d.variant = config.decoder_variant;
  return d;
}

// Fixed sub-streams so that changing one component's size leaves the others'
// initial weights untouched.
Rng component_rng(std::uint64_t seed, std::uint64_t component) { return Rng(derive_seed(seed, component)); }

Encoder make_encoder(const ModelConfig& config, std::uint64_t seed) {
  Rng rng = component_rng(seed, 1);
  return Encoder(config.encoder, rng);
}

TextureEstimator make_estimator(const ModelConfig& config, std::uint64_t seed) {
  Rng rng = component_rng(seed, 2);
  return TextureEstimator(config.encoder.width, config.lte, rng);
}

Decoder make_decoder(const ModelConfig& config, std::uint64_t seed) {
  Rng rng = component_rng(seed, 3);
  return Decoder(decoder_config(config), rng);
}

}  // namespace

SrModel::SrModel(const ModelConfig& config, std::uint64_t seed)
    : encoder(make_encoder(config, seed)),
      estimator(make_estimator(config, seed)),
      decoder(make_decoder(config, seed)),
      config_(config) {}

SrModel::SrModel(const ModelConfig& config, Encoder enc, TextureEstimator est, Decoder dec)
    : encoder(std::move(enc)), estimator(std::move(est)), decoder(std::move(dec)), config_(config) {
  if (decoder.config().in_dim != config.lte.feature_dim()) {
    throw InvalidArgument("model: decoder input does not match texture feature dimension");
  }
}

std::vector<NamedTensor> SrModel::parameters() const {
  std::vector<NamedTensor> out;
  encoder.collect(out, "encoder");
  estimator.collect(out, "lte");
  decoder.collect(out, "decoder");
  return out;
}

SrModel SrModel::to_lteplus() const {
  ModelConfig config = config_;
  config.decoder_variant = DecoderVariant::conv1x1;
  return SrModel(config, encoder, estimator, convert_to_lteplus(decoder));
}

SrModel SrModel::to_mlp() const {
  ModelConfig config = config_;
  config.decoder_variant = DecoderVariant::mlp;
  return SrModel(config, encoder, estimator, convert_to_mlp(decoder));
}

LatentState prepare_latent(const SrModel& model, const Tensor& lr, Cell cell) {
  if (lr.rank() != 3 || lr.dim(0) != model.config().encoder.in_channels) {
    throw InvalidArgument("sr: expected a " + std::to_string(model.config().encoder.in_channels) +
                          " x H x W image, got " + shape_str(lr.shape()));
  }
  LatentState state;
  state.lr = lr;
  state.cell = cell;
  state.z = model.encoder.encode(lr);
  state.fourier = model.estimator.estimate_amp_freq(state.z);
  const Cell rel = relative_cell(cell, state.height(), state.width());
  const Cell floor = model.config().min_cell;
  state.cell_clamped = rel.cy < floor.cy || rel.cx < floor.cx;
  state.phase = model.estimator.estimate_phase(rel, floor);
  return state;
}

Tensor bilinear_skip(const Tensor& lr, const QueryBatch& qb) {
  const std::int64_t hw = lr.dim(1) * lr.dim(2);
  const auto src = lr.data();
  const auto q_count = static_cast<std::size_t>(qb.size);
  Tensor out = Tensor::zeros({qb.size, 3});
  auto o = out.data();
  for (int j = 0; j < kNeighbors; ++j) {
    const auto idx = qb.neighbor_index(j);
    const auto w = qb.neighbor_weight(j);
    for (std::size_t q = 0; q < q_count; ++q) {
      for (std::int64_t c = 0; c < 3; ++c) {
        o[q * 3 + static_cast<std::size_t>(c)] += w[q] * src[static_cast<std::size_t>(c * hw + idx[q])];
      }
    }
  }
  return out;
}

Tensor query_rgb(const SrModel& model, const LatentState& state, std::span<const Coord> queries) {
  const QueryBatch qb = build_query_batch(queries, state.height(), state.width(), state.cell);
  const auto q_count = static_cast<std::size_t>(qb.size);
  Tensor acc;
  for (int j = 0; j < kNeighbors; ++j) {
    const Tensor rgb = model.decoder.decode(model.estimator.features(state.fourier, qb, j, state.phase));
    Tensor w = Tensor::zeros({qb.size, 3});
    const auto wj = qb.neighbor_weight(j);
    auto wd = w.data();
    for (std::size_t q = 0; q < q_count; ++q) std::fill_n(wd.begin() + static_cast<std::ptrdiff_t>(3 * q), 3, wj[q]);
    const Tensor term = ops::mul(rgb, w);
    acc = acc.defined() ? ops::add(acc, term) : term;
  }
  if (!model.config().lte.ablation.no_skip) acc = ops::add(acc, bilinear_skip(state.lr, qb));
  return acc;
}

SrOutput sr_forward(const SrModel& model, const Tensor& lr, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("sr_forward: output dims must be positive");
  const LatentState state = prepare_latent(model, lr, make_cell(out_h, out_w));
  const TrackedVector<Coord> coords = grid_coords(out_h, out_w, 0, static_cast<std::int64_t>(out_h) * out_w);
  const Tensor rgb = query_rgb(model, state, coords);
  SrOutput out;
  out.image = ops::reshape(ops::transpose(rgb), {3, out_h, out_w});
  out.stats.cell_clamped = state.cell_clamped;
  out.stats.launches = 1;
  return out;
}

SrOutput sr_forward_chunked(const SrModel& model, const Tensor& lr, int out_h, int out_w, std::int64_t chunk) {
  if (out_h < 1 || out_w < 1) throw InvalidArgument("sr_forward_chunked: output dims must be positive");
  if (chunk < 1) throw InvalidArgument("sr_forward_chunked: chunk must be >= 1");
  NoGradGuard no_grad;
  const LatentState state = prepare_latent(model, lr, make_cell(out_h, out_w));
  const std::int64_t total = static_cast<std::int64_t>(out_h) * out_w;

  SrOutput out;
  out.image = Tensor::zeros({3, out_h, out_w});
  out.stats.cell_clamped = state.cell_clamped;
  auto dst = out.image.data();

  const std::int64_t baseline = memory::current_bytes();
  memory::reset_peak();
  for (std::int64_t begin = 0; begin < total; begin += chunk) {
    const std::int64_t end = std::min(total, begin + chunk);
    const TrackedVector<Coord> coords = grid_coords(out_h, out_w, begin, end);
    const Tensor rgb = query_rgb(model, state, coords);
    const auto src = rgb.data();
    for (std::int64_t i = begin; i < end; ++i) {
      for (std::int64_t c = 0; c < 3; ++c) {
        dst[static_cast<std::size_t>(c * total + i)] = src[static_cast<std::size_t>((i - begin) * 3 + c)];
      }
    }
    ++out.stats.launches;
  }
  out.stats.query_peak_bytes = memory::peak_bytes() - baseline;
  return out;
}

}  // namespace lte
