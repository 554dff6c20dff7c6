// SPDX-License-Identifier: Apache-2.0
#include "shadowpose/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "shadowpose/checkpoint.hpp"
#include "shadowpose/dataset.hpp"
#include "shadowpose/kernels.hpp"

namespace fs = std::filesystem;

namespace shadowpose {

void TrainConfig::validate() const {
  if (steps <= 0) throw ValidationError("TrainConfig.steps must be > 0");
  if (batch_size < 1) throw ValidationError("TrainConfig.batch_size must be >= 1");
  if (!(learning_rate > 0.0))
    throw ValidationError("TrainConfig.learning_rate must be > 0");
  if (optimizer != "adaptive-moment" && optimizer != "sgd-momentum")
    throw ValidationError("TrainConfig.optimizer must be adaptive-moment or sgd-momentum");
  if (resize_policy != "scale" && resize_policy != "center-crop")
    throw ValidationError("TrainConfig.resize_policy must be scale or center-crop");
  if (eval_every <= 0) throw ValidationError("TrainConfig.eval_every must be > 0");
  if (holdout_count < 0) throw ValidationError("TrainConfig.holdout_count must be >= 0");
  if (!(grad_clip_norm > 0.0))
    throw ValidationError("TrainConfig.grad_clip_norm must be > 0");
  toggles.validate();
  network.validate();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"steps", steps},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"optimizer", optimizer},
          {"seed", seed},
          {"toggles",
           {{"use_structural", toggles.use_structural},
            {"use_perceptual", toggles.use_perceptual},
            {"use_edge", toggles.use_edge}}},
          {"eval_every", eval_every},
          {"dataset", dataset},
          {"resize_policy", resize_policy},
          {"holdout_count", holdout_count},
          {"extractor", extractor},
          {"normalize_feature_norm", normalize_feature_norm},
          {"normalize_edge_norm", normalize_edge_norm},
          {"grad_clip_norm", grad_clip_norm},
          {"network", network.to_json()},
          {"out_dir", out_dir}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.optimizer = j.value("optimizer", c.optimizer);
  c.seed = j.value("seed", c.seed);
  if (j.contains("toggles")) {
    const auto& t = j.at("toggles");
    c.toggles.use_structural = t.value("use_structural", true);
    c.toggles.use_perceptual = t.value("use_perceptual", true);
    c.toggles.use_edge = t.value("use_edge", true);
  }
  c.eval_every = j.value("eval_every", c.eval_every);
  c.dataset = j.value("dataset", c.dataset);
  c.resize_policy = j.value("resize_policy", c.resize_policy);
  c.holdout_count = j.value("holdout_count", c.holdout_count);
  c.extractor = j.value("extractor", c.extractor);
  c.normalize_feature_norm = j.value("normalize_feature_norm", c.normalize_feature_norm);
  c.normalize_edge_norm = j.value("normalize_edge_norm", c.normalize_edge_norm);
  c.grad_clip_norm = j.value("grad_clip_norm", c.grad_clip_norm);
  if (j.contains("network")) c.network = NetworkConfig::from_json(j.at("network"));
  c.out_dir = j.value("out_dir", c.out_dir);
  return c;
}

TrainConfig TrainConfig::load_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError("config '" + path.string() + "': " + err.what());
  }
  return from_json(j);
}

void TrainLog::write_ndjson(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write train log '" + path.string() + "'");
  std::size_t ei = 0;
  for (const auto& r : steps) {
    nlohmann::json j{{"type", "step"},
                     {"step", r.step},
                     {"total", r.loss.total},
                     {"sl", r.loss.sl},
                     {"pl", r.loss.pl},
                     {"pl_mse", r.loss.pl_mse},
                     {"pl_mae", r.loss.pl_mae},
                     {"pl_feat", r.loss.pl_feat},
                     {"el", r.loss.el},
                     {"wall_ms", r.wall_ms}};
    out << j.dump() << "\n";
    while (ei < evals.size() && evals[ei].step == r.step) {
      nlohmann::json je{{"type", "eval"},
                        {"step", evals[ei].step},
                        {"holdout_mean_ssim", evals[ei].holdout_mean_ssim}};
      out << je.dump() << "\n";
      ++ei;
    }
  }
}

std::size_t schedule_index(std::uint64_t seed, std::int64_t global_pos, std::size_t n) {
  const std::int64_t epoch = global_pos / static_cast<std::int64_t>(n);
  const std::size_t pos = static_cast<std::size_t>(global_pos % static_cast<std::int64_t>(n));
  // Fisher-Yates permutation of [0, n) for this epoch
  Rng rng(mix_seed(seed, 0xE70C4 + static_cast<std::uint64_t>(epoch)));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm[pos];
}

namespace {

struct OptimizerState {
  std::string type;
  std::int64_t t = 0;  // completed updates
  // flat per-layer state, interleaved [w..., b...] per layer
  std::vector<std::vector<double>> m, v;

  void init(const Network& net, const std::string& opt_type) {
    type = opt_type;
    t = 0;
    m.clear();
    v.clear();
    for (const auto& l : net.layers()) {
      m.emplace_back(l.w.size() + l.b.size(), 0.0);
      if (type == "adaptive-moment") v.emplace_back(l.w.size() + l.b.size(), 0.0);
    }
  }
};

struct Dataset {
  std::vector<Tensor> degraded;      // planar, at network input size
  std::vector<ImageTensor> clear;    // HWC, at network input size
  std::vector<Tensor> ho_degraded;
  std::vector<ImageTensor> ho_clear;
};

ImageTensor resize_policy_apply(const ImageTensor& img, int th, int tw,
                                const std::string& policy) {
  if (img.height == th && img.width == tw) return img;
  if (policy == "scale") return kernels::resize_bilinear(img, th, tw);
  // center-crop: aspect-preserving resize so the short side fits, then crop
  const double scale = std::max(static_cast<double>(th) / img.height,
                                static_cast<double>(tw) / img.width);
  const int rh = std::max(th, static_cast<int>(std::lround(img.height * scale)));
  const int rw = std::max(tw, static_cast<int>(std::lround(img.width * scale)));
  const ImageTensor resized = kernels::resize_bilinear(img, rh, rw);
  const int y0 = (rh - th) / 2, x0 = (rw - tw) / 2;
  ImageTensor out(th, tw, img.channels);
  for (int y = 0; y < th; ++y)
    for (int x = 0; x < tw; ++x)
      for (int ch = 0; ch < img.channels; ++ch)
        out.at(y, x, ch) = resized.at(y0 + y, x0 + x, ch);
  return out;
}

Dataset load_dataset(const TrainConfig& cfg) {
  if (cfg.dataset.empty()) throw ValidationError("TrainConfig.dataset is required");
  auto samples = ingest_paired_dataset(cfg.dataset);
  if (samples.empty()) throw ValidationError("dataset is empty");
  if (cfg.holdout_count >= static_cast<int>(samples.size()))
    throw ValidationError("holdout_count leaves no training samples");
  const int th = cfg.network.input_height, tw = cfg.network.input_width;
  Dataset ds;
  const std::size_t train_n = samples.size() - static_cast<std::size_t>(cfg.holdout_count);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    ImageTensor d = resize_policy_apply(samples[i].degraded, th, tw, cfg.resize_policy);
    ImageTensor c = resize_policy_apply(samples[i].clear, th, tw, cfg.resize_policy);
    if (i < train_n) {
      ds.degraded.push_back(to_planar(d));
      ds.clear.push_back(std::move(c));
    } else {
      ds.ho_degraded.push_back(to_planar(d));
      ds.ho_clear.push_back(std::move(c));
    }
  }
  return ds;
}

double holdout_mean_ssim(const Network& net, const Dataset& ds, const SsimParams& p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.ho_degraded.size(); ++i) {
    const ImageTensor enhanced = to_image(net.forward(ds.ho_degraded[i]), true);
    sum += mean_ssim(enhanced, ds.ho_clear[i], p);
  }
  return sum / static_cast<double>(ds.ho_degraded.size());
}

double grad_global_norm(const Network& net) {
  double s = 0.0;
  for (const auto& l : net.layers()) {
    for (double g : l.gw) s += g * g;
    for (double g : l.gb) s += g * g;
  }
  return std::sqrt(s);
}

void scale_grads(Network& net, double f) {
  for (auto& l : net.layers()) {
    for (auto& g : l.gw) g *= f;
    for (auto& g : l.gb) g *= f;
  }
}

void optimizer_step(Network& net, OptimizerState& st, const TrainConfig& cfg) {
  st.t += 1;
  const double lr = cfg.learning_rate;
  if (st.type == "adaptive-moment") {
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
    for (std::size_t li = 0; li < net.layers().size(); ++li) {
      auto& l = net.layers()[li];
      auto& m = st.m[li];
      auto& v = st.v[li];
      const std::size_t nw = l.w.size();
      for (std::size_t i = 0; i < nw + l.b.size(); ++i) {
        const double g = i < nw ? l.gw[i] : l.gb[i - nw];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        const double update = lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        if (i < nw)
          l.w[i] -= update;
        else
          l.b[i - nw] -= update;
      }
    }
  } else {  // sgd-momentum
    const double mu = 0.9;
    for (std::size_t li = 0; li < net.layers().size(); ++li) {
      auto& l = net.layers()[li];
      auto& m = st.m[li];
      const std::size_t nw = l.w.size();
      for (std::size_t i = 0; i < nw + l.b.size(); ++i) {
        const double g = i < nw ? l.gw[i] : l.gb[i - nw];
        m[i] = mu * m[i] + g;
        if (i < nw)
          l.w[i] -= lr * m[i];
        else
          l.b[i - nw] -= lr * m[i];
      }
    }
  }
}

std::map<std::string, NamedTensor> optimizer_tensors(const Network& net,
                                                     const OptimizerState& st) {
  std::map<std::string, NamedTensor> out;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const auto& name = net.layers()[li].name;
    NamedTensor m;
    m.dims = {st.m[li].size()};
    m.data = st.m[li];
    out.emplace("opt/m/" + name, std::move(m));
    if (st.type == "adaptive-moment") {
      NamedTensor v;
      v.dims = {st.v[li].size()};
      v.data = st.v[li];
      out.emplace("opt/v/" + name, std::move(v));
    }
  }
  return out;
}

void restore_optimizer(const CheckpointArchive& archive, const Network& net,
                       OptimizerState& st) {
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    const auto& name = net.layers()[li].name;
    const auto mit = archive.tensors.find("opt/m/" + name);
    if (mit == archive.tensors.end())
      throw ParseError("checkpoint lacks optimizer state for '" + name +
                       "'; cannot resume");
    st.m[li] = mit->second.data;
    if (st.type == "adaptive-moment") {
      const auto vit = archive.tensors.find("opt/v/" + name);
      if (vit == archive.tensors.end())
        throw ParseError("checkpoint lacks optimizer state for '" + name +
                         "'; cannot resume");
      st.v[li] = vit->second.data;
    }
  }
  st.t = archive.meta.optimizer.value("t", static_cast<std::int64_t>(0));
}

// Fields that may change between a checkpoint and a resumed run.
nlohmann::json comparable_config(const TrainConfig& cfg) {
  nlohmann::json j = cfg.to_json();
  j.erase("steps");
  j.erase("eval_every");
  j.erase("out_dir");
  return j;
}

TrainResult run_training(const TrainConfig& cfg, Network& net, OptimizerState& opt,
                         std::int64_t start_step, std::vector<double> loss_tail) {
  const Dataset ds = load_dataset(cfg);
  const auto phi = make_extractor(cfg.extractor);
  LossOptions lopt;
  lopt.normalize_feature_norm = cfg.normalize_feature_norm;
  lopt.normalize_edge_norm = cfg.normalize_edge_norm;

  fs::create_directories(cfg.out_dir);
  const fs::path ckpt_path = fs::path(cfg.out_dir) / "checkpoint.bin";

  TrainResult result;
  result.checkpoint_path = ckpt_path;

  auto save = [&](std::int64_t step) {
    CheckpointMeta meta;
    meta.seed = cfg.seed;
    meta.step = step;
    meta.loss_tail = loss_tail;
    meta.optimizer = {{"type", opt.type}, {"learning_rate", cfg.learning_rate}, {"t", opt.t}};
    meta.train_config = cfg.to_json();
    save_checkpoint(ckpt_path, net, meta, optimizer_tensors(net, opt));
  };

  const std::size_t n_train = ds.degraded.size();
  ForwardCache cache;
  for (std::int64_t step = start_step; step <= cfg.steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    net.zero_grads();
    LossBreakdown acc;
    bool finite = true;
    for (int bi = 0; bi < cfg.batch_size; ++bi) {
      const std::int64_t global_pos =
          (step - 1) * static_cast<std::int64_t>(cfg.batch_size) + bi;
      const std::size_t idx = schedule_index(cfg.seed, global_pos, n_train);
      const Tensor& x = ds.degraded[idx];
      const Tensor out = net.forward(x, &cache);
      const ImageTensor e_img = to_image(out);
      ImageTensor grad_e;
      const LossBreakdown b =
          composite_loss_grad(e_img, ds.clear[idx], cfg.toggles, *phi, grad_e, lopt);
      const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
      acc.sl += b.sl * inv_b;
      acc.pl_mse += b.pl_mse * inv_b;
      acc.pl_mae += b.pl_mae * inv_b;
      acc.pl_feat += b.pl_feat * inv_b;
      acc.pl += b.pl * inv_b;
      acc.el += b.el * inv_b;
      acc.total += b.total * inv_b;
      if (!std::isfinite(b.total)) {
        finite = false;
        break;
      }
      for (auto& v : grad_e.values) v *= inv_b;
      net.backward(to_planar(grad_e), x, cache);
    }
    if (!finite || !std::isfinite(acc.total)) {
      // the weights predate this step's update; keep them as the last good state
      save(step - 1);
      result.aborted = true;
      result.abort_reason = "non-finite loss at step " + std::to_string(step);
      result.last_step = step - 1;
      result.log.write_ndjson(fs::path(cfg.out_dir) / "train_log.ndjson");
      return result;
    }

    const double gnorm = grad_global_norm(net);
    if (gnorm > cfg.grad_clip_norm && gnorm > 0.0)
      scale_grads(net, cfg.grad_clip_norm / gnorm);
    optimizer_step(net, opt, cfg);

    const auto t1 = std::chrono::steady_clock::now();
    TrainStepRecord rec;
    rec.step = step;
    rec.loss = acc;
    rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.log.steps.push_back(rec);
    loss_tail.push_back(acc.total);
    if (loss_tail.size() > 32) loss_tail.erase(loss_tail.begin());
    if (result.log.steps.size() == 1 && start_step == 1) result.first_total = acc.total;

    if (!ds.ho_degraded.empty() &&
        (step % cfg.eval_every == 0 || step == cfg.steps)) {
      EvalSnapshot snap;
      snap.step = step;
      snap.holdout_mean_ssim = holdout_mean_ssim(net, ds, lopt.ssim);
      result.log.evals.push_back(snap);
    }
    result.final_total = acc.total;
    result.last_step = step;
  }

  save(cfg.steps);
  result.log.write_ndjson(fs::path(cfg.out_dir) / "train_log.ndjson");
  return result;
}

}  // namespace

TrainResult train(const TrainConfig& cfg) {
  cfg.validate();
  Network net(cfg.network);
  net.init_weights(cfg.seed);
  OptimizerState opt;
  opt.init(net, cfg.optimizer);
  return run_training(cfg, net, opt, 1, {});
}

TrainResult resume(const fs::path& checkpoint, const TrainConfig& cfg) {
  cfg.validate();
  const CheckpointArchive archive = read_checkpoint(checkpoint, cfg.network);
  const TrainConfig saved = TrainConfig::from_json(archive.meta.train_config);
  if (comparable_config(saved) != comparable_config(cfg))
    throw ValidationError(
        "resume: config differs from the checkpoint beyond steps/eval_every; "
        "saved " + comparable_config(saved).dump() + " vs requested " +
        comparable_config(cfg).dump());
  if (archive.meta.step >= cfg.steps)
    throw ValidationError("resume: checkpoint is already at step " +
                          std::to_string(archive.meta.step) + " >= steps " +
                          std::to_string(cfg.steps));
  Network net = network_from_archive(archive);
  OptimizerState opt;
  opt.init(net, cfg.optimizer);
  restore_optimizer(archive, net, opt);
  return run_training(cfg, net, opt, archive.meta.step + 1, archive.meta.loss_tail);
}

}  // namespace shadowpose
