#include "refill3d/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "refill3d/errors.hpp"
#include "refill3d/imgio.hpp"
#include "refill3d/pipeline.hpp"
#include "refill3d/sampler.hpp"
#include "refill3d/serialization.hpp"
#include "refill3d/synth.hpp"

namespace refill3d {

namespace {

template <class Fn>
int guarded(const Fn& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const AlignmentFailedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAlignmentFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
}

struct LoadedInputs {
  ImageF target, reference;
  DepthMap depth;
  MaskImage mask;
  Intrinsics k;
};

Intrinsics load_intrinsics(const RunConfig& cfg, int width, int height) {
  if (cfg.intrinsics_path.empty())
    return default_intrinsics(width, height, cfg.focal);
  std::ifstream in(cfg.intrinsics_path);
  if (!in) throw IoError("cannot open file: " + cfg.intrinsics_path);
  nlohmann::json j;
  try {
    in >> j;
    return j.get<Intrinsics>();
  } catch (const nlohmann::json::exception&) {
    throw IoError("malformed intrinsics JSON: " + cfg.intrinsics_path);
  }
}

LoadedInputs load_inputs(const RunConfig& cfg) {
  LoadedInputs in;
  in.target = load_png(cfg.target_path);
  in.reference = load_png(cfg.reference_path);
  in.depth = load_pfm(cfg.depth_path);
  in.mask = cfg.mask_path.empty()
                ? MaskImage(in.target.width(), in.target.height(), 1)
                : load_mask(cfg.mask_path);

  if (!in.target.same_size(in.reference))
    throw IoError("size mismatch between " + cfg.target_path + " and " +
                  cfg.reference_path);
  if (in.depth.width() != in.target.width() ||
      in.depth.height() != in.target.height())
    throw IoError("size mismatch between " + cfg.target_path + " and " +
                  cfg.depth_path);
  if (in.mask.width() != in.target.width() ||
      in.mask.height() != in.target.height())
    throw IoError("size mismatch between " + cfg.target_path + " and " +
                  cfg.mask_path);

  in.k = load_intrinsics(cfg, in.target.width(), in.target.height());
  return in;
}

PipelineOptions options_from(const RunConfig& cfg) {
  PipelineOptions opt;
  opt.align3d.pyramid_levels = cfg.levels;
  opt.align3d.max_iters_per_level = cfg.max_iters;
  opt.align2d.dilation_radius = cfg.dilation_radius;
  opt.skip_2d = cfg.skip_2d;
  opt.skip_harmonize = cfg.skip_harmonize;
  return opt;
}

nlohmann::json se2_json(const Align2DResult& r) {
  nlohmann::json j = r.transform;
  j["refinement_skipped"] = r.refinement_skipped;
  return j;
}

nlohmann::json metrics_json(const PipelineResult& res,
                            const MaskImage& valid3d) {
  nlohmann::json m{
      {"valid_ratio", valid_ratio(valid3d)},
      {"coverage", res.fill_report.coverage},
      {"harmonization_gain", res.fill_report.harmonization_gain},
      {"harmonization_bias", res.fill_report.harmonization_bias},
  };
  if (std::isfinite(res.align3d.final_loss))
    m["final_loss_3d"] = res.align3d.final_loss;
  if (std::isfinite(res.align2d.final_loss))
    m["final_loss_2d"] = res.align2d.final_loss;
  if (res.has_metrics) {
    m["psnr"] = res.metrics.psnr;
    m["ssim"] = res.metrics.ssim;
    m["masked_psnr"] = res.metrics.masked_psnr;
  }
  return m;
}

void print_pose_line(const PipelineResult& res) {
  const auto& e = res.align3d.pose.euler_xyz;
  const auto& t = res.align3d.pose.translation;
  std::cout << "pose euler_xyz=[" << e[0] << ", " << e[1] << ", " << e[2]
            << "] translation=[" << t[0] << ", " << t[1] << ", " << t[2]
            << "] loss=" << res.align3d.final_loss
            << " iters=" << res.align3d.iterations << "\n";
}

const char* class_name(MaskAreaClass c) {
  switch (c) {
    case MaskAreaClass::Small:
      return "small";
    case MaskAreaClass::Large:
      return "large";
    default:
      return "out-of-band";
  }
}

int run_alignment_command(const RunConfig& cfg, bool with_fill) {
  return guarded([&] {
    const LoadedInputs in = load_inputs(cfg);
    PipelineOptions opt = options_from(cfg);

    std::optional<ImageF> gt;
    if (with_fill && !cfg.gt_path.empty()) {
      gt = load_png(cfg.gt_path);
      opt.ground_truth = &*gt;
    }

    const PipelineResult res =
        run_pipeline(in.target, in.mask, in.reference, in.depth, in.k, opt);

    OutputBundle bundle;
    bundle.coarse = res.align3d.coarse;
    bundle.fine = res.align2d.fine;
    bundle.valid = res.align2d.valid;
    bundle.pose = nlohmann::json(res.align3d.pose);
    bundle.se2 = se2_json(res.align2d);
    if (with_fill) {
      bundle.filled = res.fill_report.filled;
      bundle.result = res.result;
      bundle.metrics = metrics_json(res, res.align3d.valid);
    }
    save_outputs(cfg.out_dir, bundle);
    print_pose_line(res);
    if (with_fill && res.has_metrics)
      std::cout << "psnr=" << res.metrics.psnr << " ssim=" << res.metrics.ssim
                << " masked_psnr=" << res.metrics.masked_psnr << "\n";
  });
}

}  // namespace

int cmd_align(const RunConfig& cfg) { return run_alignment_command(cfg, false); }

int cmd_fill(const RunConfig& cfg) { return run_alignment_command(cfg, true); }

int cmd_synth(const RunConfig& cfg) {
  return guarded([&] {
    SplitmixRng rng(cfg.seed);
    const int size = cfg.synth_size;
    const Intrinsics k = default_intrinsics(size, size, cfg.focal);
    const PlaneScene scene = random_scene(rng);
    const Pose6D base = Pose6D::identity();

    // Fix the motion after rendering the target view so the overlap band
    // can be measured against its true depth.
    RenderedView view1 = render(scene, base, k, size, size);
    const Pose6D delta =
        fit_to_overlap_band(view1.depth, k, random_delta(rng));
    RenderedPair pair = make_pair(scene, base, delta, k, size, size);

    const MaskImage mask =
        random_hole_mask(size, size, cfg.synth_hole_fraction, rng);
    ImageF masked = pair.view1.image;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        if (!mask.at(x, y))
          for (int c = 0; c < 3; ++c) masked.at(x, y, c) = 0.0f;

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
    const auto join = [&](const char* name) {
      return (std::filesystem::path(cfg.out_dir) / name).string();
    };
    const auto write_json = [&](const char* name, const nlohmann::json& j) {
      const std::string p = join(name);
      std::ofstream out(p);
      if (!out) throw IoError("cannot open file for writing: " + p);
      out << j.dump(2) << "\n";
    };

    save_png(join("original.png"), pair.view1.image);
    save_png(join("target.png"), masked);
    save_mask(join("mask.png"), mask);
    save_png(join("reference.png"), pair.view2.image);
    save_pfm(join("target_depth.pfm"), pair.view1.depth);
    save_pfm(join("reference_depth.pfm"), pair.view2.depth);
    write_json("target_pose.json", pair.view1.pose_world_to_cam);
    write_json("reference_pose.json", pair.view2.pose_world_to_cam);
    write_json("relative_pose.json", pair.gt_relative);
    write_json("intrinsics.json", k);
    write_json("scene.json", scene);

    const double ratio = overlap_ratio(pair.view1.depth, delta, k);
    const double hole =
        1.0 - static_cast<double>(mask.count_ones()) / (size * size);
    std::cout << "seed=" << cfg.seed << " size=" << size
              << " overlap=" << ratio << " hole_fraction=" << hole
              << " mask_class=" << class_name(mask_area_class(mask))
              << " planes=" << scene.planes.size() << "\n";
  });
}

int cmd_eval(const RunConfig& cfg) {
  return guarded([&] {
    const ImageF pred = load_png(cfg.pred_path);
    const ImageF gt = load_png(cfg.gt_path);
    if (!pred.same_size(gt))
      throw IoError("size mismatch between " + cfg.pred_path + " and " +
                    cfg.gt_path);

    MetricsReport r;
    r.psnr = psnr(pred, gt);
    r.ssim = ssim(pred, gt);
    r.coverage = 1.0;
    if (!cfg.mask_path.empty()) {
      const MaskImage mask = load_mask(cfg.mask_path);
      if (mask.width() != pred.width() || mask.height() != pred.height())
        throw IoError("size mismatch between " + cfg.pred_path + " and " +
                      cfg.mask_path);
      MaskImage hole(mask.width(), mask.height(), 0);
      for (size_t i = 0; i < mask.data().size(); ++i)
        hole.data()[i] = mask.data()[i] ? 0 : 1;
      r.masked_psnr =
          hole.count_ones() > 0 ? psnr(pred, gt, hole) : r.psnr;
      r.valid_ratio = valid_ratio(mask);
    } else {
      r.masked_psnr = r.psnr;
      r.valid_ratio = 1.0;
    }

    std::cout << "psnr=" << r.psnr << " ssim=" << r.ssim
              << " masked_psnr=" << r.masked_psnr
              << " valid_ratio=" << r.valid_ratio
              << " coverage=" << r.coverage << "\n";
    if (!cfg.out_dir.empty()) {
      OutputBundle bundle;
      bundle.metrics = nlohmann::json(r);
      save_outputs(cfg.out_dir, bundle);
    }
  });
}

}  // namespace refill3d
