#include <CLI11.hpp>

#include "refill3d/cli.hpp"

namespace {

void add_input_flags(CLI::App* cmd, refill3d::RunConfig& cfg) {
  cmd->add_option("--target", cfg.target_path, "Masked target image (PNG)")
      ->required();
  cmd->add_option("--reference", cfg.reference_path, "Reference image (PNG)")
      ->required();
  cmd->add_option("--depth", cfg.depth_path, "Target depth map (PFM)")
      ->required();
  cmd->add_option("--mask", cfg.mask_path,
                  "Hole mask PNG, 0 = hole (default: no hole)");
  cmd->add_option("--intrinsics", cfg.intrinsics_path,
                  "Camera intrinsics JSON (overrides --focal)");
  cmd->add_option("--focal", cfg.focal, "Focal length in pixels")
      ->capture_default_str();
  cmd->add_option("--out-dir", cfg.out_dir, "Output directory")->required();
  cmd->add_option("--levels", cfg.levels, "Pyramid levels")
      ->capture_default_str();
  cmd->add_option("--max-iters", cfg.max_iters, "Iteration budget per level")
      ->capture_default_str();
  cmd->add_option("--dilation-radius", cfg.dilation_radius,
                  "Hole dilation radius in pixels (-1: scale with image)");
  cmd->add_flag("--skip-2d", cfg.skip_2d, "Skip the 2D refinement stage");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "refill3d: fills masked regions of a photograph from a second view "
      "using depth-based alignment"};
  app.require_subcommand(1);
  refill3d::RunConfig cfg;

  CLI::App* align =
      app.add_subcommand("align", "Recover the pose and warp the reference");
  add_input_flags(align, cfg);

  CLI::App* fill =
      app.add_subcommand("fill", "Align, fill the hole, and harmonize");
  add_input_flags(fill, cfg);
  fill->add_option("--gt", cfg.gt_path,
                   "Ground truth image for metrics (optional)");
  fill->add_flag("--skip-harmonize", cfg.skip_harmonize,
                 "Composite without the seam correction");

  CLI::App* synth = app.add_subcommand(
      "synth", "Render a reproducible two-view evaluation pair");
  synth->add_option("--out-dir", cfg.out_dir, "Output directory")->required();
  synth->add_option("--seed", cfg.seed, "Generator seed")
      ->capture_default_str();
  synth->add_option("--size", cfg.synth_size, "Image side length")
      ->capture_default_str();
  synth->add_option("--focal", cfg.focal, "Focal length in pixels")
      ->capture_default_str();
  synth->add_option("--hole-fraction", cfg.synth_hole_fraction,
                    "Fraction of pixels the mask removes")
      ->capture_default_str();

  CLI::App* eval =
      app.add_subcommand("eval", "Score a prediction against ground truth");
  eval->add_option("--pred", cfg.pred_path, "Predicted image (PNG)")
      ->required();
  eval->add_option("--gt", cfg.gt_path, "Ground truth image (PNG)")
      ->required();
  eval->add_option("--mask", cfg.mask_path,
                   "Hole mask PNG for the masked score (optional)");
  eval->add_option("--out-dir", cfg.out_dir,
                   "Directory for metrics.json (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return refill3d::kExitBadInput;
  }

  if (align->parsed()) return refill3d::cmd_align(cfg);
  if (fill->parsed()) return refill3d::cmd_fill(cfg);
  if (synth->parsed()) return refill3d::cmd_synth(cfg);
  if (eval->parsed()) return refill3d::cmd_eval(cfg);
  return refill3d::kExitBadInput;
}
