// Command-line frontend: synthetic phase grids, image completion, image
// metrics, and a decomposition dump for debugging.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "tmat/errors.hpp"
#include "tmat/experiments.hpp"
#include "tmat/image_io.hpp"
#include "tmat/serialize.hpp"
#include "tmat/tsvd.hpp"

namespace {

using nlohmann::json;

std::vector<std::size_t> parse_extents(const std::string& text,
                                       const char* what) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t stop = std::min(text.find('x', start), text.size());
    const std::string part = text.substr(start, stop - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stoul(part, &used));
      if (used != part.size() || part.empty()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": malformed extents '" +
                                  text + "' (use e.g. 3x3)");
    }
    if (out.back() == 0)
      throw std::invalid_argument(std::string(what) + ": zero extent in '" +
                                  text + "'");
    start = stop + 1;
  }
  return out;
}

std::pair<std::size_t, std::size_t> parse_neighborhood(const std::string& text) {
  const std::vector<std::size_t> e = parse_extents(text, "--neighborhood");
  if (e.size() != 2)
    throw std::invalid_argument("--neighborhood: expected I1xI2, got '" + text +
                                "'");
  return {e[0], e[1]};
}

/// JSON has no infinity literal; the sentinel becomes the string "infinity".
json finite_or_sentinel(double v) {
  if (std::isinf(v)) return v > 0 ? "infinity" : "-infinity";
  return v;
}

json solver_echo(const tmat::CompletionConfig& cfg) {
  return {{"tau0", cfg.tau0},
          {"alpha", cfg.alpha},
          {"tau_min", cfg.tau_min},
          {"rel_tol", cfg.rel_tol},
          {"max_iters", cfg.max_iters}};
}

void emit_report(const json& report, const std::string& path) {
  std::cout << report.dump(2) << "\n";
  if (!path.empty()) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << report.dump(2) << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
  }
}

const std::map<std::string, tmat::BoundaryPolicy> kBoundaryNames{
    {"replicate", tmat::BoundaryPolicy::Replicate},
    {"wrap", tmat::BoundaryPolicy::Wrap},
    {"reflect", tmat::BoundaryPolicy::Reflect}};

std::string boundary_name(tmat::BoundaryPolicy policy) {
  for (const auto& [name, value] : kBoundaryNames)
    if (value == policy) return name;
  return "?";
}

struct SynthOpts {
  std::size_t dim = 0;
  std::string scalar_shape = "3x3x3";
  std::vector<std::size_t> r_values;
  std::vector<double> rho_values;
  std::size_t trials = 1;
  double threshold = 1e-2;
  std::uint64_t seed = 0;
  tmat::CompletionConfig solver;
  std::string out;
  std::string heatmap;
  std::size_t cell_px = 16;
};

struct CompleteOpts {
  std::string input;
  std::string out;
  std::string report;
  std::string trace_csv;
  std::string mask_path;
  std::string mask_out;
  std::string neighborhood = "3x3";
  double missing = 0.0;
  bool missing_given = false;
  std::uint64_t seed = 0;
  tmat::BoundaryPolicy boundary = tmat::BoundaryPolicy::Replicate;
  tmat::CompletionConfig solver;
  bool strict = false;
};

struct EvalOpts {
  std::string recovered;
  std::string reference;
  std::string out;
};

struct DumpOpts {
  std::string input;
  std::string prefix;
};

void add_solver_flags(CLI::App* cmd, tmat::CompletionConfig& cfg) {
  cmd->add_option("--tau0", cfg.tau0, "initial singular-value threshold");
  cmd->add_option("--alpha", cfg.alpha, "per-iteration decay of the threshold");
  cmd->add_option("--tau-min", cfg.tau_min, "threshold floor");
  cmd->add_option("--max-iters", cfg.max_iters, "iteration cap");
  cmd->add_option("--tol", cfg.rel_tol, "relative-residual stopping tolerance");
}

int run_synth(const SynthOpts& o) {
  tmat::PhaseGridSpec spec;
  spec.d = o.dim;
  spec.scalar_shape = parse_extents(o.scalar_shape, "--scalar-shape");
  spec.r_values = o.r_values;
  spec.rho_values = o.rho_values;
  spec.trials = o.trials;
  spec.threshold = o.threshold;
  spec.seed = o.seed;
  spec.solver = o.solver;

  const tmat::PhaseGrid grid = tmat::phase_grid(spec);
  grid.write_csv(o.out);
  if (!o.heatmap.empty())
    tmat::render_phase_heatmap(grid, o.heatmap, o.cell_px);
  std::cerr << "wrote " << grid.cells.size() << " cells to " << o.out << "\n";
  return 0;
}

tmat::ObservationMask load_or_draw_mask(const CompleteOpts& o,
                                        const tmat::SpectralImage& img) {
  const std::size_t h = img.height(), w = img.width(), c = img.channels();
  if (!o.mask_path.empty()) {
    if (o.mask_path.ends_with(".csv"))
      return tmat::read_mask_csv(o.mask_path, h, w, c);
    return tmat::read_mask_image(o.mask_path, h, w, c);
  }
  if (!(o.missing >= 0.0 && o.missing <= 1.0))
    throw std::invalid_argument("--missing must lie in [0, 1]");
  const std::size_t total = h * w * c;
  const std::size_t k = std::size_t(std::llround(o.missing * double(total)));
  std::vector<std::uint8_t> flags(total, 1);
  tmat::Rng rng(o.seed);
  for (std::size_t i : rng.sample_without_replacement(total, k)) flags[i] = 0;
  return tmat::ObservationMask({h, w, c}, std::move(flags));
}

int run_complete(const CompleteOpts& o) {
  if (o.mask_path.empty() && !o.missing_given)
    throw std::invalid_argument(
        "complete: provide a mask via --mask or --missing");

  const tmat::SpectralImage img = tmat::read_image(o.input);
  const tmat::ObservationMask pixels = load_or_draw_mask(o, img);

  tmat::ImageCompletionOptions opt;
  std::tie(opt.i1, opt.i2) = parse_neighborhood(o.neighborhood);
  opt.boundary = o.boundary;
  opt.solver = o.solver;

  const tmat::ImageCompletionResult res = tmat::complete_image(img, pixels, opt);
  tmat::write_image(o.out, res.recovered);
  if (!o.mask_out.empty()) tmat::write_mask_png(o.mask_out, pixels);
  if (!o.trace_csv.empty()) res.trace.write_csv(o.trace_csv);

  const bool solved = res.trace.iterations > 0;
  const bool converged = !solved || res.trace.converged;
  const json report{
      {"rse", res.rse},
      {"psnr_db", finite_or_sentinel(res.psnr_db)},
      {"iterations", res.trace.iterations},
      {"converged", converged},
      {"wall_time", res.wall_time_seconds},
      {"config",
       {{"input", o.input},
        {"out", o.out},
        {"neighborhood", o.neighborhood},
        {"boundary", boundary_name(o.boundary)},
        {"mask", o.mask_path.empty() ? json{{"missing", o.missing},
                                            {"seed", o.seed}}
                                     : json(o.mask_path)},
        {"solver", solver_echo(o.solver)}}}};
  emit_report(report, o.report);

  if (solved && !res.trace.converged) {
    std::cerr << "warning: stopped after " << res.trace.iterations
              << " iterations above tolerance (final residual "
              << res.trace.records.back().residual << ")\n";
    if (o.strict) return 3;
  }
  return 0;
}

int run_eval(const EvalOpts& o) {
  const tmat::SpectralImage rec = tmat::read_image(o.recovered);
  const tmat::SpectralImage ref = tmat::read_image(o.reference);
  const json report{
      {"psnr_db", finite_or_sentinel(tmat::psnr(rec, ref))},
      {"rse", tmat::rse(ref, rec)},
      {"config", {{"recovered", o.recovered}, {"reference", o.reference}}}};
  emit_report(report, o.out);
  return 0;
}

int run_tsvd_dump(const DumpOpts& o) {
  const tmat::TMatrix x = tmat::read_tmatrix(o.input);
  tmat::dump_tsvd(tmat::tsvd(x), o.prefix);
  std::cerr << "wrote " << o.prefix << "_{u,s,v}.tmat and " << o.prefix
            << "_sigma.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"t-matrix algebra and completion toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI-style file");

  SynthOpts synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "sweep a synthetic completion phase grid");
  synth_cmd->add_option("--dim", synth.dim, "matrix dimension D")->required();
  synth_cmd->add_option("--scalar-shape", synth.scalar_shape,
                        "t-scalar extents, e.g. 3x3x3");
  synth_cmd->add_option("--r-values", synth.r_values, "inner dimensions to try")
      ->required()
      ->delimiter(',');
  synth_cmd
      ->add_option("--rho-values", synth.rho_values,
                   "missing fractions to try")
      ->required()
      ->delimiter(',');
  synth_cmd->add_option("--trials", synth.trials, "trials per cell");
  synth_cmd->add_option("--threshold", synth.threshold,
                        "success threshold on the relative error");
  synth_cmd->add_option("--seed", synth.seed, "base seed");
  add_solver_flags(synth_cmd, synth.solver);
  synth_cmd->add_option("--out", synth.out, "output CSV path")->required();
  synth_cmd->add_option("--heatmap", synth.heatmap,
                        "also render a success-rate PNG here");
  synth_cmd->add_option("--cell-px", synth.cell_px, "heatmap block size");

  CompleteOpts complete;
  CLI::App* complete_cmd =
      app.add_subcommand("complete", "recover missing pixels of an image");
  complete_cmd->add_option("--input", complete.input, "image to recover")
      ->required();
  complete_cmd->add_option("--out", complete.out, "recovered image path")
      ->required();
  complete_cmd->add_option("--report", complete.report, "also write the JSON report here");
  complete_cmd->add_option("--trace", complete.trace_csv,
                           "write the per-iteration CSV trace here");
  CLI::Option* mask_opt = complete_cmd->add_option(
      "--mask", complete.mask_path,
      "pixel mask: PNG/PNM bitmap (>=128 observed) or CSV of missing pixels");
  CLI::Option* missing_opt =
      complete_cmd
          ->add_option("--missing", complete.missing,
                       "draw a uniform mask with this missing fraction")
          ->excludes(mask_opt);
  complete_cmd->add_option("--seed", complete.seed, "seed for --missing");
  complete_cmd->add_option("--mask-out", complete.mask_out,
                           "save the pixel mask used as a PNG bitmap");
  complete_cmd->add_option("--neighborhood", complete.neighborhood,
                           "odd pixel neighborhood I1xI2");
  complete_cmd
      ->add_option("--boundary", complete.boundary,
                   "out-of-range policy: replicate|wrap|reflect")
      ->transform(CLI::CheckedTransformer(kBoundaryNames, CLI::ignore_case));
  add_solver_flags(complete_cmd, complete.solver);
  complete_cmd->add_flag("--strict", complete.strict,
                         "treat non-convergence as a failure (exit 3)");

  EvalOpts eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "psnr/rse between two images");
  eval_cmd->add_option("--recovered", eval.recovered, "image under test")
      ->required();
  eval_cmd->add_option("--reference", eval.reference, "ground-truth image")
      ->required();
  eval_cmd->add_option("--out", eval.out, "also write the JSON report here");

  DumpOpts dump;
  CLI::App* dump_cmd = app.add_subcommand(
      "tsvd-dump", "decompose a stored t-matrix and dump the factors");
  dump_cmd->add_option("--input", dump.input, "t-matrix container file")
      ->required();
  dump_cmd->add_option("--out", dump.prefix, "output path prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  complete.missing_given = missing_opt->count() > 0;

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (complete_cmd->parsed()) return run_complete(complete);
    if (eval_cmd->parsed()) return run_eval(eval);
    return run_tsvd_dump(dump);
  } catch (const tmat::numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
