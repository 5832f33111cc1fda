// Copyright 2026 The jedi Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "jedi/adaptation.hpp"
#include "jedi/csv.hpp"
#include "jedi/dump.hpp"
#include "jedi/extraction.hpp"
#include "jedi/score.hpp"
#include "jedi/synthetic_model.hpp"
#include "jedi/toy.hpp"

namespace jedi::cli {

namespace {

GridShape parse_grid(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw DataError("grid must look like HxW, got '" + text + "'");
  const auto h = static_cast<std::size_t>(csv::parse_double(text.substr(0, x)));
  const auto w = static_cast<std::size_t>(csv::parse_double(text.substr(x + 1)));
  return {h, w};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : csv::split(text)) {
    if (!item.empty()) out.push_back(csv::parse_double(item));
  }
  if (out.empty()) throw DataError("empty list '" + text + "'");
  return out;
}

// Writes to `path`, or to `fallback` when path is empty.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty()) {
    fn(fallback);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot create '" + path + "'");
  fn(out);
  if (!out) throw DataError("short write to '" + path + "'");
}

struct ModelFlags {
  std::size_t subjects = 2;
  std::size_t maps = 2;
  std::string grid = "16x16";
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--subjects", f.subjects, "Subjects in the synthetic model")->capture_default_str();
  cmd->add_option("--maps", f.maps, "Attention maps per subject")->capture_default_str();
  cmd->add_option("--grid", f.grid, "Attention grid HxW")->capture_default_str();
}

struct LoopFlags {
  double alpha = kDefaultAlpha;
  std::size_t k = kDefaultOptimizedSteps;
  std::size_t t = kDefaultTotalSteps;
  std::size_t inner = 1;
  double lambda = kDefaultLambda;
  double temperature = kDefaultTemperature;
  bool no_intra = false;
  bool no_inter = false;
  bool no_diversity = false;
  std::uint64_t seed = 0;
  std::string loss = "jedi";
};

void add_loop_flags(CLI::App* cmd, LoopFlags& f, bool with_alpha) {
  if (with_alpha) {
    cmd->add_option("--alpha", f.alpha, "Sign-gradient step size")->capture_default_str();
  }
  cmd->add_option("--k", f.k, "Timesteps that receive latent updates")->capture_default_str();
  cmd->add_option("--t", f.t, "Total denoising steps")->capture_default_str();
  cmd->add_option("--inner", f.inner, "Updates per optimized timestep")->capture_default_str();
  cmd->add_option("--lambda", f.lambda, "Diversity weight")->capture_default_str();
  cmd->add_option("--temperature", f.temperature, "NT-Xent temperature")->capture_default_str();
  cmd->add_flag("--no-intra", f.no_intra, "Drop the intra-group coherence term");
  cmd->add_flag("--no-inter", f.no_inter, "Drop the inter-group separation term");
  cmd->add_flag("--no-diversity", f.no_diversity, "Drop the diversity regularizer");
  cmd->add_option("--seed", f.seed, "Seed for model layout, x_0 and drift")->capture_default_str();
  cmd->add_option("--loss", f.loss, "jedi | nt-xent")->capture_default_str();
}

LoopConfig to_loop_config(const LoopFlags& f) {
  LoopConfig cfg;
  cfg.alpha = f.alpha;
  cfg.optimized_steps = f.k;
  cfg.total_steps = f.t;
  cfg.inner_iterations = f.inner;
  cfg.seed = f.seed;
  cfg.objective.kind = parse_loss_kind(f.loss);
  cfg.objective.temperature = f.temperature;
  cfg.objective.loss.lambda = f.lambda;
  cfg.objective.loss.enable_intra = !f.no_intra;
  cfg.objective.loss.enable_inter = !f.no_inter;
  cfg.objective.loss.enable_diversity = !f.no_diversity;
  cfg.validate();
  return cfg;
}

SyntheticModel to_model(const ModelFlags& m, std::uint64_t seed) {
  return synthetic_model(m.subjects, m.maps, parse_grid(m.grid), seed);
}

int cmd_toy(const std::string& loss, std::uint64_t seed, std::size_t iterations,
            double step, bool sign_updates, double lambda, double temperature,
            std::size_t cells, std::size_t every, const std::string& frames_path,
            const std::string& metrics_path, std::ostream& out) {
  ToyConfig cfg;
  cfg.cells = cells;
  cfg.iterations = iterations;
  cfg.step = step;
  cfg.sign_updates = sign_updates;
  cfg.seed = seed;
  cfg.frame_every = every;
  cfg.objective.kind = parse_loss_kind(loss);
  cfg.objective.loss.lambda = lambda;
  cfg.objective.temperature = temperature;

  const ToyResult result = run_toy(cfg);
  if (!frames_path.empty()) {
    emit(frames_path, out, [&](std::ostream& os) { write_toy_frames_csv(os, result.frames); });
  }
  emit(metrics_path, out, [&](std::ostream& os) { write_toy_metrics_csv(os, result.metrics); });
  return kSuccess;
}

int cmd_adapt(const ModelFlags& mf, const LoopFlags& lf, const std::string& out_path,
              const std::string& latent_path, std::ostream& out, std::ostream& err) {
  const LoopConfig cfg = to_loop_config(lf);
  const SyntheticModel model = to_model(mf, lf.seed);
  const AdaptationResult result = run_adaptation(model, model.prompt(), cfg);

  emit(out_path, out, [&](std::ostream& os) { write_trace_csv(os, result.trace); });
  if (!latent_path.empty()) {
    emit(latent_path, out, [&](std::ostream& os) {
      os << "index,value\n";
      for (std::size_t i = 0; i < result.final_state.x.size(); ++i) {
        os << i << ',' << csv::format(result.final_state.x[i]) << '\n';
      }
    });
  }
  err << "updates=" << result.updates << " model_evaluations=" << result.model_evaluations
      << " steps=" << result.trace.size() << '\n';
  if (result.failure) {
    err << "error: " << *result.failure << '\n';
    return kNumericalFailure;
  }
  return kSuccess;
}

int cmd_sweep(const ModelFlags& mf, const LoopFlags& lf, const std::string& alphas_text,
              const std::string& out_path, std::ostream& out) {
  const LoopConfig cfg = to_loop_config(lf);
  const SyntheticModel model = to_model(mf, lf.seed);
  const auto alphas = alphas_text.empty() ? default_sweep_alphas() : parse_list(alphas_text);
  const auto points = alpha_sweep(model, model.prompt(), cfg, alphas);
  emit(out_path, out, [&](std::ostream& os) { write_sweep_csv(os, points); });
  return kSuccess;
}

BlockRange full_range(const std::vector<int>& values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

int cmd_score(const std::string& dump_path, const std::string& baseline_path,
              const std::string& blocks_text, const std::string& timesteps_text,
              const std::string& csv_path, const std::string& json_path, std::ostream& out) {
  const AttentionDump dump = read_dump(dump_path);
  const BlockRange blocks = parse_range(blocks_text);
  const BlockRange timesteps = timesteps_text.empty()
                                   ? full_range(dump.manifest().timesteps)
                                   : parse_range(timesteps_text);
  const ScoreSeries series = disentanglement_score(dump, dump.token_spec(), blocks, timesteps);

  std::optional<ScoreSeries> base;
  if (!baseline_path.empty()) {
    const AttentionDump base_dump = read_dump(baseline_path);
    base = disentanglement_score(base_dump, base_dump.token_spec(), blocks, timesteps);
  }

  emit(csv_path, out, [&](std::ostream& os) {
    if (base) {
      const LabelledSeries both[] = {{"jedi", &series}, {"base", &*base}};
      write_series_csv(os, both);
    } else {
      const LabelledSeries one[] = {{"jedi", &series}};
      write_series_csv(os, one);
    }
  });
  if (!json_path.empty()) {
    emit(json_path, out, [&](std::ostream& os) { os << score_summary_json(series); });
  }
  return kSuccess;
}

int cmd_extract(const std::string& dump_path, const std::string& timesteps_text,
                const std::string& blocks_text, const std::string& out_path,
                std::ostream& out, std::ostream& err) {
  const AttentionDump dump = read_dump(dump_path);
  const auto& mf = dump.manifest();
  const BlockRange timesteps =
      timesteps_text.empty() ? full_range(mf.timesteps) : parse_range(timesteps_text);
  const BlockRange blocks = blocks_text.empty() ? full_range(mf.blocks) : parse_range(blocks_text);
  const auto grid = image_grid(mf.n);

  std::size_t degenerate = 0;
  emit(out_path, out, [&](std::ostream& os) {
    os << "timestep,block,token,label,row,col,value\n";
    for (std::size_t ti = 0; ti < mf.timesteps.size(); ++ti) {
      if (!timesteps.contains(mf.timesteps[ti])) continue;
      for (std::size_t bi = 0; bi < mf.blocks.size(); ++bi) {
        if (!blocks.contains(mf.blocks[bi])) continue;
        const JointAttentionMatrix a = dump.matrix_at(ti, bi);
        for (std::size_t tok = 0; tok < mf.m; ++tok) {
          const ExtractedField ext = extract_token_field(a, tok);
          degenerate += ext.degenerate ? 1 : 0;
          const std::string label = mf.token_labels.empty() ? "" : mf.token_labels[tok];
          for (std::size_t i = 0; i < ext.field.size(); ++i) {
            const std::size_t row = grid ? i / grid->width : 0;
            const std::size_t col = grid ? i % grid->width : i;
            os << mf.timesteps[ti] << ',' << mf.blocks[bi] << ',' << tok << ',' << label << ','
               << row << ',' << col << ',' << csv::format(ext.field[i]) << '\n';
          }
        }
      }
    }
  });
  if (degenerate > 0) {
    err << "warning: " << degenerate << " token field(s) were all-zero; used uniform fallback\n";
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Jensen-Shannon disentanglement of attention maps", "jedi"};
  app.require_subcommand(1);

  // toy
  auto* toy = app.add_subcommand("toy", "Four overlapping 1-D Gaussians, two groups");
  std::string toy_loss = "jedi";
  std::uint64_t toy_seed = 0;
  ToyConfig toy_defaults;
  std::size_t toy_iters = toy_defaults.iterations;
  double toy_step = toy_defaults.step;
  bool toy_sign = toy_defaults.sign_updates;
  double toy_lambda = kDefaultLambda;
  double toy_temperature = kDefaultTemperature;
  std::size_t toy_cells = toy_defaults.cells;
  std::size_t toy_every = toy_defaults.frame_every;
  std::string toy_frames;
  std::string toy_metrics;
  toy->add_option("--loss", toy_loss, "jedi | nt-xent")->capture_default_str();
  toy->add_option("--seed", toy_seed, "Jitter seed")->capture_default_str();
  toy->add_option("--iters", toy_iters, "Optimization iterations")->capture_default_str();
  toy->add_option("--step", toy_step, "Step size")->capture_default_str();
  toy->add_flag("--sign", toy_sign, "Step along the gradient sign instead of plain descent");
  toy->add_option("--lambda", toy_lambda, "Diversity weight")->capture_default_str();
  toy->add_option("--temperature", toy_temperature, "NT-Xent temperature")->capture_default_str();
  toy->add_option("--cells", toy_cells, "Cells per distribution")->capture_default_str();
  toy->add_option("--every", toy_every, "Snapshot interval")->capture_default_str();
  toy->add_option("--frames", toy_frames, "Write distribution snapshots CSV");
  toy->add_option("--metrics", toy_metrics, "Write per-snapshot metrics CSV (default stdout)");

  // adapt
  auto* adapt = app.add_subcommand("adapt", "Test-time adaptation on the synthetic model");
  ModelFlags adapt_model;
  LoopFlags adapt_loop;
  std::string adapt_out;
  std::string adapt_latent;
  add_model_flags(adapt, adapt_model);
  add_loop_flags(adapt, adapt_loop, true);
  adapt->add_option("--out", adapt_out, "Trace CSV (default stdout)");
  adapt->add_option("--latent-out", adapt_latent, "Final latent CSV");

  // score
  auto* score = app.add_subcommand("score", "Disentanglement score of an attention dump");
  std::string score_dump;
  std::string score_base;
  std::string score_blocks = "7:15";
  std::string score_timesteps;
  std::string score_csv;
  std::string score_json;
  score->add_option("dump", score_dump, "Attention dump")->required();
  score->add_option("--baseline", score_base, "Second dump, exported as the base_* columns");
  score->add_option("--blocks", score_blocks, "Inclusive block range lo:hi")->capture_default_str();
  score->add_option("--timesteps", score_timesteps, "Inclusive timestep range lo:hi (default all)");
  score->add_option("--out-csv", score_csv, "Series CSV (default stdout)");
  score->add_option("--out-json", score_json, "Summary JSON");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Learning-rate sweep on the synthetic model");
  ModelFlags sweep_model;
  LoopFlags sweep_loop;
  std::string sweep_alphas;
  std::string sweep_out;
  add_model_flags(sweep, sweep_model);
  add_loop_flags(sweep, sweep_loop, false);
  sweep->add_option("--alphas", sweep_alphas, "Comma-separated step sizes (default: nine-point grid)");
  sweep->add_option("--out", sweep_out, "Sweep CSV (default stdout)");

  // extract
  auto* extract = app.add_subcommand("extract", "Per-token attention grids from a dump");
  std::string extract_dump;
  std::string extract_timesteps;
  std::string extract_blocks;
  std::string extract_out;
  extract->add_option("dump", extract_dump, "Attention dump")->required();
  extract->add_option("--timesteps", extract_timesteps, "Inclusive timestep range (default all)");
  extract->add_option("--blocks", extract_blocks, "Inclusive block range (default all)");
  extract->add_option("--out", extract_out, "Output CSV (default stdout)");

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (*toy) {
      return cmd_toy(toy_loss, toy_seed, toy_iters, toy_step, toy_sign, toy_lambda,
                     toy_temperature, toy_cells, toy_every, toy_frames, toy_metrics, out);
    }
    if (*adapt) return cmd_adapt(adapt_model, adapt_loop, adapt_out, adapt_latent, out, err);
    if (*score) {
      return cmd_score(score_dump, score_base, score_blocks, score_timesteps, score_csv,
                       score_json, out);
    }
    if (*sweep) return cmd_sweep(sweep_model, sweep_loop, sweep_alphas, sweep_out, out);
    if (*extract) {
      return cmd_extract(extract_dump, extract_timesteps, extract_blocks, extract_out, out, err);
    }
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  err << app.help();
  return kUsage;
}

}  // namespace jedi::cli
