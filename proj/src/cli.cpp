#include "srplan/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "srplan/dse.hpp"
#include "srplan/error.hpp"
#include "srplan/imaging.hpp"
#include "srplan/io.hpp"
#include "srplan/modelspace.hpp"
#include "srplan/perfmodel.hpp"
#include "srplan/profile.hpp"
#include "srplan/report.hpp"
#include "srplan/scheduler.hpp"
#include "srplan/tv.hpp"

namespace srplan::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
  std::string image;
  std::string profile;
  std::string catalog;
  std::string quality;
  std::string calibration;
  std::string curve;
  std::string tvs;
  std::string patch = "90x160";
  int overlap = imaging::kDefaultOverlap;
  int scale = 4;
  std::string upscaler = "bicubic";
  std::string image_out;
  std::string calibration_out;
  std::string tv_mode = "luma";
  std::string thr;
  int n_tv = 10;
  std::string eps_max;
  std::string eps_list = "0,0.1,0.25,0.5,1,2,inf";
  std::string m1;
  std::string m2;
  std::string reference;
  std::string split;
  std::string series;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool fast = false;
  std::string out;
  std::string format = "json";
};

double parse_real(std::string_view text, std::string_view flag) {
  if (text == "inf" || text == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || std::isnan(v)) {
    throw Error(ErrorKind::invalid_argument,
                std::string(flag) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

std::vector<double> parse_list(std::string_view text, std::string_view flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    if (!item.empty()) {
      out.push_back(parse_real(item, flag));
    }
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  if (out.empty()) {
    throw Error(ErrorKind::invalid_argument, std::string(flag) + ": empty list");
  }
  return out;
}

void require_files(std::initializer_list<const std::string*> paths) {
  for (const std::string* p : paths) {
    if (!p->empty() && !fs::is_regular_file(*p)) {
      throw Error(ErrorKind::io, "cannot open '" + *p + "'");
    }
  }
}

void require_flag(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw Error(ErrorKind::invalid_argument, std::string(flag) + " is required");
  }
}

void emit(const RunConfig& cfg, std::ostream& out, const json& doc, const std::string& csv) {
  const std::string text = cfg.format == "csv" ? csv : doc.dump(2) + "\n";
  if (cfg.out.empty()) {
    out << text;
  } else {
    io::write_file(cfg.out, text);
  }
}

std::vector<tv::TvValue> patch_tvs(const RunConfig& cfg,
                                   std::optional<profile::QualityProfile>& quality) {
  if (!cfg.quality.empty()) {
    quality = profile::load_quality_profile(cfg.quality);
    return quality->tv_values();
  }
  if (!cfg.image.empty()) {
    const auto image = imaging::load_image(cfg.image);
    const auto parts = imaging::partition(image, imaging::parse_patch_size(cfg.patch), cfg.overlap);
    std::vector<tv::TvValue> out;
    for (const auto& p : parts.patches) {
      out.push_back(tv::total_variation(p, tv::parse_channel_mode(cfg.tv_mode)));
    }
    return out;
  }
  std::vector<tv::TvValue> out;
  for (double v : parse_list(cfg.tvs, "--tvs")) {
    out.emplace_back(v);
  }
  return out;
}

std::string default_reference(const modelspace::Catalog& catalog) {
  for (const auto& m : catalog.models()) {
    if (m.is_reference()) {
      return m.id;
    }
  }
  throw Error(ErrorKind::validation, "catalog has no reference model");
}

dse::DseRequest load_request(const RunConfig& cfg) {
  require_flag(cfg.catalog, "--catalog");
  require_flag(cfg.profile, "--profile");
  require_flag(cfg.quality, "--quality");
  require_files({&cfg.catalog, &cfg.profile, &cfg.quality, &cfg.calibration});
  dse::DseRequest req;
  req.catalog = modelspace::load_catalog(cfg.catalog);
  req.device = profile::load_device_profile(cfg.profile);
  req.quality = profile::load_quality_profile(cfg.quality);
  req.calibration = cfg.calibration.empty() ? req.quality.as_calibration()
                                            : tv::load_calibration(cfg.calibration);
  req.n_tv = cfg.n_tv;
  req.reference = cfg.reference.empty() ? default_reference(req.catalog) : cfg.reference;
  req.eps_max_db = cfg.eps_max.empty() ? 0.0 : parse_real(cfg.eps_max, "--eps-max");
  return req;
}

int cmd_tv(const RunConfig& cfg, std::ostream& out) {
  require_flag(cfg.image, "--image");
  require_files({&cfg.image});
  const auto patch = imaging::parse_patch_size(cfg.patch);
  const auto mode = tv::parse_channel_mode(cfg.tv_mode);
  const auto image = imaging::load_image(cfg.image);
  const auto parts = imaging::partition(image, patch, cfg.overlap);

  json rows = json::array();
  std::ostringstream csv;
  csv << "patch_id,row,col,tv\n";
  for (const auto& p : parts.patches) {
    const double tv = tv::total_variation(p, mode).value();
    rows.push_back({{"patch_id", p.index},
                    {"row", p.origin.row},
                    {"col", p.origin.col},
                    {"tv", io::number_json(tv)}});
    csv << p.index << ',' << p.origin.row << ',' << p.origin.col << ','
        << io::format_number(tv) << '\n';
  }
  if (!cfg.calibration_out.empty()) {
    const auto cal = tv::calibrate(parts.patches, fs::path(cfg.image).filename().string(), mode);
    io::write_file(cfg.calibration_out, tv::to_json(cal).dump(2) + "\n");
  }
  emit(cfg, out,
       {{"image", {image.height(), image.width()}},
        {"patch", {parts.plan.patch.height, parts.plan.patch.width}},
        {"overlap", cfg.overlap},
        {"tv_mode", cfg.tv_mode},
        {"patches", rows}},
       csv.str());
  return kOk;
}

int cmd_partition(const RunConfig& cfg, std::ostream& out) {
  require_flag(cfg.image, "--image");
  require_files({&cfg.image});
  const auto patch = imaging::parse_patch_size(cfg.patch);
  const auto image = imaging::load_image(cfg.image);
  const auto parts = imaging::partition(image, patch, cfg.overlap);

  if (!cfg.image_out.empty()) {
    const auto mode = imaging::parse_upscaler(cfg.upscaler);
    std::vector<imaging::Patch> upscaled;
    upscaled.reserve(parts.patches.size());
    for (const auto& p : parts.patches) {
      upscaled.push_back(imaging::upscale_reference(p, cfg.scale, mode));
    }
    imaging::save_image(imaging::stitch(upscaled, parts.plan, cfg.scale), cfg.image_out);
  }

  json origins = json::array();
  std::ostringstream csv;
  csv << "patch_id,row,col,height,width\n";
  for (std::size_t i = 0; i < parts.plan.origins.size(); ++i) {
    const auto o = parts.plan.origins[i];
    origins.push_back({o.row, o.col});
    csv << i << ',' << o.row << ',' << o.col << ',' << parts.plan.patch.height << ','
        << parts.plan.patch.width << '\n';
  }
  emit(cfg, out,
       {{"image", {parts.plan.image_height, parts.plan.image_width}},
        {"patch", {parts.plan.patch.height, parts.plan.patch.width}},
        {"overlap", parts.plan.overlap},
        {"origins", origins}},
       csv.str());
  return kOk;
}

struct ScheduleInputs {
  profile::DeviceProfile device;
  std::vector<tv::TvValue> tvs;
  std::optional<profile::QualityProfile> quality;
  scheduler::ModelPair pair;
  tv::TvThreshold thr;
};

ScheduleInputs schedule_inputs(const RunConfig& cfg) {
  require_flag(cfg.profile, "--profile");
  require_flag(cfg.m1, "--m1");
  require_flag(cfg.m2, "--m2");
  require_flag(cfg.thr, "--thr");
  if (cfg.quality.empty() && cfg.image.empty() && cfg.tvs.empty()) {
    throw Error(ErrorKind::invalid_argument, "one of --quality, --image or --tvs is required");
  }
  require_files({&cfg.profile, &cfg.quality, &cfg.image});
  ScheduleInputs in;
  in.thr = tv::TvThreshold(parse_real(cfg.thr, "--thr"));
  in.device = profile::load_device_profile(cfg.profile);
  in.tvs = patch_tvs(cfg, in.quality);
  in.pair = {cfg.m1, cfg.m2};
  return in;
}

json quality_json(const scheduler::QualitySummary& q) {
  return {{"mean_psnr_db", io::number_json(q.mean_db)},
          {"counted", q.counted},
          {"infinite", q.infinite}};
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const auto in = schedule_inputs(cfg);
  const auto result = scheduler::schedule(in.tvs, in.pair, in.thr, in.device);
  json doc = scheduler::to_json(result);
  doc["thr"] = io::number_json(in.thr.value());
  if (in.quality) {
    doc["quality"] = quality_json(scheduler::quality_of_schedule(result, *in.quality));
  }
  emit(cfg, out, doc, scheduler::to_csv(result));
  return kOk;
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out) {
  const auto in = schedule_inputs(cfg);
  std::optional<std::vector<double>> split;
  if (!cfg.split.empty()) {
    split = parse_list(cfg.split, "--split");
  }
  const auto strict = perfmodel::strict_split_estimate(in.tvs, in.pair, in.thr, in.device, split);
  const double bound = perfmodel::fractional_lower_bound(in.tvs, in.pair, in.thr, in.device);
  const auto sim =
      perfmodel::simulated_estimate(scheduler::schedule(in.tvs, in.pair, in.thr, in.device));

  json doc{{"m1", in.pair.m1},
           {"m2", in.pair.m2},
           {"thr", io::number_json(in.thr.value())},
           {"strict_split", perfmodel::to_json(strict)},
           {"fractional_bound_ms", io::number_json(bound)},
           {"simulated", perfmodel::to_json(sim)}};
  if (in.quality) {
    doc["strict_split"]["quality"] =
        quality_json(perfmodel::strict_split_quality(*in.quality, in.pair, in.thr));
    doc["simulated"]["quality"] = quality_json(scheduler::quality_of_schedule(
        scheduler::schedule(in.tvs, in.pair, in.thr, in.device), *in.quality));
  }
  std::string csv = perfmodel::to_csv(strict);
  const std::string sim_csv = perfmodel::to_csv(sim);
  csv += sim_csv.substr(sim_csv.find('\n') + 1);
  csv += "fractional-bound,*,,," + io::format_number(bound) + "\n";
  emit(cfg, out, doc, csv);
  return kOk;
}

int cmd_prune(const RunConfig& cfg, std::ostream& out) {
  require_flag(cfg.catalog, "--catalog");
  require_flag(cfg.profile, "--profile");
  require_flag(cfg.quality, "--quality");
  require_files({&cfg.catalog, &cfg.profile, &cfg.quality});
  const auto catalog = modelspace::load_catalog(cfg.catalog);
  const auto device = profile::load_device_profile(cfg.profile);
  const auto quality = profile::load_quality_profile(cfg.quality);
  quality.validate_against(catalog);
  const auto fronts = dse::engine_fronts(catalog, device, quality);

  json jf = json::array();
  for (const auto& f : fronts) {
    auto points = [](const std::vector<dse::ParetoPoint>& ps) {
      json arr = json::array();
      for (const auto& p : ps) {
        arr.push_back({{"model", p.model},
                       {"psnr_db", io::number_json(p.psnr)},
                       {"latency_ms", io::number_json(p.latency)}});
      }
      return arr;
    };
    jf.push_back({{"engine", f.engine}, {"points", points(f.points)},
                  {"retained", points(f.retained)}});
  }
  emit(cfg, out, {{"fronts", jf}, {"retained", dse::retained_models(catalog, fronts)}},
       dse::fronts_csv(fronts));
  return kOk;
}

int cmd_search(const RunConfig& cfg, std::ostream& out) {
  require_flag(cfg.eps_max, "--eps-max");
  const auto req = load_request(cfg);
  const auto result = dse::search(req, {cfg.threads, cfg.fast});
  json doc = dse::to_json(result);
  doc["eps_max_db"] = io::number_json(req.eps_max_db);
  doc["n_tv"] = req.n_tv;
  doc["design_count"] = modelspace::design_count(result.retained.size(),
                                                 static_cast<std::uint64_t>(req.n_tv));
  emit(cfg, out, doc, dse::table_csv(result.table));
  return result.status == dse::SearchStatus::feasible ? kOk : kNoFeasible;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  const auto req = load_request(cfg);
  if (cfg.series == "tv") {
    require_flag(cfg.m1, "--m1");
    require_flag(cfg.m2, "--m2");
    const auto rows = report::tv_sweep(req, {cfg.m1, cfg.m2});
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"thr", io::number_json(r.thr)},
                     {"hard_patches", r.hard_patches},
                     {"simulated_ms", io::number_json(r.simulated_ms)},
                     {"simulated_psnr_db", io::number_json(r.simulated_psnr_db)},
                     {"strict_ms", io::number_json(r.strict_ms)},
                     {"strict_psnr_db", io::number_json(r.strict_psnr_db)},
                     {"bound_ms", io::number_json(r.bound_ms)}});
    }
    emit(cfg, out, {{"series", "tv"}, {"m1", cfg.m1}, {"m2", cfg.m2}, {"rows", arr}},
         report::tv_sweep_csv(rows));
    return kOk;
  }
  if (cfg.series == "eps") {
    const auto eps = parse_list(cfg.eps_list, "--eps-list");
    for (double e : eps) {
      if (e < 0.0) {
        throw Error(ErrorKind::invalid_argument, "--eps-list values must be >= 0");
      }
    }
    const auto baselines = report::reference_baselines(req);
    const auto rows = report::eps_sweep(req, eps, baselines, {cfg.threads, cfg.fast});
    json jb = json::array();
    for (const auto& b : baselines) {
      jb.push_back({{"label", b.label}, {"latency_ms", io::number_json(b.latency_ms)}});
    }
    json arr = json::array();
    bool all_feasible = true;
    for (const auto& r : rows) {
      json speedups = json::array();
      for (double s : r.speedup) {
        speedups.push_back(io::number_json(s));
      }
      arr.push_back({{"eps_max_db", io::number_json(r.eps_max_db)},
                     {"status", r.status == dse::SearchStatus::feasible ? "feasible"
                                                                        : "no_feasible"},
                     {"best", dse::to_json(r.best)},
                     {"speedup", speedups}});
      all_feasible = all_feasible && r.status == dse::SearchStatus::feasible;
    }
    emit(cfg, out, {{"series", "eps"}, {"baselines", jb}, {"rows", arr}},
         report::eps_sweep_csv(rows, baselines));
    return all_feasible ? kOk : kNoFeasible;
  }
  throw Error(ErrorKind::invalid_argument, "--series must be 'tv' or 'eps'");
}

int cmd_synthesize(const RunConfig& cfg, std::ostream& out) {
  require_flag(cfg.curve, "--curve");
  if (cfg.calibration.empty() && cfg.image.empty() && cfg.tvs.empty()) {
    throw Error(ErrorKind::invalid_argument,
                "one of --calibration, --image or --tvs is required");
  }
  require_files({&cfg.curve, &cfg.calibration, &cfg.image});
  const auto spec = profile::curve_spec_from_json(io::load_json(cfg.curve));
  std::vector<double> tvs;
  if (!cfg.calibration.empty()) {
    for (const auto& v : tv::load_calibration(cfg.calibration).tv_values) {
      tvs.push_back(v.value());
    }
  } else {
    std::optional<profile::QualityProfile> unused;
    for (const auto& v : patch_tvs(cfg, unused)) {
      tvs.push_back(v.value());
    }
  }
  const auto q = profile::synthesize_quality(tvs, spec, cfg.seed);
  std::ostringstream csv;
  csv << "patch_id,tv,model,psnr_db\n";
  for (const auto& r : q.records) {
    for (const auto& [model, db] : r.psnr) {
      csv << r.patch_id << ',' << io::format_number(r.tv) << ',' << model << ','
          << io::format_number(db) << '\n';
    }
  }
  emit(cfg, out, profile::to_json(q), csv.str());
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
    case ErrorKind::format:
      return kIoError;
    case ErrorKind::invalid_argument:
      return kBadFlags;
    case ErrorKind::validation:
    case ErrorKind::unavailable:
    case ErrorKind::no_formula:
      return kValidation;
  }
  return kValidation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Difficulty-aware super-resolution deployment planner"};
  app.name(args.empty() ? "srplan" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Write output here instead of stdout");
    sub->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };
  auto add_patching = [&](CLI::App* sub) {
    sub->add_option("--patch", cfg.patch, "Patch size HxW")->capture_default_str();
    sub->add_option("--overlap", cfg.overlap, "Overlap in pixels")->capture_default_str();
    sub->add_option("--tv-mode", cfg.tv_mode, "luma or rgb-sum")
        ->check(CLI::IsMember({"luma", "rgb-sum"}))
        ->capture_default_str();
  };
  auto add_tv_source = [&](CLI::App* sub) {
    auto* q = sub->add_option("--quality", cfg.quality, "Quality profile JSON (record TVs)");
    auto* i = sub->add_option("--image", cfg.image, "PGM/PPM image to partition");
    auto* t = sub->add_option("--tvs", cfg.tvs, "Comma-separated patch TVs");
    q->excludes(i)->excludes(t);
    i->excludes(t);
    add_patching(sub);
  };
  auto add_pair = [&](CLI::App* sub) {
    sub->add_option("--m1", cfg.m1, "Accurate model id");
    sub->add_option("--m2", cfg.m2, "Compact model id");
  };
  auto add_dse = [&](CLI::App* sub) {
    sub->add_option("--catalog", cfg.catalog, "Model catalog JSON");
    sub->add_option("--profile", cfg.profile, "Device profile JSON");
    sub->add_option("--quality", cfg.quality, "Quality profile JSON");
    sub->add_option("--calibration", cfg.calibration, "Calibration set JSON");
    sub->add_option("--n-tv", cfg.n_tv, "Number of candidate thresholds")->capture_default_str();
    sub->add_option("--reference", cfg.reference, "Reference model id");
    sub->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
    sub->add_flag("--fast", cfg.fast, "Screen with the strict-split estimator first");
  };

  auto* tv_cmd = app.add_subcommand("tv", "Per-patch total variation of an image");
  tv_cmd->add_option("--image", cfg.image, "PGM/PPM image");
  tv_cmd->add_option("--calibration-out", cfg.calibration_out, "Also write a calibration set");
  add_patching(tv_cmd);
  add_output(tv_cmd);

  auto* part_cmd = app.add_subcommand("partition", "Overlapping patch layout of an image");
  part_cmd->add_option("--image", cfg.image, "PGM/PPM image");
  part_cmd->add_option("--scale", cfg.scale, "Upscaling factor (2 or 4)")->capture_default_str();
  part_cmd->add_option("--upscaler", cfg.upscaler, "nearest or bicubic")
      ->check(CLI::IsMember({"nearest", "bicubic"}))
      ->capture_default_str();
  part_cmd->add_option("--image-out", cfg.image_out,
                       "Upscale every patch, stitch, and write the result here");
  add_patching(part_cmd);
  add_output(part_cmd);

  auto* sim_cmd = app.add_subcommand("simulate", "Run the difficulty-aware scheduler");
  sim_cmd->add_option("--profile", cfg.profile, "Device profile JSON");
  sim_cmd->add_option("--thr", cfg.thr, "TV threshold (number or inf)");
  add_pair(sim_cmd);
  add_tv_source(sim_cmd);
  add_output(sim_cmd);

  auto* est_cmd = app.add_subcommand("estimate", "Analytical latency estimates");
  est_cmd->add_option("--profile", cfg.profile, "Device profile JSON");
  est_cmd->add_option("--thr", cfg.thr, "TV threshold (number or inf)");
  est_cmd->add_option("--split", cfg.split, "m1 split over psnr-preserving engines, e.g. 0.5,0.5");
  add_pair(est_cmd);
  add_tv_source(est_cmd);
  add_output(est_cmd);

  auto* prune_cmd = app.add_subcommand("prune", "Per-engine Pareto fronts");
  prune_cmd->add_option("--catalog", cfg.catalog, "Model catalog JSON");
  prune_cmd->add_option("--profile", cfg.profile, "Device profile JSON");
  prune_cmd->add_option("--quality", cfg.quality, "Quality profile JSON");
  add_output(prune_cmd);

  auto* search_cmd = app.add_subcommand("search", "Exhaustive design-space search");
  search_cmd->add_option("--eps-max", cfg.eps_max, "Tolerated PSNR drop in dB");
  add_dse(search_cmd);
  add_output(search_cmd);

  auto* report_cmd = app.add_subcommand("report", "Plot series: --series tv or eps");
  report_cmd->add_option("--series", cfg.series, "tv (latency/PSNR vs threshold) or eps")
      ->check(CLI::IsMember({"tv", "eps"}));
  report_cmd->add_option("--eps-list", cfg.eps_list, "Tolerances for the eps series")
      ->capture_default_str();
  add_pair(report_cmd);
  add_dse(report_cmd);
  add_output(report_cmd);

  auto* synth_cmd = app.add_subcommand("synthesize", "Synthetic quality profile from a curve");
  synth_cmd->add_option("--curve", cfg.curve, "Curve spec JSON");
  synth_cmd->add_option("--calibration", cfg.calibration, "TVs from a calibration set");
  synth_cmd->add_option("--seed", cfg.seed, "Noise seed")->capture_default_str();
  add_tv_source(synth_cmd);
  add_output(synth_cmd);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  if (args.empty()) {
    argv.push_back("srplan");
  }
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadFlags;
  }

  try {
    if (*tv_cmd) return cmd_tv(cfg, out);
    if (*part_cmd) return cmd_partition(cfg, out);
    if (*sim_cmd) return cmd_simulate(cfg, out);
    if (*est_cmd) return cmd_estimate(cfg, out);
    if (*prune_cmd) return cmd_prune(cfg, out);
    if (*search_cmd) return cmd_search(cfg, out);
    if (*report_cmd) {
      if (cfg.series.empty()) {
        throw Error(ErrorKind::invalid_argument, "--series is required");
      }
      return cmd_report(cfg, out);
    }
    if (*synth_cmd) return cmd_synthesize(cfg, out);
  } catch (const Error& e) {
    err << app.get_name() << ": error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << app.get_name() << ": error: " << e.what() << '\n';
    return kValidation;
  }
  return kBadFlags;
}

}  // namespace srplan::cli
