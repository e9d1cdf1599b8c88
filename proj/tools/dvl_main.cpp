// dvl: predicts the difficulty of data-visualization-literacy test items from
// their text and/or chart image via a schema-constrained chat-completions
// endpoint, and evaluates predictions against aggregated response data.

#include "dvl/aggregation.hpp"
#include "dvl/config.hpp"
#include "dvl/csv.hpp"
#include "dvl/errors.hpp"
#include "dvl/evaluation.hpp"
#include "dvl/fsio.hpp"
#include "dvl/image_prep.hpp"
#include "dvl/ingestion.hpp"
#include "dvl/llm_client.hpp"
#include "dvl/manifest.hpp"
#include "dvl/predictors.hpp"
#include "dvl/schemas.hpp"
#include "dvl/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

// Exit codes: 0 success, 1 data/runtime error, 2 config/usage error,
// 3 auth error, 4 batch completed with per-item failures.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAuth = 3;
constexpr int kExitPartial = 4;

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string((std::istreambuf_iterator<char>(std::cin)),
                       std::istreambuf_iterator<char>());
  }
  return dvl::io::read_file(path);
}

dvl::ingestion::ParseOptions make_parse_options(const std::string& delimiter) {
  if (delimiter.size() != 1) {
    throw dvl::ConfigError("--options-delimiter must be a single character");
  }
  return {delimiter[0]};
}

int cmd_aggregate(const std::string& input, const std::string& output,
                  const std::string& delimiter) {
  const auto opts = make_parse_options(delimiter);
  const auto records = dvl::ingestion::parse_response_records_string(read_input(input), opts);
  if (records.empty()) throw dvl::MissingDataError("no response rows in " + input);

  const auto aggregates = dvl::aggregation::aggregate_items(records);
  dvl::io::write_file_atomic(output, dvl::aggregation::write_aggregates_csv(aggregates, opts));

  double lo = 1.0, hi = 0.0;
  for (const auto& agg : aggregates) {
    lo = std::min(lo, agg.difficulty);
    hi = std::max(hi, agg.difficulty);
  }
  std::cout << "aggregated " << aggregates.size() << " items from " << records.size()
            << " responses; difficulty range [" << dvl::io::format_double(lo) << ", "
            << dvl::io::format_double(hi) << "]\n";
  return kExitOk;
}

int cmd_split(const std::string& input, double fraction, std::uint64_t seed,
              const std::string& out_validation, const std::string& out_test,
              const std::string& delimiter) {
  const auto opts = make_parse_options(delimiter);
  const auto items = dvl::aggregation::parse_aggregates_csv_string(read_input(input), opts);
  if (items.empty()) throw dvl::MissingDataError("no items in " + input);

  const auto split = dvl::aggregation::split_dataset(items, fraction, seed);
  dvl::io::write_file_atomic(out_validation,
                             dvl::aggregation::write_aggregates_csv(split.validation, opts));
  dvl::io::write_file_atomic(out_test, dvl::aggregation::write_aggregates_csv(split.test, opts));
  std::cout << "split " << items.size() << " items into " << split.validation.size()
            << " validation / " << split.test.size() << " test (seed " << seed << ")\n";
  return kExitOk;
}

nlohmann::json sanitized_config_snapshot(const dvl::config::PredictSettings& settings,
                                         const dvl::predictors::BatchConfig& batch,
                                         bool offline) {
  return {{"base_url", settings.client.base_url},
          {"model_id", settings.client.model_id},
          {"api_key_env", settings.client.api_key_env_var},
          {"timeout_s", settings.client.timeout_s},
          {"max_retries", settings.client.max_retries},
          {"requests_per_minute", settings.client.requests_per_minute},
          {"cache_dir", settings.client.cache_dir.string()},
          {"temperature", batch.temperature},
          {"max_output_tokens", batch.max_output_tokens},
          {"max_concurrency", batch.max_concurrency},
          {"fallback_value", batch.fallback_value},
          {"rasterize_svg", batch.image_policy.rasterize_svg},
          {"raster_width", batch.image_policy.raster_width},
          {"offline_fixture", offline}};
}

int cmd_predict(const std::string& mode, const std::string& items_path,
                const std::string& config_path, const std::string& out_path,
                const std::string& fixture_path, const std::string& delimiter,
                bool rasterize_svg, double fallback_value, int max_concurrency,
                const std::string& images_dir) {
  const auto started = dvl::io::iso8601_utc_now();
  const auto kind = dvl::schemas::kind_from_string(mode);
  const auto opts = make_parse_options(delimiter);
  auto settings = dvl::config::load_predict_settings(config_path);

  const bool offline = !fixture_path.empty();
  if (offline) {
    // Fixture runs are free and must be byte-reproducible, so no bearer auth
    // and no response cache (a warm cache would flip provenance on reruns).
    settings.client.api_key_env_var.clear();
    settings.client.cache_dir.clear();
  }

  const auto items = dvl::ingestion::parse_item_manifest_string(read_input(items_path), opts);
  if (items.empty()) throw dvl::MissingDataError("no items in " + items_path);

  dvl::predictors::BatchConfig batch;
  batch.max_concurrency = max_concurrency;
  batch.fallback_value = fallback_value;
  batch.image_policy.rasterize_svg = rasterize_svg;
  batch.temperature = settings.temperature;
  batch.max_output_tokens = settings.max_output_tokens;

  std::unique_ptr<dvl::llm::HttpTransport> transport;
  if (offline) {
    transport = std::make_unique<dvl::simulator::FixtureTransport>(
        dvl::simulator::FixtureSpec::load(fixture_path));
  }
  dvl::llm::Client client(settings.client, std::move(transport));

  const dvl::schemas::PromptLibrary prompts =
      settings.prompts_dir.empty()
          ? dvl::schemas::PromptLibrary::builtin()
          : dvl::schemas::PromptLibrary::load_dir(settings.prompts_dir, settings.prompt_version);

  std::unique_ptr<dvl::image::ImageLoader> loader;
  if (!images_dir.empty()) {
    loader = std::make_unique<dvl::image::FileImageLoader>(images_dir);
  } else {
    loader = dvl::image::make_default_loader(settings.client.cache_dir.empty()
                                                 ? std::filesystem::path(".dvl-cache")
                                                 : settings.client.cache_dir,
                                             settings.client.timeout_s);
  }

  const dvl::predictors::Deps deps{client, prompts, *loader};
  const auto result = dvl::predictors::predict_batch(kind, items, deps, batch);

  dvl::io::write_file_atomic(out_path, dvl::predictors::write_predictions_csv(result.records));

  if (!result.failures.empty()) {
    dvl::csv::Table failures;
    failures.header = {"index", "item_id", "error"};
    for (const auto& f : result.failures) {
      failures.rows.push_back({std::to_string(f.index), f.item_id, f.message});
    }
    dvl::io::write_file_atomic(out_path + ".failures.csv", dvl::csv::write_string(failures));
  }

  dvl::manifest::RunManifest manifest;
  manifest.command = "predict --mode " + mode;
  manifest.started_at = started;
  manifest.finished_at = dvl::io::iso8601_utc_now();
  manifest.config = sanitized_config_snapshot(settings, batch, offline);
  manifest.input_digests[items_path] = dvl::manifest::file_digest(items_path);
  manifest.input_digests[config_path] = dvl::manifest::file_digest(config_path);
  if (offline) manifest.input_digests[fixture_path] = dvl::manifest::file_digest(fixture_path);
  manifest.outputs = {out_path};
  manifest.prompt_version = prompts.version();
  manifest.model_id = settings.client.model_id;
  dvl::manifest::write(manifest, out_path + ".manifest.json");

  std::cout << "predicted " << result.records.size() << "/" << items.size() << " items ("
            << result.failures.size() << " failures); total tokens "
            << result.usage.total_tokens << "\n";
  return result.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_evaluate(const std::string& preds_path, const std::string& truth_path,
                 const std::string& out_path, std::size_t bins, const std::string& delimiter) {
  const auto started = dvl::io::iso8601_utc_now();
  const auto opts = make_parse_options(delimiter);
  const auto predictions = dvl::predictors::parse_predictions_csv_string(read_input(preds_path));
  if (predictions.empty()) throw dvl::MissingDataError("no predictions in " + preds_path);
  const auto truth = dvl::aggregation::parse_aggregates_csv_string(read_input(truth_path), opts);

  std::map<std::string, double> easiness_by_id;
  for (const auto& agg : truth) easiness_by_id[agg.item.item_id] = agg.easiness;

  // Join on item_id, grouped per pipeline kind.
  std::map<dvl::schemas::PredictorKind, std::vector<dvl::evaluation::PredictionPair>> by_kind;
  for (const auto& rec : predictions) {
    const auto it = easiness_by_id.find(rec.item_id);
    if (it == easiness_by_id.end()) {
      throw dvl::MissingDataError("prediction for item " + rec.item_id +
                                  " has no ground-truth row in " + truth_path);
    }
    by_kind[rec.kind].push_back({rec.prediction, it->second});
  }

  std::vector<dvl::evaluation::EvaluationReport> reports;
  for (const auto& [kind, pairs] : by_kind) {
    reports.push_back(dvl::evaluation::evaluate(kind, pairs, bins));
  }
  const auto ranking = dvl::evaluation::compare_pipelines(reports);

  nlohmann::json report_json = nlohmann::json::array();
  nlohmann::json ranking_json = nlohmann::json::array();
  for (const auto& report : ranking.ordered) {
    report_json.push_back(dvl::evaluation::report_to_json(report));
    ranking_json.push_back(dvl::schemas::to_string(report.kind));
  }
  const nlohmann::json out = {{"reports", report_json},
                              {"ranking", ranking_json},
                              {"best", dvl::schemas::to_string(ranking.best().kind)}};
  dvl::io::write_file_atomic(out_path, out.dump(2) + "\n");

  // Plot-ready CSVs: per-pipeline error bars and prediction distributions.
  const std::string stem =
      out_path.size() > 5 && out_path.ends_with(".json") ? out_path.substr(0, out_path.size() - 5)
                                                         : out_path;
  dvl::csv::Table bar;
  bar.header = {"kind", "mae", "sem_abs_error"};
  for (const auto& report : ranking.ordered) {
    bar.rows.push_back({std::string(dvl::schemas::to_string(report.kind)),
                        dvl::io::format_double(report.mae),
                        dvl::io::format_double(report.sem_abs_error)});
  }
  dvl::io::write_file_atomic(stem + ".bar.csv", dvl::csv::write_string(bar));

  dvl::csv::Table dist;
  dist.header = {"kind", "bin_lo", "bin_hi", "count"};
  for (const auto& report : ranking.ordered) {
    for (const auto& bin : report.histogram) {
      dist.rows.push_back({std::string(dvl::schemas::to_string(report.kind)),
                           dvl::io::format_double(bin.lo), dvl::io::format_double(bin.hi),
                           std::to_string(bin.count)});
    }
  }
  dvl::io::write_file_atomic(stem + ".dist.csv", dvl::csv::write_string(dist));

  dvl::manifest::RunManifest manifest;
  manifest.command = "evaluate";
  manifest.started_at = started;
  manifest.finished_at = dvl::io::iso8601_utc_now();
  manifest.input_digests[preds_path] = dvl::manifest::file_digest(preds_path);
  manifest.input_digests[truth_path] = dvl::manifest::file_digest(truth_path);
  manifest.outputs = {out_path, stem + ".bar.csv", stem + ".dist.csv"};
  dvl::manifest::write(manifest, out_path + ".manifest.json");

  for (const auto& report : ranking.ordered) {
    std::cout << dvl::schemas::to_string(report.kind) << ": n=" << report.n_items
              << " mae=" << dvl::io::format_double(report.mae)
              << " mse=" << dvl::io::format_double(report.mse)
              << " sem=" << dvl::io::format_double(report.sem_abs_error) << "\n";
  }
  std::cout << "best: " << dvl::schemas::to_string(ranking.best().kind) << "\n";
  return kExitOk;
}

int cmd_submit(const std::string& preds_path, const std::string& out_path) {
  const auto predictions = dvl::predictors::parse_predictions_csv_string(read_input(preds_path));
  if (predictions.empty()) throw dvl::MissingDataError("no predictions in " + preds_path);
  dvl::io::write_file_atomic(out_path, dvl::predictors::write_submission_csv(predictions));
  std::cout << "wrote " << predictions.size() << " rows to " << out_path << "\n";
  return kExitOk;
}

int cmd_simulate(std::size_t n_items, std::size_t n_respondents, std::uint64_t seed,
                 const std::string& out_path, const std::string& delimiter) {
  const auto opts = make_parse_options(delimiter);
  const auto items = dvl::simulator::generate_latent_items(n_items, seed);
  const auto respondents = dvl::simulator::generate_respondents(n_respondents, seed + 1);
  const auto records = dvl::simulator::simulate_responses(items, respondents, seed + 2);
  dvl::io::write_file_atomic(out_path, dvl::ingestion::write_response_records(records, opts));
  std::cout << "simulated " << records.size() << " responses (" << n_items << " items x "
            << n_respondents << " respondents) to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Predicts the difficulty of data-visualization-literacy test items from item text, chart "
      "images, or both, via any schema-constrained chat-completions endpoint, and evaluates "
      "predictions against aggregated response data."};
  app.require_subcommand(1);

  std::string options_delimiter = "|";
  app.add_option("--options-delimiter", options_delimiter,
                 "Sub-delimiter separating entries inside the possible_responses CSV cell")
      ->capture_default_str();

  // aggregate
  auto* aggregate = app.add_subcommand(
      "aggregate", "Collapse a participant-response CSV into per-item difficulty/easiness");
  std::string agg_input, agg_output = "items.csv";
  aggregate->add_option("--input", agg_input,
                        "Response CSV (item_id,image_url,question_text,possible_responses,"
                        "incorrect_response[,participant_id]); '-' for stdin")
      ->required();
  aggregate->add_option("--output", agg_output, "Aggregate CSV to write")->capture_default_str();

  // split
  auto* split = app.add_subcommand("split", "Deterministically split an aggregate CSV");
  std::string split_input, split_validation = "validation.csv", split_test = "test.csv";
  double split_fraction = 0.8;
  std::uint64_t split_seed = 0;
  split->add_option("--input", split_input, "Aggregate CSV from `aggregate`")->required();
  split->add_option("--fraction", split_fraction, "Validation fraction in (0,1)")
      ->capture_default_str();
  split->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split->add_option("--out-validation", split_validation, "Validation CSV")->capture_default_str();
  split->add_option("--out-test", split_test, "Test CSV")->capture_default_str();

  // predict
  auto* predict = app.add_subcommand(
      "predict", "Predict item easiness over a manifest with one of the three pipelines");
  std::string predict_mode, predict_items, predict_config, predict_out = "preds.csv";
  std::string predict_fixture, predict_images_dir;
  bool predict_rasterize = false;
  double predict_fallback = 0.5;
  int predict_concurrency = 4;
  predict->add_option("--mode", predict_mode, "text | vision | multimodal")->required();
  predict
      ->add_option("--items", predict_items,
                   "Item manifest CSV (item_id,image_url,question_text,possible_responses); "
                   "extra columns are ignored")
      ->required();
  predict->add_option("--config", predict_config, "Key = value config file (see README)")
      ->required();
  predict->add_option("--out", predict_out, "Predictions CSV to write")->capture_default_str();
  predict->add_option("--offline-fixture", predict_fixture,
                      "JSON fixture file; swaps the network transport for a deterministic "
                      "offline one (disables auth and the response cache)");
  predict->add_flag("--rasterize-svg", predict_rasterize,
                    "Rasterize SVG images to PNG instead of falling back");
  predict->add_option("--fallback-value", predict_fallback,
                      "Prediction assigned when an item's image cannot be processed")
      ->capture_default_str();
  predict->add_option("--max-concurrency", predict_concurrency, "Parallel requests in flight")
      ->capture_default_str();
  predict->add_option("--images-dir", predict_images_dir,
                      "Resolve relative image paths against this directory");

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Score predictions against ground truth (MAE, MSE, SEM, distributions)");
  std::string eval_preds, eval_truth, eval_out = "report.json";
  std::size_t eval_bins = 10;
  evaluate->add_option("--preds", eval_preds, "Predictions CSV from `predict`")->required();
  evaluate->add_option("--truth", eval_truth, "Aggregate CSV with item_id and easiness columns")
      ->required();
  evaluate->add_option("--out", eval_out, "Report JSON; writes <stem>.bar.csv and <stem>.dist.csv "
                                          "plot data beside it")
      ->capture_default_str();
  evaluate->add_option("--bins", eval_bins, "Histogram bin count over [0,1]")
      ->capture_default_str();

  // submit
  auto* submit = app.add_subcommand("submit", "Export a two-column item_id,prediction file");
  std::string submit_preds, submit_out = "submission.csv";
  submit->add_option("--preds", submit_preds, "Predictions CSV")->required();
  submit->add_option("--out", submit_out, "Submission CSV")->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Generate synthetic logistic-model response data for offline validation");
  std::size_t sim_items = 50, sim_respondents = 200;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "responses.csv";
  simulate->add_option("--items", sim_items, "Number of synthetic items")->capture_default_str();
  simulate->add_option("--respondents", sim_respondents, "Number of synthetic respondents")
      ->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Generation seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Response CSV to write")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (aggregate->parsed()) return cmd_aggregate(agg_input, agg_output, options_delimiter);
    if (split->parsed()) {
      return cmd_split(split_input, split_fraction, split_seed, split_validation, split_test,
                       options_delimiter);
    }
    if (predict->parsed()) {
      return cmd_predict(predict_mode, predict_items, predict_config, predict_out, predict_fixture,
                         options_delimiter, predict_rasterize, predict_fallback,
                         predict_concurrency, predict_images_dir);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(eval_preds, eval_truth, eval_out, eval_bins, options_delimiter);
    }
    if (submit->parsed()) return cmd_submit(submit_preds, submit_out);
    if (simulate->parsed()) {
      return cmd_simulate(sim_items, sim_respondents, sim_seed, sim_out, options_delimiter);
    }
  } catch (const dvl::AuthError& e) {
    std::cerr << "auth error: " << e.what() << "\n";
    return kExitAuth;
  } catch (const dvl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dvl::MissingDataError& e) {
    std::cerr << "missing data: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
