// Batch front end: synth | preprocess | train | prune | quantize | pack |
// eval | infer | report. Every stage reads and writes only the paths named on
// its command line (plus data_dir from the config where noted) and derives all
// randomness from one seed.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sqnz/pipeline.hpp"

namespace fs = std::filesystem;
using sqnz::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string in_path;
  std::string out_path;
  std::optional<std::uint64_t> seed_override;
};

sqnz::RunConfig load_config(const CommonArgs& args) {
  sqnz::RunConfig cfg = args.config_path.empty()
                            ? sqnz::RunConfig::desk_default()
                            : sqnz::runconfig_from_json(sqnz::load_json_file(args.config_path));
  if (args.seed_override) cfg.seed = *args.seed_override;
  return cfg;
}

struct PreparedData {
  std::vector<sqnz::Tensor<float>> inputs;
  std::vector<std::size_t> labels;
  sqnz::Split split;
};

PreparedData prepare(const sqnz::RunConfig& cfg, const fs::path& data_dir) {
  const sqnz::Dataset ds = sqnz::load_dataset(data_dir);
  PreparedData p;
  auto [inputs, labels] = sqnz::dataset_to_inputs<float>(ds, cfg.arch.input_length);
  p.inputs = std::move(inputs);
  p.labels = std::move(labels);
  sqnz::SplitSpec spec = cfg.split;
  spec.seed = cfg.seed;
  p.split = sqnz::stratified_split(ds, spec);
  return p;
}

fs::path config_data_dir(const sqnz::RunConfig& cfg) {
  if (cfg.data_dir.empty())
    throw sqnz::validation_error("config.data_dir must name the dataset directory");
  return cfg.data_dir;
}

int run_synth(const CommonArgs& args) {
  const sqnz::RunConfig cfg = load_config(args);
  const sqnz::Dataset ds = sqnz::generate_synthetic_dataset(
      cfg.synth_n_per_class, cfg.synth_len_min, cfg.synth_len_max, cfg.seed);
  fs::create_directories(args.out_path);
  for (const auto& rec : ds.records)
    sqnz::write_signal_raw_i16le(fs::path(args.out_path) / (rec.record_id + ".i16"), rec.samples);
  sqnz::write_reference_csv(fs::path(args.out_path) / "REFERENCE.csv", ds);
  std::cout << "wrote " << ds.records.size() << " records to " << args.out_path << "\n";
  return 0;
}

int run_preprocess(const CommonArgs& args) {
  const sqnz::RunConfig cfg = load_config(args);
  const sqnz::Dataset ds = sqnz::load_dataset(args.in_path);
  const auto rep = sqnz::padding_report(ds, cfg.arch.input_length);
  sqnz::write_text_file(args.out_path, sqnz::padding_report_csv(rep));
  std::cout << "padding report: " << rep.padded_total << "/" << rep.grand_total
            << " records shorter than " << cfg.arch.input_length << "\n";
  return 0;
}

int run_train(const CommonArgs& args) {
  const sqnz::RunConfig cfg = load_config(args);
  const PreparedData d = prepare(cfg, args.in_path);
  sqnz::Model<float> model = sqnz::build_model<float>(cfg.arch, cfg.seed);
  auto result = sqnz::train(std::move(model), sqnz::select(d.inputs, d.split.train),
                            sqnz::select(d.labels, d.split.train),
                            sqnz::select(d.inputs, d.split.val),
                            sqnz::select(d.labels, d.split.val), cfg.hp, cfg.seed);
  sqnz::write_text_file(args.out_path, sqnz::model_to_json(result.model).dump(1) + "\n");
  sqnz::write_text_file(args.out_path + ".history.csv", sqnz::history_csv(result.history));
  std::cout << "trained " << result.history.size() << " epochs, best epoch "
            << result.best_epoch + 1 << ", val_acc "
            << result.history[result.best_epoch].val_acc << "\n";
  return 0;
}

int run_prune(const CommonArgs& args) {
  const sqnz::RunConfig cfg = load_config(args);
  const PreparedData d = prepare(cfg, config_data_dir(cfg));
  auto model = sqnz::model_from_json<float>(sqnz::load_json_file(args.in_path));
  auto result = sqnz::iterative_prune(std::move(model), cfg.prune,
                                      sqnz::select(d.inputs, d.split.train),
                                      sqnz::select(d.labels, d.split.train),
                                      sqnz::select(d.inputs, d.split.val),
                                      sqnz::select(d.labels, d.split.val), cfg.seed);
  sqnz::write_text_file(args.out_path, sqnz::model_to_json(result.model).dump(1) + "\n");
  sqnz::write_text_file(args.out_path + ".prune.csv", sqnz::prune_report_csv(result.report));
  std::cout << "pruned to weight sparsity " << sqnz::weight_tensor_sparsity(result.model) << "\n";
  return 0;
}

int run_quantize(const CommonArgs& args, const std::vector<unsigned>& sweep_bits) {
  const sqnz::RunConfig cfg = load_config(args);
  const PreparedData d = prepare(cfg, config_data_dir(cfg));
  auto model = sqnz::model_from_json<float>(sqnz::load_json_file(args.in_path));

  if (!sweep_bits.empty()) {
    const auto rows = sqnz::sweep_bitwidths(
        model, sweep_bits, sqnz::select(d.inputs, d.split.train),
        sqnz::select(d.labels, d.split.train), sqnz::select(d.inputs, d.split.val),
        sqnz::select(d.labels, d.split.val), sqnz::select(d.inputs, d.split.test),
        sqnz::select(d.labels, d.split.test), cfg.hp, cfg.seed);
    sqnz::write_text_file(args.out_path, sqnz::sweep_csv(rows));
    std::cout << "swept " << rows.size() << " bit-widths\n";
    return 0;
  }

  auto result = sqnz::qat_train(std::move(model), cfg.quant,
                                sqnz::select(d.inputs, d.split.train),
                                sqnz::select(d.labels, d.split.train),
                                sqnz::select(d.inputs, d.split.val),
                                sqnz::select(d.labels, d.split.val), cfg.hp, cfg.seed);
  sqnz::write_text_file(args.out_path,
                        sqnz::model_to_json(result.model, &cfg.quant).dump(1) + "\n");
  std::cout << "quantised to b=" << cfg.quant.bits << ", val_acc "
            << result.history[result.best_epoch].val_acc << "\n";
  return 0;
}

int run_pack(const CommonArgs& args) {
  unsigned quant_bits = 0;
  auto model = sqnz::model_from_json<float>(sqnz::load_json_file(args.in_path), &quant_bits);
  const auto bytes = sqnz::pack_model_auto(model, quant_bits);
  sqnz::write_bytes(args.out_path, bytes);
  const auto report = sqnz::size_report(model, bytes.size());
  sqnz::write_text_file(args.out_path + ".size.json", sqnz::size_report_json(report).dump(1) + "\n");
  std::cout << "packed " << report.dense_f32_bytes << " -> " << report.packed_bytes
            << " bytes (" << report.ratio_packed << "x)\n";
  return 0;
}

sqnz::Model<float> load_model_any(const std::string& path, unsigned* quant_bits) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".sqnz") {
    const auto unpacked = sqnz::unpack(sqnz::read_bytes(path));
    *quant_bits = unpacked.quant ? unpacked.quant->bits : 0;
    return unpacked.model;
  }
  return sqnz::model_from_json<float>(sqnz::load_json_file(path), quant_bits);
}

int run_eval(const CommonArgs& args, const std::string& model_path, const std::string& engine) {
  const sqnz::RunConfig cfg = load_config(args);
  const PreparedData d = prepare(cfg, args.in_path);
  unsigned quant_bits = 0;

  const auto test_x = sqnz::select(d.inputs, d.split.test);
  const auto test_y = sqnz::select(d.labels, d.split.test);

  sqnz::EvalReport rep;
  if (engine == "shift") {
    const auto unpacked = sqnz::unpack(sqnz::read_bytes(model_path));
    if (unpacked.codes.empty())
      throw sqnz::validation_error("shift engine needs a sparse quantised pack");
    std::vector<std::size_t> preds(test_x.size());
    for (std::size_t i = 0; i < test_x.size(); ++i) {
      std::vector<float> sig(test_x[i].data.begin(), test_x[i].data.end());
      const auto r = sqnz::quantized_forward(unpacked, sig, cfg.frac_bits);
      std::size_t best = 0;
      for (std::size_t j = 1; j < r.probs.size(); ++j)
        if (r.probs[j] > r.probs[best]) best = j;
      preds[i] = best;
    }
    rep.cm = sqnz::confusion_matrix(preds, test_y);
    rep.macro = sqnz::macro_metrics(rep.cm);
    rep.cinc_f1 = sqnz::cinc_overall_f1(rep.cm);
    rep.model_sparsity = sqnz::weight_sparsity(unpacked.model);
    rep.feature_map_sparsity = sqnz::feature_map_sparsity(unpacked.model, test_x);
  } else {
    const auto model = load_model_any(model_path, &quant_bits);
    rep = sqnz::make_eval_report(model, test_x, test_y);
  }
  sqnz::write_text_file(args.out_path, sqnz::eval_report_json(rep).dump(1) + "\n");
  std::cout << "test accuracy " << rep.macro.accuracy << " on " << test_x.size() << " records\n";
  return 0;
}

int run_infer(const std::string& model_path, const std::string& signal_path,
              const std::string& format, unsigned frac_bits) {
  const sqnz::SignalFormat fmt =
      (format == "raw_i16le") ? sqnz::SignalFormat::raw_i16le : sqnz::SignalFormat::csv_int;
  const auto samples = sqnz::load_signal(signal_path, fmt);
  if (samples.empty()) throw sqnz::validation_error("signal file is empty");

  const auto bytes = sqnz::read_bytes(model_path);
  const auto unpacked = sqnz::unpack(bytes);
  auto z = sqnz::standardize<float>(samples);
  auto fixed = sqnz::fit_length(std::move(z), unpacked.arch.input_length);

  sqnz::Tensor<float> probs;
  if (!unpacked.codes.empty()) {
    probs = sqnz::quantized_forward(unpacked, fixed.values, frac_bits).probs;
  } else {
    const auto in =
        sqnz::Tensor<float>::from({1, unpacked.arch.input_length}, std::move(fixed.values));
    probs = sqnz::model_forward(unpacked.model, in);
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < probs.size(); ++j)
    if (probs[j] > probs[best]) best = j;
  std::printf("%c,%.6f,%.6f,%.6f,%.6f\n", sqnz::label_char(static_cast<sqnz::Label>(best)),
              probs[0], probs[1], probs[2], probs[3]);
  return 0;
}

int run_report(const CommonArgs& args) {
  const fs::path dir = args.in_path;
  const auto baseline = sqnz::eval_report_from_json(sqnz::load_json_file(dir / "eval_baseline.json"));
  const auto optimized =
      sqnz::eval_report_from_json(sqnz::load_json_file(dir / "eval_optimized.json"));
  const json size = sqnz::load_json_file(dir / "size_report.json");

  const double dense_mb = size.at("dense_f32_bytes").get<double>() / (1024.0 * 1024.0);
  const double packed_mb = size.at("packed_bytes").get<double>() / (1024.0 * 1024.0);

  json j;
  json rows = json::array();
  auto add_row = [&](const std::string& name, double a, double b) {
    json r;
    r["metric"] = name;
    r["original_model"] = a;
    r["optimised_model"] = b;
    rows.push_back(r);
  };
  add_row("accuracy", baseline.macro.accuracy, optimized.macro.accuracy);
  add_row("precision", baseline.macro.precision, optimized.macro.precision);
  add_row("specificity", baseline.macro.specificity, optimized.macro.specificity);
  add_row("sensitivity", baseline.macro.sensitivity, optimized.macro.sensitivity);
  add_row("f1", baseline.macro.f1, optimized.macro.f1);
  add_row("cinc_f1", baseline.cinc_f1, optimized.cinc_f1);
  add_row("model_sparsity", baseline.model_sparsity, optimized.model_sparsity);
  add_row("model_size_mb", dense_mb, packed_mb);
  j["rows"] = rows;
  j["compression_ratio_packed"] = size.at("ratio_packed");
  j["compression_ratio_value_only"] = size.at("ratio_value_only");
  sqnz::write_text_file(args.out_path, j.dump(1) + "\n");

  std::string csv = "metric,original_model,optimised_model\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n", r.at("metric").get<std::string>().c_str(),
                  r.at("original_model").get<double>(), r.at("optimised_model").get<double>());
    csv += buf;
  }
  sqnz::write_text_file(args.out_path + ".csv", csv);
  std::cout << "report written to " << args.out_path << "\n";
  return 0;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool need_config, bool need_in, bool need_out) {
  auto* c = cmd->add_option("--config", args.config_path, "run config JSON");
  if (need_config) c->required();
  auto* i = cmd->add_option("--in", args.in_path, "input path");
  if (need_in) i->required();
  auto* o = cmd->add_option("--out", args.out_path, "output path");
  if (need_out) o->required();
  cmd->add_option("--seed", args.seed_override, "override the config seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compression and shift-inference toolkit for 1D ECG CNNs"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string model_path, engine = "real", signal_format = "csv_int";
  unsigned frac_bits = 12;
  std::vector<unsigned> sweep_bits;

  auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic dataset");
  add_common(synth, args, false, false, true);
  auto* preprocess = app.add_subcommand("preprocess", "padding-distribution audit CSV");
  add_common(preprocess, args, false, true, true);
  auto* train = app.add_subcommand("train", "train the CNN on a dataset directory");
  add_common(train, args, true, true, true);
  auto* prune = app.add_subcommand("prune", "iterative magnitude pruning with fine-tuning");
  add_common(prune, args, true, true, true);
  auto* quantize = app.add_subcommand("quantize", "quantisation-aware training to the pow2 grid");
  add_common(quantize, args, true, true, true);
  quantize->add_option("--sweep", sweep_bits,
                       "bit-widths to sweep; writes a CSV table instead of a model");
  auto* pack = app.add_subcommand("pack", "serialise a model to the SQNZ container");
  add_common(pack, args, false, true, true);
  auto* eval = app.add_subcommand("eval", "evaluate a model on the test split");
  add_common(eval, args, true, true, true);
  eval->add_option("--model", model_path, "model JSON or .sqnz pack")->required();
  eval->add_option("--engine", engine, "real | shift")->check(CLI::IsMember({"real", "shift"}));
  auto* infer = app.add_subcommand("infer", "classify one signal file with a packed model");
  infer->add_option("--model", model_path, ".sqnz pack")->required();
  infer->add_option("--in", args.in_path, "signal file")->required();
  infer->add_option("--format", signal_format, "csv_int | raw_i16le")
      ->check(CLI::IsMember({"csv_int", "raw_i16le"}));
  infer->add_option("--frac-bits", frac_bits, "fixed-point fraction bits");
  auto* report = app.add_subcommand("report", "combine stage outputs into one summary");
  add_common(report, args, false, true, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(args);
    if (preprocess->parsed()) return run_preprocess(args);
    if (train->parsed()) return run_train(args);
    if (prune->parsed()) return run_prune(args);
    if (quantize->parsed()) return run_quantize(args, sweep_bits);
    if (pack->parsed()) return run_pack(args);
    if (eval->parsed()) return run_eval(args, model_path, engine);
    if (infer->parsed()) return run_infer(model_path, args.in_path, signal_format, frac_bits);
    if (report->parsed()) return run_report(args);
  } catch (const sqnz::input_error& e) {
    std::cerr << R"({"error":{"kind":"validation","message":")" << e.what() << R"("}})" << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << R"({"error":{"kind":"runtime","message":")" << e.what() << R"("}})" << "\n";
    return 2;
  }
  return 0;
}
