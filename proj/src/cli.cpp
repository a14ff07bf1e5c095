#include "loxolab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "loxolab/combing_builder.hpp"
#include "loxolab/errors.hpp"
#include "loxolab/experiments.hpp"
#include "loxolab/spectral_markov.hpp"

namespace loxolab {

using nlohmann::json;

std::string sidecar_path(const std::string& combing_path) {
  const std::string suffix = ".json";
  if (combing_path.size() >= suffix.size() &&
      combing_path.compare(combing_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return combing_path.substr(0, combing_path.size() - suffix.size()) + ".meta.json";
  }
  return combing_path + ".meta.json";
}

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::vector<std::string> split_names(const std::string& list) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : list) {
    if (ch == ',' || ch == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Construction parse_construction(const std::string& name, const PresentationGraph& p) {
  if (name == "recurrent") return Construction::Recurrent;
  if (name == "hm") return Construction::HermillerMeier;
  if (name == "auto") {
    return p.num_vertices() >= 2 && is_anticonnected(p.lambda()) ? Construction::Recurrent
                                                                 : Construction::HermillerMeier;
  }
  throw ConfigError("--construction must be auto, recurrent or hm");
}

struct Options {
  std::string presentation;
  std::string combing;
  std::string action;
  std::string config;
  std::string out;
  std::string format = "csv";
  std::string order;
  std::string construction = "auto";
  std::string experiment;
  int nmax = 8;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
};

PresentationGraph presentation_for(const Options& o) {
  if (!o.presentation.empty()) return load_presentation(o.presentation);
  if (o.combing.empty()) throw ConfigError("--presentation or --combing is required");
  const std::string meta = sidecar_path(o.combing);
  if (!std::filesystem::exists(meta)) throw ConfigError("no --presentation given and no sidecar '" + meta + "'");
  const json j = read_json(meta);
  if (!j.contains("presentation")) throw ConfigError("sidecar '" + meta + "' has no presentation");
  return presentation_from_json(j.at("presentation"));
}

int cmd_build(const Options& o) {
  if (o.presentation.empty()) throw ConfigError("build: --presentation is required");
  if (o.out.empty()) throw ConfigError("build: --out is required");
  const PresentationGraph p = load_presentation(o.presentation);
  BuildOptions options;
  options.construction = parse_construction(o.construction, p);
  if (!o.order.empty()) options.order = split_names(o.order);
  const CombingBuild b = build_combing(p, options);
  save_combing_graph(b.combing.graph, o.out);
  const json meta = sidecar_json(b);
  write_text(sidecar_path(o.out), meta.dump(2) + "\n");
  std::cout << "wrote " << o.out << " (" << b.combing.graph.num_vertices() << " vertices, "
            << b.combing.graph.num_edges() << " edges, " << b.construction << ")\n";
  return 0;
}

int cmd_verify(const Options& o) {
  if (o.combing.empty()) throw ConfigError("verify: --combing is required");
  const CombingGraph g = load_combing_graph(o.combing);
  require_valid(g);
  const PresentationGraph p = presentation_for(o);
  const CombingCertificate cert = verify_combing(g, p, o.nmax);
  const std::string text = cert.to_json().dump(2) + "\n";
  if (!o.out.empty()) write_text(o.out, text);
  std::cout << text;
  return cert.passed ? 0 : 1;
}

int cmd_analyze(const Options& o) {
  CombingGraph g;
  if (!o.combing.empty()) {
    g = load_combing_graph(o.combing);
  } else {
    if (o.presentation.empty()) throw ConfigError("analyze: --combing or --presentation is required");
    const PresentationGraph p = load_presentation(o.presentation);
    BuildOptions options;
    options.construction = parse_construction(o.construction, p);
    if (!o.order.empty()) options.order = split_names(o.order);
    g = build_combing(p, options).combing.graph;
  }
  require_valid(g);
  const json report = spectral_report(g, 30, 40, o.samples.value_or(10000), o.seed.value_or(1));
  const std::string text = report.dump(2) + "\n";
  if (!o.out.empty()) write_text(o.out, text);
  std::cout << text;
  return 0;
}

int cmd_run(const Options& o) {
  json raw;
  std::string base = ".";
  if (!o.config.empty()) {
    raw = read_json(o.config);
    base = std::filesystem::path(o.config).parent_path().string();
    if (!raw.is_object()) throw ConfigError("config must be a JSON object");
  } else {
    raw = json::object();
  }
  // Command-line paths are relative to the working directory, not the config.
  const auto absolute = [](const std::string& path) { return std::filesystem::absolute(path).string(); };
  if (!o.presentation.empty()) raw["presentation"] = absolute(o.presentation);
  if (!o.combing.empty()) raw["combing"] = absolute(o.combing);
  if (!o.action.empty()) raw["action"] = absolute(o.action);
  if (!o.order.empty()) raw["order"] = split_names(o.order);
  if (o.construction != "auto") raw["construction"] = o.construction;
  if (o.samples) raw["samples"] = *o.samples;
  if (o.seed) raw["seed"] = *o.seed;
  if (o.epsilon) raw["epsilon"] = *o.epsilon;
  const ExperimentConfig config = ExperimentConfig::from_json(raw, base);
  const Report report = run_experiment(o.experiment, config);
  const std::string csv = report.to_csv();
  const std::string js = report.to_json().dump(2) + "\n";
  if (!o.out.empty()) {
    std::string stem = o.out;
    for (const std::string ext : {".csv", ".json"}) {
      if (stem.size() > ext.size() && stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0) {
        stem.resize(stem.size() - ext.size());
      }
    }
    write_text(stem + ".csv", csv);
    write_text(stem + ".json", js);
  }
  std::cout << (o.format == "json" ? js : csv);
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"loxolab: combings of graph products and counting experiments"};
  app.require_subcommand(1);
  Options o;
  std::optional<std::uint64_t> samples, seed;
  std::optional<double> epsilon;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--presentation", o.presentation, "presentation JSON");
    sub->add_option("--combing", o.combing, "combing JSON");
    sub->add_option("--out", o.out, "output file");
    sub->add_option("--order", o.order, "vertex order, comma separated");
    sub->add_option("--construction", o.construction, "auto, recurrent or hm")
        ->check(CLI::IsMember({"auto", "recurrent", "hm"}));
  };
  CLI::App* build = app.add_subcommand("build", "presentation -> combing JSON");
  add_common(build);
  CLI::App* verify = app.add_subcommand("verify", "check a combing against the BFS oracle");
  add_common(verify);
  verify->add_option("--nmax", o.nmax, "largest sphere radius checked")->check(CLI::Range(0, 64));
  CLI::App* analyze = app.add_subcommand("analyze", "spectral and Markov report");
  add_common(analyze);
  analyze->add_option("--samples", samples, "first-return samples");
  analyze->add_option("--seed", seed, "random seed");
  CLI::App* run = app.add_subcommand("run", "run an experiment");
  add_common(run);
  run->add_option("experiment", o.experiment, "experiment id")
      ->required()
      ->check(CLI::IsMember(experiment_ids()));
  run->add_option("--config", o.config, "experiment config JSON");
  run->add_option("--action", o.action, "action JSON");
  run->add_option("--samples", samples, "Monte Carlo samples");
  run->add_option("--seed", seed, "random seed");
  run->add_option("--epsilon", epsilon, "threshold slack");
  run->add_option("--nmax", o.nmax, "unused by run; accepted for uniformity");
  run->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));

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
  o.samples = samples;
  o.seed = seed;
  o.epsilon = epsilon;

  try {
    if (build->parsed()) return cmd_build(o);
    if (verify->parsed()) return cmd_verify(o);
    if (analyze->parsed()) return cmd_analyze(o);
    if (run->parsed()) return cmd_run(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace loxolab
