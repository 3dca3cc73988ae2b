#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "gazenet/error.hpp"
#include "gazenet/pipeline/stages.hpp"

namespace {

const char* describe(const std::string& name) {
  static const std::map<std::string, const char*> d{
      {"detect", "detect fixations (I-DT) for every recording"},
      {"saliency-extract", "sample the saliency maps at each fixation"},
      {"features", "assemble per-fixation feature sequences"},
      {"pretrain", "pre-train the CNN on SWAN scores"},
      {"finetune", "fine-tune the pre-trained CNN on ADHD labels"},
      {"train-scratch", "train the CNN on ADHD labels from random initialization"},
      {"evaluate", "cross-validated AUC with permutation test"},
      {"attribute", "DeepLIFT attributions and per-channel relevance"},
      {"baseline-lev", "evaluate the Levenshtein scanpath baseline"},
      {"baseline-svm", "evaluate the linear SVM with recursive feature elimination"},
      {"hypersearch", "random search over the CNN hyperparameter space"},
      {"synth", "write a synthetic dataset with planted group effects"},
      {"report", "summary tables from the evaluation reports"},
  };
  const auto it = d.find(name);
  return it == d.end() ? "" : it->second;
}

void add_common(CLI::App* cmd, gazenet::pipeline::CommandOptions& o, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "master seed (overrides the config)");
  cmd->add_option("--config", o.config_file, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--manifest", o.manifest, "dataset manifest");
  cmd->add_option("--out", o.out, "workspace directory")->required();
  cmd->add_option("--set", o.overrides, "configuration override key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  using gazenet::pipeline::CommandOptions;
  CLI::App app{"Eye-movement ADHD detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  CommandOptions opts;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress messages");

  std::vector<CLI::App*> cmds;
  for (const auto& name : gazenet::pipeline::kCommands) {
    auto* cmd = app.add_subcommand(std::string(name), describe(std::string(name)));
    add_common(cmd, opts, seed);
    if (name == "evaluate") {
      cmd->add_option("--models", opts.models, "model ids: cnn-scratch, cnn-pretrained, levenshtein, svm-rfe")
          ->delimiter(',');
      cmd->add_flag("--ablation", opts.ablation, "also evaluate channel-ablated cnn-pretrained variants");
    }
    if (name == "attribute") {
      cmd->add_option("--model", opts.attribute_model, "finetune or scratch")->capture_default_str();
    }
    if (name == "evaluate" || name == "attribute" || name == "finetune" || name == "train-scratch" ||
        name == "baseline-lev" || name == "baseline-svm") {
      cmd->add_option("--video", opts.video, "restrict to one video");
    }
    cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (auto* cmd : cmds) {
    if (!cmd->parsed()) continue;
    opts.command = cmd->get_name();
    if (cmd->count("--seed") > 0) opts.seed = seed;
  }

  try {
    const auto outputs = gazenet::pipeline::run_command(opts, [&](const std::string& msg) {
      if (!quiet) std::cerr << msg << "\n";
    });
    if (!quiet) std::cerr << opts.command << ": wrote " << outputs.size() << " files\n";
    return 0;
  } catch (const gazenet::Error& e) {
    std::cerr << "error: " << gazenet::category_name(e.category()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
}
