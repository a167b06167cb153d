// acok: reference truth generation, PINN training and evaluation.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acok/commands.hpp"
#include "acok/errors.hpp"

namespace {

// Applies trailing "--key=value" / "--key value" arguments on top of the config.
void apply_overrides(acok::RunConfig& config, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string arg = extras[i];
    if (arg.rfind("--", 0) != 0) throw acok::ConfigError("unexpected argument '" + arg + "'");
    arg.erase(0, 2);
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      acok::apply_setting(config, arg.substr(0, eq), arg.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      acok::apply_setting(config, arg, extras[++i]);
    } else {
      throw acok::ConfigError(arg + ": missing value");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Allen-Cahn-Ohta-Kawasaki PINN: truth generation, training, evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  bool print_config = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value configuration file");
    sub->add_flag("--print-config", print_config, "print the resolved configuration and exit");
    sub->allow_extras();
    sub->footer("Any configuration key may be overridden with --key=value.");
  };
  auto* gen = app.add_subcommand("generate-truth", "run the spectral reference solver");
  auto* train = app.add_subcommand("train", "train the networks against a truth file");
  auto* eval = app.add_subcommand("evaluate", "score a trained model against a truth file");
  for (auto* sub : {gen, train, eval}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? acok::kExitOk : acok::kExitConfig;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    acok::RunConfig config =
        config_path.empty() ? acok::parse_config_text("") : acok::parse_config_file(config_path);
    apply_overrides(config, sub->remaining());
    config.validate();
    if (print_config) {
      std::cout << acok::format_config(config);
      return acok::kExitOk;
    }
    if (sub == gen) {
      acok::cmd_generate_truth(config, std::cout);
    } else if (sub == train) {
      acok::cmd_train(config, std::cout);
    } else {
      acok::cmd_evaluate(config, std::cout);
    }
    return acok::kExitOk;
  } catch (...) {
    return acok::exit_code_for_current_exception(std::cerr);
  }
}
