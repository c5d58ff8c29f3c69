#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dinof/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dinof: hybrid diffusion + normalizing-flow generative engine"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, out_dir = "out", out_path = "report.csv";
    std::string samples_a, samples_b, tm_list;
    std::vector<std::string> overrides;
    int64_t n_samples = 1000, n_ref = 4000;
    bool baseline = false;
    std::optional<uint64_t> seed_opt;
    uint64_t eval_seed = 0;

    auto* train = app.add_subcommand("train", "train score + flow from a config file");
    train->add_option("config", config_path, "experiment config file")->required();
    train->add_option("--set", overrides, "override config keys (key=value)");

    auto* sample = app.add_subcommand("sample", "draw samples from a checkpoint");
    sample->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();
    sample->add_option("n", n_samples, "number of samples")->required();
    sample->add_flag("--baseline", baseline, "pure reverse-SDE baseline (no flow prior)");
    sample->add_option("--out", out_dir, "output directory");
    uint64_t seed_val = 0;
    auto* seed_flag = sample->add_option("--seed", seed_val, "sampling seed (default: config seed)");
    sample->add_option("--set", overrides, "override sampler config keys");

    auto* eval = app.add_subcommand("eval", "two-sample metrics between CSVs or vs a dataset");
    eval->add_option("samples_a", samples_a, "samples CSV")->required();
    eval->add_option("samples_b", samples_b, "samples CSV or dataset name (e.g. gmm8)")->required();
    eval->add_option("--out", out_path, "report CSV path");
    eval->add_option("--n-ref", n_ref, "reference draw size for dataset names");
    eval->add_option("--seed", eval_seed, "reference draw seed");

    auto* sweep = app.add_subcommand("sweep-tm", "train and evaluate across tm values");
    sweep->add_option("config", config_path, "experiment config file")->required();
    sweep->add_option("--tm-list", tm_list, "comma separated tm values")->required();
    sweep->add_option("--set", overrides, "override config keys (key=value)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : dinof::kExitConfig;
    }

    if (seed_flag->count() > 0) seed_opt = seed_val;

    if (train->parsed()) return dinof::cmd_train(config_path, overrides);
    if (sample->parsed())
        return dinof::cmd_sample(checkpoint_path, n_samples, baseline, out_dir, seed_opt, overrides);
    if (eval->parsed()) return dinof::cmd_eval(samples_a, samples_b, out_path, n_ref, eval_seed);
    if (sweep->parsed()) return dinof::cmd_sweep_tm(config_path, tm_list, overrides);
    return dinof::kExitConfig;
}
