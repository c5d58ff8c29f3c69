#include "dinof/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "dinof/io.hpp"
#include "dinof/pipeline.hpp"

namespace dinof {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    ExperimentConfig cfg = ExperimentConfig::parse_file(path);
    for (const std::string& ov : overrides) cfg.apply_override(ov);
    cfg.validate();
    return cfg;
}

std::string checkpoint_name(int64_t iter) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "checkpoint_%06lld.dinof", static_cast<long long>(iter));
    return buf;
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CheckpointError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckpoint;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

std::vector<double> parse_tm_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("");
        } catch (...) {
            throw ConfigError("sweep: bad tm value '" + item + "'", 0, "tm");
        }
    }
    if (out.empty()) throw ConfigError("sweep: empty tm list", 0, "tm");
    return out;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides) {
    return run_guarded([&]() {
        ExperimentConfig cfg = load_config(config_path, overrides);
        ensure_dir(cfg.output_dir);
        write_text_file(join(cfg.output_dir, "config_resolved.txt"), cfg.serialize());

        TrainState state = TrainState::create(cfg);
        std::vector<LossRow> losses;
        losses.reserve(static_cast<size_t>(cfg.train_iterations));
        for (int64_t i = 0; i < cfg.train_iterations; ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            TrainLosses l = joint_train_step(state);
            const auto t1 = std::chrono::steady_clock::now();
            losses.push_back({state.iteration, l.score_loss, l.flow_nll,
                              std::chrono::duration<double, std::milli>(t1 - t0).count()});
            if (cfg.checkpoint_interval > 0 && state.iteration % cfg.checkpoint_interval == 0)
                save_checkpoint(state, join(cfg.output_dir, checkpoint_name(state.iteration)));
        }
        save_checkpoint(state, join(cfg.output_dir, "checkpoint.dinof"));
        write_loss_csv(join(cfg.output_dir, "loss.csv"), losses);
        std::cout << "trained " << cfg.train_iterations << " iterations -> " << cfg.output_dir
                  << "\n";
        return kExitOk;
    });
}

int cmd_sample(const std::string& checkpoint_path, int64_t n, bool baseline,
               const std::string& out_dir, std::optional<uint64_t> seed,
               const std::vector<std::string>& overrides) {
    return run_guarded([&]() {
        if (n < 0) throw DataError("sample: n must be >= 0");
        TrainState state = load_checkpoint(checkpoint_path);
        for (const std::string& ov : overrides) state.cfg.apply_override(ov);
        state.cfg.validate();
        ensure_dir(out_dir);
        write_text_file(join(out_dir, "config_resolved.txt"), state.cfg.serialize());

        const std::string stem = baseline ? "samples_baseline" : "samples";
        const std::string csv_path = join(out_dir, stem + ".csv");

        if (n == 0) {
            write_samples_csv(csv_path, Tensor({0, state.cfg.dim}));
            std::cout << "wrote header-only " << csv_path << "\n";
            return kExitOk;
        }
        Rng rng(seed.value_or(state.cfg.seed));
        Tensor samples =
            baseline ? baseline_sample(state, n, rng) : dinof_sample(state, n, rng);
        write_samples_csv(csv_path, samples);
        if (state.cfg.plot && state.cfg.dim == 2) {
            write_scatter_svg(join(out_dir, stem + ".svg"), samples, state.cfg.axis_range);
        } else if (state.cfg.plot) {
            std::cout << "note: dim=" << state.cfg.dim << " data, skipping SVG scatter\n";
        }
        std::cout << "wrote " << n << " samples -> " << csv_path << "\n";
        return kExitOk;
    });
}

int cmd_eval(const std::string& samples_a, const std::string& samples_b_or_dist,
             const std::string& out_path, int64_t n_ref, uint64_t seed) {
    return run_guarded([&]() {
        Tensor a = read_samples_csv(samples_a);
        if (a.shape[0] < 1) throw DataError("'" + samples_a + "': no sample rows");

        Tensor b;
        bool is_dist = false;
        ToyDistribution dist;
        if (fs::exists(samples_b_or_dist)) {
            b = read_samples_csv(samples_b_or_dist);
        } else {
            try {
                dist = ToyDistribution::named(samples_b_or_dist, a.shape[1]);
            } catch (const std::invalid_argument&) {
                throw DataError("'" + samples_b_or_dist +
                                "' is neither a readable CSV nor a known dataset name");
            }
            is_dist = true;
            Rng rng(seed);
            b = dist.sample(n_ref, rng);
            std::cout << "reference: " << samples_b_or_dist << " n=" << n_ref << " seed=" << seed
                      << "\n";
        }
        if (b.shape[0] < 1) throw DataError("'" + samples_b_or_dist + "': no sample rows");
        if (a.shape[1] != b.shape[1])
            throw DataError("eval: dimension mismatch " + a.shape_str() + " vs " + b.shape_str());

        std::ostringstream os;
        os << "metric,value,n_a,n_b,seed\n";
        auto row = [&](const std::string& name, double v) {
            os << name << "," << format_g17(v) << "," << a.shape[0] << "," << b.shape[0] << ","
               << seed << "\n";
        };
        row("energy_distance", energy_distance(a, b));
        row("mmd_rbf", mmd_rbf(a, b));
        if (is_dist && dist.has_mixture()) row("mode_coverage", mode_coverage(a, dist));
        write_text_file(out_path, os.str());
        std::cout << "wrote " << out_path << "\n";
        return kExitOk;
    });
}

int cmd_sweep_tm(const std::string& config_path, const std::string& tm_list,
                 const std::vector<std::string>& overrides) {
    return run_guarded([&]() {
        ExperimentConfig cfg = load_config(config_path, overrides);
        ensure_dir(cfg.output_dir);
        write_text_file(join(cfg.output_dir, "config_resolved.txt"), cfg.serialize());

        const std::vector<double> tms = parse_tm_list(tm_list);
        const std::vector<SweepRow> rows = tm_sweep(cfg, tms);

        std::ostringstream os;
        os << "tm,sampling_steps,energy_distance,mmd,score_mse,mode_coverage,"
              "wall_ms_per_1k_samples\n";
        for (const SweepRow& r : rows) {
            os << format_g17(r.tm) << "," << r.sampling_steps << ","
               << format_g17(r.energy_distance) << "," << format_g17(r.mmd) << ","
               << format_g17(r.score_mse) << "," << format_g17(r.mode_coverage) << ","
               << format_g17(r.wall_ms_per_1k_samples) << "\n";
        }
        const std::string out_path = join(cfg.output_dir, "sweep_tm.csv");
        write_text_file(out_path, os.str());

        // soft timing sanity: more steps should cost more wall clock
        for (size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].sampling_steps > rows[i - 1].sampling_steps &&
                rows[i].wall_ms_per_1k_samples <= rows[i - 1].wall_ms_per_1k_samples) {
                std::cout << "warning: wall clock not increasing between tm=" << rows[i - 1].tm
                          << " and tm=" << rows[i].tm << "\n";
            }
        }
        std::cout << "wrote " << rows.size() << " rows -> " << out_path << "\n";
        return kExitOk;
    });
}

}  // namespace dinof
