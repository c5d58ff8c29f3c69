#include "dinof/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dinof {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& v, const std::string& key, int line) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'", line, key);
    }
}

int64_t parse_int(const std::string& v, const std::string& key, int line) {
    try {
        size_t pos = 0;
        long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return i;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'", line, key);
    }
}

uint64_t parse_u64(const std::string& v, const std::string& key, int line) {
    try {
        size_t pos = 0;
        unsigned long long i = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return i;
    } catch (...) {
        throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + v + "'",
                          line, key);
    }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: key '" + key + "' expects true|false, got '" + v + "'", line, key);
}

template <class T, class Elem>
std::vector<T> parse_list(const std::string& v, const std::string& key, int line, Elem elem) {
    std::vector<T> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(elem(trim(item), key, line));
    return out;
}

std::string join_d(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += g17(v[i]);
    }
    return s;
}

std::string join_i(const std::vector<int64_t>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

}  // namespace

void ExperimentConfig::apply_override(const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("config: override '" + assignment + "' is not key=value");
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const int line = 0;

    if (key == "dataset") dataset = value;
    else if (key == "dim") dim = parse_int(value, key, line);
    else if (key == "gaussian_mean") gaussian_mean = parse_list<double>(value, key, line, parse_double);
    else if (key == "gaussian_cov_diag") gaussian_cov_diag = parse_list<double>(value, key, line, parse_double);
    else if (key == "sde_family") sde_family = value;
    else if (key == "sigma_min") sigma_min = parse_double(value, key, line);
    else if (key == "sigma_max") sigma_max = parse_double(value, key, line);
    else if (key == "beta_min") beta_min = parse_double(value, key, line);
    else if (key == "beta_max") beta_max = parse_double(value, key, line);
    else if (key == "T") T = parse_double(value, key, line);
    else if (key == "N") N = parse_int(value, key, line);
    else if (key == "tm") tm = parse_double(value, key, line);
    else if (key == "train_t_full_range") train_t_full_range = parse_bool(value, key, line);
    else if (key == "score_hidden") score_hidden = parse_list<int64_t>(value, key, line, parse_int);
    else if (key == "time_embed_dim") time_embed_dim = parse_int(value, key, line);
    else if (key == "flow_blocks") flow_blocks = parse_int(value, key, line);
    else if (key == "flow_hidden") flow_hidden = parse_int(value, key, line);
    else if (key == "flow_scale_cap") flow_scale_cap = parse_double(value, key, line);
    else if (key == "predictor") predictor = value;
    else if (key == "corrector") corrector = value;
    else if (key == "corrector_steps") corrector_steps = parse_int(value, key, line);
    else if (key == "snr") snr = parse_double(value, key, line);
    else if (key == "sampler_steps") sampler_steps = parse_int(value, key, line);
    else if (key == "denoise_final") denoise_final = parse_bool(value, key, line);
    else if (key == "corrector_first") corrector_first = parse_bool(value, key, line);
    else if (key == "corrector_at_start") corrector_at_start = parse_bool(value, key, line);
    else if (key == "joint_weight") joint_weight = parse_double(value, key, line);
    else if (key == "train_iterations") train_iterations = parse_int(value, key, line);
    else if (key == "batch_size") batch_size = parse_int(value, key, line);
    else if (key == "lr") lr = parse_double(value, key, line);
    else if (key == "adam_beta1") adam_beta1 = parse_double(value, key, line);
    else if (key == "adam_beta2") adam_beta2 = parse_double(value, key, line);
    else if (key == "adam_eps") adam_eps = parse_double(value, key, line);
    else if (key == "freeze_tm_noise") freeze_tm_noise = parse_bool(value, key, line);
    else if (key == "frozen_pool") frozen_pool = parse_int(value, key, line);
    else if (key == "seed") seed = parse_u64(value, key, line);
    else if (key == "checkpoint_interval") checkpoint_interval = parse_int(value, key, line);
    else if (key == "output_dir") output_dir = value;
    else if (key == "plot") plot = parse_bool(value, key, line);
    else if (key == "axis_range") axis_range = parse_double(value, key, line);
    else if (key == "sweep_samples") sweep_samples = parse_int(value, key, line);
    else if (key == "sweep_train_iterations") sweep_train_iterations = parse_int(value, key, line);
    else throw ConfigError("config: unknown key '" + key + "'", line, key);
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    ExperimentConfig cfg;
    bool saw_tm = false;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) + " is not key = value",
                              line_no);
        const std::string key = trim(line.substr(0, eq));
        try {
            cfg.apply_override(key + "=" + trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")",
                              line_no, key);
        }
        if (key == "tm") saw_tm = true;
    }
    if (!saw_tm) throw ConfigError("config: required key 'tm' is missing", 0, "tm");
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_text(ss.str());
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg, const std::string& key) {
        throw ConfigError("config: " + msg, 0, key);
    };
    if (!(T > 0.0)) fail("T must be positive", "T");
    if (!(tm > 0.0 && tm <= T)) fail("tm must lie in (0, T]", "tm");
    if (N < 2) fail("N must be >= 2", "N");
    if (dim < 2 || dim > 64) fail("dim must be in [2, 64]", "dim");
    if (sde_family != "ve" && sde_family != "vp" && sde_family != "subvp")
        fail("sde_family must be ve|vp|subvp", "sde_family");
    if (sde_family == "ve" && !(sigma_min > 0.0 && sigma_min < sigma_max))
        fail("need 0 < sigma_min < sigma_max", "sigma_min");
    if (sde_family != "ve" && !(beta_min > 0.0 && beta_min < beta_max))
        fail("need 0 < beta_min < beta_max", "beta_min");
    if (score_hidden.empty()) fail("score_hidden must not be empty", "score_hidden");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0)
        fail("time_embed_dim must be even and >= 2", "time_embed_dim");
    if (flow_blocks < 1) fail("flow_blocks must be >= 1", "flow_blocks");
    if (flow_hidden < 1) fail("flow_hidden must be >= 1", "flow_hidden");
    if (!(flow_scale_cap > 0.0)) fail("flow_scale_cap must be positive", "flow_scale_cap");
    if (predictor != "euler_maruyama" && predictor != "none")
        fail("predictor must be euler_maruyama|none", "predictor");
    if (corrector != "langevin" && corrector != "none")
        fail("corrector must be langevin|none", "corrector");
    if (corrector_steps < 0) fail("corrector_steps must be >= 0", "corrector_steps");
    if (!(snr > 0.0)) fail("snr must be positive", "snr");
    if (sampler_steps < 0) fail("sampler_steps must be >= 0", "sampler_steps");
    if (joint_weight < 0.0) fail("joint_weight must be >= 0", "joint_weight");
    if (train_iterations < 0) fail("train_iterations must be >= 0", "train_iterations");
    if (batch_size < 2) fail("batch_size must be >= 2", "batch_size");
    if (!(lr > 0.0)) fail("lr must be positive", "lr");
    if (frozen_pool < 2) fail("frozen_pool must be >= 2", "frozen_pool");
    if (checkpoint_interval < 0) fail("checkpoint_interval must be >= 0", "checkpoint_interval");
    if (!(axis_range > 0.0)) fail("axis_range must be positive", "axis_range");
    if (sweep_samples < 2) fail("sweep_samples must be >= 2", "sweep_samples");
    if (sweep_train_iterations < 0) fail("sweep_train_iterations must be >= 0", "sweep_train_iterations");
    if (dataset != "gmm8" && dataset != "two_moons" && dataset != "checkerboard" &&
        dataset != "swiss_roll" && dataset != "single_gaussian")
        fail("unknown dataset '" + dataset + "'", "dataset");
}

int64_t ExperimentConfig::resolved_sampler_steps() const {
    if (sampler_steps > 0) return sampler_steps;
    return std::llround(static_cast<double>(N) * tm / T);
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream os;
    os << "# resolved experiment config\n";
    os << "dataset = " << dataset << "\n";
    os << "dim = " << dim << "\n";
    os << "gaussian_mean = " << join_d(gaussian_mean) << "\n";
    os << "gaussian_cov_diag = " << join_d(gaussian_cov_diag) << "\n";
    os << "sde_family = " << sde_family << "\n";
    os << "sigma_min = " << g17(sigma_min) << "\n";
    os << "sigma_max = " << g17(sigma_max) << "\n";
    os << "beta_min = " << g17(beta_min) << "\n";
    os << "beta_max = " << g17(beta_max) << "\n";
    os << "T = " << g17(T) << "\n";
    os << "N = " << N << "\n";
    os << "tm = " << g17(tm) << "\n";
    os << "train_t_full_range = " << (train_t_full_range ? "true" : "false") << "\n";
    os << "score_hidden = " << join_i(score_hidden) << "\n";
    os << "time_embed_dim = " << time_embed_dim << "\n";
    os << "flow_blocks = " << flow_blocks << "\n";
    os << "flow_hidden = " << flow_hidden << "\n";
    os << "flow_scale_cap = " << g17(flow_scale_cap) << "\n";
    os << "predictor = " << predictor << "\n";
    os << "corrector = " << corrector << "\n";
    os << "corrector_steps = " << corrector_steps << "\n";
    os << "snr = " << g17(snr) << "\n";
    os << "sampler_steps = " << resolved_sampler_steps() << "\n";
    os << "denoise_final = " << (denoise_final ? "true" : "false") << "\n";
    os << "corrector_first = " << (corrector_first ? "true" : "false") << "\n";
    os << "corrector_at_start = " << (corrector_at_start ? "true" : "false") << "\n";
    os << "joint_weight = " << g17(joint_weight) << "\n";
    os << "train_iterations = " << train_iterations << "\n";
    os << "batch_size = " << batch_size << "\n";
    os << "lr = " << g17(lr) << "\n";
    os << "adam_beta1 = " << g17(adam_beta1) << "\n";
    os << "adam_beta2 = " << g17(adam_beta2) << "\n";
    os << "adam_eps = " << g17(adam_eps) << "\n";
    os << "freeze_tm_noise = " << (freeze_tm_noise ? "true" : "false") << "\n";
    os << "frozen_pool = " << frozen_pool << "\n";
    os << "seed = " << seed << "\n";
    os << "checkpoint_interval = " << checkpoint_interval << "\n";
    os << "output_dir = " << output_dir << "\n";
    os << "plot = " << (plot ? "true" : "false") << "\n";
    os << "axis_range = " << g17(axis_range) << "\n";
    os << "sweep_samples = " << sweep_samples << "\n";
    os << "sweep_train_iterations = " << sweep_train_iterations << "\n";
    return os.str();
}

}  // namespace dinof
