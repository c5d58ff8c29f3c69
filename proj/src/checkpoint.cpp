#include <cstdint>
#include <cstring>
#include <fstream>

#include "dinof/pipeline.hpp"
#include "json.hpp"

namespace dinof {

namespace {

constexpr char kMagic[6] = {'D', 'I', 'N', 'O', 'F', '1'};

using Json = nlohmann::ordered_json;

Json shape_json(const Tensor& t) {
    Json a = Json::array();
    for (int64_t e : t.shape) a.push_back(e);
    return a;
}

void append_tensor(Json& list, std::vector<const Tensor*>& blocks, const std::string& name,
                   const Tensor& t) {
    Json e;
    e["name"] = name;
    e["shape"] = shape_json(t);
    list.push_back(e);
    blocks.push_back(&t);
}

std::vector<int64_t> shape_from(const Json& a) {
    std::vector<int64_t> s;
    for (const auto& v : a) s.push_back(v.get<int64_t>());
    return s;
}

}  // namespace

void save_checkpoint(const TrainState& state, const std::string& path) {
    Json header;
    header["format"] = 1;
    header["config"] = state.cfg.serialize();
    header["iteration"] = state.iteration;
    header["rng"] = state.rng.state();
    header["flow_initialized"] = state.flow.initialized;

    Json perms = Json::array();
    for (const FlowBlock& b : state.flow.blocks) {
        Json p = Json::array();
        for (int64_t v : b.perm) p.push_back(v);
        perms.push_back(p);
    }
    header["flow_perms"] = perms;

    Json inventory = Json::array();
    std::vector<const Tensor*> blocks;

    const auto score_names = state.score.param_names();
    for (size_t i = 0; i < state.score.params.size(); ++i)
        append_tensor(inventory, blocks, score_names[i], state.score.params[i]);

    const auto flow_names = state.flow.param_names();
    const auto flow_params = state.flow.param_ptrs();
    for (size_t i = 0; i < flow_params.size(); ++i)
        append_tensor(inventory, blocks, flow_names[i], *flow_params[i]);

    Json score_steps = Json::array(), flow_steps = Json::array();
    for (size_t i = 0; i < state.score_opt.size(); ++i) {
        append_tensor(inventory, blocks, "adam." + score_names[i] + ".m", state.score_opt[i].m);
        append_tensor(inventory, blocks, "adam." + score_names[i] + ".v", state.score_opt[i].v);
        score_steps.push_back(state.score_opt[i].step);
    }
    for (size_t i = 0; i < state.flow_opt.size(); ++i) {
        append_tensor(inventory, blocks, "adam." + flow_names[i] + ".m", state.flow_opt[i].m);
        append_tensor(inventory, blocks, "adam." + flow_names[i] + ".v", state.flow_opt[i].v);
        flow_steps.push_back(state.flow_opt[i].step);
    }
    header["score_adam_steps"] = score_steps;
    header["flow_adam_steps"] = flow_steps;

    if (state.cfg.freeze_tm_noise) {
        append_tensor(inventory, blocks, "frozen_x0", state.frozen_x0);
        append_tensor(inventory, blocks, "frozen_eps", state.frozen_eps);
    }
    header["tensors"] = inventory;

    const std::string js = header.dump();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("checkpoint: cannot open '" + path + "' for writing");
    f.write(kMagic, sizeof(kMagic));
    const auto len = static_cast<uint64_t>(js.size());
    char lenbuf[8];
    for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<char>((len >> (8 * i)) & 0xff);
    f.write(lenbuf, 8);
    f.write(js.data(), static_cast<std::streamsize>(js.size()));
    for (const Tensor* t : blocks)
        f.write(reinterpret_cast<const char*>(t->data.data()),
                static_cast<std::streamsize>(t->data.size() * sizeof(double)));
    if (!f) throw CheckpointError("checkpoint: write failed for '" + path + "'");
}

TrainState load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("checkpoint: cannot open '" + path + "'");
    char magic[6];
    f.read(magic, 6);
    if (!f || std::memcmp(magic, kMagic, 6) != 0)
        throw CheckpointError("checkpoint: bad magic in '" + path + "' (expected DINOF1)");
    char lenbuf[8];
    f.read(lenbuf, 8);
    if (!f) throw CheckpointError("checkpoint: truncated header length");
    uint64_t len = 0;
    for (int i = 0; i < 8; ++i)
        len |= static_cast<uint64_t>(static_cast<unsigned char>(lenbuf[i])) << (8 * i);
    std::string js(len, '\0');
    f.read(js.data(), static_cast<std::streamsize>(len));
    if (!f) throw CheckpointError("checkpoint: truncated header");

    Json header;
    try {
        header = Json::parse(js);
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint: header is not valid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    try {
        cfg = ExperimentConfig::parse_text(header.at("config").get<std::string>());
    } catch (const ConfigError& e) {
        throw CheckpointError(std::string("checkpoint: embedded config invalid: ") + e.what());
    }

    TrainState st = TrainState::create(cfg);
    st.iteration = header.at("iteration").get<int64_t>();
    st.rng.set_state(header.at("rng").get<std::string>());
    st.flow.initialized = header.at("flow_initialized").get<bool>();
    {
        const Json& perms = header.at("flow_perms");
        if (perms.size() != st.flow.blocks.size())
            throw CheckpointError("checkpoint: flow block count mismatch");
        for (size_t b = 0; b < st.flow.blocks.size(); ++b) {
            std::vector<int64_t> p = shape_from(perms[b]);
            if (p.size() != static_cast<size_t>(st.flow.dim))
                throw CheckpointError("checkpoint: permutation length mismatch");
            st.flow.blocks[b].perm = std::move(p);
        }
    }

    // named destinations, in the same declared order as save
    std::vector<Tensor*> dests;
    std::vector<std::string> names;
    const auto score_names = st.score.param_names();
    for (size_t i = 0; i < st.score.params.size(); ++i) {
        dests.push_back(&st.score.params[i]);
        names.push_back(score_names[i]);
    }
    const auto flow_names = st.flow.param_names();
    for (Tensor* p : st.flow.param_ptrs()) dests.push_back(p);
    for (const auto& n : flow_names) names.push_back(n);
    for (size_t i = 0; i < st.score_opt.size(); ++i) {
        dests.push_back(&st.score_opt[i].m);
        names.push_back("adam." + score_names[i] + ".m");
        dests.push_back(&st.score_opt[i].v);
        names.push_back("adam." + score_names[i] + ".v");
    }
    for (size_t i = 0; i < st.flow_opt.size(); ++i) {
        dests.push_back(&st.flow_opt[i].m);
        names.push_back("adam." + flow_names[i] + ".m");
        dests.push_back(&st.flow_opt[i].v);
        names.push_back("adam." + flow_names[i] + ".v");
    }
    if (cfg.freeze_tm_noise) {
        dests.push_back(&st.frozen_x0);
        names.push_back("frozen_x0");
        dests.push_back(&st.frozen_eps);
        names.push_back("frozen_eps");
    }

    const Json& inventory = header.at("tensors");
    if (inventory.size() != dests.size())
        throw CheckpointError("checkpoint: tensor inventory size mismatch (" +
                              std::to_string(inventory.size()) + " vs " +
                              std::to_string(dests.size()) + ")");
    for (size_t i = 0; i < dests.size(); ++i) {
        const Json& e = inventory[i];
        if (e.at("name").get<std::string>() != names[i])
            throw CheckpointError("checkpoint: tensor '" + names[i] + "' missing or out of order");
        const std::vector<int64_t> shape = shape_from(e.at("shape"));
        Tensor t(shape);
        f.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        if (!f) throw CheckpointError("checkpoint: truncated tensor block '" + names[i] + "'");
        if (shape != dests[i]->shape)
            throw CheckpointError("checkpoint: shape mismatch for '" + names[i] + "'");
        *dests[i] = std::move(t);
    }

    const Json& ss = header.at("score_adam_steps");
    const Json& fs = header.at("flow_adam_steps");
    if (ss.size() != st.score_opt.size() || fs.size() != st.flow_opt.size())
        throw CheckpointError("checkpoint: optimizer step count mismatch");
    for (size_t i = 0; i < st.score_opt.size(); ++i) st.score_opt[i].step = ss[i].get<int64_t>();
    for (size_t i = 0; i < st.flow_opt.size(); ++i) st.flow_opt[i].step = fs[i].get<int64_t>();

    return st;
}

}  // namespace dinof
