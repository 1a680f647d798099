#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "lagco/envs.hpp"
#include "lagco/gae.hpp"
#include "lagco/parallel.hpp"
#include "lagco/protocol.hpp"
#include "lagco/scenario.hpp"
#include "lagco/sweep.hpp"
#include "lagco/timing.hpp"
#include "lagco/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lagco;

namespace {

struct CommonOpts {
    std::string env;
    std::string agent = "projection";
    std::string strategy = "S";
    uint64_t seed = 42;
    std::string config_path;
    std::string out;
    int jobs = 0;
    json file_cfg = json::object();

    fs::path data_dir() const {
        if (!out.empty()) return out;
        if (const char* dir = std::getenv("LAGCO_DATA_DIR")) return dir;
        return "data";
    }
    int job_count() const {
        if (jobs > 0) return jobs;
        unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--env", opts.env, "benchmark environment")->required();
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--config", opts.config_path, "JSON config file; flags win over file values");
    cmd->add_option("--out", opts.out, "data directory (default $LAGCO_DATA_DIR or ./data)");
    cmd->add_option("--jobs", opts.jobs, "worker pool size (default: available cores)");
}

void load_file_config(CommonOpts& opts) {
    if (opts.config_path.empty()) return;
    std::ifstream is(opts.config_path);
    if (!is) throw std::runtime_error("cannot open config file " + opts.config_path);
    opts.file_cfg = json::parse(is);
}

template <class T>
T cfg_or(const json& cfg, const std::string& key, T fallback) {
    if (cfg.contains(key)) return cfg.at(key).get<T>();
    return fallback;
}

json cfg_section(const json& cfg, const std::string& key) {
    return cfg.contains(key) ? cfg.at(key) : json::object();
}

void write_run_config(const fs::path& dir, const std::string& command, const json& resolved) {
    fs::create_directories(dir);
    std::ofstream os(dir / (command + "_config.json"));
    os << resolved.dump(2) << '\n';
}

fs::path instance_dir(const CommonOpts& opts) { return opts.data_dir() / "instances" / opts.env; }

std::vector<fs::path> instance_files(const CommonOpts& opts) {
    std::vector<fs::path> files;
    fs::path dir = instance_dir(opts);
    if (!fs::exists(dir))
        throw std::runtime_error("missing instance directory " + dir.string() +
                                 "; run `lagco generate --env " + opts.env + "` first");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json" &&
            entry.path().filename().string().find("_config") == std::string::npos)
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::runtime_error("no instance files in " + dir.string() +
                                 "; run `lagco generate --env " + opts.env + "` first");
    return files;
}

std::vector<Instance> load_instances(const CommonOpts& opts, bool require_bounds) {
    std::vector<Instance> out;
    for (const auto& path : instance_files(opts)) {
        Instance inst = load_instance(path.string());
        if (require_bounds && !inst.bounds)
            throw std::runtime_error("instance file " + path.string() +
                                     " has no oracle bounds; run `lagco sweep --env " + opts.env +
                                     "` first");
        out.push_back(std::move(inst));
    }
    return out;
}

fs::path gae_path(const CommonOpts& opts) {
    return opts.data_dir() / "gae" / (opts.env + ".ckpt");
}

gae::GaePack load_gae_or_fail(const CommonOpts& opts) {
    fs::path path = gae_path(opts);
    if (!fs::exists(path))
        throw std::runtime_error("missing encoder checkpoint " + path.string() +
                                 "; run `lagco pretrain --env " + opts.env + "` first");
    return gae::load_gae(path.string());
}

gae::EncoderConfig encoder_config(const json& cfg) {
    json section = cfg_section(cfg, "encoder");
    gae::EncoderConfig enc;
    enc.num_layers = cfg_or(section, "num_layers", enc.num_layers);
    enc.hidden = cfg_or(section, "hidden", enc.hidden);
    enc.out = cfg_or(section, "out", enc.out);
    return enc;
}

json encoder_json(const gae::EncoderConfig& enc) {
    return {{"num_layers", enc.num_layers}, {"hidden", enc.hidden}, {"out", enc.out}};
}

train::TrainConfig train_config(const json& cfg, uint64_t seed) {
    train::TrainConfig tcfg;
    tcfg.total_steps = cfg_or(cfg, "train_steps", 50000);
    tcfg.seed = seed;
    tcfg.rotation_interval = cfg_or(cfg, "rotation_interval", 50);
    json ppo = cfg_section(cfg, "ppo");
    tcfg.ppo.lr = cfg_or(ppo, "lr", tcfg.ppo.lr);
    tcfg.ppo.batch = cfg_or(ppo, "batch", tcfg.ppo.batch);
    tcfg.ppo.gamma = cfg_or(ppo, "gamma", tcfg.ppo.gamma);
    tcfg.ppo.rollout = cfg_or(ppo, "rollout", tcfg.ppo.rollout);
    tcfg.ppo.ent_coef = cfg_or(ppo, "ent_coef", tcfg.ppo.ent_coef);
    tcfg.ppo.max_grad_norm = cfg_or(ppo, "max_grad_norm", tcfg.ppo.max_grad_norm);
    tcfg.ppo.clip = cfg_or(ppo, "clip", tcfg.ppo.clip);
    tcfg.ppo.gae_lambda = cfg_or(ppo, "gae_lambda", tcfg.ppo.gae_lambda);
    tcfg.ppo.epochs = cfg_or(ppo, "epochs", tcfg.ppo.epochs);
    json idqn = cfg_section(cfg, "idqn");
    tcfg.idqn.lr = cfg_or(idqn, "lr", tcfg.idqn.lr);
    tcfg.idqn.batch = cfg_or(idqn, "batch", tcfg.idqn.batch);
    tcfg.idqn.gamma = cfg_or(idqn, "gamma", tcfg.idqn.gamma);
    tcfg.idqn.n_step = cfg_or(idqn, "n_step", tcfg.idqn.n_step);
    tcfg.idqn.tau = cfg_or(idqn, "tau", tcfg.idqn.tau);
    tcfg.idqn.target_update_interval =
        cfg_or(idqn, "target_update_interval", tcfg.idqn.target_update_interval);
    tcfg.idqn.train_freq = cfg_or(idqn, "train_freq", tcfg.idqn.train_freq);
    tcfg.idqn.learning_starts = cfg_or(idqn, "learning_starts", tcfg.idqn.learning_starts);
    tcfg.idqn.buffer_capacity = cfg_or(idqn, "buffer_capacity", tcfg.idqn.buffer_capacity);
    return tcfg;
}

json train_json(const train::TrainConfig& t) {
    return {{"train_steps", t.total_steps},
            {"rotation_interval", t.rotation_interval},
            {"ppo",
             {{"lr", t.ppo.lr},
              {"batch", t.ppo.batch},
              {"gamma", t.ppo.gamma},
              {"rollout", t.ppo.rollout},
              {"ent_coef", t.ppo.ent_coef},
              {"max_grad_norm", t.ppo.max_grad_norm},
              {"clip", t.ppo.clip},
              {"gae_lambda", t.ppo.gae_lambda},
              {"epochs", t.ppo.epochs}}},
            {"idqn",
             {{"lr", t.idqn.lr},
              {"batch", t.idqn.batch},
              {"gamma", t.idqn.gamma},
              {"n_step", t.idqn.n_step},
              {"tau", t.idqn.tau},
              {"target_update_interval", t.idqn.target_update_interval},
              {"train_freq", t.idqn.train_freq},
              {"learning_starts", t.idqn.learning_starts},
              {"buffer_capacity", t.idqn.buffer_capacity}}}};
}

fs::path agent_ckpt_path(const CommonOpts& opts, uint64_t train_seed) {
    return opts.data_dir() / "agents" / opts.env /
           (opts.agent + "_" + opts.strategy + "_seed" + std::to_string(train_seed) + ".ckpt");
}

int cmd_generate(CommonOpts& opts, int count, bool ecmp) {
    load_file_config(opts);
    count = cfg_or(opts.file_cfg, "count", count);
    EnvKind kind = env_kind_from_string(opts.env);
    auto instances = generate_scenarios(kind, count, opts.seed, opts.job_count());
    if (ecmp && kind == EnvKind::Ospf)
        for (auto& inst : instances) inst.as<OspfData>().ecmp = true;
    fs::path dir = instance_dir(opts);
    fs::create_directories(dir);
    for (const auto& inst : instances) save_instance((dir / (inst.id + ".json")).string(), inst);
    write_run_config(dir, "generate",
                     {{"command", "generate"},
                      {"env", opts.env},
                      {"count", count},
                      {"seed", opts.seed},
                      {"ecmp", ecmp},
                      {"jobs", opts.job_count()}});
    std::cout << "wrote " << instances.size() << " instances to " << dir.string() << "\n";
    return 0;
}

int cmd_sweep(CommonOpts& opts, int64_t sweeps) {
    load_file_config(opts);
    sweeps = cfg_or<int64_t>(opts.file_cfg, "sweeps", sweeps);
    auto files = instance_files(opts);
    std::vector<Instance> instances;
    for (const auto& f : files) instances.push_back(load_instance(f.string()));
    SweepConfig cfg;
    cfg.sweeps = sweeps;
    cfg.top_k = cfg_or(opts.file_cfg, "sweep_top_k", cfg.top_k);
    cfg.elite_pool = cfg_or(opts.file_cfg, "sweep_elite_pool", cfg.elite_pool);
    cfg.restart_prob = cfg_or(opts.file_cfg, "sweep_restart_prob", cfg.restart_prob);
    cfg.mutate_frac = cfg_or(opts.file_cfg, "sweep_mutate_frac", cfg.mutate_frac);
    cfg.steps_per_sweep = cfg_or(opts.file_cfg, "sweep_steps", cfg.steps_per_sweep);
    parallel_for(instances.size(), opts.job_count(), [&](size_t i) {
        SweepConfig local = cfg;
        local.seed = child_seed(opts.seed, i);
        sweep_bounds(instances[i], local);
        save_instance(files[i].string(), instances[i]);
    });
    write_run_config(
        instance_dir(opts), "sweep",
        {{"command", "sweep"},
         {"env", opts.env},
         {"seed", opts.seed},
         {"sweeps", sweeps < 0 ? default_sweeps(env_kind_from_string(opts.env)) : sweeps},
         {"jobs", opts.job_count()}});
    std::cout << "swept bounds for " << instances.size() << " instances\n";
    return 0;
}

int cmd_pretrain(CommonOpts& opts, int instances_used, int epochs) {
    load_file_config(opts);
    EnvKind kind = env_kind_from_string(opts.env);
    auto instances = load_instances(opts, true);
    json gae_cfg = cfg_section(opts.file_cfg, "gae");
    gae::GaeTrainConfig cfg;
    cfg.epochs = cfg_or(gae_cfg, "epochs", epochs);
    cfg.lr = cfg_or(gae_cfg, "lr", cfg.lr);
    cfg.batch = cfg_or(gae_cfg, "batch", cfg.batch);
    cfg.rollouts_per_instance = cfg_or(gae_cfg, "rollouts_per_instance", cfg.rollouts_per_instance);
    cfg.seed = opts.seed;
    instances_used = cfg_or(opts.file_cfg, "pretrain_instances", instances_used);
    if (instances_used > 0 && instances_used < static_cast<int>(instances.size()))
        instances.resize(static_cast<size_t>(instances_used));
    gae::EncoderConfig enc = encoder_config(opts.file_cfg);
    auto result = gae::train_gae(kind, instances, enc, {}, cfg);
    fs::path path = gae_path(opts);
    fs::create_directories(path.parent_path());
    gae::save_gae(path.string(), result.pack);
    json report;
    for (const auto& [name, loss] : result.initial_holdout_loss) {
        report[name] = {{"initial_holdout_loss", loss},
                        {"final_holdout_loss", result.final_holdout_loss.at(name)}};
        std::cout << name << ": holdout loss " << loss << " -> "
                  << result.final_holdout_loss.at(name) << "\n";
    }
    write_run_config(path.parent_path(), "pretrain_" + opts.env,
                     {{"command", "pretrain"},
                      {"env", opts.env},
                      {"seed", opts.seed},
                      {"instances_used", static_cast<int>(instances.size())},
                      {"encoder", encoder_json(enc)},
                      {"gae",
                       {{"epochs", cfg.epochs},
                        {"lr", cfg.lr},
                        {"batch", cfg.batch},
                        {"rollouts_per_instance", cfg.rollouts_per_instance}}},
                      {"holdout", report}});
    std::cout << "saved encoder checkpoint " << path.string() << "\n";
    return 0;
}

int cmd_latent(CommonOpts& opts, int limit) {
    load_file_config(opts);
    auto instances = load_instances(opts, true);
    auto pack = load_gae_or_fail(opts);
    if (limit > 0 && limit < static_cast<int>(instances.size()))
        instances.resize(static_cast<size_t>(limit));
    fs::path dir = opts.data_dir() / "latent" / opts.env;
    fs::create_directories(dir);
    int p = pack.models.begin()->second.config().out;
    std::vector<std::array<double, 3>> cmps(instances.size());
    std::vector<int> counts(instances.size(), 0);
    parallel_for(instances.size(), opts.job_count(), [&](size_t i) {
        auto env = make_env(instances[i]);
        env->reset(opts.seed);
        auto embedder = latent::ActionEmbedder::for_env(instances[i].kind, p, instances[i]);
        auto z = pack.encode_bundle(env->graphs());
        auto actions = agents::full_action_table(instances[i]);
        auto space = latent::LatentSpace::build(actions, embedder.embed_all(actions, z), nullptr);
        space.dump((dir / (instances[i].id + ".lsp")).string());
        counts[i] = space.size();
        int idx = 0;
        for (int k : {3, 5, 10})
            cmps[i][static_cast<size_t>(idx++)] =
                space.size() > k ? space.compactness(k) : std::nan("");
    });
    std::ofstream csv(dir / "cmp.csv");
    csv << "instance,actions,cmp3,cmp5,cmp10\n";
    csv.precision(17);
    double mean[3] = {0, 0, 0};
    int valid[3] = {0, 0, 0};
    for (size_t i = 0; i < instances.size(); ++i) {
        csv << instances[i].id << ',' << counts[i];
        for (int k = 0; k < 3; ++k) {
            csv << ',' << cmps[i][static_cast<size_t>(k)];
            if (!std::isnan(cmps[i][static_cast<size_t>(k)])) {
                mean[k] += cmps[i][static_cast<size_t>(k)];
                ++valid[k];
            }
        }
        csv << '\n';
    }
    csv << "mean,,";
    for (int k = 0; k < 3; ++k) {
        if (k) csv << ',';
        csv << (valid[k] > 0 ? mean[k] / valid[k] : std::nan(""));
    }
    csv << '\n';
    write_run_config(dir, "latent",
                     {{"command", "latent"},
                      {"env", opts.env},
                      {"seed", opts.seed},
                      {"instances", static_cast<int>(instances.size())}});
    std::cout << "dumped " << instances.size() << " latent spaces with cmp@{3,5,10} to "
              << dir.string() << "\n";
    return 0;
}

int cmd_train(CommonOpts& opts, int steps, int64_t only_seed) {
    load_file_config(opts);
    EnvKind kind = env_kind_from_string(opts.env);
    auto pool = load_instances(opts, true);
    auto pack = load_gae_or_fail(opts);
    json resolved_cfg = opts.file_cfg;
    if (steps > 0) resolved_cfg["train_steps"] = steps;
    eval::StrategyConfig strategy;
    strategy.kind = eval::strategy_from_string(opts.strategy);
    strategy.rotation_interval = cfg_or(resolved_cfg, "rotation_interval", 50);
    auto sorted = eval::sort_by_size(pool);
    auto sets = eval::select_training_sets(sorted, strategy, 42);
    auto seeds = eval::default_train_seeds();
    fs::path dir = opts.data_dir() / "agents" / opts.env;
    fs::create_directories(dir);
    agents::AgentKind agent_kind = agents::agent_kind_from_string(opts.agent);
    int trained = 0;
    for (size_t repeat = 0; repeat < sets.size(); ++repeat) {
        uint64_t seed = seeds[repeat];
        if (only_seed >= 0 && static_cast<uint64_t>(only_seed) != seed) continue;
        std::vector<Instance> train_instances;
        for (size_t i : sets[repeat]) train_instances.push_back(sorted[i]);
        train::TrainConfig tcfg = train_config(resolved_cfg, seed);
        tcfg.rotation_interval = strategy.rotation_interval;
        auto agent = train::train_agent(agent_kind, kind, train_instances, sorted, pack, tcfg);
        fs::path path = agent_ckpt_path(opts, seed);
        train::save_agent(path.string(), agent);
        std::cout << "trained " << opts.agent << " (" << opts.strategy << ", seed " << seed
                  << ") -> " << path.string() << "\n";
        ++trained;
    }
    train::TrainConfig resolved = train_config(resolved_cfg, opts.seed);
    write_run_config(dir, "train_" + opts.agent + "_" + opts.strategy,
                     {{"command", "train"},
                      {"env", opts.env},
                      {"agent", opts.agent},
                      {"strategy", opts.strategy},
                      {"train_seeds", seeds},
                      {"config", train_json(resolved)}});
    if (trained == 0) throw std::runtime_error("no repeats matched --train-seed");
    return 0;
}

int cmd_eval(CommonOpts& opts, int episodes) {
    load_file_config(opts);
    auto pool = load_instances(opts, true);
    auto pack = load_gae_or_fail(opts);
    eval::StrategyConfig strategy;
    strategy.kind = eval::strategy_from_string(opts.strategy);
    eval::ProtocolConfig cfg;
    cfg.episodes_per_instance = cfg_or(opts.file_cfg, "episodes", episodes);
    auto provider = [&](const std::vector<Instance>&, uint64_t train_seed, int) {
        fs::path path = agent_ckpt_path(opts, train_seed);
        if (!fs::exists(path))
            throw std::runtime_error("missing agent checkpoint " + path.string() +
                                     "; run `lagco train --env " + opts.env + " --agent " +
                                     opts.agent + " --strategy " + opts.strategy + "` first");
        return train::load_agent(path.string());
    };
    auto records = eval::run_protocol(pool, strategy, cfg, pack, provider, opts.job_count());
    fs::path dir =
        opts.data_dir() / "results" / (opts.env + "_" + opts.agent + "_" + opts.strategy);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "results.csv");
        os << eval::records_to_csv(records, opts.env, opts.agent, true);
    }
    {
        std::ofstream os(dir / "scores.csv");
        os << eval::records_to_csv(records, opts.env, opts.agent, false);
    }
    auto cell = eval::summarize_cell(records, strategy.kind, opts.seed);
    json summary;
    summary["env"] = opts.env;
    summary["agent"] = opts.agent;
    summary["strategy"] = opts.strategy;
    summary["test_iqm"] = cell.test_iqm;
    summary["test_ci"] = {cell.test_ci.first, cell.test_ci.second};
    summary["test_mean"] = cell.test_spread.mean;
    summary["test_lower_spread"] = cell.test_spread.lower;
    summary["test_upper_spread"] = cell.test_spread.upper;
    summary["train_iqm"] = cell.train_iqm;
    summary["delta"] = cell.test_iqm - cell.train_iqm;
    summary["runs"] = cell.runs;
    {
        std::ofstream os(dir / "summary.json");
        os << summary.dump(2) << '\n';
    }
    write_run_config(dir, "eval",
                     {{"command", "eval"},
                      {"env", opts.env},
                      {"agent", opts.agent},
                      {"strategy", opts.strategy},
                      {"episodes", cfg.episodes_per_instance},
                      {"seed", opts.seed},
                      {"jobs", opts.job_count()}});
    std::cout << "test IQM " << cell.test_iqm << " (CI [" << cell.test_ci.first << ", "
              << cell.test_ci.second << "]), train IQM " << cell.train_iqm << ", results in "
              << dir.string() << "\n";
    return 0;
}

std::vector<int> parse_sizes(const std::string& spec) {
    // "a:b:step" inclusive range, or a comma-separated list
    std::vector<int> sizes;
    if (spec.find(':') != std::string::npos) {
        int a = 0, b = 0, step = 0;
        if (std::sscanf(spec.c_str(), "%d:%d:%d", &a, &b, &step) != 3 || step <= 0)
            throw std::runtime_error("bad --sizes spec, expected a:b:step");
        for (int s = a; s <= b; s += step) sizes.push_back(s);
    } else {
        std::stringstream ss(spec);
        std::string item;
        while (std::getline(ss, item, ',')) sizes.push_back(std::stoi(item));
    }
    if (sizes.size() < 3) throw std::runtime_error("--sizes needs at least 3 sizes for the fit");
    return sizes;
}

int cmd_scale(CommonOpts& opts, const std::string& sizes_spec, int episodes) {
    load_file_config(opts);
    eval::TimingConfig cfg;
    cfg.sizes = parse_sizes(cfg_or<std::string>(opts.file_cfg, "sizes", sizes_spec));
    cfg.episodes_per_size = cfg_or(opts.file_cfg, "episodes", episodes);
    cfg.seed = opts.seed;
    cfg.quick_sweeps = cfg_or<int64_t>(opts.file_cfg, "sweeps", cfg.quick_sweeps);
    auto points = eval::timing_run(agents::agent_kind_from_string(opts.agent),
                                   env_kind_from_string(opts.env), cfg);
    auto fit = eval::fit_timing(points);
    fs::path dir = opts.data_dir() / "scale" / (opts.env + "_" + opts.agent);
    fs::create_directories(dir);
    {
        std::ofstream os(dir / "timings.csv");
        os << "size,median_ms,decisions,forwards,valid_actions\n";
        os.precision(17);
        for (const auto& p : points)
            os << p.size << ',' << p.median_ms << ',' << p.decisions << ',' << p.forwards << ','
               << p.valid_actions << '\n';
    }
    {
        std::ofstream os(dir / "fit.json");
        json j{{"c", fit.c}, {"alpha", fit.alpha}, {"r2", fit.r2}};
        os << j.dump(2) << '\n';
    }
    write_run_config(dir, "scale",
                     {{"command", "scale"},
                      {"env", opts.env},
                      {"agent", opts.agent},
                      {"sizes", cfg.sizes},
                      {"episodes", cfg.episodes_per_size},
                      {"seed", opts.seed},
                      {"quick_sweeps", cfg.quick_sweeps}});
    std::cout << "alpha " << fit.alpha << " (c " << fit.c << ", R^2 " << fit.r2 << "), data in "
              << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-action graph combinatorial optimization pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;
    int count = 101;
    int64_t sweeps = -1;
    int epochs = 30;
    int pretrain_instances = 10;
    int latent_limit = 0;
    int train_steps = 0;
    int64_t only_seed = -1;
    int episodes = 5;
    int scale_episodes = 3;
    std::string sizes_spec = "10:50:10";
    bool ecmp = false;

    auto* generate = app.add_subcommand("generate", "sample scenario instances");
    add_common(generate, opts);
    generate->add_option("--count", count, "number of instances");
    generate->add_flag("--ecmp", ecmp, "enable ECMP routing for OSPF instances");

    auto* sweep = app.add_subcommand("sweep", "estimate empirical best/worst bounds");
    add_common(sweep, opts);
    sweep->add_option("--sweeps", sweeps, "sweep count (-1: per-benchmark default)");

    auto* pretrain = app.add_subcommand("pretrain", "train the graph auto-encoder");
    add_common(pretrain, opts);
    pretrain->add_option("--epochs", epochs, "training epochs");
    pretrain->add_option("--instances", pretrain_instances,
                         "instances used for snapshot rollouts (0: all)");

    auto* latent = app.add_subcommand("latent", "dump latent action spaces and cmp@K");
    add_common(latent, opts);
    latent->add_option("--limit", latent_limit, "only the first N instances (0: all)");

    auto* train_cmd = app.add_subcommand("train", "train an agent per strategy repeat");
    add_common(train_cmd, opts);
    train_cmd->add_option("--agent", opts.agent, "agent kind")->required();
    train_cmd->add_option("--strategy", opts.strategy, "S, M, L or V");
    train_cmd->add_option("--steps", train_steps, "environment steps per run");
    train_cmd->add_option("--train-seed", only_seed, "train only the repeat with this seed");

    auto* eval_cmd = app.add_subcommand("eval", "run the generalization protocol");
    add_common(eval_cmd, opts);
    eval_cmd->add_option("--agent", opts.agent, "agent kind")->required();
    eval_cmd->add_option("--strategy", opts.strategy, "S, M, L or V");
    eval_cmd->add_option("--episodes", episodes, "episodes per unseen instance");

    auto* scale = app.add_subcommand("scale", "action-selection time scaling study");
    add_common(scale, opts);
    scale->add_option("--agent", opts.agent, "agent kind")->required();
    scale->add_option("--sizes", sizes_spec, "size grid a:b:step or comma list");
    scale->add_option("--episodes", scale_episodes, "episodes per size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) return cmd_generate(opts, count, ecmp);
        if (sweep->parsed()) return cmd_sweep(opts, sweeps);
        if (pretrain->parsed()) return cmd_pretrain(opts, pretrain_instances, epochs);
        if (latent->parsed()) return cmd_latent(opts, latent_limit);
        if (train_cmd->parsed()) return cmd_train(opts, train_steps, only_seed);
        if (eval_cmd->parsed()) return cmd_eval(opts, episodes);
        if (scale->parsed()) return cmd_scale(opts, sizes_spec, scale_episodes);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
