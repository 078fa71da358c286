#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "explore/agents.hpp"
#include "explore/ddpg.hpp"
#include "explore/harness.hpp"

namespace explore {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v)
{
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a finite number");
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v)
{
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a non-negative integer");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "': '" + v + "' is not a boolean");
}

std::string fmt(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(trim(cur));
    return parts;
}

const std::vector<std::string> kAgents = {"ge",         "noisynet",    "dqn",     "categorical",
                                          "ddpg-plain", "ddpg-noisy",  "ddpg-ge", "bandit"};

}  // namespace

std::vector<std::string> config_keys()
{
    return {"env",          "chain_length", "sparse",        "agent",       "rho",         "log10_sigma",
            "alpha",        "gamma",        "tau",           "batch",       "buffer",      "episodes",
            "seed",         "out",          "hidden",        "activation",  "optimizer",   "epsilon",
            "shared_rho",   "resample",     "control",       "theta_samples", "atoms",     "v_min",
            "v_max",        "action_noise", "polyak",        "polyak_rate", "bandit_means", "bandit_sigma",
            "record_trajectories", "timing", "stop_at"};
}

double ExperimentConfig::sigma() const { return std::pow(10.0, log10_sigma); }

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value)
{
    const std::string key = trim(raw_key);
    const std::string v = trim(raw_value);
    if (key == "env") {
        const EnvSpec spec = make_env_spec(v, chain_length);
        env = to_string(spec.id);
        if (spec.id == EnvId::chain) chain_length = spec.chain_length;
    } else if (key == "chain_length" || key == "n") {
        chain_length = parse_uint(key, v);
    } else if (key == "sparse") {
        sparse = parse_bool(key, v);
    } else if (key == "agent") {
        bool known = false;
        for (const auto& a : kAgents) known = known || a == v;
        if (!known) throw std::invalid_argument("config key 'agent': unknown agent '" + v + "'");
        agent = v;
    } else if (key == "rho") {
        rho = parse_double(key, v);
    } else if (key == "log10_sigma") {
        log10_sigma = parse_double(key, v);
    } else if (key == "alpha") {
        alpha = parse_double(key, v);
    } else if (key == "gamma") {
        gamma = parse_double(key, v);
    } else if (key == "tau") {
        tau = parse_uint(key, v);
    } else if (key == "batch") {
        batch = parse_uint(key, v);
    } else if (key == "buffer") {
        buffer = parse_uint(key, v);
    } else if (key == "episodes") {
        episodes = parse_uint(key, v);
    } else if (key == "seed") {
        seed = parse_uint(key, v);
    } else if (key == "out") {
        out = v;
    } else if (key == "hidden") {
        hidden.clear();
        for (const auto& part : split(v, ',')) hidden.push_back(parse_uint(key, part));
    } else if (key == "activation") {
        parse_activation(v);
        activation = v;
    } else if (key == "optimizer") {
        parse_optimizer(v);
        optimizer = v;
    } else if (key == "epsilon") {
        epsilon = parse_double(key, v);
    } else if (key == "shared_rho") {
        shared_rho = parse_bool(key, v);
    } else if (key == "resample") {
        resample = v;
    } else if (key == "control") {
        control = v;
    } else if (key == "theta_samples") {
        theta_samples = parse_uint(key, v);
    } else if (key == "atoms") {
        atoms = parse_uint(key, v);
    } else if (key == "v_min") {
        v_min = parse_double(key, v);
    } else if (key == "v_max") {
        v_max = parse_double(key, v);
    } else if (key == "action_noise") {
        action_noise = parse_double(key, v);
    } else if (key == "polyak") {
        polyak = parse_bool(key, v);
    } else if (key == "polyak_rate") {
        polyak_rate = parse_double(key, v);
    } else if (key == "bandit_means") {
        for (const auto& part : split(v, ',')) parse_double(key, part);
        bandit_means = v;
    } else if (key == "bandit_sigma") {
        bandit_sigma = parse_double(key, v);
    } else if (key == "record_trajectories") {
        record_trajectories = parse_bool(key, v);
    } else if (key == "timing") {
        timing = parse_bool(key, v);
    } else if (key == "stop_at") {
        if (v.empty() || v == "none") stop_at.reset();
        else stop_at = parse_double(key, v);
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

std::map<std::string, std::string> ExperimentConfig::to_map() const
{
    std::string hidden_s;
    for (std::size_t i = 0; i < hidden.size(); ++i) hidden_s += (i ? "," : "") + std::to_string(hidden[i]);
    auto b = [](bool x) { return std::string(x ? "true" : "false"); };
    return {{"env", env},
            {"chain_length", std::to_string(chain_length)},
            {"sparse", b(sparse)},
            {"agent", agent},
            {"rho", fmt(rho)},
            {"log10_sigma", fmt(log10_sigma)},
            {"alpha", fmt(alpha)},
            {"gamma", fmt(gamma)},
            {"tau", std::to_string(tau)},
            {"batch", std::to_string(batch)},
            {"buffer", std::to_string(buffer)},
            {"episodes", std::to_string(episodes)},
            {"seed", std::to_string(seed)},
            {"out", out},
            {"hidden", hidden_s},
            {"activation", activation},
            {"optimizer", optimizer},
            {"epsilon", fmt(epsilon)},
            {"shared_rho", b(shared_rho)},
            {"resample", resample},
            {"control", control},
            {"theta_samples", std::to_string(theta_samples)},
            {"atoms", std::to_string(atoms)},
            {"v_min", fmt(v_min)},
            {"v_max", fmt(v_max)},
            {"action_noise", fmt(action_noise)},
            {"polyak", b(polyak)},
            {"polyak_rate", fmt(polyak_rate)},
            {"bandit_means", bandit_means},
            {"bandit_sigma", fmt(bandit_sigma)},
            {"record_trajectories", b(record_trajectories)},
            {"timing", b(timing)},
            {"stop_at", stop_at ? fmt(*stop_at) : "none"}};
}

void ExperimentConfig::validate() const
{
    const bool is_ddpg = agent.rfind("ddpg-", 0) == 0;
    if (agent != "bandit") {
        const EnvSpec spec = make_env_spec(env, chain_length);
        if (is_ddpg && spec.discrete) throw std::invalid_argument(agent + " needs a continuous-action environment");
        if (!is_ddpg && !spec.discrete) throw std::invalid_argument(agent + " needs a discrete-action environment");
        if (sparse && spec.id == EnvId::chain) throw std::invalid_argument("chain has no sparse-reward variant");
    }
    if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("gamma must be in (0, 1]");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
    if (tau == 0) throw std::invalid_argument("tau must be >= 1");
    if (batch == 0) throw std::invalid_argument("batch must be >= 1");
    if (buffer < batch) throw std::invalid_argument("buffer capacity must be >= batch");
    if (episodes == 0) throw std::invalid_argument("episodes must be >= 1");
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0, 1]");
    if (hidden.empty()) throw std::invalid_argument("hidden must list at least one layer width");
    for (std::size_t h : hidden)
        if (h == 0) throw std::invalid_argument("hidden layer widths must be >= 1");
    if (resample != "step" && resample != "episode") throw std::invalid_argument("resample must be step or episode");
    if (!control.empty() && control != "thompson" && control != "epsilon")
        throw std::invalid_argument("control must be thompson or epsilon");
    if (theta_samples == 0) throw std::invalid_argument("theta_samples must be >= 1");
    if (agent == "categorical" && (atoms < 2 || !(v_max > v_min)))
        throw std::invalid_argument("categorical agent needs atoms >= 2 and v_max > v_min");
    if (action_noise < 0.0) throw std::invalid_argument("action_noise must be >= 0");
    if (polyak && !(polyak_rate > 0.0 && polyak_rate <= 1.0)) throw std::invalid_argument("polyak_rate must be in (0, 1]");
    if (!(bandit_sigma > 0.0)) throw std::invalid_argument("bandit_sigma must be > 0");
    if (agent == "bandit" && split(bandit_means, ',').size() < 2)
        throw std::invalid_argument("bandit needs at least two arm means");
    if (out.empty()) throw std::invalid_argument("out directory must be set");
}

void apply_config_text(ExperimentConfig& config, const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            config.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

ExperimentConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open config file " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    ExperimentConfig c;
    apply_config_text(c, buf.str());
    return c;
}

}  // namespace explore
