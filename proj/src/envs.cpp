#include "arlab/envs.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "arlab/analytics.hpp"
#include "arlab/errors.hpp"

namespace arlab {

using nlohmann::json;

void RiverSwimConfig::validate() const {
    if (n_states < 3) throw InvalidConfig("riverswim: n_states must be >= 3");
    if (!(p_forward > 0.0 && p_stay >= 0.0 && p_back > 0.0))
        throw InvalidConfig("riverswim: swim split must have positive forward and back parts");
    if (std::abs(p_forward + p_stay + p_back - 1.0) > 1e-12)
        throw InvalidConfig("riverswim: swim split must sum to 1");
    if (!(left_slip > 0.0 && left_slip < 1.0))
        throw InvalidConfig("riverswim: left_slip must lie in (0,1)");
    if (!(reward_left >= 0.0 && reward_left <= 1.0 && reward_right >= 0.0 && reward_right <= 1.0))
        throw InvalidConfig("riverswim: rewards must lie in [0,1]");
}

TabularMdp make_ergodic_riverswim(const RiverSwimConfig& config) {
    config.validate();
    const int N = config.n_states;
    const int kLeft = 0, kRight = 1;
    TabularMdp m = TabularMdp::zeros(N, 2);
    for (int s = 0; s < N; ++s) {
        int left_of = std::max(s - 1, 0);
        int right_of = std::min(s + 1, N - 1);
        m.p(s, kLeft, left_of) += 1.0 - config.left_slip;
        m.p(s, kLeft, right_of) += config.left_slip;
        if (s == 0) {
            m.p(s, kRight, 0) += config.p_stay + config.p_back;
            m.p(s, kRight, 1) += config.p_forward;
        } else if (s == N - 1) {
            m.p(s, kRight, N - 1) += config.p_stay;
            m.p(s, kRight, N - 2) += config.p_forward + config.p_back;
        } else {
            m.p(s, kRight, s - 1) += config.p_back;
            m.p(s, kRight, s) += config.p_stay;
            m.p(s, kRight, s + 1) += config.p_forward;
        }
    }
    m.mu(0, kLeft) = config.reward_left;
    m.mu(N - 1, kRight) = config.reward_right;
    m.validate();
    return m;
}

void TwoStateHardConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0 / 3.0))
        throw InvalidConfig("two_state_hard: delta must lie in (0, 1/3)");
    if (!(eps > 0.0 && eps <= delta / 2.0 + 1e-15))
        throw InvalidConfig("two_state_hard: eps must lie in (0, delta/2]");
    if (n_actions < 1) throw InvalidConfig("two_state_hard: n_actions must be >= 1");
}

std::pair<TabularMdp, TwoStateHardAnalytic> make_two_state_hard(const TwoStateHardConfig& config) {
    config.validate();
    const int A = config.n_actions;
    TabularMdp m = TabularMdp::zeros(2, A);
    for (int a = 0; a < A; ++a) {
        double up = (a == 0) ? config.delta + config.eps : config.delta;
        m.p(0, a, 1) = up;
        m.p(0, a, 0) = 1.0 - up;
        m.p(1, a, 0) = config.delta;
        m.p(1, a, 1) = 1.0 - config.delta;
        m.mu(0, a) = 0.0;
        m.mu(1, a) = 1.0;
    }
    m.validate();

    TwoStateHardAnalytic closed;
    double d = config.delta, e = config.eps;
    closed.span_bias = 1.0 / (2.0 * d + e);
    closed.gain_opt = (d + e) * closed.span_bias;
    closed.v_max = (d + e) * (1.0 - d - e) * closed.span_bias * closed.span_bias;
    closed.diameter = 1.0 / d;
    closed.gap_bad_action = e * closed.span_bias;

    MdpProfile prof = build_profile(m, /*mixing_policy_cap=*/0);
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y)); };
    if (!close(prof.gain_opt, closed.gain_opt) || !close(prof.span_bias, closed.span_bias) ||
        !close(prof.v_max, closed.v_max) || !close(prof.diameter, closed.diameter))
        throw NumericalFailure("two_state_hard: solver profile disagrees with closed forms");
    return {m, closed};
}

TabularMdp make_random_ergodic(int S, int A, std::uint64_t seed, double min_prob) {
    if (S < 1 || A < 1) throw InvalidConfig("random mdp: S and A must be >= 1");
    if (!(min_prob >= 0.0) || min_prob * S > 1.0)
        throw InvalidConfig("random mdp: need min_prob * S <= 1");
    Rng rng(Rng::derive(seed, 0x7161ull));
    TabularMdp m = TabularMdp::zeros(S, A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double total = 0.0;
            std::vector<double> raw(S);
            for (int y = 0; y < S; ++y) {
                raw[y] = rng.exponential();
                total += raw[y];
            }
            double free_mass = 1.0 - min_prob * S;
            double row_sum = 0.0;
            for (int y = 0; y < S; ++y) {
                m.p(s, a, y) = min_prob + free_mass * raw[y] / total;
                row_sum += m.p(s, a, y);
            }
            for (int y = 0; y < S; ++y) m.p(s, a, y) /= row_sum;
            m.mu(s, a) = rng.uniform01();
        }
    }
    m.validate();
    return m;
}

std::pair<int, double> sample_step(const TabularMdp& mdp, int s, int a, Rng& rng) {
    int next = rng.categorical(mdp.row(s, a), mdp.n_states);
    double mean = mdp.mu(s, a);
    double reward = mdp.noise(s, a) == RewardNoise::Deterministic
                        ? mean
                        : (rng.bernoulli(mean) ? 1.0 : 0.0);
    return {next, reward};
}

TabularMdp EnvConfig::build() const {
    if (family == "riverswim") return make_ergodic_riverswim(riverswim);
    if (family == "two_state_hard") return make_two_state_hard(two_state).first;
    if (family == "random")
        return make_random_ergodic(random_n_states, random_n_actions, random_seed, random_min_prob);
    if (family == "explicit") {
        explicit_mdp.validate();
        return explicit_mdp;
    }
    throw InvalidConfig("env: unknown family \"" + family + "\"");
}

std::string EnvConfig::to_json() const {
    json doc;
    doc["family"] = family;
    if (family == "riverswim") {
        doc["n_states"] = riverswim.n_states;
        doc["p_forward"] = riverswim.p_forward;
        doc["p_stay"] = riverswim.p_stay;
        doc["p_back"] = riverswim.p_back;
        doc["left_slip"] = riverswim.left_slip;
        doc["reward_left"] = riverswim.reward_left;
        doc["reward_right"] = riverswim.reward_right;
    } else if (family == "two_state_hard") {
        doc["delta"] = two_state.delta;
        doc["eps"] = two_state.eps;
        doc["n_actions"] = two_state.n_actions;
    } else if (family == "random") {
        doc["n_states"] = random_n_states;
        doc["n_actions"] = random_n_actions;
        doc["seed"] = random_seed;
        doc["min_prob"] = random_min_prob;
    } else if (family == "explicit") {
        doc = json::parse(mdp_to_json(explicit_mdp));
        doc["family"] = "explicit";
    }
    return doc.dump(2);
}

EnvConfig env_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidConfig(std::string("env json parse error: ") + e.what());
    }
    if (!doc.contains("family")) throw InvalidConfig("env: missing \"family\" field");
    EnvConfig cfg;
    cfg.family = doc.at("family").get<std::string>();
    auto get_or = [&doc](const char* key, double fallback) {
        return doc.contains(key) ? doc.at(key).get<double>() : fallback;
    };
    if (cfg.family == "riverswim") {
        RiverSwimConfig& r = cfg.riverswim;
        if (doc.contains("n_states")) r.n_states = doc.at("n_states").get<int>();
        r.p_forward = get_or("p_forward", r.p_forward);
        r.p_stay = get_or("p_stay", r.p_stay);
        r.p_back = get_or("p_back", r.p_back);
        r.left_slip = get_or("left_slip", r.left_slip);
        r.reward_left = get_or("reward_left", r.reward_left);
        r.reward_right = get_or("reward_right", r.reward_right);
        r.validate();
    } else if (cfg.family == "two_state_hard") {
        TwoStateHardConfig& t = cfg.two_state;
        t.delta = get_or("delta", t.delta);
        t.eps = get_or("eps", t.eps);
        if (doc.contains("n_actions")) t.n_actions = doc.at("n_actions").get<int>();
        t.validate();
    } else if (cfg.family == "random") {
        if (doc.contains("n_states")) cfg.random_n_states = doc.at("n_states").get<int>();
        if (doc.contains("n_actions")) cfg.random_n_actions = doc.at("n_actions").get<int>();
        if (doc.contains("seed")) cfg.random_seed = doc.at("seed").get<std::uint64_t>();
        cfg.random_min_prob = get_or("min_prob", cfg.random_min_prob);
    } else if (cfg.family == "explicit") {
        cfg.explicit_mdp = mdp_from_json(text);
    } else {
        throw InvalidConfig("env: unknown family \"" + cfg.family + "\"");
    }
    return cfg;
}

EnvConfig env_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return env_config_from_json(buf.str());
}

} // namespace arlab
