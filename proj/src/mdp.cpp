#include "arlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "arlab/errors.hpp"

namespace arlab {

using nlohmann::json;

TabularMdp TabularMdp::zeros(int S, int A) {
    TabularMdp m;
    m.n_states = S;
    m.n_actions = A;
    m.transition.assign(static_cast<std::size_t>(S) * A * S, 0.0);
    m.mean_reward.assign(static_cast<std::size_t>(S) * A, 0.0);
    m.reward_noise.assign(static_cast<std::size_t>(S) * A, RewardNoise::Deterministic);
    return m;
}

void TabularMdp::validate(double simplex_tol) const {
    if (n_states < 1) throw InvalidConfig("n_states: must be >= 1");
    if (n_actions < 1) throw InvalidConfig("n_actions: must be >= 1");
    const std::size_t S = n_states, A = n_actions;
    if (transition.size() != S * A * S)
        throw InvalidConfig("transition: expected " + std::to_string(S * A * S) + " entries, got " +
                            std::to_string(transition.size()));
    if (mean_reward.size() != S * A)
        throw InvalidConfig("mean_reward: expected " + std::to_string(S * A) + " entries, got " +
                            std::to_string(mean_reward.size()));
    if (reward_noise.size() != S * A) throw InvalidConfig("reward_noise: wrong size");
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            double sum = 0.0;
            for (int y = 0; y < n_states; ++y) {
                double v = p(s, a, y);
                if (!(v >= 0.0))
                    throw InvalidConfig("transition[" + std::to_string(s) + "][" + std::to_string(a) +
                                        "][" + std::to_string(y) + "]: negative or NaN entry");
                sum += v;
            }
            if (std::abs(sum - 1.0) > simplex_tol)
                throw InvalidConfig("transition[" + std::to_string(s) + "][" + std::to_string(a) +
                                    "]: row sums to " + std::to_string(sum));
            double r = mu(s, a);
            if (!(r >= 0.0 && r <= 1.0))
                throw InvalidConfig("mean_reward[" + std::to_string(s) + "][" + std::to_string(a) +
                                    "]: " + std::to_string(r) + " outside [0,1]");
        }
    }
}

StationaryPolicy StationaryPolicy::deterministic(const std::vector<int>& actions, int n_actions) {
    StationaryPolicy pol;
    pol.n_states = static_cast<int>(actions.size());
    pol.n_actions = n_actions;
    pol.action_dist.assign(static_cast<std::size_t>(pol.n_states) * n_actions, 0.0);
    for (int s = 0; s < pol.n_states; ++s) {
        if (actions[s] < 0 || actions[s] >= n_actions)
            throw InvalidConfig("policy action out of range at state " + std::to_string(s));
        pol.action_dist[static_cast<std::size_t>(s) * n_actions + actions[s]] = 1.0;
    }
    return pol;
}

StationaryPolicy StationaryPolicy::uniform(int S, int A) {
    StationaryPolicy pol;
    pol.n_states = S;
    pol.n_actions = A;
    pol.action_dist.assign(static_cast<std::size_t>(S) * A, 1.0 / A);
    return pol;
}

int StationaryPolicy::action(int s) const {
    int best = 0;
    double bp = -1.0;
    for (int a = 0; a < n_actions; ++a) {
        if (prob(s, a) > bp) {
            bp = prob(s, a);
            best = a;
        }
    }
    return best;
}

void StationaryPolicy::validate(double simplex_tol) const {
    if (n_states < 1 || n_actions < 1) throw InvalidConfig("policy: empty shape");
    if (action_dist.size() != static_cast<std::size_t>(n_states) * n_actions)
        throw InvalidConfig("policy: wrong table size");
    for (int s = 0; s < n_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < n_actions; ++a) {
            double v = prob(s, a);
            if (!(v >= 0.0)) throw InvalidConfig("policy[" + std::to_string(s) + "]: negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > simplex_tol)
            throw InvalidConfig("policy[" + std::to_string(s) + "]: row sums to " + std::to_string(sum));
    }
}

namespace {

RewardNoise parse_noise(const std::string& text, const std::string& where) {
    if (text == "deterministic") return RewardNoise::Deterministic;
    if (text == "bernoulli") return RewardNoise::BernoulliWithMean;
    throw InvalidConfig(where + ": unknown reward_noise \"" + text + "\"");
}

} // namespace

TabularMdp mdp_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidConfig(std::string("json parse error: ") + e.what());
    }
    return [&doc]() {
        TabularMdp m;
        for (const char* key : {"n_states", "n_actions", "transition", "mean_reward"})
            if (!doc.contains(key)) throw InvalidConfig(std::string(key) + ": missing field");
        m.n_states = doc.at("n_states").get<int>();
        m.n_actions = doc.at("n_actions").get<int>();
        if (m.n_states < 1) throw InvalidConfig("n_states: must be >= 1");
        if (m.n_actions < 1) throw InvalidConfig("n_actions: must be >= 1");
        const auto& tr = doc.at("transition");
        if (!tr.is_array() || static_cast<int>(tr.size()) != m.n_states)
            throw InvalidConfig("transition: expected array of length n_states");
        m.transition.reserve(static_cast<std::size_t>(m.n_states) * m.n_actions * m.n_states);
        for (int s = 0; s < m.n_states; ++s) {
            const auto& per_action = tr.at(s);
            if (!per_action.is_array() || static_cast<int>(per_action.size()) != m.n_actions)
                throw InvalidConfig("transition[" + std::to_string(s) + "]: expected n_actions rows");
            for (int a = 0; a < m.n_actions; ++a) {
                const auto& rw = per_action.at(a);
                if (!rw.is_array() || static_cast<int>(rw.size()) != m.n_states)
                    throw InvalidConfig("transition[" + std::to_string(s) + "][" + std::to_string(a) +
                                        "]: expected n_states entries");
                for (int y = 0; y < m.n_states; ++y) m.transition.push_back(rw.at(y).get<double>());
            }
        }
        const auto& mr = doc.at("mean_reward");
        if (!mr.is_array() || static_cast<int>(mr.size()) != m.n_states)
            throw InvalidConfig("mean_reward: expected array of length n_states");
        for (int s = 0; s < m.n_states; ++s) {
            const auto& rw = mr.at(s);
            if (!rw.is_array() || static_cast<int>(rw.size()) != m.n_actions)
                throw InvalidConfig("mean_reward[" + std::to_string(s) + "]: expected n_actions entries");
            for (int a = 0; a < m.n_actions; ++a) m.mean_reward.push_back(rw.at(a).get<double>());
        }
        m.reward_noise.assign(static_cast<std::size_t>(m.n_states) * m.n_actions,
                              RewardNoise::Deterministic);
        if (doc.contains("reward_noise")) {
            const auto& rn = doc.at("reward_noise");
            if (rn.is_string()) {
                RewardNoise mode = parse_noise(rn.get<std::string>(), "reward_noise");
                std::fill(m.reward_noise.begin(), m.reward_noise.end(), mode);
            } else if (rn.is_array()) {
                if (static_cast<int>(rn.size()) != m.n_states)
                    throw InvalidConfig("reward_noise: expected array of length n_states");
                for (int s = 0; s < m.n_states; ++s) {
                    const auto& rw = rn.at(s);
                    if (!rw.is_array() || static_cast<int>(rw.size()) != m.n_actions)
                        throw InvalidConfig("reward_noise[" + std::to_string(s) +
                                            "]: expected n_actions entries");
                    for (int a = 0; a < m.n_actions; ++a)
                        m.reward_noise[static_cast<std::size_t>(s) * m.n_actions + a] =
                            parse_noise(rw.at(a).get<std::string>(),
                                        "reward_noise[" + std::to_string(s) + "][" + std::to_string(a) + "]");
                }
            } else {
                throw InvalidConfig("reward_noise: expected string or nested array");
            }
        }
        m.validate();
        return m;
    }();
}

TabularMdp mdp_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return mdp_from_json(buf.str());
}

std::string mdp_to_json(const TabularMdp& mdp) {
    json doc;
    doc["n_states"] = mdp.n_states;
    doc["n_actions"] = mdp.n_actions;
    json tr = json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        json per_action = json::array();
        for (int a = 0; a < mdp.n_actions; ++a) {
            json rw = json::array();
            for (int y = 0; y < mdp.n_states; ++y) rw.push_back(mdp.p(s, a, y));
            per_action.push_back(std::move(rw));
        }
        tr.push_back(std::move(per_action));
    }
    doc["transition"] = std::move(tr);
    json mr = json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        json rw = json::array();
        for (int a = 0; a < mdp.n_actions; ++a) rw.push_back(mdp.mu(s, a));
        mr.push_back(std::move(rw));
    }
    doc["mean_reward"] = std::move(mr);
    json rn = json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        json rw = json::array();
        for (int a = 0; a < mdp.n_actions; ++a)
            rw.push_back(mdp.noise(s, a) == RewardNoise::Deterministic ? "deterministic" : "bernoulli");
        rn.push_back(std::move(rw));
    }
    doc["reward_noise"] = std::move(rn);
    return doc.dump(2);
}

} // namespace arlab
