#include "fhbandit/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace fhbandit {

namespace {

// Structural fingerprint of a model; arms with equal fingerprints are
// exchangeable, so their joint states collapse to multisets.
std::string model_signature(const ArmModel& m) {
    std::string s;
    auto put_raw = [&s](const void* p, std::size_t len) {
        s.append(static_cast<const char*>(p), len);
    };
    auto put_int = [&](int v) { put_raw(&v, sizeof v); };
    auto put_dbl = [&](double v) { put_raw(&v, sizeof v); };
    put_int(m.horizon);
    put_int(m.delay);
    put_int(m.budget ? 1 : 0);
    if (m.budget) put_dbl(*m.budget);
    put_int(m.num_states());
    for (const auto& st : m.states) {
        put_dbl(st.reward);
        put_int(st.depth);
        put_int(st.playable ? 1 : 0);
        put_int(static_cast<int>(st.edges.size()));
        for (const auto& e : st.edges) {
            put_dbl(e.value);
            put_dbl(e.prob);
            put_int(e.child);
        }
    }
    return s;
}

std::vector<std::vector<int>> group_members(const std::vector<ArmModel>& arms) {
    std::map<std::string, int> seen;
    std::vector<std::vector<int>> members;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        auto [it, fresh] = seen.emplace(model_signature(arms[i]), static_cast<int>(members.size()));
        if (fresh) members.emplace_back();
        members[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(i));
    }
    return members;
}

struct VecIntHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (int x : v) {
            h ^= static_cast<std::size_t>(static_cast<unsigned int>(x));
            h *= 1099511628211ull;
        }
        return h;
    }
};

constexpr std::size_t kJointLimit = 4'000'000;

} // namespace

double exact_joint_opt(const std::vector<ArmModel>& arms, int K, int T) {
    const int n = static_cast<int>(arms.size());
    if (n == 0 || T <= 0) return 0.0;
    if (K < 1) throw std::invalid_argument("exact_joint_opt: K < 1");
    const auto members = group_members(arms);

    std::unordered_map<std::vector<int>, double, VecIntHash> memo;
    std::vector<int> st(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) st[static_cast<std::size_t>(i)] = arms[static_cast<std::size_t>(i)].root;

    std::function<double(int)> value = [&](int t) -> double {
        if (t == T) return 0.0;
        std::vector<int> key;
        key.reserve(static_cast<std::size_t>(n) + 1);
        key.push_back(t);
        for (const auto& mem : members) {
            std::vector<int> ids;
            ids.reserve(mem.size());
            for (int i : mem) ids.push_back(st[static_cast<std::size_t>(i)]);
            std::sort(ids.begin(), ids.end());
            key.insert(key.end(), ids.begin(), ids.end());
        }
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        if (memo.size() > kJointLimit)
            throw std::runtime_error("exact_joint_opt: joint state space limit exceeded");

        std::vector<int> playable;
        for (int i = 0; i < n; ++i)
            if (arms[static_cast<std::size_t>(i)].state(st[static_cast<std::size_t>(i)]).playable)
                playable.push_back(i);

        double best = 0.0;
        std::vector<int> chosen;
        // Expected value of playing every arm in `chosen` this slot.
        std::function<double(std::size_t)> expand = [&](std::size_t idx) -> double {
            if (idx == chosen.size()) return value(t + 1);
            const int arm = chosen[idx];
            const ArmState& s = arms[static_cast<std::size_t>(arm)].state(st[static_cast<std::size_t>(arm)]);
            double acc = 0.0;
            for (const ArmEdge& e : s.edges) {
                const int save = st[static_cast<std::size_t>(arm)];
                st[static_cast<std::size_t>(arm)] = e.child;
                acc += e.prob * (e.value + expand(idx + 1));
                st[static_cast<std::size_t>(arm)] = save;
            }
            return acc;
        };
        std::function<void(std::size_t)> pick = [&](std::size_t from) {
            if (!chosen.empty()) best = std::max(best, expand(0));
            if (static_cast<int>(chosen.size()) == K) return;
            for (std::size_t j = from; j < playable.size(); ++j) {
                chosen.push_back(playable[j]);
                pick(j + 1);
                chosen.pop_back();
            }
        };
        pick(0);
        memo.emplace(std::move(key), best);
        return best;
    };
    return value(0);
}

double brute_force_combined_value(const std::vector<ArmModel>& arms,
                                  const std::vector<MixedArmPolicy>& policies,
                                  const ScheduleConfig& cfg) {
    const int n = static_cast<int>(arms.size());
    if (policies.size() != arms.size())
        throw std::invalid_argument("brute_force_combined_value: |arms| != |policies|");
    if (n == 0 || cfg.horizon <= 0) return 0.0;
    std::vector<int> order =
        cfg.given_order ? *cfg.given_order : ranked_order(arms, policies);

    std::vector<const SingleArmPolicy*> sel(static_cast<std::size_t>(n), nullptr);
    std::vector<int> cursor(static_cast<std::size_t>(n));
    std::vector<char> retired(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) cursor[static_cast<std::size_t>(i)] = arms[static_cast<std::size_t>(i)].root;

    // Expected reward of the rest of the schedule, scanning `order` from
    // position pos with `plays` plays already made in the current slot.
    std::function<double(int, int, int)> scan = [&](int slot, int pos, int plays) -> double {
        if (slot == cfg.horizon) return 0.0;
        if (plays == cfg.plays_per_slot || pos == n) {
            if (plays == 0) return 0.0;  // nothing active remains
            return scan(slot + 1, 0, 0);
        }
        const int arm = order[static_cast<std::size_t>(pos)];
        const auto ai = static_cast<std::size_t>(arm);
        if (retired[ai]) return scan(slot, pos + 1, plays);
        if (sel[ai]->action(cursor[ai]) != ArmAction::Play) {
            retired[ai] = 1;
            const double v = scan(slot, pos + 1, plays);
            retired[ai] = 0;
            return v;
        }
        const ArmState& s = arms[ai].state(cursor[ai]);
        if (!s.playable)
            throw std::logic_error("brute_force_combined_value: policy plays unplayable state");
        double acc = 0.0;
        for (const ArmEdge& e : s.edges) {
            const int save = cursor[ai];
            cursor[ai] = e.child;
            acc += e.prob * (e.value + scan(slot, pos + 1, plays + 1));
            cursor[ai] = save;
        }
        return acc;
    };

    // Enumerate per-arm (participation, branch) choices, then run the schedule.
    std::function<double(int)> assign = [&](int i) -> double {
        if (i == n) return scan(0, 0, 0);
        const auto ai = static_cast<std::size_t>(i);
        double total = 0.0;
        if (cfg.alpha < 1.0) {
            retired[ai] = 1;
            sel[ai] = &policies[ai].branches.front().policy;
            total += (1.0 - cfg.alpha) * assign(i + 1);
            retired[ai] = 0;
        }
        for (const auto& br : policies[ai].branches) {
            if (br.weight <= 0.0) continue;
            sel[ai] = &br.policy;
            total += cfg.alpha * br.weight * assign(i + 1);
        }
        sel[ai] = nullptr;
        return total;
    };
    return assign(0);
}

double exact_switching_opt(const std::vector<ArmModel>& arms,
                           const std::vector<std::vector<double>>& distances,
                           int start, double travel_budget, int T) {
    const int n = static_cast<int>(arms.size());
    if (n == 0 || T <= 0) return 0.0;
    if (start < 0 || start >= n) throw std::invalid_argument("exact_switching_opt: bad start");

    std::unordered_map<std::string, double> memo;
    std::vector<int> st(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) st[static_cast<std::size_t>(i)] = arms[static_cast<std::size_t>(i)].root;

    std::function<double(int, int, double)> value = [&](int t, int loc, double rem) -> double {
        if (t == T) return 0.0;
        std::string key;
        key.reserve((static_cast<std::size_t>(n) + 2) * sizeof(int) + sizeof(double));
        auto put = [&key](const void* p, std::size_t len) {
            key.append(static_cast<const char*>(p), len);
        };
        put(&t, sizeof t);
        put(&loc, sizeof loc);
        put(&rem, sizeof rem);
        for (int s : st) put(&s, sizeof s);
        if (auto it = memo.find(key); it != memo.end()) return it->second;

        double best = 0.0;
        for (int j = 0; j < n; ++j) {
            const auto aj = static_cast<std::size_t>(j);
            const ArmState& s = arms[aj].state(st[aj]);
            if (!s.playable) continue;
            const double cost = distances[static_cast<std::size_t>(loc)][aj];
            if (cost > rem + 1e-12) continue;
            const double nrem = rem - cost;
            double acc = 0.0;
            for (const ArmEdge& e : s.edges) {
                const int save = st[aj];
                st[aj] = e.child;
                acc += e.prob * (e.value + value(t + 1, j, nrem));
                st[aj] = save;
            }
            best = std::max(best, acc);
        }
        memo.emplace(std::move(key), best);
        return best;
    };
    return value(0, start, travel_budget);
}

double exact_maxmab_opt(const std::vector<ArmModel>& arms, int K, int T) {
    const int n = static_cast<int>(arms.size());
    if (n == 0 || T <= 0) return 0.0;
    if (K < 1) throw std::invalid_argument("exact_maxmab_opt: K < 1");
    if (n > 30) throw std::invalid_argument("exact_maxmab_opt: too many arms");
    const auto members = group_members(arms);

    std::unordered_map<std::vector<int>, double, VecIntHash> memo;
    std::vector<int> st(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) st[static_cast<std::size_t>(i)] = arms[static_cast<std::size_t>(i)].root;

    std::function<double(int)> value = [&](int t) -> double {
        if (t == T) return 0.0;
        std::vector<int> key;
        key.push_back(t);
        for (const auto& mem : members) {
            std::vector<int> ids;
            for (int i : mem) ids.push_back(st[static_cast<std::size_t>(i)]);
            std::sort(ids.begin(), ids.end());
            key.insert(key.end(), ids.begin(), ids.end());
        }
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        if (memo.size() > kJointLimit)
            throw std::runtime_error("exact_maxmab_opt: joint state space limit exceeded");

        // Adaptive within-slot play: at most K distinct arms; the slot scores
        // the maximum value observed among them.
        std::function<double(unsigned, int, double)> slot = [&](unsigned mask, int played,
                                                                double cur) -> double {
            double best = cur + value(t + 1);
            if (played < K) {
                for (int i = 0; i < n; ++i) {
                    if (mask & (1u << static_cast<unsigned>(i))) continue;
                    const auto ai = static_cast<std::size_t>(i);
                    const ArmState& s = arms[ai].state(st[ai]);
                    if (!s.playable) continue;
                    double acc = 0.0;
                    for (const ArmEdge& e : s.edges) {
                        const int save = st[ai];
                        st[ai] = e.child;
                        acc += e.prob *
                               slot(mask | (1u << static_cast<unsigned>(i)), played + 1,
                                    std::max(cur, e.value));
                        st[ai] = save;
                    }
                    best = std::max(best, acc);
                }
            }
            return best;
        };
        const double best = slot(0u, 0, 0.0);
        memo.emplace(std::move(key), best);
        return best;
    };
    return value(0);
}

double exact_budgeted_opt(const std::vector<ArmModel>& arms, int play_budget) {
    const int n = static_cast<int>(arms.size());
    if (n == 0) return 0.0;
    const auto members = group_members(arms);

    std::unordered_map<std::vector<int>, double, VecIntHash> memo;
    std::vector<int> st(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) st[static_cast<std::size_t>(i)] = arms[static_cast<std::size_t>(i)].root;

    std::function<double(int)> value = [&](int left) -> double {
        double best = 0.0;
        for (int i = 0; i < n; ++i)
            best = std::max(best, arms[static_cast<std::size_t>(i)].state(st[static_cast<std::size_t>(i)]).reward);
        if (left == 0) return best;

        std::vector<int> key;
        key.push_back(left);
        for (const auto& mem : members) {
            std::vector<int> ids;
            for (int i : mem) ids.push_back(st[static_cast<std::size_t>(i)]);
            std::sort(ids.begin(), ids.end());
            key.insert(key.end(), ids.begin(), ids.end());
        }
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        if (memo.size() > kJointLimit)
            throw std::runtime_error("exact_budgeted_opt: joint state space limit exceeded");

        for (int i = 0; i < n; ++i) {
            const auto ai = static_cast<std::size_t>(i);
            const ArmState& s = arms[ai].state(st[ai]);
            if (!s.playable) continue;
            double acc = 0.0;
            for (const ArmEdge& e : s.edges) {
                const int save = st[ai];
                st[ai] = e.child;
                acc += e.prob * value(left - 1);
                st[ai] = save;
            }
            best = std::max(best, acc);
        }
        memo.emplace(std::move(key), best);
        return best;
    };
    return value(play_budget);
}

double exact_delayed_opt(const std::vector<ArmModel>& arms, int T, int delay) {
    const int n = static_cast<int>(arms.size());
    if (n == 0 || T <= 0) return 0.0;
    if (delay < 0) throw std::invalid_argument("exact_delayed_opt: negative delay");
    for (const auto& m : arms)
        if (m.budget)
            throw std::invalid_argument("exact_delayed_opt: budgets unsupported under delay");

    std::unordered_map<std::string, double> memo;
    std::vector<int> st(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) st[static_cast<std::size_t>(i)] = arms[static_cast<std::size_t>(i)].root;
    // pending[i]: ages of arm i's undelivered plays, oldest first.  A play
    // made in slot s has age t - s at slot t and is delivered (branching the
    // posterior along one edge, FIFO) once its age exceeds `delay`.
    std::vector<std::vector<int>> pending(static_cast<std::size_t>(n));

    std::function<double(int)> value = [&](int t) -> double {
        if (t == T) return 0.0;
        // Deliver due outcomes first, one at a time.
        for (int i = 0; i < n; ++i) {
            auto& pq = pending[static_cast<std::size_t>(i)];
            if (!pq.empty() && pq.front() > delay) {
                const int age = pq.front();
                pq.erase(pq.begin());
                const auto ai = static_cast<std::size_t>(i);
                const ArmState& s = arms[ai].state(st[ai]);
                if (s.edges.empty())
                    throw std::logic_error("exact_delayed_opt: delivery past model depth");
                double acc = 0.0;
                for (const ArmEdge& e : s.edges) {
                    const int save = st[ai];
                    st[ai] = e.child;
                    acc += e.prob * value(t);
                    st[ai] = save;
                }
                pq.insert(pq.begin(), age);
                return acc;
            }
        }

        std::string key;
        auto put = [&key](const void* p, std::size_t len) {
            key.append(static_cast<const char*>(p), len);
        };
        put(&t, sizeof t);
        for (int s : st) put(&s, sizeof s);
        for (const auto& pq : pending) {
            const int mark = -1;
            for (int a : pq) put(&a, sizeof a);
            put(&mark, sizeof mark);
        }
        if (auto it = memo.find(key); it != memo.end()) return it->second;

        auto aged = [&]() {
            for (auto& pq : pending)
                for (auto& a : pq) ++a;
        };
        auto unaged = [&]() {
            for (auto& pq : pending)
                for (auto& a : pq) --a;
        };

        // Option: wait a slot (can be strictly useful while feedback is in
        // flight).
        aged();
        double best = value(t + 1);
        unaged();

        for (int i = 0; i < n; ++i) {
            const auto ai = static_cast<std::size_t>(i);
            const ArmState& s = arms[ai].state(st[ai]);
            if (!s.playable) continue;
            if (s.depth + static_cast<int>(pending[ai].size()) >= arms[ai].horizon) continue;
            aged();
            pending[ai].push_back(1);
            best = std::max(best, s.reward + value(t + 1));
            pending[ai].pop_back();
            unaged();
        }
        memo.emplace(std::move(key), best);
        return best;
    };
    return value(0);
}

} // namespace fhbandit
