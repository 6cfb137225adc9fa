#include "fhbandit/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "fhbandit/scheduler.hpp"

namespace fhbandit {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw std::invalid_argument("solution: field \"" + field + "\" " + why);
}

std::string hash_to_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t hex_to_hash(const std::string& s) {
    if (s.size() != 18 || s[0] != '0' || s[1] != 'x')
        fail("instance_hash", "must be an 0x-prefixed 16-digit hex string");
    std::uint64_t h = 0;
    for (std::size_t i = 2; i < s.size(); ++i) {
        char c = s[i];
        int d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = 10 + (c - 'a');
        else fail("instance_hash", "must be an 0x-prefixed 16-digit hex string");
        h = (h << 4) | static_cast<std::uint64_t>(d);
    }
    return h;
}

std::vector<int> identity_order(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    return order;
}

// ---------------------------------------------------------------------------
// JSON <-> policy structures

json policy_to_json(const SingleArmPolicy& p) {
    json acts = json::array();
    for (ArmAction a : p.act) acts.push_back(static_cast<int>(a));
    json th = json::array();
    for (double t : p.choose_min_value) {
        if (std::isfinite(t)) th.push_back(t);
        else th.push_back(nullptr);
    }
    return json{{"act", std::move(acts)}, {"choose_min_value", std::move(th)}};
}

SingleArmPolicy policy_from_json(const json& j, const std::string& field, int num_states) {
    if (!j.is_object() || !j.contains("act") || !j.contains("choose_min_value"))
        fail(field, "must be an object with \"act\" and \"choose_min_value\"");
    const json& acts = j.at("act");
    const json& th = j.at("choose_min_value");
    if (!acts.is_array() || static_cast<int>(acts.size()) != num_states)
        fail(field + ".act", "must list one action per state");
    if (!th.is_array() || static_cast<int>(th.size()) != num_states)
        fail(field + ".choose_min_value", "must list one threshold per state");
    SingleArmPolicy p;
    p.act.reserve(acts.size());
    p.choose_min_value.reserve(th.size());
    for (const json& a : acts) {
        if (!a.is_number_integer() || a.get<int>() < 0 || a.get<int>() > 2)
            fail(field + ".act", "entries must be 0 (stop), 1 (play) or 2 (choose-final)");
        p.act.push_back(static_cast<ArmAction>(a.get<int>()));
    }
    for (const json& t : th) {
        if (t.is_null()) p.choose_min_value.push_back(kNeverChoose);
        else if (t.is_number()) p.choose_min_value.push_back(t.get<double>());
        else fail(field + ".choose_min_value", "entries must be numbers or null");
    }
    return p;
}

json mixed_to_json(const MixedArmPolicy& m) {
    json branches = json::array();
    for (const auto& b : m.branches)
        branches.push_back(json{{"weight", b.weight}, {"policy", policy_to_json(b.policy)}});
    return json{{"branches", std::move(branches)}};
}

MixedArmPolicy mixed_from_json(const json& j, const std::string& field, int num_states) {
    if (!j.is_object() || !j.contains("branches") || !j.at("branches").is_array() ||
        j.at("branches").empty())
        fail(field, "must be an object with a non-empty \"branches\" array");
    MixedArmPolicy m;
    double total = 0.0;
    int bi = 0;
    for (const json& b : j.at("branches")) {
        const std::string bf = field + ".branches[" + std::to_string(bi++) + "]";
        if (!b.is_object() || !b.contains("weight") || !b.contains("policy"))
            fail(bf, "must be an object with \"weight\" and \"policy\"");
        if (!b.at("weight").is_number() || b.at("weight").get<double>() <= 0.0)
            fail(bf + ".weight", "must be a positive number");
        double w = b.at("weight").get<double>();
        total += w;
        m.branches.push_back({w, policy_from_json(b.at("policy"), bf + ".policy", num_states)});
    }
    if (std::abs(total - 1.0) > 1e-9)
        fail(field + ".branches", "weights must sum to 1");
    return m;
}

json mixed_list_to_json(const std::vector<MixedArmPolicy>& ps) {
    json arr = json::array();
    for (const auto& p : ps) arr.push_back(mixed_to_json(p));
    return arr;
}

std::vector<MixedArmPolicy> mixed_list_from_json(const json& j, const std::string& field,
                                                 const std::vector<ArmModel>& arms) {
    if (!j.is_array() || j.size() != arms.size())
        fail(field, "must list one policy per arm");
    std::vector<MixedArmPolicy> ps;
    ps.reserve(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i)
        ps.push_back(mixed_from_json(j[i], field + "[" + std::to_string(i) + "]",
                                     arms[i].num_states()));
    return ps;
}

json pure_list_to_json(const std::vector<SingleArmPolicy>& ps) {
    json arr = json::array();
    for (const auto& p : ps) arr.push_back(policy_to_json(p));
    return arr;
}

std::vector<SingleArmPolicy> pure_list_from_json(const json& j, const std::string& field,
                                                 const std::vector<ArmModel>& arms) {
    if (!j.is_array() || j.size() != arms.size())
        fail(field, "must list one policy per arm");
    std::vector<SingleArmPolicy> ps;
    ps.reserve(arms.size());
    for (std::size_t i = 0; i < arms.size(); ++i)
        ps.push_back(policy_from_json(j[i], field + "[" + std::to_string(i) + "]",
                                      arms[i].num_states()));
    return ps;
}

std::vector<int> order_from_json(const json& j, const std::string& field, int n) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        fail(field, "must be a permutation of the arm indices");
    std::vector<int> order;
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const json& e : j) {
        if (!e.is_number_integer()) fail(field, "must be a permutation of the arm indices");
        int v = e.get<int>();
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
            fail(field, "must be a permutation of the arm indices");
        seen[static_cast<std::size_t>(v)] = true;
        order.push_back(v);
    }
    return order;
}

const json& need(const json& j, const std::string& field) {
    if (!j.contains(field)) fail(field, "is required");
    return j.at(field);
}

double need_num(const json& j, const std::string& field) {
    const json& v = need(j, field);
    if (!v.is_number()) fail(field, "must be a number");
    return v.get<double>();
}

int need_int(const json& j, const std::string& field) {
    const json& v = need(j, field);
    if (!v.is_number_integer()) fail(field, "must be an integer");
    return v.get<int>();
}

bool need_bool(const json& j, const std::string& field) {
    const json& v = need(j, field);
    if (!v.is_boolean()) fail(field, "must be a boolean");
    return v.get<bool>();
}

} // namespace

// ---------------------------------------------------------------------------
// solve

SolvedInstance solve_instance(const InstanceSpec& spec, const SolveOptions& opts) {
    SolvedInstance sol;
    sol.variant = spec.variant;
    sol.hash = instance_hash(spec);
    sol.epsilon = opts.epsilon.value_or(spec.epsilon);
    sol.arms = build_arms(spec);
    const int n = spec.n();
    const int horizon = spec.horizon;
    const int plays_per_slot = spec.plays_per_slot;

    switch (spec.variant) {
        case Variant::Base:
        case Variant::Adversarial: {
            LambdaSolution ls = coupled_lagrangian_search<SingleArmPolicy>(
                make_base_oracle(sol.arms), n,
                static_cast<double>(plays_per_slot) * horizon, sol.epsilon);
            sol.dual_bound = ls.dual_bound;
            sol.lambda_minus = ls.lambda_minus;
            sol.lambda_plus = ls.lambda_plus;
            sol.a = ls.a;
            sol.iterations = ls.iterations;
            sol.searched = ls.searched;
            if (spec.variant == Variant::Base) {
                sol.alpha = 1.0;
                sol.order = ranked_order(sol.arms, ls.policies);
            } else {
                sol.alpha = 0.5;
                sol.order = *spec.order;  // presence enforced by parse_instance
            }
            sol.base = std::move(ls);
            break;
        }
        case Variant::Switching: {
            SwitchingSolution ss =
                solve_switching(sol.arms, *spec.metric, horizon, sol.epsilon);
            sol.dual_bound = ss.dual_bound;
            sol.alpha = ss.alpha;
            sol.lambda_minus = ss.lambda_minus;
            sol.lambda_plus = ss.lambda_plus;
            sol.a = ss.a;
            sol.searched = ss.searched;
            sol.switching = std::move(ss);
            break;
        }
        case Variant::Delayed: {
            DelayedSolution ds =
                solve_delayed(sol.arms, plays_per_slot, horizon, sol.epsilon, opts.regime);
            sol.dual_bound = ds.dual_bound;
            sol.alpha = ds.alpha;
            sol.order = ds.order;
            sol.lambda_minus = ds.dual.lambda_minus;
            sol.lambda_plus = ds.dual.lambda_plus;
            sol.a = ds.dual.a;
            sol.iterations = ds.dual.iterations;
            sol.searched = ds.dual.searched;
            sol.delayed = std::move(ds);
            break;
        }
        case Variant::MaxMab: {
            if (spec.budget_mode && *spec.budget_mode == "only_max")
                throw std::invalid_argument(
                    "solve: budget_mode \"only_max\" is a per-arm reduction "
                    "(only_max_reduction), not an end-to-end pipeline");
            if (*spec.feedback_mode == "sequential") {
                LambdaSolution ls = solve_maxmab(sol.arms, plays_per_slot, horizon, sol.epsilon);
                sol.dual_bound = ls.dual_bound;
                sol.alpha = 0.5;  // the sequential executor's participation default
                sol.lambda_minus = ls.lambda_minus;
                sol.lambda_plus = ls.lambda_plus;
                sol.a = ls.a;
                sol.iterations = ls.iterations;
                sol.searched = ls.searched;
                sol.maxmab_sequential = std::move(ls);
            } else {
                TruncatedMaxMabSolution ts = solve_maxmab_truncated(
                    sol.arms, plays_per_slot, horizon, sol.epsilon, kThrottleAlpha,
                    kThrottleBeta);
                sol.dual_bound = ts.dual_bound;
                sol.alpha = ts.alpha;
                sol.lambda_minus = ts.lambda1_minus;
                sol.lambda_plus = ts.lambda1_plus;
                sol.a = ts.a1;
                sol.searched = ts.searched;
                sol.maxmab_throttled = std::move(ts);
            }
            break;
        }
        case Variant::Budgeted: {
            BudgetedSolution bs = balance_lambda(sol.arms, horizon, sol.epsilon);
            sol.dual_bound = bs.dual_bound;
            sol.alpha = 1.0;
            sol.order = spec.order ? *spec.order : identity_order(n);
            sol.lambda_minus = bs.lambda_star;
            sol.lambda_plus = bs.lambda_star;
            sol.a = 1.0;
            sol.iterations = bs.iterations;
            sol.searched = true;
            sol.budgeted = std::move(bs);
            break;
        }
    }
    return sol;
}

// ---------------------------------------------------------------------------
// serialization

std::string solution_to_json(const SolvedInstance& sol) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["instance_hash"] = hash_to_hex(sol.hash);
    j["variant"] = to_string(sol.variant);
    j["epsilon"] = sol.epsilon;
    j["dual_bound"] = sol.dual_bound;
    j["alpha"] = sol.alpha;
    json order = json::array();
    for (int i : sol.order) order.push_back(i);
    j["order"] = std::move(order);
    j["solver_trace"] = json{{"lambda_minus", sol.lambda_minus},
                             {"lambda_plus", sol.lambda_plus},
                             {"a", sol.a},
                             {"iterations", sol.iterations},
                             {"searched", sol.searched}};

    json payload;
    switch (sol.variant) {
        case Variant::Base:
        case Variant::Adversarial:
            payload["policies"] = mixed_list_to_json(sol.base->policies);
            break;
        case Variant::Switching: {
            auto branch = [](const SwitchingBranch& b) {
                json path = json::array();
                for (int i : b.path) path.push_back(i);
                return json{{"path", std::move(path)},
                            {"policies", pure_list_to_json(b.policies)}};
            };
            payload["minus"] = branch(sol.switching->minus);
            payload["plus"] = branch(sol.switching->plus);
            break;
        }
        case Variant::Delayed: {
            const DelayedSolution& ds = *sol.delayed;
            payload["regime"] = ds.regime == DelayRegime::Large ? "large" : "small";
            payload["gamma"] = ds.gamma;
            payload["r_param"] = ds.r_param;
            payload["rho"] = ds.rho;
            // Informational: block tables are rebuilt from the trace on load.
            payload["dual_consumption"] = ds.dual.consumption;
            break;
        }
        case Variant::MaxMab:
            if (sol.maxmab_sequential) {
                payload["feedback_mode"] = "sequential";
                payload["policies"] = mixed_list_to_json(sol.maxmab_sequential->policies);
            } else {
                const TruncatedMaxMabSolution& ts = *sol.maxmab_throttled;
                payload["feedback_mode"] = "simultaneous";
                payload["policies"] = mixed_list_to_json(ts.policies);
                json bl = json::array();
                for (const auto& row : ts.branch_lambda1) {
                    json r = json::array();
                    for (double v : row) r.push_back(v);
                    bl.push_back(std::move(r));
                }
                payload["branch_lambda1"] = std::move(bl);
                payload["beta"] = ts.beta;
                payload["max_plays"] = ts.max_plays;
                payload["plays_consumption"] = ts.plays_consumption;
                payload["choice_consumption"] = ts.choice_consumption;
            }
            break;
        case Variant::Budgeted: {
            const BudgetedSolution& bs = *sol.budgeted;
            payload["lambda_star"] = bs.lambda_star;
            json q = json::array();
            for (double v : bs.q_values) q.push_back(v);
            payload["q_values"] = std::move(q);
            payload["policies"] = pure_list_to_json(bs.policies);
            break;
        }
    }
    j["payload"] = std::move(payload);
    return j.dump(2) + "\n";
}

SolvedInstance solution_from_json(const InstanceSpec& spec, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("solution: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("solution: top level must be an object");
    if (need_int(j, "schema_version") != kSchemaVersion)
        fail("schema_version", "must be " + std::to_string(kSchemaVersion));

    SolvedInstance sol;
    sol.hash = instance_hash(spec);
    const json& hv = need(j, "instance_hash");
    if (!hv.is_string()) fail("instance_hash", "must be a string");
    if (hex_to_hash(hv.get<std::string>()) != sol.hash)
        fail("instance_hash", "does not match this instance (refusing to simulate)");

    const json& vv = need(j, "variant");
    if (!vv.is_string()) fail("variant", "must be a string");
    if (variant_from_string(vv.get<std::string>()) != spec.variant)
        fail("variant", "does not match this instance");
    sol.variant = spec.variant;

    sol.epsilon = need_num(j, "epsilon");
    if (!(sol.epsilon > 0.0 && sol.epsilon <= 1.0)) fail("epsilon", "must be in (0, 1]");
    sol.dual_bound = need_num(j, "dual_bound");
    sol.alpha = need_num(j, "alpha");
    if (!(sol.alpha > 0.0 && sol.alpha <= 1.0)) fail("alpha", "must be in (0, 1]");

    sol.arms = build_arms(spec);
    const int n = spec.n();
    const json& ov = need(j, "order");
    if (!ov.is_array()) fail("order", "must be an array");
    if (!ov.empty()) sol.order = order_from_json(ov, "order", n);

    const json& tr = need(j, "solver_trace");
    if (!tr.is_object()) fail("solver_trace", "must be an object");
    sol.lambda_minus = need_num(tr, "lambda_minus");
    sol.lambda_plus = need_num(tr, "lambda_plus");
    sol.a = need_num(tr, "a");
    sol.iterations = need_int(tr, "iterations");
    sol.searched = need_bool(tr, "searched");

    const json& payload = need(j, "payload");
    if (!payload.is_object()) fail("payload", "must be an object");

    switch (spec.variant) {
        case Variant::Base:
        case Variant::Adversarial: {
            LambdaSolution ls;
            ls.lambda_minus = sol.lambda_minus;
            ls.lambda_plus = sol.lambda_plus;
            ls.a = sol.a;
            ls.iterations = sol.iterations;
            ls.searched = sol.searched;
            ls.dual_bound = sol.dual_bound;
            ls.policies =
                mixed_list_from_json(need(payload, "policies"), "payload.policies", sol.arms);
            if (sol.order.empty()) fail("order", "is required for this variant");
            sol.base = std::move(ls);
            break;
        }
        case Variant::Switching: {
            SwitchingSolution ss;
            ss.lambda_minus = sol.lambda_minus;
            ss.lambda_plus = sol.lambda_plus;
            ss.a = sol.a;
            ss.searched = sol.searched;
            ss.dual_bound = sol.dual_bound;
            ss.alpha = sol.alpha;
            auto branch = [&](const char* key) {
                const json& b = need(payload, key);
                const std::string field = std::string("payload.") + key;
                if (!b.is_object()) fail(field, "must be an object");
                SwitchingBranch br;
                const json& pv = need(b, "path");
                if (!pv.is_array()) fail(field + ".path", "must be an array of arm indices");
                std::vector<bool> seen(static_cast<std::size_t>(n), false);
                for (const json& e : pv) {
                    if (!e.is_number_integer()) fail(field + ".path", "entries must be integers");
                    int x = e.get<int>();
                    if (x < 0 || x >= n || seen[static_cast<std::size_t>(x)])
                        fail(field + ".path", "entries must be distinct arm indices");
                    seen[static_cast<std::size_t>(x)] = true;
                    br.path.push_back(x);
                }
                if (!br.path.empty() && br.path.front() != spec.metric->start)
                    fail(field + ".path", "must start at the metric's start node");
                br.policies = pure_list_from_json(need(b, "policies"), field + ".policies",
                                                  sol.arms);
                return br;
            };
            ss.minus = branch("minus");
            ss.plus = branch("plus");
            sol.switching = std::move(ss);
            break;
        }
        case Variant::Delayed: {
            const json& rv = need(payload, "regime");
            if (!rv.is_string()) fail("payload.regime", "must be \"small\" or \"large\"");
            DelayRegime regime;
            if (rv.get<std::string>() == "small") regime = DelayRegime::Small;
            else if (rv.get<std::string>() == "large") regime = DelayRegime::Large;
            else fail("payload.regime", "must be \"small\" or \"large\"");
            // Rebuild the block tables deterministically and verify they
            // reproduce the stored certificate.
            DelayedSolution ds =
                solve_delayed(sol.arms, spec.plays_per_slot, spec.horizon, sol.epsilon, regime);
            if (std::abs(ds.dual_bound - sol.dual_bound) > 1e-9)
                fail("dual_bound", "disagrees with the rebuilt solution by more than 1e-9");
            if (!sol.order.empty() && ds.order != sol.order)
                fail("order", "disagrees with the rebuilt solution");
            sol.order = ds.order;
            sol.alpha = ds.alpha;
            sol.delayed = std::move(ds);
            break;
        }
        case Variant::MaxMab: {
            const json& fm = need(payload, "feedback_mode");
            if (!fm.is_string() || fm.get<std::string>() != *spec.feedback_mode)
                fail("payload.feedback_mode", "does not match this instance");
            if (*spec.feedback_mode == "sequential") {
                LambdaSolution ls;
                ls.lambda_minus = sol.lambda_minus;
                ls.lambda_plus = sol.lambda_plus;
                ls.a = sol.a;
                ls.iterations = sol.iterations;
                ls.searched = sol.searched;
                ls.dual_bound = sol.dual_bound;
                ls.policies =
                    mixed_list_from_json(need(payload, "policies"), "payload.policies", sol.arms);
                sol.maxmab_sequential = std::move(ls);
            } else {
                TruncatedMaxMabSolution ts;
                ts.lambda1_minus = sol.lambda_minus;
                ts.lambda1_plus = sol.lambda_plus;
                ts.a1 = sol.a;
                ts.searched = sol.searched;
                ts.dual_bound = sol.dual_bound;
                ts.alpha = sol.alpha;
                ts.plays_per_slot = spec.plays_per_slot;
                ts.beta = need_num(payload, "beta");
                ts.max_plays = need_int(payload, "max_plays");
                if (ts.max_plays < 1) fail("payload.max_plays", "must be at least 1");
                ts.plays_consumption = need_num(payload, "plays_consumption");
                ts.choice_consumption = need_num(payload, "choice_consumption");
                ts.policies =
                    mixed_list_from_json(need(payload, "policies"), "payload.policies", sol.arms);
                const json& bl = need(payload, "branch_lambda1");
                if (!bl.is_array() || bl.size() != ts.policies.size())
                    fail("payload.branch_lambda1", "must list one row per arm");
                for (std::size_t i = 0; i < bl.size(); ++i) {
                    const json& row = bl[i];
                    if (!row.is_array() || row.size() != ts.policies[i].branches.size())
                        fail("payload.branch_lambda1",
                             "row " + std::to_string(i) + " must match the branch count");
                    std::vector<double> r;
                    for (const json& v : row) {
                        if (!v.is_number())
                            fail("payload.branch_lambda1", "entries must be numbers");
                        r.push_back(v.get<double>());
                    }
                    ts.branch_lambda1.push_back(std::move(r));
                }
                sol.maxmab_throttled = std::move(ts);
            }
            break;
        }
        case Variant::Budgeted: {
            BudgetedSolution bs;
            bs.lambda_star = need_num(payload, "lambda_star");
            bs.dual_bound = sol.dual_bound;
            bs.iterations = sol.iterations;
            const json& qv = need(payload, "q_values");
            if (!qv.is_array() || static_cast<int>(qv.size()) != n)
                fail("payload.q_values", "must list one value per arm");
            for (const json& v : qv) {
                if (!v.is_number()) fail("payload.q_values", "entries must be numbers");
                bs.q_values.push_back(v.get<double>());
            }
            bs.policies =
                pure_list_from_json(need(payload, "policies"), "payload.policies", sol.arms);
            if (sol.order.empty()) fail("order", "is required for this variant");
            sol.budgeted = std::move(bs);
            break;
        }
    }
    return sol;
}

// ---------------------------------------------------------------------------
// simulation

double run_episode(const InstanceSpec& spec, const SolvedInstance& sol,
                   std::uint64_t seed, std::uint64_t episode) {
    switch (sol.variant) {
        case Variant::Base:
        case Variant::Adversarial: {
            ScheduleConfig cfg;
            cfg.plays_per_slot = spec.plays_per_slot;
            cfg.horizon = spec.horizon;
            cfg.given_order = sol.order;
            cfg.alpha = sol.alpha;
            return run_combined(sol.arms, sol.base->policies, cfg, seed, episode).total_reward;
        }
        case Variant::Switching: {
            SwitchingConfig cfg;
            cfg.horizon = spec.horizon;
            cfg.metric = *spec.metric;
            cfg.alpha = sol.switching->alpha;
            return run_switching_mixed(sol.arms, *sol.switching, cfg, seed, episode)
                .total_reward;
        }
        case Variant::Delayed: {
            DelayedRunConfig cfg;
            cfg.plays_per_slot = spec.plays_per_slot;
            cfg.horizon = spec.horizon;
            cfg.alpha = sol.delayed->alpha;
            cfg.order = sol.order;
            return run_delayed(sol.arms, sol.delayed->run_policies, cfg, seed, episode)
                .total_reward;
        }
        case Variant::MaxMab: {
            if (sol.maxmab_sequential) {
                MaxMabRunConfig cfg;
                cfg.plays_per_slot = spec.plays_per_slot;
                cfg.horizon = spec.horizon;
                cfg.alpha = sol.alpha;
                return run_maxmab_sequential(sol.arms, sol.maxmab_sequential->policies, cfg,
                                             seed, episode)
                    .total_reward;
            }
            return run_throttled(sol.arms, *sol.maxmab_throttled, spec.horizon, seed, episode)
                .total_reward;
        }
        case Variant::Budgeted:
            return run_budgeted(sol.arms, *sol.budgeted, sol.order, spec.horizon, seed,
                                episode)
                .total_reward;
    }
    throw std::logic_error("run_episode: unknown variant");
}

Estimate simulate_instance(const InstanceSpec& spec, const SolvedInstance& sol,
                           std::uint64_t episodes, std::uint64_t seed, int threads) {
    if (sol.hash != instance_hash(spec))
        throw std::invalid_argument(
            "simulate: solution was produced for a different instance (hash mismatch)");
    return estimate_reward(
        [&spec, &sol, seed](std::uint64_t episode) {
            return run_episode(spec, sol, seed, episode);
        },
        episodes, seed, threads);
}

} // namespace fhbandit
