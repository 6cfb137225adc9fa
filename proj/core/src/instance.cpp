#include "fhbandit/instance.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

namespace fhbandit {

using nlohmann::json;

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Base: return "base";
        case Variant::Adversarial: return "adversarial";
        case Variant::Switching: return "switching";
        case Variant::Delayed: return "delayed";
        case Variant::MaxMab: return "maxmab";
        case Variant::Budgeted: return "budgeted";
    }
    throw std::logic_error("to_string(Variant): unknown value");
}

Variant variant_from_string(const std::string& s) {
    if (s == "base") return Variant::Base;
    if (s == "adversarial") return Variant::Adversarial;
    if (s == "switching") return Variant::Switching;
    if (s == "delayed") return Variant::Delayed;
    if (s == "maxmab") return Variant::MaxMab;
    if (s == "budgeted") return Variant::Budgeted;
    throw std::invalid_argument("instance: unknown variant \"" + s + "\"");
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw std::invalid_argument("instance: field \"" + field + "\" " + why);
}

const json& need(const json& j, const char* field, const std::string& ctx) {
    auto it = j.find(field);
    if (it == j.end()) fail(ctx + field, "is missing");
    return *it;
}

int need_int(const json& j, const char* field, const std::string& ctx) {
    const json& v = need(j, field, ctx);
    if (!v.is_number_integer()) fail(ctx + field, "must be an integer");
    return v.get<int>();
}

double need_num(const json& j, const char* field, const std::string& ctx) {
    const json& v = need(j, field, ctx);
    if (!v.is_number()) fail(ctx + field, "must be a number");
    return v.get<double>();
}

PriorSpec parse_prior(const json& j, const std::string& ctx) {
    if (!j.is_object()) fail(ctx, "must be an object");
    const json& t = need(j, "type", ctx + ".");
    if (!t.is_string()) fail(ctx + ".type", "must be a string");
    const std::string type = t.get<std::string>();
    if (type == "beta") {
        BetaPrior p;
        p.alpha1 = need_int(j, "alpha1", ctx + ".");
        p.alpha0 = need_int(j, "alpha0", ctx + ".");
        if (p.alpha1 < 1 || p.alpha0 < 1) fail(ctx, "needs alpha1, alpha0 >= 1");
        return p;
    }
    if (type == "mixture") {
        MixturePrior p;
        const json& vals = need(j, "values", ctx + ".");
        if (!vals.is_array() || vals.empty()) fail(ctx + ".values", "must be a non-empty array");
        for (const json& v : vals) {
            if (!v.is_number()) fail(ctx + ".values", "must hold numbers");
            p.values.push_back(v.get<double>());
        }
        const json& comps = need(j, "components", ctx + ".");
        if (!comps.is_array() || comps.empty())
            fail(ctx + ".components", "must be a non-empty array");
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const std::string cc = ctx + ".components[" + std::to_string(c) + "]";
            MixtureComponent mc;
            mc.weight = need_num(comps[c], "weight", cc + ".");
            const json& vp = need(comps[c], "value_probs", cc + ".");
            if (!vp.is_array() || vp.size() != p.values.size())
                fail(cc + ".value_probs", "must match the length of values");
            for (const json& v : vp) {
                if (!v.is_number()) fail(cc + ".value_probs", "must hold numbers");
                mc.value_probs.push_back(v.get<double>());
            }
            p.components.push_back(std::move(mc));
        }
        return p;
    }
    if (type == "explicit") {
        ExplicitPrior p;
        const json& states = need(j, "states", ctx + ".");
        if (!states.is_array() || states.empty())
            fail(ctx + ".states", "must be a non-empty array");
        for (std::size_t s = 0; s < states.size(); ++s) {
            const std::string sc = ctx + ".states[" + std::to_string(s) + "]";
            ExplicitPrior::State st;
            st.reward = need_num(states[s], "reward", sc + ".");
            const json& pl = need(states[s], "playable", sc + ".");
            if (!pl.is_boolean()) fail(sc + ".playable", "must be a boolean");
            st.playable = pl.get<bool>();
            if (auto it = states[s].find("edges"); it != states[s].end()) {
                if (!it->is_array()) fail(sc + ".edges", "must be an array");
                for (std::size_t e = 0; e < it->size(); ++e) {
                    const std::string ec = sc + ".edges[" + std::to_string(e) + "]";
                    ArmEdge edge;
                    edge.value = need_num((*it)[e], "value", ec + ".");
                    edge.prob = need_num((*it)[e], "prob", ec + ".");
                    edge.child = need_int((*it)[e], "child", ec + ".");
                    st.edges.push_back(edge);
                }
            }
            p.states.push_back(std::move(st));
        }
        return p;
    }
    fail(ctx + ".type", "must be one of beta|mixture|explicit");
}

json prior_to_json(const PriorSpec& prior) {
    json j;
    if (const auto* b = std::get_if<BetaPrior>(&prior)) {
        j["type"] = "beta";
        j["alpha1"] = b->alpha1;
        j["alpha0"] = b->alpha0;
    } else if (const auto* m = std::get_if<MixturePrior>(&prior)) {
        j["type"] = "mixture";
        j["values"] = m->values;
        json comps = json::array();
        for (const auto& c : m->components)
            comps.push_back({{"weight", c.weight}, {"value_probs", c.value_probs}});
        j["components"] = std::move(comps);
    } else {
        const auto& e = std::get<ExplicitPrior>(prior);
        j["type"] = "explicit";
        json states = json::array();
        for (const auto& st : e.states) {
            json edges = json::array();
            for (const auto& ed : st.edges)
                edges.push_back({{"value", ed.value}, {"prob", ed.prob}, {"child", ed.child}});
            states.push_back(
                {{"reward", st.reward}, {"playable", st.playable}, {"edges", std::move(edges)}});
        }
        j["states"] = std::move(states);
    }
    return j;
}

} // namespace

InstanceSpec parse_instance(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("instance: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("instance: top level must be an object");

    InstanceSpec spec;
    spec.schema_version = need_int(j, "schema_version", "");
    if (spec.schema_version != kSchemaVersion)
        fail("schema_version", "must be " + std::to_string(kSchemaVersion));
    {
        const json& v = need(j, "variant", "");
        if (!v.is_string()) fail("variant", "must be a string");
        spec.variant = variant_from_string(v.get<std::string>());
    }
    spec.horizon = need_int(j, "T", "");
    if (spec.horizon < 1) fail("T", "must be >= 1");
    spec.plays_per_slot = need_int(j, "K", "");
    if (spec.plays_per_slot < 1) fail("K", "must be >= 1");
    spec.epsilon = need_num(j, "epsilon", "");
    if (spec.epsilon <= 0.0 || spec.epsilon > 1.0) fail("epsilon", "must be in (0,1]");

    const int n = need_int(j, "n", "");
    const json& arms = need(j, "arms", "");
    if (!arms.is_array() || arms.empty()) fail("arms", "must be a non-empty array");
    if (static_cast<int>(arms.size()) != n) fail("n", "must equal the number of arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const std::string ac = "arms[" + std::to_string(i) + "]";
        if (!arms[i].is_object()) fail(ac, "must be an object");
        ArmSpec arm;
        arm.prior = parse_prior(need(arms[i], "prior", ac + "."), ac + ".prior");
        if (auto it = arms[i].find("budget"); it != arms[i].end()) {
            if (!it->is_number()) fail(ac + ".budget", "must be a number");
            arm.budget = it->get<double>();
            if (*arm.budget < 0.0) fail(ac + ".budget", "must be >= 0");
        }
        if (auto it = arms[i].find("delay"); it != arms[i].end()) {
            if (!it->is_number_integer()) fail(ac + ".delay", "must be an integer");
            arm.delay = it->get<int>();
            if (arm.delay < 0) fail(ac + ".delay", "must be >= 0");
        }
        if (arm.delay > 0 && spec.variant != Variant::Delayed)
            fail(ac + ".delay", "requires variant \"delayed\"");
        spec.arms.push_back(std::move(arm));
    }

    if (auto it = j.find("metric"); it != j.end()) {
        const json& m = *it;
        if (!m.is_object()) fail("metric", "must be an object");
        MetricSpec ms;
        const json& d = need(m, "distances", "metric.");
        if (!d.is_array()) fail("metric.distances", "must be an array of rows");
        for (const json& row : d) {
            if (!row.is_array()) fail("metric.distances", "must be an array of rows");
            std::vector<double> r;
            for (const json& v : row) {
                if (!v.is_number()) fail("metric.distances", "must hold numbers");
                r.push_back(v.get<double>());
            }
            ms.distances.push_back(std::move(r));
        }
        ms.start = need_int(m, "start", "metric.");
        ms.travel_budget = need_num(m, "travel_budget", "metric.");
        spec.metric = std::move(ms);
    }
    if (spec.variant == Variant::Switching) {
        if (!spec.metric) fail("metric", "is required for variant \"switching\"");
        try {
            validate_metric(*spec.metric, n);
        } catch (const std::invalid_argument& e) {
            fail("metric", std::string("is invalid: ") + e.what());
        }
    }

    if (auto it = j.find("order"); it != j.end()) {
        if (!it->is_array()) fail("order", "must be an array");
        std::vector<int> order;
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        for (const json& v : *it) {
            if (!v.is_number_integer()) fail("order", "must hold integers");
            order.push_back(v.get<int>());
        }
        if (static_cast<int>(order.size()) != n) fail("order", "must be a permutation of 0..n-1");
        for (int o : order) {
            if (o < 0 || o >= n || seen[static_cast<std::size_t>(o)])
                fail("order", "must be a permutation of 0..n-1");
            seen[static_cast<std::size_t>(o)] = 1;
        }
        spec.order = std::move(order);
    }
    if (spec.variant == Variant::Adversarial && !spec.order)
        fail("order", "is required for variant \"adversarial\"");

    if (auto it = j.find("feedback_mode"); it != j.end()) {
        if (!it->is_string()) fail("feedback_mode", "must be a string");
        const std::string fm = it->get<std::string>();
        if (fm != "sequential" && fm != "simultaneous")
            fail("feedback_mode", "must be sequential|simultaneous");
        spec.feedback_mode = fm;
    }
    if (auto it = j.find("budget_mode"); it != j.end()) {
        if (!it->is_string()) fail("budget_mode", "must be a string");
        const std::string bm = it->get<std::string>();
        if (bm != "all_plays" && bm != "only_max")
            fail("budget_mode", "must be all_plays|only_max");
        spec.budget_mode = bm;
    }
    if (spec.variant == Variant::MaxMab) {
        if (!spec.feedback_mode)
            fail("feedback_mode", "is required for variant \"maxmab\"");
        if (spec.budget_mode && *spec.budget_mode == "only_max") {
            for (std::size_t i = 0; i < spec.arms.size(); ++i)
                if (!spec.arms[i].budget)
                    fail("arms[" + std::to_string(i) + "].budget",
                         "is required when budget_mode is only_max");
        }
    }
    return spec;
}

InstanceSpec load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("instance: cannot read file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

std::string instance_to_json(const InstanceSpec& spec) {
    json j;
    j["schema_version"] = spec.schema_version;
    j["variant"] = to_string(spec.variant);
    j["n"] = spec.n();
    j["T"] = spec.horizon;
    j["K"] = spec.plays_per_slot;
    j["epsilon"] = spec.epsilon;
    json arms = json::array();
    for (const ArmSpec& a : spec.arms) {
        json aj;
        aj["prior"] = prior_to_json(a.prior);
        if (a.budget) aj["budget"] = *a.budget;
        if (a.delay != 0) aj["delay"] = a.delay;
        arms.push_back(std::move(aj));
    }
    j["arms"] = std::move(arms);
    if (spec.metric) {
        j["metric"] = {{"distances", spec.metric->distances},
                       {"start", spec.metric->start},
                       {"travel_budget", spec.metric->travel_budget}};
    }
    if (spec.order) j["order"] = *spec.order;
    if (spec.feedback_mode) j["feedback_mode"] = *spec.feedback_mode;
    if (spec.budget_mode) j["budget_mode"] = *spec.budget_mode;
    return j.dump(2);
}

void save_instance(const InstanceSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("instance: cannot write file " + path);
    out << instance_to_json(spec) << "\n";
}

std::uint64_t instance_hash(const InstanceSpec& spec) {
    const std::string text = instance_to_json(spec);
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a offset basis
    for (unsigned char c : text) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;  // FNV-1a prime
    }
    return h;
}

std::vector<ArmModel> build_arms(const InstanceSpec& spec) {
    std::vector<ArmModel> arms;
    arms.reserve(spec.arms.size());
    for (const ArmSpec& a : spec.arms) {
        ArmModel m = std::visit(
            [&](const auto& prior) -> ArmModel {
                using P = std::decay_t<decltype(prior)>;
                if constexpr (std::is_same_v<P, BetaPrior>) {
                    return build_beta_bernoulli(prior.alpha1, prior.alpha0, spec.horizon,
                                                a.budget);
                } else if constexpr (std::is_same_v<P, MixturePrior>) {
                    return build_mixture(prior, spec.horizon, a.budget);
                } else {
                    return build_explicit(prior, spec.horizon, a.budget);
                }
            },
            a.prior);
        m.delay = a.delay;
        arms.push_back(std::move(m));
    }
    return arms;
}

InstanceSpec gen_tight_instance(int n) {
    if (n < 2) throw std::invalid_argument("gen_tight_instance: n must be >= 2");
    const double p = 1.0 / (static_cast<double>(n) * n);
    const double a = 1.0 / n;

    MixturePrior prior;
    prior.values = {0.0, 1.0};
    prior.components.push_back({p, {a, 1.0 - a}});        // good type: pays 1 w.p. 1-a
    prior.components.push_back({1.0 - p, {1.0, 0.0}});    // dead type: always 0

    InstanceSpec spec;
    spec.variant = Variant::Base;
    spec.horizon = n;
    spec.plays_per_slot = 1;
    spec.epsilon = 0.05;
    spec.arms.assign(static_cast<std::size_t>(n), ArmSpec{prior, std::nullopt, 0});
    return spec;
}

std::string ResultRecord::to_json() const {
    json j;
    j["variant"] = variant;
    j["dual_bound"] = dual_bound;
    j["sim_mean"] = sim_mean;
    j["sim_stderr"] = sim_stderr;
    if (ratio) j["ratio"] = *ratio;
    j["episodes"] = episodes;
    j["seed"] = seed;
    j["wall_time_s"] = wall_time_s;
    j["solver_trace"] = {{"lambda_minus", lambda_minus},
                         {"lambda_plus", lambda_plus},
                         {"a", a},
                         {"iterations", iterations}};
    return j.dump(2);
}

} // namespace fhbandit
