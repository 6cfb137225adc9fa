#include "fhbandit/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace fhbandit {

namespace {

constexpr double kWeightPrune = 1e-15; // mixture components below this posterior weight are dropped

bool budget_reached(const std::optional<double>& budget, double observed_sum) {
    return budget.has_value() && observed_sum >= *budget - 1e-12;
}

} // namespace

std::vector<double> ArmModel::value_support() const {
    std::set<double> vals;
    for (const auto& st : states)
        for (const auto& e : st.edges) vals.insert(e.value);
    return {vals.begin(), vals.end()};
}

StateId ArmModel::child_on(StateId u, double q) const {
    for (const auto& e : state(u).edges)
        if (e.value == q) return e.child;
    return -1;
}

ArmModel build_beta_bernoulli(int alpha1, int alpha0, int horizon,
                              std::optional<double> budget) {
    if (alpha1 < 1 || alpha0 < 1) throw std::invalid_argument("build_beta_bernoulli: Beta parameters must be >= 1");
    if (horizon < 1) throw std::invalid_argument("build_beta_bernoulli: horizon must be >= 1");

    ArmModel m;
    m.horizon = horizon;
    m.budget = budget;
    m.prior = BetaPrior{alpha1, alpha0};

    // Enumerate the (s, f) grid level by level so children get larger ids.
    // id(s, f) with d = s + f laid out row by row.
    auto id_of = [&](int s, int f) {
        int d = s + f;
        return d * (d + 1) / 2 + s;
    };
    int n = (horizon + 1) * (horizon + 2) / 2;
    m.states.resize(static_cast<std::size_t>(n));
    for (int d = 0; d <= horizon; ++d) {
        for (int s = 0; s <= d; ++s) {
            int f = d - s;
            ArmState& st = m.states[static_cast<std::size_t>(id_of(s, f))];
            st.depth = d;
            st.observed_sum = static_cast<double>(s);
            st.reward = static_cast<double>(alpha1 + s) / static_cast<double>(alpha1 + alpha0 + d);
            st.playable = d < horizon && !budget_reached(budget, st.observed_sum);
            if (st.playable) {
                double mu = st.reward;
                st.edges = {{0.0, 1.0 - mu, id_of(s, f + 1)},
                            {1.0, mu, id_of(s + 1, f)}};
                m.edge_count += 2;
            }
        }
    }
    return m;
}

ArmModel build_mixture(const MixturePrior& prior, int horizon,
                       std::optional<double> budget) {
    if (prior.components.empty()) throw std::invalid_argument("build_mixture: empty component list");
    if (prior.values.empty()) throw std::invalid_argument("build_mixture: empty value support");
    for (std::size_t j = 1; j < prior.values.size(); ++j)
        if (prior.values[j] <= prior.values[j - 1])
            throw std::invalid_argument("build_mixture: values must be strictly increasing");
    if (prior.values.front() < 0.0) throw std::invalid_argument("build_mixture: values must be >= 0");
    double wsum = 0.0;
    for (const auto& c : prior.components) {
        if (c.value_probs.size() != prior.values.size())
            throw std::invalid_argument("build_mixture: component probability size mismatch");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("build_mixture: weights must sum to 1");
    if (horizon < 1) throw std::invalid_argument("build_mixture: horizon must be >= 1");

    ArmModel m;
    m.horizon = horizon;
    m.budget = budget;
    m.prior = prior;

    const std::size_t nv = prior.values.size();

    // A state is the multiset of observed values, tracked as per-value counts.
    // Posterior component weights follow by Bayes' rule and depend only on the
    // counts, so breadth-first enumeration with a count-vector key gives the
    // (T+|V|-1 choose |V|-1)-per-level DAG.
    struct Node {
        std::vector<int> counts;
        std::vector<double> weights; // posterior component weights
    };
    std::map<std::vector<int>, StateId> index;
    std::vector<Node> nodes;

    auto posterior_mean = [&](const std::vector<double>& w) {
        double r = 0.0;
        for (std::size_t c = 0; c < w.size(); ++c) {
            double mean_c = 0.0;
            for (std::size_t j = 0; j < nv; ++j) mean_c += prior.values[j] * prior.components[c].value_probs[j];
            r += w[c] * mean_c;
        }
        return r;
    };

    std::vector<double> w0;
    for (const auto& c : prior.components) w0.push_back(c.weight);

    nodes.push_back({std::vector<int>(nv, 0), w0});
    index[nodes[0].counts] = 0;
    m.states.push_back({});

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Node node = nodes[i]; // copy: nodes may reallocate below
        ArmState& st = m.states[i];
        int depth = 0;
        double osum = 0.0;
        for (std::size_t j = 0; j < nv; ++j) {
            depth += node.counts[j];
            osum += node.counts[j] * prior.values[j];
        }
        st.depth = depth;
        st.observed_sum = osum;
        st.reward = posterior_mean(node.weights);
        st.playable = depth < horizon && !budget_reached(budget, osum);
        if (!st.playable) continue;

        for (std::size_t j = 0; j < nv; ++j) {
            // Predictive probability of observing values[j].
            double pq = 0.0;
            for (std::size_t c = 0; c < node.weights.size(); ++c)
                pq += node.weights[c] * prior.components[c].value_probs[j];
            if (pq <= 0.0) continue;

            std::vector<int> child_counts = node.counts;
            ++child_counts[j];
            StateId child;
            auto it = index.find(child_counts);
            if (it != index.end()) {
                child = it->second;
            } else {
                // Posterior update: w_c <- w_c * Pr_c[q] / pq, pruning dust.
                std::vector<double> wpost(node.weights.size());
                double norm = 0.0;
                for (std::size_t c = 0; c < node.weights.size(); ++c) {
                    wpost[c] = node.weights[c] * prior.components[c].value_probs[j] / pq;
                    if (wpost[c] < kWeightPrune) wpost[c] = 0.0;
                    norm += wpost[c];
                }
                for (auto& w : wpost) w /= norm;
                child = static_cast<StateId>(nodes.size());
                index[child_counts] = child;
                nodes.push_back({std::move(child_counts), std::move(wpost)});
                m.states.push_back({});
            }
            m.states[i].edges.push_back({prior.values[j], pq, child});
            ++m.edge_count;
        }
    }
    return m;
}

ArmModel build_mixture_bernoulli(const std::vector<std::pair<double, double>>& components,
                                 int horizon,
                                 std::optional<double> budget) {
    MixturePrior prior;
    prior.values = {0.0, 1.0};
    for (const auto& [w, p] : components) prior.components.push_back({w, {1.0 - p, p}});
    return build_mixture(prior, horizon, budget);
}

ArmModel build_explicit(const ExplicitPrior& prior, int horizon,
                        std::optional<double> budget) {
    if (prior.states.empty()) throw std::invalid_argument("build_explicit: empty state list");

    ArmModel m;
    m.horizon = horizon;
    m.budget = budget;
    m.prior = prior;
    m.states.resize(prior.states.size());

    // Depth/observed-sum by forward propagation; edges must point forward so
    // that id order is a topological order (required by all DPs here).
    std::vector<bool> reached(prior.states.size(), false);
    m.states[0].depth = 0;
    m.states[0].observed_sum = 0.0;
    reached[0] = true;
    for (std::size_t i = 0; i < prior.states.size(); ++i) {
        const auto& src = prior.states[i];
        ArmState& st = m.states[i];
        st.reward = src.reward;
        st.edges = src.edges;
        std::sort(st.edges.begin(), st.edges.end(),
                  [](const ArmEdge& a, const ArmEdge& b) { return a.value < b.value; });
        st.playable = src.playable && !budget_reached(budget, st.observed_sum);
        if (st.playable && st.depth >= horizon)
            throw std::invalid_argument("build_explicit: playable state at depth >= horizon");
        if (!st.playable) { st.edges.clear(); continue; }

        double psum = 0.0;
        for (const auto& e : st.edges) {
            if (e.child <= static_cast<StateId>(i))
                throw std::invalid_argument("build_explicit: edges must point to larger state ids");
            if (e.child >= static_cast<StateId>(prior.states.size()))
                throw std::invalid_argument("build_explicit: edge child out of range");
            ArmState& ch = m.states[static_cast<std::size_t>(e.child)];
            int d = st.depth + 1;
            double osum = st.observed_sum + e.value;
            if (reached[static_cast<std::size_t>(e.child)]) {
                if (ch.depth != d)
                    throw std::invalid_argument("build_explicit: inconsistent depths (not a layered DAG)");
            } else {
                ch.depth = d;
                ch.observed_sum = osum;
                reached[static_cast<std::size_t>(e.child)] = true;
            }
            psum += e.prob;
            ++m.edge_count;
        }
        if (std::abs(psum - 1.0) > 1e-9)
            throw std::invalid_argument("build_explicit: outgoing probabilities must sum to 1");
    }
    return m;
}

ValidationReport validate_martingale(const ArmModel& model, double tol) {
    ValidationReport rep;
    for (StateId u = 0; u < model.num_states(); ++u) {
        const ArmState& st = model.state(u);
        if (!st.playable) continue;
        double psum = 0.0, child_mean = 0.0, value_mean = 0.0;
        for (const auto& e : st.edges) {
            psum += e.prob;
            child_mean += e.prob * model.state(e.child).reward;
            value_mean += e.prob * e.value;
        }
        double dev = std::max({std::abs(psum - 1.0),
                               std::abs(st.reward - child_mean),
                               std::abs(st.reward - value_mean)});
        if (dev > rep.max_deviation) rep.max_deviation = dev;
        if (dev > tol) rep.offending_states.push_back(u);
    }
    rep.passed = rep.offending_states.empty();
    return rep;
}

double round_down_pow2(double v) {
    if (v <= 0.0) return 0.0;
    return std::exp2(std::floor(std::log2(v)));
}

} // namespace fhbandit
