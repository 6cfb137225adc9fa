#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>
#include <vector>

#include "fhbandit/delayed.hpp"
#include "fhbandit/oracle.hpp"
#include "fhbandit/scheduler.hpp"
#include "fhbandit/sim.hpp"
#include "helpers.hpp"

using namespace fhbandit;
using fhtest::bernoulli_arm;
using fhtest::known_arm;

namespace {

// Burst of `plays` at every playable state for the first `bursts` blocks.
BlockPolicy uniform_burst_policy(const ArmModel& m, int delay, int block_count,
                                 int plays, int bursts) {
    BlockPolicy bp;
    bp.delay = delay;
    bp.block_count = block_count;
    bp.choice.assign(static_cast<std::size_t>(m.num_states()),
                     std::vector<int>(static_cast<std::size_t>(block_count), 0));
    for (StateId u = 0; u < m.num_states(); ++u) {
        if (!m.state(u).playable) continue;
        for (int b = 0; b < bursts && b < block_count; ++b)
            bp.choice[static_cast<std::size_t>(u)][static_cast<std::size_t>(b)] = plays;
    }
    return bp;
}

std::vector<int> play_slots(const EpisodeResult& ep, int arm) {
    std::vector<int> s;
    for (const PlayRecord& r : ep.trace)
        if (r.arm == arm) s.push_back(r.slot);
    return s;
}

} // namespace

TEST_SUITE("delayed") {

TEST_CASE("block model geometry and burst transitions") {
    ArmModel m = build_beta_bernoulli(1, 1, 2);
    BlockModel bm = block_model(m, 1, 2);
    CHECK(bm.block_length == 3);
    CHECK(bm.max_plays_per_block == 2);
    CHECK(bm.block_count == 2);  // ceil(2*2 / 3)
    CHECK(bm.allowed(m.root) == 2);

    // One play keeps the single-edge order (values ascending).
    const auto& one = bm.trans[static_cast<std::size_t>(m.root)][1];
    REQUIRE(one.size() == 2);
    CHECK(one[0].prob == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(one[1].prob == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.state(one[0].to).reward < m.state(one[1].to).reward);

    // Two blind plays from Beta(1,1): counts (2,0), (1,1), (0,2) each 1/3.
    const auto& two = bm.trans[static_cast<std::size_t>(m.root)][2];
    REQUIRE(two.size() == 3);
    std::set<double> sums;
    for (const BlockTransition& t : two) {
        CHECK(t.prob == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(m.state(t.to).depth == 2);
        sums.insert(m.state(t.to).observed_sum);
    }
    CHECK(sums == std::set<double>{0.0, 1.0, 2.0});

    CHECK(block_model(m, 1, 100).block_count == 67);  // ceil(200/3)
    CHECK(block_model(m, 0, 5).block_count == 10);
    CHECK_THROWS_AS(block_model(m, -1, 5), std::invalid_argument);
}

TEST_CASE("block model rejects broken martingales") {
    ExplicitPrior prior;
    prior.states.resize(3);
    prior.states[0] = {0.5, true, {{0.2, 0.5, 1}, {0.9, 0.5, 2}}};
    prior.states[1] = {0.2, false, {}};
    prior.states[2] = {0.9, false, {}};
    ArmModel bad = build_explicit(prior, 1);
    CHECK_THROWS_AS(block_model(bad, 1, 2), std::invalid_argument);
}

TEST_CASE("zero delay block DP reproduces the play/stop gain DP") {
    std::vector<ArmModel> models = {build_beta_bernoulli(1, 1, 3), bernoulli_arm(0.55, 4),
                                    build_beta_bernoulli(2, 1, 4)};
    for (const ArmModel& m : models) {
        BlockModel bm = block_model(m, 0, 4);
        for (double lambda : {0.0, 0.2, 0.45}) {
            GainResult flat = gain_dp(m, lambda);
            BlockGainResult blk = block_gain_dp(bm, lambda);
            CAPTURE(lambda);
            CHECK(blk.q == doctest::Approx(flat.q).epsilon(1e-12));
            PolicyStats bs = block_policy_stats(bm, blk.policy);
            PolicyStats fs = policy_stats(m, flat.policy);
            CHECK(bs.reward == doctest::Approx(fs.play_reward).epsilon(1e-12));
            CHECK(bs.plays == doctest::Approx(fs.plays).epsilon(1e-12));
            // Dual identity: reward - lambda * plays recovers the gain.
            CHECK(bs.reward - lambda * bs.plays == doctest::Approx(blk.q).epsilon(1e-9));
        }
    }
}

TEST_CASE("block DP on a deterministic arm") {
    // Value-1 arm, depth 2T: two full bursts of 2 at lambda = 1/2 give Q = 2.
    ArmModel m = known_arm(1.0, 4);
    BlockModel bm = block_model(m, 1, 2);
    BlockGainResult r = block_gain_dp(bm, 0.5);
    CHECK(r.q == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.policy.burst(m.root, 0) == 2);

    BlockGainResult none = block_gain_dp(bm, 1.0);
    CHECK(none.q == 0.0);
    CHECK(none.policy.burst(m.root, 0) == 0);

    // Gain tables are non-increasing in the block index.
    for (StateId u = 0; u < m.num_states(); ++u)
        for (int b = 0; b + 1 < bm.block_count; ++b)
            CHECK(r.gain[static_cast<std::size_t>(u)][static_cast<std::size_t>(b)] >=
                  r.gain[static_cast<std::size_t>(u)][static_cast<std::size_t>(b + 1)] -
                      1e-12);
}

TEST_CASE("execution transforms mark policies") {
    ArmModel m = known_arm(1.0, 4);
    BlockModel bm0 = block_model(m, 0, 2);
    BlockPolicy p0 = block_gain_dp(bm0, 0.2).policy;
    BlockPolicy same = delay_free_transform(p0, 3.0);
    CHECK(same.mode == BlockPolicy::Mode::BlockOnly);  // delay 0: unchanged

    BlockModel bm1 = block_model(m, 1, 2);
    BlockPolicy p1 = block_gain_dp(bm1, 0.2).policy;
    BlockPolicy df = delay_free_transform(p1, 2.0);
    CHECK(df.mode == BlockPolicy::Mode::DelayFreeAfterSwitch);
    CHECK(df.switch_after_plays == 2);  // ceil(2.0 * 1)
    CHECK(delay_free_transform(p1, 0.3).switch_after_plays == 1);  // floor of 1

    CHECK_THROWS_AS(block_compaction_transform(p1, 63, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(block_compaction_transform(p1, 62, 13.0), std::domain_error);
    BlockPolicy comp = block_compaction_transform(p1, 63, 13.0);  // 21*3*1 = 63
    CHECK(comp.mode == BlockPolicy::Mode::Compacted);
    CHECK(comp.rho == 13.0);
}

TEST_CASE("regime selection and parameters") {
    ArmModel m = build_beta_bernoulli(1, 1, 4);
    m.delay = 1;
    std::vector<ArmModel> arms = {m};

    // delay 1, T = 64: auto resolves Large (1 > sqrt(64)/50, 64 >= 63).
    DelayedSolution autod = solve_delayed(arms, 1, 64, 0.05);
    CHECK(autod.regime == DelayRegime::Large);
    CHECK(autod.alpha == doctest::Approx(2.0 / 39.0).epsilon(1e-12));
    CHECK(autod.gamma == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(autod.rho == 13.0);

    // Forced small: r = sqrt(64)/2 = 4, gamma = 4*4*1/64 = 1/4.
    DelayedSolution small = solve_delayed(arms, 1, 64, 0.05, DelayRegime::Small);
    CHECK(small.regime == DelayRegime::Small);
    CHECK(small.r_param == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(small.gamma == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(small.alpha == doctest::Approx(0.75 / 1.25).epsilon(1e-12));
    for (const auto& mp : small.run_policies)
        for (const auto& br : mp.branches)
            CHECK(br.policy.mode == BlockPolicy::Mode::DelayFreeAfterSwitch);

    // Small forced with gamma >= 1 is rejected.
    ArmModel slow = build_beta_bernoulli(1, 1, 4);
    slow.delay = 2;
    CHECK_THROWS_AS(solve_delayed({slow}, 1, 16, 0.05, DelayRegime::Small),
                    std::domain_error);
    // Auto dead zone: too delayed for small, horizon too short for compaction.
    CHECK_THROWS_AS(solve_delayed({slow}, 1, 50, 0.05), std::domain_error);

    // Undelayed arms resolve Small with alpha 1 and untouched policies.
    ArmModel plain = build_beta_bernoulli(1, 1, 4);
    DelayedSolution zero = solve_delayed({plain}, 1, 4, 0.05);
    CHECK(zero.regime == DelayRegime::Small);
    CHECK(zero.alpha == 1.0);
    for (const auto& mp : zero.run_policies)
        for (const auto& br : mp.branches)
            CHECK(br.policy.mode == BlockPolicy::Mode::BlockOnly);
}

TEST_CASE("bursts wait out the delay between decisions") {
    ArmModel m = known_arm(1.0, 16);
    m.delay = 1;
    BlockPolicy bp = uniform_burst_policy(m, 1, 6, 2, 6);
    DelayedRunConfig cfg;
    cfg.horizon = 8;
    cfg.order = {0};
    EpisodeResult ep = run_delayed({m}, {MixedBlockPolicy::pure(bp)}, cfg, 5, 0);
    // Play two, wait one slot for the burst's feedback, repeat.
    CHECK(play_slots(ep, 0) == std::vector<int>{0, 1, 3, 4, 6, 7});
    CHECK(ep.total_reward == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("waiting arms hand their slots to the next arm in order") {
    ArmModel a = known_arm(1.0, 16);
    a.delay = 1;
    ArmModel b = known_arm(1.0, 16);
    b.delay = 1;
    BlockPolicy bp = uniform_burst_policy(a, 1, 6, 2, 6);
    DelayedRunConfig cfg;
    cfg.horizon = 8;
    cfg.order = {0, 1};
    EpisodeResult ep = run_delayed({a, b}, {MixedBlockPolicy::pure(bp),
                                            MixedBlockPolicy::pure(bp)},
                                   cfg, 5, 0);
    CHECK(ep.total_reward == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(ep.plays_per_arm == std::vector<long>{6, 2});
    CHECK(play_slots(ep, 0) == std::vector<int>{0, 1, 3, 4, 6, 7});
    CHECK(play_slots(ep, 1) == std::vector<int>{2, 5});
}

TEST_CASE("delay-free switch caps the play inflation") {
    // A 4-play block path with r = 2 runs at most 4 * (1 + 1/2) = 6 plays.
    ArmModel m = known_arm(1.0, 8);
    m.delay = 1;
    BlockPolicy bp = uniform_burst_policy(m, 1, 3, 2, 2);
    BlockPolicy df = delay_free_transform(bp, 2.0);
    DelayedRunConfig cfg;
    cfg.horizon = 8;
    cfg.order = {0};
    EpisodeResult ep = run_delayed({m}, {MixedBlockPolicy::pure(df)}, cfg, 9, 0);
    CHECK(ep.plays_per_arm[0] >= 4);
    CHECK(ep.plays_per_arm[0] <= 6);
    // Burst one runs block-style; the switch fires at the next decision and
    // the tail plays every slot until the simulation quits.
    CHECK(play_slots(ep, 0) == std::vector<int>{0, 1, 3, 4, 5});
}

TEST_CASE("compacted bursts amplify once and replay from the stash") {
    // delay 13, unit bursts: class-0 bursts amplify 13x and bank 6 replays,
    // so 14 simulated bursts need exactly 2 real bursts (26 real plays).
    ArmModel m = known_arm(1.0, 100);
    m.delay = 13;
    BlockPolicy bp = uniform_burst_policy(m, 13, 14, 1, 14);
    BlockPolicy comp = block_compaction_transform(bp, 2666, 13.0);
    DelayedRunConfig cfg;
    cfg.horizon = 2666;
    cfg.order = {0};
    DelayedAudit audit;
    EpisodeResult ep =
        run_delayed({m}, {MixedBlockPolicy::pure(comp)}, cfg, 17, 0, &audit);
    CHECK(audit.sim_blocks == std::vector<long>{14});
    CHECK(audit.real_blocks == std::vector<long>{2});
    CHECK(audit.real_plays == std::vector<long>{26});
    CHECK(ep.total_reward == doctest::Approx(26.0).epsilon(1e-12));
}

TEST_CASE("zero delay pipeline matches the combined scheduler bit for bit") {
    std::vector<ArmModel> arms = {build_beta_bernoulli(1, 1, 4), bernoulli_arm(0.4, 4)};
    LambdaSolution base =
        coupled_lagrangian_search<SingleArmPolicy>(make_base_oracle(arms), 2, 4.0, 0.05);
    DelayedSolution ds = solve_delayed(arms, 1, 4, 0.05);
    CHECK(ds.dual_bound == doctest::Approx(base.dual_bound).epsilon(1e-12));
    CHECK(ds.order == ranked_order(arms, base.policies));

    ScheduleConfig flat;
    flat.plays_per_slot = 1;
    flat.horizon = 4;
    flat.given_order = ds.order;
    flat.alpha = 1.0;
    DelayedRunConfig blk;
    blk.plays_per_slot = 1;
    blk.horizon = 4;
    blk.alpha = 1.0;
    blk.order = ds.order;
    for (std::uint64_t ep = 0; ep < 50; ++ep) {
        EpisodeResult lhs = run_combined(arms, base.policies, flat, 7, ep);
        EpisodeResult rhs = run_delayed(arms, ds.run_policies, blk, 7, ep);
        CAPTURE(ep);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("large regime run stays within the per-path block budget") {
    ArmModel a = build_beta_bernoulli(1, 1, 6);
    a.delay = 2;
    ArmModel b = bernoulli_arm(0.3, 6);
    b.delay = 2;
    std::vector<ArmModel> arms = {a, b};
    DelayedSolution ds = solve_delayed(arms, 1, 210, 0.05);
    CHECK(ds.regime == DelayRegime::Large);
    DelayedRunConfig cfg;
    cfg.horizon = 210;
    cfg.alpha = ds.alpha;
    cfg.order = ds.order;
    const double cap = 1.0 + std::log2(2.0);  // slack beyond floor(#b / 7)
    for (std::uint64_t ep = 0; ep < 50; ++ep) {
        DelayedAudit audit;
        run_delayed(arms, ds.run_policies, cfg, 23, ep, &audit);
        for (std::size_t i = 0; i < arms.size(); ++i) {
            CAPTURE(ep);
            CAPTURE(i);
            CHECK(static_cast<double>(audit.real_blocks[i]) <=
                  std::floor(static_cast<double>(audit.sim_blocks[i]) / 7.0) + cap);
        }
    }
}

TEST_CASE("exact delayed oracle hand values") {
    // Blind plays keep the posterior mean: a known 0.7 arm scores 0.7*T under
    // any delay.
    CHECK(exact_delayed_opt({known_arm(0.7, 3)}, 3, 5) ==
          doctest::Approx(2.1).epsilon(1e-12));

    // Beta(1,1) vs known 0.45, T = 2: seeing the first outcome is worth
    // 0.5 + (2/3 + 0.45)/2 = 127/120; blind it collapses to 1.
    std::vector<ArmModel> pair = {build_beta_bernoulli(1, 1, 2), known_arm(0.45, 2)};
    CHECK(exact_delayed_opt(pair, 2, 0) == doctest::Approx(127.0 / 120.0).epsilon(1e-12));
    CHECK(exact_delayed_opt(pair, 2, 0) ==
          doctest::Approx(exact_joint_opt(pair, 1, 2)).epsilon(1e-12));
    CHECK(exact_delayed_opt(pair, 2, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dual bound and executor sandwich the exact optimum") {
    ArmModel a = build_beta_bernoulli(1, 1, 8);
    a.delay = 1;
    ArmModel b = bernoulli_arm(0.6, 8);
    b.delay = 1;
    std::vector<ArmModel> arms = {a, b};
    const int T = 8;
    DelayedSolution ds = solve_delayed(arms, 1, T, 0.05, DelayRegime::Small);
    const double exact = exact_delayed_opt(arms, T, 1);
    const double undelayed = exact_joint_opt(arms, 1, T);
    CHECK(exact <= undelayed + 1e-9);
    CHECK(ds.dual_bound >= undelayed - 1e-9);

    DelayedRunConfig cfg;
    cfg.horizon = T;
    cfg.alpha = ds.alpha;
    cfg.order = ds.order;
    auto runner = [&](std::uint64_t ep) {
        return run_delayed(arms, ds.run_policies, cfg, 31, ep).total_reward;
    };
    Estimate est = estimate_reward(runner, 5000, 31);
    CHECK(est.mean <= exact + 3.0 * est.stderr_);
}

} // TEST_SUITE
