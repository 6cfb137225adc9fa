#include <doctest.h>

#include <stdexcept>

#include <json.hpp>
#include <string>
#include <vector>

#include "fhbandit/instance.hpp"

using namespace fhbandit;

namespace {

const char* kBaseText = R"({
  "schema_version": 1,
  "variant": "base",
  "n": 2, "T": 3, "K": 1,
  "epsilon": 0.05,
  "arms": [
    {"prior": {"type": "beta", "alpha1": 1, "alpha0": 2}},
    {"prior": {"type": "mixture", "values": [0.0, 1.0],
               "components": [{"weight": 1.0, "value_probs": [0.6, 0.4]}]}}
  ]
})";

void expect_field_error(const std::string& text, const std::string& needle) {
    try {
        parse_instance(text);
        FAIL_CHECK("expected parse failure mentioning \"" << needle << "\"");
    } catch (const std::invalid_argument& e) {
        CAPTURE(needle);
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
}

std::string patched(const std::string& path, const nlohmann::json& value) {
    nlohmann::json j = nlohmann::json::parse(kBaseText);
    j[nlohmann::json::json_pointer(path)] = value;
    return j.dump();
}

} // namespace

TEST_SUITE("instance") {

TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::Base, Variant::Adversarial, Variant::Switching,
                      Variant::Delayed, Variant::MaxMab, Variant::Budgeted})
        CHECK(variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(variant_from_string("nope"), std::invalid_argument);
}

TEST_CASE("parse / serialize round-trip is canonical") {
    InstanceSpec spec = parse_instance(kBaseText);
    CHECK(spec.variant == Variant::Base);
    CHECK(spec.n() == 2);
    CHECK(spec.horizon == 3);
    CHECK(spec.plays_per_slot == 1);
    CHECK(spec.epsilon == 0.05);

    const std::string canon = instance_to_json(spec);
    InstanceSpec again = parse_instance(canon);
    CHECK(instance_to_json(again) == canon);
    CHECK(instance_hash(again) == instance_hash(spec));

    // Key order and whitespace do not affect the canonical text or the hash.
    nlohmann::json reordered;
    nlohmann::json parsed = nlohmann::json::parse(kBaseText);
    reordered["arms"] = parsed["arms"];
    reordered["epsilon"] = parsed["epsilon"];
    reordered["K"] = parsed["K"];
    reordered["T"] = parsed["T"];
    reordered["n"] = parsed["n"];
    reordered["variant"] = parsed["variant"];
    reordered["schema_version"] = parsed["schema_version"];
    CHECK(instance_hash(parse_instance(reordered.dump(4))) == instance_hash(spec));
}

TEST_CASE("hash is sensitive to content") {
    InstanceSpec spec = parse_instance(kBaseText);
    InstanceSpec longer = parse_instance(patched("/T", 4));
    CHECK(instance_hash(longer) != instance_hash(spec));
    InstanceSpec shifted = parse_instance(patched("/arms/0/prior/alpha0", 3));
    CHECK(instance_hash(shifted) != instance_hash(spec));
}

TEST_CASE("parse errors name the offending field") {
    expect_field_error("{ not json", "malformed JSON");
    expect_field_error("[1,2]", "top level");
    expect_field_error(patched("/schema_version", 2), "schema_version");
    expect_field_error(patched("/variant", "bandit"), "variant");
    expect_field_error(patched("/T", 0), "\"T\"");
    expect_field_error(patched("/K", 0), "\"K\"");
    expect_field_error(patched("/epsilon", 1.5), "epsilon");
    expect_field_error(patched("/n", 3), "\"n\"");
    expect_field_error(patched("/arms", nlohmann::json::array()), "arms");
    expect_field_error(patched("/arms/0/prior/type", "gamma"), "type");
    expect_field_error(patched("/arms/0/prior/alpha1", 0), "alpha");
    expect_field_error(patched("/arms/0/budget", -1.0), "budget");
    expect_field_error(patched("/arms/1/delay", 2), "delay");  // base variant
    expect_field_error(patched("/order", std::vector<int>{0, 0}), "order");
}

TEST_CASE("variant-conditional requirements") {
    expect_field_error(patched("/variant", "switching"), "metric");
    expect_field_error(patched("/variant", "adversarial"), "order");
    expect_field_error(patched("/variant", "maxmab"), "feedback_mode");

    // A well-formed switching instance parses.
    nlohmann::json j = nlohmann::json::parse(kBaseText);
    j["variant"] = "switching";
    j["metric"] = {{"distances", {{0.0, 1.0}, {1.0, 0.0}}},
                   {"start", 0},
                   {"travel_budget", 1.0}};
    InstanceSpec sw = parse_instance(j.dump());
    CHECK(sw.metric.has_value());
    CHECK(sw.metric->travel_budget == 1.0);

    nlohmann::json bad = j;
    bad["metric"]["distances"] = {{0.0, 1.0}, {2.0, 0.0}};  // asymmetric
    expect_field_error(bad.dump(), "metric");

    // Delayed accepts per-arm delays.
    nlohmann::json d = nlohmann::json::parse(kBaseText);
    d["variant"] = "delayed";
    d["arms"][0]["delay"] = 2;
    InstanceSpec ds = parse_instance(d.dump());
    CHECK(ds.arms[0].delay == 2);
    CHECK(ds.arms[1].delay == 0);
}

TEST_CASE("built arms carry horizon, budgets, and delays") {
    nlohmann::json j = nlohmann::json::parse(kBaseText);
    j["variant"] = "delayed";
    j["arms"][0]["delay"] = 1;
    j["arms"][1]["budget"] = 1.5;
    InstanceSpec spec = parse_instance(j.dump());
    std::vector<ArmModel> arms = build_arms(spec);
    REQUIRE(arms.size() == 2);
    CHECK(arms[0].horizon == 3);
    CHECK(arms[0].delay == 1);
    CHECK_FALSE(arms[0].budget.has_value());
    CHECK(arms[1].delay == 0);
    REQUIRE(arms[1].budget.has_value());
    CHECK(*arms[1].budget == 1.5);
    for (const ArmModel& m : arms) CHECK(validate_martingale(m).passed);
}

TEST_CASE("tight-gap generator parameters") {
    InstanceSpec t2 = gen_tight_instance(2);
    CHECK(t2.variant == Variant::Base);
    CHECK(t2.n() == 2);
    CHECK(t2.horizon == 2);
    CHECK(t2.plays_per_slot == 1);
    std::vector<ArmModel> arms = build_arms(t2);
    for (const ArmModel& m : arms)
        CHECK(m.state(m.root).reward == doctest::Approx(1.0 / 8.0).epsilon(1e-12));

    InstanceSpec t10 = gen_tight_instance(10);
    CHECK(t10.n() == 10);
    CHECK(t10.horizon == 10);
    std::vector<ArmModel> big = build_arms(t10);
    CHECK(big[0].state(big[0].root).reward == doctest::Approx(0.009).epsilon(1e-12));

    CHECK_THROWS_AS(gen_tight_instance(1), std::invalid_argument);
}

TEST_CASE("result records serialize their trace") {
    ResultRecord rec;
    rec.variant = "base";
    rec.dual_bound = 2.5;
    rec.sim_mean = 2.0;
    rec.sim_stderr = 0.01;
    rec.ratio = 1.25;
    rec.episodes = 1000;
    rec.seed = 42;
    rec.wall_time_s = 0.5;
    rec.lambda_minus = 0.1;
    rec.lambda_plus = 0.2;
    rec.a = 0.7;
    rec.iterations = 12;
    nlohmann::json j = nlohmann::json::parse(rec.to_json());
    CHECK(j["variant"] == "base");
    CHECK(j["dual_bound"] == 2.5);
    CHECK(j["sim_mean"] == 2.0);
    CHECK(j["ratio"] == 1.25);
    CHECK(j["episodes"] == 1000);
    CHECK(j["seed"] == 42);
    CHECK(j["solver_trace"]["lambda_minus"] == 0.1);
    CHECK(j["solver_trace"]["a"] == 0.7);
    CHECK(j["solver_trace"]["iterations"] == 12);

    ResultRecord flat;
    flat.variant = "base";
    flat.sim_mean = 0.0;
    nlohmann::json f = nlohmann::json::parse(flat.to_json());
    CHECK_FALSE(f.contains("ratio"));  // omitted when the mean is not positive
}

} // TEST_SUITE
