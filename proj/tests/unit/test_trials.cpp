#include "d1lc/trials.hpp"

#include <catch_amalgamated.hpp>

#include <set>
#include <sstream>

using namespace d1lc;

#ifndef D1LC_DATA_DIR
#error "D1LC_DATA_DIR must point at the data directory"
#endif

TEST_CASE("parse_claim", "[trials]") {
    const Claim a = parse_claim("success_rate >= 0.9");
    CHECK(a.statistic == "success_rate");
    CHECK(a.direction == Direction::AtLeast);
    CHECK(a.threshold == 0.9);
    const Claim b = parse_claim("max:rounds <= 8");
    CHECK(b.statistic == "max:rounds");
    CHECK(b.direction == Direction::AtMost);
    CHECK(b.threshold == 8);
    CHECK_THROWS(parse_claim("success_rate 0.9"));
}

TEST_CASE("parse_manifest", "[trials]") {
    std::istringstream in(R"(# comment
[trial alpha]
kind = hash_purity
seeds = 5
first_seed = 10
anchor = pure evaluation
claim = success_rate >= 1
param.T = 8

[trial beta]
kind = sampler
seeds = 1000
claim = mean:inside >= 0.4
claim = violations <= 0
)");
    const auto specs = parse_manifest(in);
    REQUIRE(specs.size() == 2);
    CHECK(specs[0].name == "alpha");
    CHECK(specs[0].kind == "hash_purity");
    CHECK(specs[0].seeds == 5);
    CHECK(specs[0].first_seed == 10);
    CHECK(specs[0].anchor == "pure evaluation");
    CHECK(specs[0].param("T", 0) == 8);
    CHECK(specs[1].claims.size() == 2);
    CHECK(specs[1].statistical());
    std::istringstream bad("[trial x]\nkind = hash_purity\nbogus = 1\n");
    CHECK_THROWS(parse_manifest(bad));
}

TEST_CASE("run_trials enforces seed counts", "[trials]") {
    TrialSpec s;
    s.name = "t";
    s.kind = "hash_purity";
    s.seeds = 10;
    s.claims.push_back(parse_claim("success_rate >= 1"));
    CHECK_THROWS(run_trials(s));
    s.claims = {parse_claim("violations <= 0")};
    const TrialVerdict v = run_trials(s);
    CHECK(v.pass());
    CHECK(v.seeds == 10);
    s.kind = "no_such_kind";
    CHECK_THROWS(run_trials(s));
    s.kind = "hash_purity";
    s.claims.clear();
    CHECK_THROWS(run_trials(s));
}

TEST_CASE("shipped manifest covers every core operation", "[trials]") {
    const auto specs = load_manifest(std::string(D1LC_DATA_DIR) + "/trials.manifest");
    CHECK(specs.size() >= 20);
    CHECK(uncovered_operations(specs).empty());
    std::set<std::string> names;
    for (const auto& s : specs) {
        CHECK(names.insert(s.name).second);
        CHECK(trial_kinds().count(s.kind) == 1);
        CHECK_FALSE(s.anchor.empty());
        if (s.statistical()) CHECK(s.seeds >= 1000);
    }
}

TEST_CASE("verdict formatting names the trial and outcome", "[trials]") {
    TrialSpec s;
    s.name = "fmt";
    s.kind = "hash_purity";
    s.seeds = 3;
    s.claims = {parse_claim("violations <= 0")};
    const std::string line = format_verdict(run_trials(s));
    CHECK(line.rfind("PASS", 0) == 0);
    CHECK(line.find("fmt") != std::string::npos);
}
