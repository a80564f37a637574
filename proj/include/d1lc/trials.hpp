#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace d1lc {

enum class Direction { AtLeast, AtMost };

// A statistic is "success_rate", "failure_rate", "violations", or "<agg>:<key>" with agg in
// {mean, min, max} over the per-seed values recorded under key.
struct Claim {
    std::string statistic = "success_rate";
    double threshold = 0;
    Direction direction = Direction::AtLeast;
};

struct TrialSpec {
    std::string name;
    std::string kind;
    std::map<std::string, std::string> params;
    std::size_t seeds = 1000;
    std::uint64_t first_seed = 1;
    std::vector<Claim> claims;
    // Short label for the claim being checked.
    std::string anchor;
    // Operations the trial exercises, for the coverage assertion.
    std::vector<std::string> ops;

    double param(const std::string& key, double fallback) const;
    std::string param_str(const std::string& key, const std::string& fallback) const;
    // Rate and mean claims are statistical and need at least 1000 seeds; violation counts and
    // min/max bounds are exact per seed.
    bool statistical() const;
};

struct SeedOutcome {
    bool ok = true;
    std::map<std::string, double> values;
    // Human-readable reason when ok is false.
    std::string note;
};

using TrialFn = std::function<SeedOutcome(const TrialSpec&, std::uint64_t seed)>;

struct TrialKind {
    TrialFn fn;
    // Operations every trial of this kind exercises.
    std::vector<std::string> ops;
    std::string description;
};

const std::map<std::string, TrialKind>& trial_kinds();

struct ClaimResult {
    Claim claim;
    double measured = 0;
    bool pass = false;
};

struct TrialVerdict {
    std::string name;
    std::string kind;
    std::string anchor;
    std::vector<ClaimResult> claims;
    std::size_t seeds = 0;
    std::uint64_t first_seed = 0;
    std::size_t failures = 0;
    // Seeds whose outcome was not ok, capped at 20 for the report.
    std::vector<std::uint64_t> failing_seeds;
    std::string first_failure_note;
    double millis = 0;

    bool pass() const;
};

// Runs seeds first_seed .. first_seed + seeds - 1 and evaluates every claim.
TrialVerdict run_trials(const TrialSpec& spec);

// Stanzas: "[trial <name>]" followed by key = value lines. Keys: kind, seeds, first_seed,
// anchor, ops (comma list), claim (repeatable, "<statistic> >= x" or "<statistic> <= x"),
// and param.<name> for generator parameters.
std::vector<TrialSpec> parse_manifest(std::istream& in);
std::vector<TrialSpec> load_manifest(const std::string& path);
Claim parse_claim(const std::string& text);

// Every operation of the hashing, sketch, runtime, probe, coloring and dense modules.
const std::vector<std::string>& core_operations();
// Operations a spec covers: its declared ops plus its kind's ops.
std::vector<std::string> covered_operations(const TrialSpec& spec);
std::vector<std::string> uncovered_operations(const std::vector<TrialSpec>& specs);

struct ManifestReport {
    std::vector<TrialVerdict> verdicts;
    std::vector<std::string> uncovered;
    bool pass() const;
};

ManifestReport run_manifest(const std::vector<TrialSpec>& specs);

std::string format_verdict(const TrialVerdict& v);
std::string format_manifest_report(const ManifestReport& r);

}  // namespace d1lc
